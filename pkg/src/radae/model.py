"""Stacked denoising autoencoder with mutable widths and one sigmoid head per action.

The net is a chain of tied-weight autoencoder layers (decode = W.T) topped by
K single-unit sigmoid heads, one per discrete action. Training follows two
objectives at once: every layer denoises its own local input (binary
cross-entropy against the clean activation below it) and the head of the
executed action classifies safe/collided. Structural mutations (grow_layer /
merge_layer) change hidden widths in place while preserving what the old
nodes computed.

All math is float64 numpy; per-sample SGD, plain (no momentum).
"""
from __future__ import annotations

import struct
import time
import weakref
from dataclasses import dataclass, field

import numpy as np
from numba.typed import List as TypedList
from scipy.special import expit, logit

from ._kernels import sgd_batch
from .episode import ACTIONS, EpisodeBatch
from .errors import ConfigError, ContractError

#: Probabilities are clamped into [CLIP, 1-CLIP] before any log.
CLIP = 1e-7

#: Nominal throughput used to convert flop counts into the deterministic
#: "seconds" written to CSV logs (see EpisodeRecord).
FLOPS_PER_SECOND = 1e9

VARIANTS = ("radae", "sdae", "lr")


def sigmoid(s):
    return expit(s)  # single ufunc; this sits on the per-sample hot path


def sigmoid_affine(W: np.ndarray, x: np.ndarray, b: np.ndarray) -> np.ndarray:
    """sig(W x + b); raises ContractError on shape mismatch."""
    W = np.asarray(W, dtype=float)
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    if W.ndim != 2 or W.shape[1] != x.shape[0] or W.shape[0] != b.shape[0]:
        raise ContractError(
            f"shape mismatch: W {W.shape}, x {x.shape}, b {b.shape}"
        )
    return sigmoid(W @ x + b)


def corrupt(x: np.ndarray, p_c: float, rng: np.random.Generator) -> np.ndarray:
    """Zero each component independently with probability p_c (masking noise)."""
    if not 0.0 <= p_c <= 1.0:
        raise ConfigError(f"corruption level must be in [0,1], got {p_c}")
    mask = rng.random(x.shape[0]) >= p_c
    return x * mask


def generative_loss(x: np.ndarray, x_hat: np.ndarray) -> float:
    """Per-pixel mean binary cross-entropy of a reconstruction (nats/pixel)."""
    xh = x_hat.clip(CLIP, 1.0 - CLIP)
    return float(-(x * np.log(xh) + (1.0 - x) * np.log(1.0 - xh)).mean())


def discriminative_loss(y: int, p: float) -> float:
    """Binary cross-entropy of one head output against the episode label."""
    pc = min(max(p, CLIP), 1.0 - CLIP)
    return -(y * np.log(pc) + (1 - y) * np.log(1.0 - pc))


@dataclass
class AELayer:
    """One autoencoder layer: encode h = sig(Wx+b), decode x_hat = sig(W'h + b')."""

    W: np.ndarray        # (H, d_in)
    b: np.ndarray        # (H,)
    b_prime: np.ndarray  # (d_in,)

    @property
    def width(self) -> int:
        return self.W.shape[0]

    @property
    def in_dim(self) -> int:
        return self.W.shape[1]


@dataclass
class ActionHead:
    w_out: np.ndarray  # (H_top,)
    b_out: float = 0.0


@dataclass
class TrainStats:
    """Post-update errors on a batch: generative (layer 1), 0-1, and cross-entropy."""

    l_g: float
    l_c: float
    xent: float


@dataclass
class GrowthReport:
    layer: int
    old_width: int
    new_width: int
    pool_frames: int
    pre_loss: float | None
    post_loss: float | None


@dataclass
class MergeReport:
    layer: int
    old_width: int
    new_width: int
    merged: bool
    pairs: list[tuple[int, int]] = field(default_factory=list)


def _init_matrix(rng, rows, cols):
    bound = 1.0 / np.sqrt(cols)
    return rng.uniform(-bound, bound, size=(rows, cols))


class AdaptiveNet:
    """Stacked denoising autoencoder with K per-action heads and mutable widths.

    widths=[] builds the J=0 logistic-regression variant (heads directly on the
    input vector).
    """

    def __init__(self, input_dim: int, widths: list[int], variant: str = "radae",
                 rng: np.random.Generator | None = None):
        if variant not in VARIANTS:
            raise ConfigError(f"unknown variant {variant!r}")
        if input_dim < 1 or any(w < 1 for w in widths):
            raise ContractError("input_dim and all widths must be >= 1")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.variant = variant
        self.input_dim = input_dim
        self.initial_widths = list(widths)
        self.layers: list[AELayer] = []
        d = input_dim
        for h in widths:
            self.layers.append(AELayer(
                W=_init_matrix(rng, h, d),
                b=np.zeros(h),
                b_prime=np.zeros(d),
            ))
            d = h
        top = widths[-1] if widths else input_dim
        bound = 1.0 / np.sqrt(top)
        self.heads = {a: ActionHead(w_out=rng.uniform(-bound, bound, size=top))
                      for a in ACTIONS}

    @property
    def depth(self) -> int:
        return len(self.layers)

    def hidden_widths(self) -> list[int]:
        return [layer.width for layer in self.layers]

    def top_dim(self) -> int:
        return self.layers[-1].width if self.layers else self.input_dim

    def encode(self, x: np.ndarray) -> np.ndarray:
        """Clean forward pass to the top hidden activation (no corruption)."""
        z = x
        for layer in self.layers:
            z = sigmoid(layer.W @ z + layer.b)
        return z

    def encode_upto(self, x: np.ndarray, l: int) -> np.ndarray:
        """Clean activation feeding layer l (1-based): z_{l-1}."""
        z = x
        for layer in self.layers[:l - 1]:
            z = sigmoid(layer.W @ z + layer.b)
        return z

    def validate(self):
        """Check dimension chaining and finiteness; raises ContractError."""
        d = self.input_dim
        for i, layer in enumerate(self.layers):
            if layer.W.shape != (layer.width, d):
                raise ContractError(f"layer {i + 1}: W shape {layer.W.shape}, expected ({layer.width}, {d})")
            if layer.b.shape != (layer.width,) or layer.b_prime.shape != (d,):
                raise ContractError(f"layer {i + 1}: bias shapes off")
            for arr in (layer.W, layer.b, layer.b_prime):
                if not np.all(np.isfinite(arr)):
                    raise ContractError(f"layer {i + 1}: non-finite parameter")
            d = layer.width
        top = self.top_dim()
        if set(self.heads) != set(ACTIONS):
            raise ContractError("heads must cover exactly the action set")
        for a, head in self.heads.items():
            if head.w_out.shape != (top,):
                raise ContractError(f"head {a}: length {head.w_out.shape[0]}, expected {top}")
            if not (np.all(np.isfinite(head.w_out)) and np.isfinite(head.b_out)):
                raise ContractError(f"head {a}: non-finite parameter")


def reconstruct(layer: AELayer, x_corrupt: np.ndarray) -> np.ndarray:
    """Denoising round trip of one layer: sig(W.T sig(W x~ + b) + b')."""
    h = sigmoid_affine(layer.W, x_corrupt, layer.b)
    return sigmoid(layer.W.T @ h + layer.b_prime)


def head_probability(net: AdaptiveNet, action: str, x: np.ndarray) -> float:
    """P(executing `action` from view x is collision-free), clean forward pass."""
    if action not in ACTIONS:
        raise ContractError(f"unknown action {action!r}")
    head = net.heads[action]
    z = net.encode(np.asarray(x, dtype=float))
    return float(sigmoid(head.w_out @ z + head.b_out))


def misclassification_rate(net: AdaptiveNet, batch: EpisodeBatch) -> float:
    """Fraction of frames where the 0.5-thresholded head disagrees with the label."""
    wrong = 0
    for x in batch.frames:
        pred = 1 if head_probability(net, batch.action, x) >= 0.5 else 0
        wrong += pred != batch.label
    return wrong / len(batch)


# ---------------------------------------------------------------------------
# Training: combined objective, gradients, SGD
# ---------------------------------------------------------------------------

def sample_masks(net: AdaptiveNet, p_c: float, rng: np.random.Generator) -> list[np.ndarray]:
    """One keep-mask per layer's local input (True = keep, False = zeroed)."""
    if not 0.0 <= p_c <= 1.0:
        raise ConfigError(f"corruption level must be in [0,1], got {p_c}")
    return [rng.random(layer.in_dim) >= p_c for layer in net.layers]


def _forward(net, x, masks):
    """Clean + denoising paths; returns (z, u, h, xhat) caches per layer."""
    z = [x]
    u, h, xhat = [], [], []
    for layer, m in zip(net.layers, masks):
        zin = z[-1]
        ul = zin * m
        hl = sigmoid(layer.W @ ul + layer.b)
        u.append(ul)
        h.append(hl)
        xhat.append(sigmoid(layer.W.T @ hl + layer.b_prime))
        z.append(sigmoid(layer.W @ zin + layer.b))
    return z, u, h, xhat


def combined_loss(net: AdaptiveNet, x: np.ndarray, y: int, action: str,
                  masks: list[np.ndarray]) -> float:
    """Sum of per-layer local reconstruction losses plus the head's BCE."""
    z, _, _, xhat = _forward(net, x, masks)
    total = 0.0
    for l in range(net.depth):
        total += generative_loss(z[l], xhat[l])
    head = net.heads[action]
    p = float(sigmoid(head.w_out @ z[-1] + head.b_out))
    return total + float(discriminative_loss(y, p))


@dataclass
class Grads:
    dW: list[np.ndarray]
    db: list[np.ndarray]
    dbp: list[np.ndarray]
    dw_out: np.ndarray
    db_out: float


def combined_loss_grads(net: AdaptiveNet, x: np.ndarray, y: int, action: str,
                        masks: list[np.ndarray]) -> tuple[float, Grads]:
    """Loss and analytic gradients of every layer plus the trained head."""
    z, u, h, xhat = _forward(net, x, masks)
    J = net.depth
    loss = 0.0
    for l in range(J):
        loss += generative_loss(z[l], xhat[l])

    head = net.heads[action]
    s = float(head.w_out @ z[-1] + head.b_out)
    p = sigmoid(s)
    loss += float(discriminative_loss(y, p))

    ds = p - y
    dw_out = ds * z[-1]
    db_out = ds
    dz = ds * head.w_out  # running dL/dz_l, starts at l = J

    dW = [None] * J
    db = [None] * J
    dbp = [None] * J
    for l in range(J - 1, -1, -1):
        layer = net.layers[l]
        zin = z[l]
        d_in = zin.shape[0]
        # local denoising reconstruction
        dr = (xhat[l] - zin) / d_in
        dh = layer.W @ dr
        da = dh * h[l] * (1.0 - h[l])
        # clean path coming down from layers above / the head
        dc = dz * z[l + 1] * (1.0 - z[l + 1])
        gW = h[l][:, None] * dr + da[:, None] * u[l] + dc[:, None] * zin
        gb = da + dc
        gbp = dr
        dW[l], db[l], dbp[l] = gW, gb, gbp
        if l > 0:
            target_term = -logit(xhat[l].clip(CLIP, 1.0 - CLIP)) / d_in
            dz = layer.W.T @ dc + masks[l] * (layer.W.T @ da) + target_term
    return loss, Grads(dW, db, dbp, dw_out, db_out)


def _apply_grads(net, action, grads, lr):
    for layer, gW, gb, gbp in zip(net.layers, grads.dW, grads.db, grads.dbp):
        layer.W -= lr * gW
        layer.b -= lr * gb
        layer.b_prime -= lr * gbp
    head = net.heads[action]
    head.w_out -= lr * grads.dw_out
    head.b_out -= lr * grads.db_out


#: Typed-list views of each net's layer arrays, for the numba kernel. Keyed
#: weakly by net; entries must be dropped whenever layer arrays are rebound
#: (grow_layer / merge_layer), else the kernel trains stale buffers.
_PARAM_LISTS: weakref.WeakKeyDictionary = weakref.WeakKeyDictionary()


def _typed_params(net):
    cached = _PARAM_LISTS.get(net)
    if cached is None:
        Ws, bs, bps = TypedList(), TypedList(), TypedList()
        for layer in net.layers:
            Ws.append(layer.W)
            bs.append(layer.b)
            bps.append(layer.b_prime)
        dims = [layer.in_dim for layer in net.layers]
        offs = np.cumsum([0] + dims[:-1]).astype(np.int64)
        _PARAM_LISTS[net] = cached = (Ws, bs, bps, offs, sum(dims))
    return cached


def predict_cost_s(net: AdaptiveNet, n_frames: int = 1) -> float:
    """Deterministic cost of n_frames clean forward passes, in model seconds.

    Flop count divided by a fixed nominal rate; this is what the CSV time
    columns carry so that logs are reproducible across machines. Wall-clock
    times are tracked separately.
    """
    per_frame = sum(2.0 * layer.width * layer.in_dim for layer in net.layers)
    per_frame += 2.0 * net.top_dim()
    return per_frame * n_frames / FLOPS_PER_SECOND


def train_cost_s(net: AdaptiveNet, n_samples: int) -> float:
    """Deterministic cost of n_samples combined-objective SGD steps, in model seconds."""
    per_sample = sum(8.0 * layer.width * layer.in_dim for layer in net.layers)
    per_sample += 4.0 * net.top_dim()
    return per_sample * n_samples / FLOPS_PER_SECOND


def layer_generative_loss(net: AdaptiveNet, l: int, x: np.ndarray) -> float:
    """Clean-input reconstruction loss of layer l (1-based) for one frame."""
    zin = net.encode_upto(x, l)
    return generative_loss(zin, reconstruct(net.layers[l - 1], zin))


def sgd_pass(net: AdaptiveNet, batch: EpisodeBatch, lr: float, p_c: float,
             rng: np.random.Generator) -> None:
    """One per-sample SGD pass over the batch; only the executed action's head moves.

    No evaluation afterwards: replay loops call this directly since they
    discard the stats, and the clean forward pass is not free.
    """
    if len(batch) == 0:
        raise ContractError("empty batch")
    if lr < 0:
        raise ConfigError(f"learning rate must be >= 0, got {lr}")
    if not 0.0 <= p_c <= 1.0:
        raise ConfigError(f"corruption level must be in [0,1], got {p_c}")
    for x in batch.frames:
        if x.shape[0] != net.input_dim:
            raise ContractError(f"frame dim {x.shape[0]} != net input dim {net.input_dim}")
    if net.depth == 0:
        # heads-on-input variant: no recon terms, plain numpy is already cheap
        for x in batch.frames:
            _, grads = combined_loss_grads(net, x, batch.label, batch.action, [])
            if lr > 0.0:
                _apply_grads(net, batch.action, grads, lr)
        return

    n = len(batch)
    X = np.asarray(batch.frames, dtype=float)
    # one draw covers every layer of every sample; the double stream is
    # consumed in the same order sample_masks would, sample-major
    Ws, bs, bps, offs, total = _typed_params(net)
    M = (rng.random(n * total).reshape(n, total) >= p_c).astype(float)
    head = net.heads[batch.action]
    hb = np.array([head.b_out])
    sgd_batch(Ws, bs, bps, M, offs, X, head.w_out, hb, float(batch.label), lr, CLIP)
    head.b_out = float(hb[0])


def train_batch(net: AdaptiveNet, batch: EpisodeBatch, lr: float, p_c: float,
                rng: np.random.Generator) -> TrainStats:
    """sgd_pass plus post-update stats on the same batch, clean forward passes
    (corruption is train-time only)."""
    sgd_pass(net, batch, lr, p_c, rng)
    return batch_stats(net, batch)


def batch_stats(net: AdaptiveNet, batch: EpisodeBatch) -> TrainStats:
    """Clean-pass stats: layer-1 generative loss, 0-1 rate, head cross-entropy.

    Whole-batch matrix ops; runs after every training pass, so it shares the
    hot path with train_batch.
    """
    if len(batch) == 0:
        raise ContractError("empty batch")
    X = np.asarray(batch.frames, dtype=float)  # (n, d)
    Z = X
    gen = 0.0
    if net.depth:
        first = net.layers[0]
        Z = sigmoid(X @ first.W.T + first.b)
        XH = sigmoid(Z @ first.W + first.b_prime).clip(CLIP, 1.0 - CLIP)
        gen = float(-(X * np.log(XH) + (1.0 - X) * np.log(1.0 - XH)).mean())
        for layer in net.layers[1:]:
            Z = sigmoid(Z @ layer.W.T + layer.b)
    head = net.heads[batch.action]
    p = sigmoid(Z @ head.w_out + head.b_out)
    pc = p.clip(CLIP, 1.0 - CLIP)
    y = batch.label
    xent = float(-(y * np.log(pc) + (1 - y) * np.log(1.0 - pc)).mean())
    wrong = float(((p >= 0.5) != y).mean())
    return TrainStats(l_g=gen, l_c=wrong, xent=xent)


# ---------------------------------------------------------------------------
# Structural mutations
# ---------------------------------------------------------------------------

def _pool_matrix(pool_frames) -> np.ndarray | None:
    if pool_frames is None:
        return None
    mat = np.asarray(list(pool_frames), dtype=float)
    return mat if mat.size else None


def _layer_pool_loss(net, l, Z):
    """Mean clean reconstruction loss of layer l over local inputs Z (n, d_in)."""
    layer = net.layers[l - 1]
    H = sigmoid(Z @ layer.W.T + layer.b)
    XH = np.clip(sigmoid(H @ layer.W + layer.b_prime), CLIP, 1.0 - CLIP)
    return float(-np.mean(Z * np.log(XH) + (1.0 - Z) * np.log(1.0 - XH)))


def grow_layer(net: AdaptiveNet, l: int, delta: int, pool_frames,
               rng: np.random.Generator, lr: float = 0.1, p_c: float = 0.15,
               epochs: int = 10, chunk: int = 32) -> GrowthReport:
    """Add delta nodes to hidden layer l (1-based) and greedily initialize them.

    The consumer (layer l+1, or every head when l is the top layer) gains
    matching input columns with small random values; everything pre-existing
    is left bit-identical. The new rows alone then train for `epochs` passes
    over the recent pool on layer-l local denoising reconstruction.
    """
    if not 1 <= l <= net.depth:
        raise ContractError(f"layer index {l} out of range 1..{net.depth}")
    if delta < 1:
        raise ContractError("delta must be >= 1")
    layer = net.layers[l - 1]
    old_width = layer.width
    new_width = old_width + delta

    pool = _pool_matrix(pool_frames)
    Z = None
    pre_loss = post_loss = None
    if pool is not None:
        Z = pool if l == 1 else np.apply_along_axis(lambda f: net.encode_upto(f, l), 1, pool)
        pre_loss = _layer_pool_loss(net, l, Z)

    layer.W = np.vstack([layer.W, _init_matrix(rng, delta, layer.in_dim)])
    layer.b = np.concatenate([layer.b, np.zeros(delta)])

    bound = 1.0 / np.sqrt(new_width)
    if l == net.depth:
        for a in ACTIONS:
            head = net.heads[a]
            head.w_out = np.concatenate([head.w_out, rng.uniform(-bound, bound, delta)])
    else:
        nxt = net.layers[l]
        nxt.W = np.hstack([nxt.W, rng.uniform(-bound, bound, (nxt.width, delta))])
        nxt.b_prime = np.concatenate([nxt.b_prime, np.zeros(delta)])

    if Z is not None:
        _greedy_init(layer, old_width, Z, p_c=p_c, rng=rng, lr=lr,
                     epochs=epochs, chunk=chunk)
        post_loss = _layer_pool_loss(net, l, Z)

    _PARAM_LISTS.pop(net, None)
    return GrowthReport(layer=l, old_width=old_width, new_width=new_width,
                        pool_frames=0 if Z is None else Z.shape[0],
                        pre_loss=pre_loss, post_loss=post_loss)


def _greedy_init(layer, old_width, Z, p_c, rng, lr, epochs, chunk):
    """SGD on the new rows only; old rows, biases and decode bias stay frozen."""
    d_in = layer.in_dim
    n = Z.shape[0]
    for _ in range(epochs):
        for start in range(0, n, chunk):
            B = Z[start:start + chunk]
            U = B * (rng.random(B.shape) >= p_c)
            H = sigmoid(U @ layer.W.T + layer.b)
            XH = sigmoid(H @ layer.W + layer.b_prime)
            # summed per-sample gradients (each sample's loss is a per-pixel mean),
            # matching train_batch's normalization
            dR = (XH - B) / d_in
            dH = dR @ layer.W.T
            dA = dH * H * (1.0 - H)
            gW = H.T @ dR + dA.T @ U
            gb = dA.sum(axis=0)
            layer.W[old_width:] -= lr * gW[old_width:]
            layer.b[old_width:] -= lr * gb[old_width:]


def merge_layer(net: AdaptiveNet, l: int, delta: int, h_min: int = 4) -> MergeReport:
    """Fuse the delta closest node pairs of layer l: mean incoming, summed outgoing.

    Refuses (merged=False, widths untouched) when the layer would drop below
    2*delta + h_min nodes; callers treat a refusal as a Pool.
    """
    if not 1 <= l <= net.depth:
        raise ContractError(f"layer index {l} out of range 1..{net.depth}")
    if delta < 1:
        raise ContractError("delta must be >= 1")
    layer = net.layers[l - 1]
    H = layer.width
    if H < 2 * delta + h_min:
        return MergeReport(layer=l, old_width=H, new_width=H, merged=False)

    feat = np.hstack([layer.W, layer.b[:, None]])
    sq = np.sum(feat * feat, axis=1)
    dists = sq[:, None] + sq[None, :] - 2.0 * (feat @ feat.T)
    order = sorted(
        ((max(dists[i, j], 0.0), i, j) for i in range(H) for j in range(i + 1, H)),
        key=lambda t: (t[0], t[1], t[2]),
    )
    used = set()
    pairs = []
    for _, i, j in order:
        if i in used or j in used:
            continue
        pairs.append((i, j))
        used.update((i, j))
        if len(pairs) == delta:
            break

    drop = []
    for i, j in pairs:
        layer.W[i] = 0.5 * (layer.W[i] + layer.W[j])
        layer.b[i] = 0.5 * (layer.b[i] + layer.b[j])
        if l == net.depth:
            for a in ACTIONS:
                w = net.heads[a].w_out
                w[i] += w[j]
        else:
            nxt = net.layers[l]
            nxt.W[:, i] += nxt.W[:, j]
        drop.append(j)

    keep = np.setdiff1d(np.arange(H), drop)
    layer.W = layer.W[keep]
    layer.b = layer.b[keep]
    if l == net.depth:
        for a in ACTIONS:
            net.heads[a].w_out = net.heads[a].w_out[keep]
    else:
        nxt = net.layers[l]
        # column indexing yields an F-ordered copy; the train kernel wants C
        nxt.W = np.ascontiguousarray(nxt.W[:, keep])
        nxt.b_prime = nxt.b_prime[keep]

    _PARAM_LISTS.pop(net, None)
    return MergeReport(layer=l, old_width=H, new_width=H - delta, merged=True,
                       pairs=pairs)


# ---------------------------------------------------------------------------
# Snapshot serialization: flat binary container, little-endian throughout
# ---------------------------------------------------------------------------
# Layout: magic "RADA" | u32 version(=1) | u32 variant (0 radae, 1 sdae, 2 lr)
#         | u32 d | u32 J | u32 K | J x u32 widths | J x u32 initial widths
#         | per layer: W row-major f64, b f64, b_prime f64
#         | per head in L,S,R order: w_out f64, b_out f64

MAGIC = b"RADA"
SNAPSHOT_VERSION = 1


def save_net(net: AdaptiveNet, path) -> None:
    variant_code = VARIANTS.index(net.variant)
    widths = net.hidden_widths()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<5I", SNAPSHOT_VERSION, variant_code, net.input_dim,
                            net.depth, len(ACTIONS)))
        f.write(struct.pack(f"<{len(widths)}I", *widths) if widths else b"")
        iw = net.initial_widths
        f.write(struct.pack(f"<{len(iw)}I", *iw) if iw else b"")
        for layer in net.layers:
            f.write(layer.W.astype("<f8").tobytes())
            f.write(layer.b.astype("<f8").tobytes())
            f.write(layer.b_prime.astype("<f8").tobytes())
        for a in ACTIONS:
            head = net.heads[a]
            f.write(head.w_out.astype("<f8").tobytes())
            f.write(struct.pack("<d", head.b_out))


def load_net(path) -> AdaptiveNet:
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise ContractError(f"{path}: not a net snapshot")
        version, variant_code, d, J, K = struct.unpack("<5I", f.read(20))
        if version != SNAPSHOT_VERSION:
            raise ContractError(f"{path}: unsupported snapshot version {version}")
        if K != len(ACTIONS):
            raise ContractError(f"{path}: expected {len(ACTIONS)} heads, got {K}")
        widths = list(struct.unpack(f"<{J}I", f.read(4 * J))) if J else []
        initial = list(struct.unpack(f"<{J}I", f.read(4 * J))) if J else []

        def read_f64(n):
            return np.frombuffer(f.read(8 * n), dtype="<f8").astype(float)

        net = AdaptiveNet.__new__(AdaptiveNet)
        net.variant = VARIANTS[variant_code]
        net.input_dim = d
        net.initial_widths = initial
        net.layers = []
        din = d
        for h in widths:
            W = read_f64(h * din).reshape(h, din)
            b = read_f64(h)
            bp = read_f64(din)
            net.layers.append(AELayer(W=W, b=b, b_prime=bp))
            din = h
        top = widths[-1] if widths else d
        net.heads = {}
        for a in ACTIONS:
            w_out = read_f64(top)
            (b_out,) = struct.unpack("<d", f.read(8))
            net.heads[a] = ActionHead(w_out=w_out, b_out=b_out)
    net.validate()
    return net
