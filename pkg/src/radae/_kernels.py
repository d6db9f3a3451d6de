"""Numba inner loop for the per-sample combined-objective SGD step.

model.combined_loss_grads is the reference implementation; this kernel fuses
the same forward/backward/update math into explicit loops so a training step
costs what the layer sizes say it should, not what ~40 numpy call overheads
say. test_model pins the two paths against each other.

Order of operations per sample matches the reference exactly: all gradient
reads use pre-update parameters (the running dz is formed before the layer's
weights move), and updates only happen for lr > 0.
"""
from __future__ import annotations

import math

from numba import njit

import numpy as np


@njit(cache=True, inline="always")
def _sig(v):
    # stable two-branch logistic, same regime split as scipy's expit
    if v >= 0.0:
        return 1.0 / (1.0 + math.exp(-v))
    e = math.exp(v)
    return e / (1.0 + e)


@njit(cache=True)
def sgd_batch(Ws, bs, bps, M, offs, X, w_out, head_b, y, lr, clip):
    """Sequential SGD over the rows of X, updating all arrays in place.

    Ws/bs/bps: typed lists of per-layer parameters (mutated).
    M: (n, sum of in_dims) keep-masks as 0.0/1.0 floats; layer l's block
    starts at column offs[l].
    w_out/head_b: executed head's weights and 1-element bias box (mutated).
    """
    n = X.shape[0]
    J = len(Ws)
    for i in range(n):
        # forward: clean chain zs plus corrupted u/h and reconstruction per layer
        zs = [X[i]]
        us, hs, xhats = [], [], []
        for l in range(J):
            W, b, bp = Ws[l], bs[l], bps[l]
            ol = offs[l]
            zin = zs[l]
            hl, d_in = W.shape
            u = np.empty(d_in)
            for k in range(d_in):
                u[k] = zin[k] * M[i, ol + k]
            h = np.empty(hl)
            zn = np.empty(hl)
            for j in range(hl):
                su = 0.0
                sz = 0.0
                for k in range(d_in):
                    su += W[j, k] * u[k]
                    sz += W[j, k] * zin[k]
                h[j] = _sig(su + b[j])
                zn[j] = _sig(sz + b[j])
            xh = np.empty(d_in)
            for k in range(d_in):
                xh[k] = bp[k]
            for j in range(hl):
                hj = h[j]
                for k in range(d_in):
                    xh[k] += W[j, k] * hj
            for k in range(d_in):
                xh[k] = _sig(xh[k])
            us.append(u)
            hs.append(h)
            xhats.append(xh)
            zs.append(zn)

        ztop = zs[J]
        top = ztop.shape[0]
        acc = head_b[0]
        for j in range(top):
            acc += w_out[j] * ztop[j]
        ds = _sig(acc) - y
        dz = np.empty(top)
        for j in range(top):
            dz[j] = ds * w_out[j]
        if lr > 0.0:
            for j in range(top):
                w_out[j] -= lr * ds * ztop[j]
            head_b[0] -= lr * ds

        for l in range(J - 1, -1, -1):
            W, b, bp = Ws[l], bs[l], bps[l]
            ol = offs[l]
            zin, znext = zs[l], zs[l + 1]
            u, h, xh = us[l], hs[l], xhats[l]
            hl, d_in = W.shape
            dr = np.empty(d_in)
            for k in range(d_in):
                dr[k] = (xh[k] - zin[k]) / d_in
            da = np.empty(hl)
            dc = np.empty(hl)
            for j in range(hl):
                s = 0.0
                for k in range(d_in):
                    s += W[j, k] * dr[k]
                da[j] = s * h[j] * (1.0 - h[j])
                dc[j] = dz[j] * znext[j] * (1.0 - znext[j])
            if l > 0:
                # dz for the layer below, from this layer's pre-update weights
                ndz = np.zeros(d_in)
                t2 = np.zeros(d_in)
                for j in range(hl):
                    cj = dc[j]
                    aj = da[j]
                    for k in range(d_in):
                        ndz[k] += W[j, k] * cj
                        t2[k] += W[j, k] * aj
                for k in range(d_in):
                    q = xh[k]
                    if q < clip:
                        q = clip
                    elif q > 1.0 - clip:
                        q = 1.0 - clip
                    ndz[k] += M[i, ol + k] * t2[k] - math.log(q / (1.0 - q)) / d_in
                dz = ndz
            if lr > 0.0:
                for j in range(hl):
                    hj, aj, cj = h[j], da[j], dc[j]
                    for k in range(d_in):
                        W[j, k] -= lr * (hj * dr[k] + aj * u[k] + cj * zin[k])
                    b[j] -= lr * (aj + cj)
                for k in range(d_in):
                    bp[k] -= lr * dr[k]
