"""Tabular Q-learning controller over the net's structure.

State: (EMA of generative error, EMA of classification error, nu_1 = current
/ initial width of hidden layer 1), discretized onto a fixed grid. Actions:
Pool (retrain on the corrective pool), Increment (grow every hidden layer by
delta), Merge (fuse delta closest node pairs per layer). Rewards favor
falling classification error and punish widths outside [v_1, v_2].

Schedule: the first eta_1 calls always Pool, calls up to eta_2 explore
uniformly, afterwards epsilon-greedy on the learned Q values.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .episode import EpisodeBatch
from .errors import ConfigError, ContractError
from .model import (
    AdaptiveNet,
    GrowthReport,
    MergeReport,
    TrainStats,
    grow_layer,
    merge_layer,
    sgd_pass,
    train_batch,
    train_cost_s,
)
from .pools import Pools, recent_frames

POOL, INCREMENT, MERGE = "pool", "increment", "merge"
#: Fixed order; doubles as the argmax tie-break (earlier wins).
ADAPT_KINDS = (POOL, INCREMENT, MERGE)


@dataclass(frozen=True)
class AdaptAction:
    kind: str
    delta: int = 0

    def __post_init__(self):
        if self.kind not in ADAPT_KINDS:
            raise ContractError(f"unknown adaptation kind {self.kind!r}")
        if self.kind != POOL and self.delta < 1:
            raise ContractError(f"{self.kind} needs delta >= 1, got {self.delta}")


@dataclass
class ControllerState:
    l_g_ema: float
    l_c_ema: float
    nu_1: float


@dataclass(frozen=True)
class BinSpec:
    count: int
    lo: float
    hi: float

    def __post_init__(self):
        if self.count < 1 or not self.lo < self.hi:
            raise ConfigError(f"bad bin spec {self}")

    def index(self, v: float) -> int:
        i = math.floor((v - self.lo) / (self.hi - self.lo) * self.count)
        return min(max(i, 0), self.count - 1)


DEFAULT_BINS = (BinSpec(10, 0.0, 1.0), BinSpec(10, 0.0, 1.0), BinSpec(8, 0.25, 4.25))


def ema(prev: float, current: float, alpha_ema: float) -> float:
    if not 0.0 <= alpha_ema <= 1.0:
        raise ConfigError(f"alpha_ema must be in [0,1], got {alpha_ema}")
    return alpha_ema * current + (1.0 - alpha_ema) * prev


def reward(l_c_n: float, l_c_prev: float, nu_1: float,
           u: float, v_1: float, v_2: float) -> float:
    """Improvement-weighted accuracy, penalized outside the width band."""
    if not v_1 < v_2:
        raise ConfigError(f"need v_1 < v_2, got {v_1}, {v_2}")
    g = (1.0 - (l_c_n - l_c_prev)) * (1.0 - l_c_n)
    if nu_1 < v_1 or nu_1 > v_2:
        return g - abs(u - nu_1)
    return g


def discretize(state: ControllerState, bins=DEFAULT_BINS) -> tuple[int, int, int]:
    g, c, nu = bins
    return (g.index(state.l_g_ema), c.index(state.l_c_ema), nu.index(state.nu_1))


class QController:
    def __init__(self, initial_widths: list[int], delta: int = 5,
                 alpha_q: float = 0.5, gamma: float = 0.9, epsilon: float = 0.1,
                 eta_1: int = 5, eta_2: int = 30, alpha_ema: float = 0.5,
                 m: int = 15, u: float = 1.75, v_1: float = 0.5, v_2: float = 3.0,
                 bins=DEFAULT_BINS):
        if not initial_widths:
            raise ContractError("initial_widths must be nonempty")
        if not 0.0 <= alpha_q <= 1.0 or not 0.0 <= gamma < 1.0:
            raise ConfigError("alpha_q in [0,1] and gamma in [0,1) required")
        self.initial_widths = list(initial_widths)
        self.delta = delta
        self.alpha_q = alpha_q
        self.gamma = gamma
        self.epsilon = epsilon
        self.eta_1 = eta_1
        self.eta_2 = eta_2
        self.alpha_ema = alpha_ema
        self.m = m  # EMA window length; carried for the config echo, inert
        self.u = u
        self.v_1 = v_1
        self.v_2 = v_2
        self.bins = bins
        self.q_table: dict[tuple, float] = {}
        self.n = 0
        self.l_g_ema: float | None = None
        self.l_c_ema: float | None = None
        self.last_key = None
        self.last_action: AdaptAction | None = None
        self.last_l_c: float | None = None
        self.pending_stats: TrainStats | None = None

    def q(self, key, kind: str) -> float:
        return self.q_table.get((key, kind), 0.0)

    def best_kind(self, key) -> str:
        best, best_v = ADAPT_KINDS[0], self.q(key, ADAPT_KINDS[0])
        for kind in ADAPT_KINDS[1:]:
            v = self.q(key, kind)
            if v > best_v:
                best, best_v = kind, v
        return best


def observe(ctrl: QController, stats: TrainStats, widths: list[int]) -> ControllerState:
    """Fold stats into the EMAs and read off the current state triple."""
    if not widths:
        raise ContractError("widths must be nonempty")
    l_g = min(max(stats.l_g, 0.0), 1.0)
    l_c = min(max(stats.l_c, 0.0), 1.0)
    ctrl.l_g_ema = l_g if ctrl.l_g_ema is None else ema(ctrl.l_g_ema, l_g, ctrl.alpha_ema)
    ctrl.l_c_ema = l_c if ctrl.l_c_ema is None else ema(ctrl.l_c_ema, l_c, ctrl.alpha_ema)
    nu_1 = widths[0] / ctrl.initial_widths[0]
    return ControllerState(ctrl.l_g_ema, ctrl.l_c_ema, nu_1)


def choose_adaptation(ctrl: QController, state_key, rng: np.random.Generator) -> AdaptAction:
    """Phase schedule: forced Pool, then uniform exploration, then epsilon-greedy."""
    if ctrl.n <= ctrl.eta_1:
        return AdaptAction(POOL)
    if ctrl.n <= ctrl.eta_2 or rng.random() < ctrl.epsilon:
        kind = ADAPT_KINDS[rng.integers(0, len(ADAPT_KINDS))]
    else:
        kind = ctrl.best_kind(state_key)
    return AdaptAction(kind, ctrl.delta if kind != POOL else 0)


def q_update(ctrl: QController, s_prev, a_prev: AdaptAction, r: float, s_now) -> float:
    best_next = max(ctrl.q(s_now, kind) for kind in ADAPT_KINDS)
    old = ctrl.q(s_prev, a_prev.kind)
    new = (1.0 - ctrl.alpha_q) * old + ctrl.alpha_q * (r + ctrl.gamma * best_next)
    ctrl.q_table[(s_prev, a_prev.kind)] = new
    return new


def dump_q_table(ctrl: QController) -> list[tuple[int, int, int, str, float]]:
    """Rows (state_bin_g, state_bin_c, state_bin_nu, action, q_value), sorted."""
    rows = [(k[0][0], k[0][1], k[0][2], k[1], v) for k, v in ctrl.q_table.items()]
    return sorted(rows)


@dataclass
class AdaptReport:
    action: AdaptAction
    widths: list[int]
    reward: float
    stats: TrainStats
    l_c_prev: float
    nu_1: float
    state_key: tuple
    q_value: float | None
    pool_batches: int = 0
    grow_reports: list[GrowthReport] = field(default_factory=list)
    merge_reports: list[MergeReport] = field(default_factory=list)
    downgraded: bool = False
    train_cost_s: float = 0.0
    wall_train_time_s: float = 0.0


def _pool_pass(net, batches, lr, p_c, rng):
    cost = 0.0
    for b in batches:
        sgd_pass(net, b, lr, p_c, rng)
        cost += train_cost_s(net, len(b))
    return len(batches), cost


def _greedy_init_cost_s(net, delta, pool_size, epochs=10):
    flops = sum(8.0 * delta * layer.in_dim for layer in net.layers)
    return flops * pool_size * epochs / 1e9


def adapt_and_train(net: AdaptiveNet, ctrl: QController, pools: Pools,
                    batch: EpisodeBatch, lr: float, p_c: float,
                    rng: np.random.Generator) -> AdaptReport:
    """One controller step: observe, choose, mutate/pool, train on the batch.

    The Q update credits the previous (state, action) pair with this call's
    reward, so learning runs one step behind the action stream.
    """
    t0 = time.perf_counter()
    ctrl.n += 1
    # EMAs fold in the previous call's post-training stats; before any
    # training exists the state starts pessimistic (both errors at 1)
    stats_for_state = ctrl.pending_stats or TrainStats(l_g=1.0, l_c=1.0, xent=0.0)
    state = observe(ctrl, stats_for_state, net.hidden_widths())
    key = discretize(state, ctrl.bins)

    action = choose_adaptation(ctrl, key, rng)
    cost = 0.0
    report = AdaptReport(action=action, widths=[], reward=0.0,
                         stats=TrainStats(0, 0, 0), l_c_prev=0.0, nu_1=0.0,
                         state_key=key, q_value=None)

    if action.kind == INCREMENT:
        frames = recent_frames(pools)
        for l in range(1, net.depth + 1):
            report.grow_reports.append(
                grow_layer(net, l, action.delta, frames, rng, lr=lr, p_c=p_c))
        cost += _greedy_init_cost_s(net, action.delta, len(frames))
    elif action.kind == MERGE:
        merged_any = False
        for l in range(1, net.depth + 1):
            rep = merge_layer(net, l, action.delta)
            merged_any = merged_any or rep.merged
            report.merge_reports.append(rep)
        if not merged_any:
            report.downgraded = True
            source = pools.b_r if ctrl.n <= ctrl.eta_1 else pools.b_ft
            report.pool_batches, c = _pool_pass(net, source, lr, p_c, rng)
            cost += c
    else:
        source = pools.b_r if ctrl.n <= ctrl.eta_1 else pools.b_ft
        report.pool_batches, c = _pool_pass(net, source, lr, p_c, rng)
        cost += c

    stats = train_batch(net, batch, lr, p_c, rng)
    cost += train_cost_s(net, len(batch))

    widths = net.hidden_widths()
    nu_1 = widths[0] / ctrl.initial_widths[0]
    l_c_prev = stats.l_c if ctrl.last_l_c is None else ctrl.last_l_c
    r = reward(stats.l_c, l_c_prev, nu_1, ctrl.u, ctrl.v_1, ctrl.v_2)

    if ctrl.last_key is not None:
        report.q_value = q_update(ctrl, ctrl.last_key, ctrl.last_action, r, key)

    ctrl.last_key = key
    ctrl.last_action = action
    ctrl.last_l_c = stats.l_c
    ctrl.pending_stats = stats

    report.widths = widths
    report.reward = r
    report.stats = stats
    report.l_c_prev = l_c_prev
    report.nu_1 = nu_1
    report.train_cost_s = cost
    report.wall_train_time_s = time.perf_counter() - t0
    return report
