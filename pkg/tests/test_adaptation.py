"""Controller tests: EMA/reward/Q-update arithmetic oracles, phase schedule,
and the adapt_and_train integration contract."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radae.adaptation import (
    ADAPT_KINDS,
    AdaptAction,
    BinSpec,
    ControllerState,
    QController,
    adapt_and_train,
    choose_adaptation,
    discretize,
    dump_q_table,
    ema,
    observe,
    q_update,
    reward,
)
from radae.episode import EpisodeBatch
from radae.errors import ConfigError, ContractError
from radae.model import AdaptiveNet, TrainStats
from radae.pools import Pools, push_recent


def rng_of(seed):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# ema
# ---------------------------------------------------------------------------

def test_ema_limits_and_value():
    assert ema(0.7, 0.2, 1.0) == 0.2
    assert ema(0.7, 0.2, 0.0) == 0.7
    assert abs(ema(0.4, 0.2, 0.5) - 0.3) < 1e-12


def test_ema_rejects_bad_alpha():
    with pytest.raises(ConfigError):
        ema(0.5, 0.5, 1.5)


# ---------------------------------------------------------------------------
# reward (band penalty)
# ---------------------------------------------------------------------------

def test_reward_improvement_in_band():
    assert abs(reward(0.2, 0.3, 1.0, u=1.75, v_1=0.5, v_2=3.0) - 0.88) < 1e-12


def test_reward_penalty_outside_band():
    assert abs(reward(0.2, 0.3, 4.0, u=1.75, v_1=0.5, v_2=3.0) - (-1.37)) < 1e-12


def test_reward_perfect_classifier():
    assert abs(reward(0.0, 0.0, 1.0, u=1.75, v_1=0.5, v_2=3.0) - 1.0) < 1e-12


@given(
    l_c=st.floats(0, 1), l_prev=st.floats(0, 1),
    nu=st.floats(0.5, 3.0),
)
@settings(max_examples=60, deadline=None)
def test_reward_reduces_to_g_inside_band(l_c, l_prev, nu):
    g = (1.0 - (l_c - l_prev)) * (1.0 - l_c)
    assert reward(l_c, l_prev, nu, 1.75, 0.5, 3.0) == g


# ---------------------------------------------------------------------------
# observe / discretize
# ---------------------------------------------------------------------------

def ctrl_of(**kw):
    kw.setdefault("initial_widths", [64, 48, 32])
    return QController(**kw)


def test_observe_nu_ratio():
    ctrl = ctrl_of()
    s = observe(ctrl, TrainStats(0.5, 0.5, 0.5), [64, 48, 32])
    assert s.nu_1 == 1.0
    s = observe(ctrl, TrainStats(0.5, 0.5, 0.5), [80, 48, 32])
    assert s.nu_1 == 1.25


def test_observe_ema_chain():
    ctrl = ctrl_of(alpha_ema=0.5)
    observe(ctrl, TrainStats(0.0, 0.4, 0.0), [64, 48, 32])
    s = observe(ctrl, TrainStats(0.0, 0.2, 0.0), [64, 48, 32])
    assert abs(s.l_c_ema - 0.3) < 1e-12


def test_observe_clamps_generative_loss():
    ctrl = ctrl_of()
    s = observe(ctrl, TrainStats(3.7, 0.5, 0.5), [64, 48, 32])
    assert s.l_g_ema == 1.0


def test_discretize_oracles():
    bins = (BinSpec(10, 0, 1), BinSpec(10, 0, 1), BinSpec(8, 0.25, 4.25))
    assert discretize(ControllerState(0.0, 0.0, 1.0), bins)[1] == 0
    assert discretize(ControllerState(0.49, 0.49, 1.0), bins)[0] == 4
    assert discretize(ControllerState(0.0, 0.0, 0.1), bins)[2] == 0
    assert discretize(ControllerState(1.0, 1.0, 99.0), bins) == (9, 9, 7)


# ---------------------------------------------------------------------------
# choose_adaptation phases
# ---------------------------------------------------------------------------

def test_choose_forced_pool_early():
    ctrl = ctrl_of()
    ctrl.n = 3
    for seed in range(20):
        assert choose_adaptation(ctrl, (0, 0, 1), rng_of(seed)).kind == "pool"


def test_choose_uniform_midphase_frequencies():
    ctrl = ctrl_of()
    ctrl.n = 10
    rng = rng_of(99)
    counts = {k: 0 for k in ADAPT_KINDS}
    for _ in range(3000):
        counts[choose_adaptation(ctrl, (0, 0, 1), rng).kind] += 1
    for k in ADAPT_KINDS:
        assert 0.30 <= counts[k] / 3000 <= 0.37, counts


def test_choose_greedy_argmax():
    ctrl = ctrl_of(epsilon=0.0)
    ctrl.n = 40
    key = (1, 2, 3)
    ctrl.q_table[(key, "increment")] = 0.9
    act = choose_adaptation(ctrl, key, rng_of(0))
    assert act.kind == "increment" and act.delta == 5


def test_choose_greedy_tiebreak_order():
    ctrl = ctrl_of(epsilon=0.0)
    ctrl.n = 40
    assert choose_adaptation(ctrl, (0, 0, 0), rng_of(0)).kind == "pool"
    ctrl.q_table[((0, 0, 0), "increment")] = 0.4
    ctrl.q_table[((0, 0, 0), "merge")] = 0.4
    assert choose_adaptation(ctrl, (0, 0, 0), rng_of(0)).kind == "increment"


# ---------------------------------------------------------------------------
# q_update
# ---------------------------------------------------------------------------

def test_q_update_oracle():
    ctrl = ctrl_of(alpha_q=0.5, gamma=0.9)
    new = q_update(ctrl, (0, 0, 0), AdaptAction("pool"), 1.0, (1, 1, 1))
    assert abs(new - 0.5) < 1e-12


def test_q_update_alpha_zero_keeps_value():
    ctrl = ctrl_of(alpha_q=0.0)
    ctrl.q_table[((0, 0, 0), "pool")] = 0.37
    new = q_update(ctrl, (0, 0, 0), AdaptAction("pool"), 5.0, (1, 1, 1))
    assert new == 0.37


def test_q_update_full_replacement():
    ctrl = ctrl_of(alpha_q=1.0, gamma=0.0)
    new = q_update(ctrl, (0, 0, 0), AdaptAction("pool"), 0.88, (1, 1, 1))
    assert abs(new - 0.88) < 1e-12


@given(
    old=st.floats(-2, 2), r=st.floats(-2, 2), nxt=st.floats(-2, 2),
    alpha=st.floats(0, 1),
)
@settings(max_examples=60, deadline=None)
def test_q_update_is_convex_combination(old, r, nxt, alpha):
    ctrl = ctrl_of(alpha_q=alpha, gamma=0.9)
    ctrl.q_table[((0, 0, 0), "merge")] = old
    ctrl.q_table[((1, 1, 1), "pool")] = nxt
    new = q_update(ctrl, (0, 0, 0), AdaptAction("merge", 5), r, (1, 1, 1))
    target = r + 0.9 * max(nxt, 0.0)
    lo, hi = min(old, target), max(old, target)
    assert lo - 1e-9 <= new <= hi + 1e-9


# ---------------------------------------------------------------------------
# adapt_and_train
# ---------------------------------------------------------------------------

def mk_batch(episode, seed, d=32, label=1, action="S", n=5):
    rng = rng_of(seed)
    frames = [(rng.random(d) > 0.5).astype(float) for _ in range(n)]
    return EpisodeBatch(episode=episode, action=action, frames=frames, label=label)


def forced(kind, widths, d=32, delta=5):
    """Controller rigged to pick `kind` on its first call."""
    ctrl = QController(initial_widths=widths, delta=delta,
                       epsilon=0.0, eta_1=0, eta_2=0)
    key = (9, 9, 1)  # pessimistic start state at nu_1 = 1
    ctrl.q_table[(key, kind)] = 10.0
    return ctrl


def test_adapt_increment_grows_every_layer():
    net = AdaptiveNet(32, [64, 48, 32], rng=rng_of(1))
    ctrl = forced("increment", [64, 48, 32])
    pools = Pools(tau=100)
    rep = adapt_and_train(net, ctrl, pools, mk_batch(0, 2), 0.01, 0.15, rng_of(3))
    assert rep.action.kind == "increment"
    assert net.hidden_widths() == [69, 53, 37]
    assert rep.widths == [69, 53, 37]
    net.validate()


def test_adapt_merge_shrinks_every_layer():
    net = AdaptiveNet(32, [64, 48, 32], rng=rng_of(4))
    ctrl = forced("merge", [64, 48, 32])
    pools = Pools(tau=100)
    rep = adapt_and_train(net, ctrl, pools, mk_batch(0, 5), 0.01, 0.15, rng_of(6))
    assert rep.action.kind == "merge"
    assert net.hidden_widths() == [59, 43, 27]
    assert not rep.downgraded
    net.validate()


def test_adapt_pool_keeps_widths():
    net = AdaptiveNet(32, [8, 6], rng=rng_of(7))
    ctrl = QController(initial_widths=[8, 6], delta=2)  # n=1 <= eta_1: pool
    pools = Pools(tau=100)
    push_recent(pools, mk_batch(0, 8))
    rep = adapt_and_train(net, ctrl, pools, mk_batch(1, 9), 0.01, 0.15, rng_of(10))
    assert rep.action.kind == "pool"
    assert net.hidden_widths() == [8, 6]
    assert rep.pool_batches == 1  # early phase pools over B_r
    net.validate()


def test_adapt_merge_downgrades_when_too_narrow():
    net = AdaptiveNet(32, [5], rng=rng_of(11))
    ctrl = forced("merge", [5], delta=2)
    pools = Pools(tau=100)
    rep = adapt_and_train(net, ctrl, pools, mk_batch(0, 12), 0.01, 0.15, rng_of(13))
    assert rep.action.kind == "merge" and rep.downgraded
    assert net.hidden_widths() == [5]
    net.validate()


def test_adapt_reward_recomputable_from_report():
    net = AdaptiveNet(32, [8, 6], rng=rng_of(14))
    ctrl = QController(initial_widths=[8, 6], delta=2)
    pools = Pools(tau=100)
    rng = rng_of(15)
    for i in range(6):
        rep = adapt_and_train(net, ctrl, pools, mk_batch(i, 20 + i), 0.05, 0.15, rng)
        expect = reward(rep.stats.l_c, rep.l_c_prev, rep.nu_1,
                        ctrl.u, ctrl.v_1, ctrl.v_2)
        assert rep.reward == expect


def test_adapt_q_update_starts_on_second_call():
    net = AdaptiveNet(32, [8, 6], rng=rng_of(16))
    ctrl = QController(initial_widths=[8, 6], delta=2)
    pools = Pools(tau=100)
    rng = rng_of(17)
    rep1 = adapt_and_train(net, ctrl, pools, mk_batch(0, 30), 0.05, 0.15, rng)
    assert rep1.q_value is None and ctrl.q_table == {}
    rep2 = adapt_and_train(net, ctrl, pools, mk_batch(1, 31), 0.05, 0.15, rng)
    assert rep2.q_value is not None and len(ctrl.q_table) == 1


def test_adapt_long_run_keys_stay_on_grid():
    net = AdaptiveNet(16, [6, 4], rng=rng_of(18))
    ctrl = QController(initial_widths=[6, 4], delta=1, eta_1=2, eta_2=6)
    pools = Pools(tau=60)
    rng = rng_of(19)
    prev = None
    for i in range(40):
        batch = mk_batch(i, 100 + i, d=16, label=int(rng.random() > 0.3))
        rep = adapt_and_train(net, ctrl, pools, batch, 0.05, 0.15, rng)
        push_recent(pools, batch)
        net.validate()
        prev = batch
    for (key, kind), v in ctrl.q_table.items():
        g, c, nu = key
        assert 0 <= g < 10 and 0 <= c < 10 and 0 <= nu < 8
        assert kind in ADAPT_KINDS and np.isfinite(v)
    rows = dump_q_table(ctrl)
    assert rows == sorted(rows) and len(rows) == len(ctrl.q_table)


def test_adapt_action_validation():
    with pytest.raises(ContractError):
        AdaptAction("grow")
    with pytest.raises(ContractError):
        AdaptAction("merge", 0)
