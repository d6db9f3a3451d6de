"""The closed self-supervised loop.

Each episode: execute the pending action, label every captured frame with
the collision outcome, train the executed action's head (with structural
adaptation for the radae variant), refresh the pools, then pick the next
action from the head probabilities on the latest view. Collisions rewind
the robot to the last safe pose.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from .adaptation import QController, adapt_and_train
from .config import Config, bundled_path
from .episode import ACTIONS, EpisodeBatch, EpisodeRecord, ExperimentLog
from .errors import ConfigError
from .model import (
    AdaptiveNet,
    batch_stats,
    predict_cost_s,
    sigmoid,
    sgd_pass,
    train_batch,
    train_cost_s,
)
from .perception import FrameSpec, preprocess
from .pools import Pools, push_recent, update_finetune
from .simworld import Camera, RobotPose, World, collides, execute_action, load_world, normalize_angle


def select_action(probs: dict, mu_1: float, mu_2: float,
                  rng: np.random.Generator, mode: str = "argmin") -> str:
    """Pick from the [mu_1, mu_2] confidence band; empty band goes random.

    In-band winner is the least (argmin) or most (argmax) confident action,
    ties resolved in the fixed order L < S < R.
    """
    if mode not in ("argmin", "argmax"):
        raise ConfigError(f"unknown selection mode {mode!r}")
    band = [a for a in ACTIONS if mu_1 <= probs[a] <= mu_2]
    if not band:
        return ACTIONS[rng.integers(0, len(ACTIONS))]
    best = band[0]
    for a in band[1:]:
        if (probs[a] < probs[best]) if mode == "argmin" else (probs[a] > probs[best]):
            best = a
    return best


def action_probs(net: AdaptiveNet, frames: list[np.ndarray]) -> dict:
    """Mean head probabilities over the given frames, one shared encode each."""
    acc = {a: 0.0 for a in ACTIONS}
    for x in frames:
        z = net.encode(x)
        for a in ACTIONS:
            head = net.heads[a]
            acc[a] += float(sigmoid(head.w_out @ z + head.b_out))
    return {a: acc[a] / len(frames) for a in ACTIONS}


def subsample(frames: list, k: int) -> list:
    """k evenly spaced frames ending at the last one; all of them when short."""
    if len(frames) <= k:
        return list(frames)
    idx = np.linspace(0, len(frames) - 1, k).round().astype(int)
    return [frames[i] for i in idx]


def resolve_world(cfg: Config) -> World:
    """Bundled world by name, or any path to a scene file."""
    name = cfg.world
    path = bundled_path("worlds", f"{name}.world")
    if "/" not in name and not name.endswith(".world") and path.is_file():
        world = load_world(path)
    else:
        world = load_world(name)
    world.robot_radius = cfg.robot_radius
    return world


@dataclass
class ExperimentContext:
    cfg: Config
    world: World
    cam: Camera
    spec: FrameSpec
    net: AdaptiveNet
    ctrl: QController | None
    pools: Pools
    rng: np.random.Generator
    pose: RobotPose
    last_safe: RobotPose
    pending_action: str = "S"
    pending_p: float = 1.0
    prev_batch: EpisodeBatch | None = None
    episode: int = 0
    consecutive_collisions: int = 0
    frame_sink: object = None  # callable(episode, frames) for --dump-frames


def build_context(cfg: Config) -> ExperimentContext:
    rng = np.random.default_rng(cfg.seed)
    world = resolve_world(cfg)
    spec = FrameSpec(cfg.frame_width, cfg.frame_height, cfg.crop_rows)
    cam = Camera(width=cfg.frame_width, height=cfg.frame_height)
    net = AdaptiveNet(spec.dim, cfg.resolved_widths(), variant=cfg.variant, rng=rng)
    ctrl = None
    if cfg.variant == "radae":
        ctrl = QController(
            initial_widths=cfg.resolved_widths(), delta=cfg.delta_nodes,
            alpha_q=cfg.alpha_q, gamma=cfg.gamma, epsilon=cfg.epsilon,
            eta_1=cfg.eta_1, eta_2=cfg.eta_2, alpha_ema=cfg.alpha_ema,
            m=cfg.m, u=cfg.u, v_1=cfg.v_1, v_2=cfg.v_2)
    start = world.start_pose()
    if collides(world, start.x, start.y):
        raise ConfigError(f"start pose {start} collides in world {cfg.world!r}")
    return ExperimentContext(cfg=cfg, world=world, cam=cam, spec=spec, net=net,
                             ctrl=ctrl, pools=Pools(tau=cfg.tau), rng=rng,
                             pose=start, last_safe=start)


def _train(ctx: ExperimentContext, batch: EpisodeBatch):
    """Variant dispatch; returns (stats, adapt_kind, reward, cost_s, wall_s)."""
    cfg = ctx.cfg
    lr = cfg.learning_rate()
    if cfg.variant == "radae":
        rep = adapt_and_train(ctx.net, ctx.ctrl, ctx.pools, batch,
                              lr, cfg.p_c, ctx.rng)
        return rep.stats, rep.action.kind, rep.reward, rep.train_cost_s, rep.wall_train_time_s
    t0 = time.perf_counter()
    cost = 0.0
    if cfg.variant == "sdae":
        for b in ctx.pools.b_ft:  # the fixed net still replays corrective data
            sgd_pass(ctx.net, b, lr, cfg.p_c, ctx.rng)
            cost += train_cost_s(ctx.net, len(b))
    stats = train_batch(ctx.net, batch, lr, cfg.p_c, ctx.rng)
    cost += train_cost_s(ctx.net, len(batch))
    return stats, "none", None, cost, time.perf_counter() - t0


def run_episode(ctx: ExperimentContext) -> EpisodeRecord:
    cfg = ctx.cfg
    action = ctx.pending_action
    p_chosen = ctx.pending_p
    pose_before = ctx.pose

    motion = execute_action(ctx.world, ctx.pose, action, delta=cfg.delta,
                            theta_turn=cfg.theta_turn, n_sub=cfg.n_sub,
                            cam=ctx.cam)
    frames = [preprocess(img, ctx.spec) for img in motion.frames]
    label = 0 if motion.collided else 1
    batch = EpisodeBatch(episode=ctx.episode, action=action,
                         frames=subsample(frames, cfg.batch), label=label)
    if ctx.frame_sink is not None:
        ctx.frame_sink(ctx.episode, batch.frames)

    if motion.collided:
        ctx.consecutive_collisions += 1
        if cfg.escape_after and ctx.consecutive_collisions >= cfg.escape_after:
            # stuck: rotate the safe heading in place so retries fan outward
            ctx.last_safe = replace(
                ctx.last_safe,
                heading=normalize_angle(ctx.last_safe.heading
                                        + np.radians(cfg.escape_turn_deg)))
        ctx.pose = ctx.last_safe
    else:
        ctx.consecutive_collisions = 0
        ctx.last_safe = motion.end_pose
        ctx.pose = motion.end_pose

    stats, adapt_kind, reward, train_cost, wall_train = _train(ctx, batch)

    push_recent(ctx.pools, batch)
    update_finetune(ctx.pools, batch, ctx.prev_batch)
    ctx.prev_batch = batch

    t0 = time.perf_counter()
    view = frames[-cfg.predict_frames:]
    probs = action_probs(ctx.net, view)
    wall_predict = time.perf_counter() - t0
    nxt = select_action(probs, cfg.mu_1, cfg.mu_2, ctx.rng, cfg.selection_mode)

    record = EpisodeRecord(
        episode=ctx.episode, action=action, collided=motion.collided,
        p_chosen=p_chosen, widths=ctx.net.hidden_widths(),
        adapt_action=adapt_kind, reward=reward,
        l_g=stats.l_g, l_c=stats.l_c,
        train_time_s=train_cost,
        predict_time_s=predict_cost_s(ctx.net, len(view)),
        pose_before=(pose_before.x, pose_before.y, pose_before.heading),
        pose_after=(ctx.pose.x, ctx.pose.y, ctx.pose.heading),
        wall_train_time_s=wall_train,
        wall_predict_time_s=wall_predict,
    )
    ctx.pending_action = nxt
    ctx.pending_p = probs[nxt]
    ctx.episode += 1
    return record


def run_experiment(cfg: Config, frame_sink=None) -> ExperimentLog:
    """Seeded end-to-end run: N episodes starting with a forced S."""
    ctx = build_context(cfg)
    ctx.frame_sink = frame_sink
    records = [run_episode(ctx) for _ in range(cfg.n)]
    ctx.net.validate()
    return ExperimentLog(config=cfg, records=records, net=ctx.net, controller=ctx.ctrl)
