"""Bounded experience pools.

B_r holds the most recent episode batches (FIFO over a frame budget) and
feeds greedy initialization of grown nodes plus early-phase training. B_ft
holds corrective batches: an all-safe batch right after an all-collided one,
or any all-collided batch. Both are capped at tau stored frames; tau counts
frames, not batches.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .episode import EpisodeBatch
from .errors import ContractError


def frame_count(batches) -> int:
    return sum(len(b) for b in batches)


@dataclass
class Pools:
    tau: int
    b_r: deque = field(default_factory=deque)
    b_ft: list = field(default_factory=list)

    def __post_init__(self):
        if self.tau < 1:
            raise ContractError(f"tau must be >= 1, got {self.tau}")


def push_recent(pools: Pools, batch: EpisodeBatch) -> None:
    """Append to B_r, evicting oldest batches while over the frame budget."""
    pools.b_r.append(batch)
    while frame_count(pools.b_r) > pools.tau:
        pools.b_r.popleft()


def update_finetune(pools: Pools, d_i: EpisodeBatch,
                    d_prev: EpisodeBatch | None, tau: int | None = None) -> None:
    """Add d_i to B_ft when it is corrective, then evict smallest-episode batches.

    Corrective: all labels 1 right after an all-0 batch (recovery data), or
    all labels 0 (collision data). Anything else leaves the pool untouched.
    """
    tau = pools.tau if tau is None else tau
    recovery = d_i.label == 1 and d_prev is not None and d_prev.label == 0
    if recovery or d_i.label == 0:
        pools.b_ft.append(d_i)
        while frame_count(pools.b_ft) > tau:
            oldest = min(range(len(pools.b_ft)), key=lambda k: pools.b_ft[k].episode)
            del pools.b_ft[oldest]


def recent_frames(pools: Pools):
    """All frames currently in B_r, oldest batch first (greedy-init input)."""
    return [f for b in pools.b_r for f in b.frames]
