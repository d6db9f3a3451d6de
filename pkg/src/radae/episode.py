"""Episode-level data records shared by the model, pools, navigator and metrics."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError

#: Discrete actions, in tie-break order.
ACTIONS = ("L", "S", "R")


@dataclass
class EpisodeBatch:
    """Frames captured while executing one action, with the shared safe/collided label.

    All frames carry the same binary label: 1 if the episode finished without
    contact, 0 if it collided.
    """

    episode: int
    action: str
    frames: list[np.ndarray]
    label: int

    def __post_init__(self):
        if not self.frames:
            raise ContractError("episode batch needs at least one frame")
        if self.action not in ACTIONS:
            raise ContractError(f"unknown action {self.action!r}")
        if self.label not in (0, 1):
            raise ContractError(f"label must be 0 or 1, got {self.label!r}")

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class EpisodeRecord:
    """Everything logged for one episode of a navigation run.

    train_time_s / predict_time_s are deterministic cost estimates (flops at a
    nominal 1 GFLOP/s) so serialized logs stay byte-reproducible; the measured
    wall-clock times live in wall_train_time_s / wall_predict_time_s.
    """

    episode: int
    action: str
    collided: bool
    p_chosen: float
    widths: list[int]
    adapt_action: str
    reward: float | None
    l_g: float
    l_c: float
    train_time_s: float
    predict_time_s: float
    pose_before: tuple[float, float, float]
    pose_after: tuple[float, float, float]
    wall_train_time_s: float = 0.0
    wall_predict_time_s: float = 0.0

    def width(self, i: int) -> int:
        """Width of hidden layer i (0-based), 0 when the net has fewer layers."""
        return self.widths[i] if i < len(self.widths) else 0


@dataclass
class ExperimentLog:
    """One full run: the resolved config, per-episode records, final net state."""

    config: object
    records: list[EpisodeRecord] = field(default_factory=list)
    net: object = None
    controller: object = None
