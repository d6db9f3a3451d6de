"""Run configuration: line-oriented `key = value` files over full-scale defaults.

`delta` is the robot step distance in meters; `delta_nodes` is the node
count the controller grows or merges per hidden layer. Unknown keys and type
mismatches are hard errors so a typo cannot silently fall back to defaults.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields
from importlib import resources

from .errors import ConfigError

VARIANTS = ("radae", "sdae", "lr")
SELECTION_MODES = ("argmin", "argmax")

DEFAULT_WIDTHS = {"radae": [64, 48, 32], "sdae": [256, 196, 128], "lr": []}
DEFAULT_LR = {"radae": 0.01, "sdae": 0.05, "lr": 0.001}


def _parse_widths(text: str) -> list[int]:
    parts = [p for chunk in text.split(",") for p in chunk.split()]
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"widths must be integers, got {text!r}")


@dataclass
class Config:
    variant: str = "radae"
    world: str = "cluttered"
    seed: int = 0
    n: int = 500
    frame_width: int = 128
    frame_height: int = 96
    crop_rows: int = 19
    widths: list[int] | None = None      # None -> variant default
    delta: float = 1.0                   # step distance (m)
    delta_nodes: int = 5                 # grow/merge node count
    theta_turn_deg: float = 30.0
    n_sub: int = 10
    lr_radae: float = 0.01
    lr_sdae: float = 0.05
    lr_lr: float = 0.001
    p_c: float = 0.15
    mu_1: float = 0.45
    mu_2: float = 0.95
    batch: int = 5
    m: int = 15
    tau: int = 10000
    eta_1: int = 5
    eta_2: int = 30
    alpha_ema: float = 0.5
    alpha_q: float = 0.5
    gamma: float = 0.9
    epsilon: float = 0.1
    u: float = 1.75
    v_1: float = 0.5
    v_2: float = 3.0
    window: int = 25
    skip: int = 100
    selection_mode: str = "argmin"
    predict_frames: int = 1
    escape_after: int = 3
    escape_turn_deg: float = 15.0
    jitter: float = 0.0
    robot_radius: float = 0.25
    out: str | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.selection_mode not in SELECTION_MODES:
            raise ConfigError(f"selection_mode must be one of {SELECTION_MODES}")
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.delta <= 0:
            raise ConfigError(f"delta must be > 0, got {self.delta}")
        if self.delta_nodes < 1:
            raise ConfigError(f"delta_nodes must be >= 1, got {self.delta_nodes}")
        if self.n_sub < 2:
            raise ConfigError(f"n_sub must be >= 2, got {self.n_sub}")
        if not 0.0 <= self.p_c <= 1.0:
            raise ConfigError(f"p_c must be in [0,1], got {self.p_c}")
        if not 0.0 <= self.mu_1 < self.mu_2 <= 1.0:
            raise ConfigError(f"need 0 <= mu_1 < mu_2 <= 1, got {self.mu_1}, {self.mu_2}")
        if self.batch < 1:
            raise ConfigError(f"batch must be >= 1, got {self.batch}")
        if self.tau < 1:
            raise ConfigError(f"tau must be >= 1, got {self.tau}")
        if not 0 <= self.eta_1 <= self.eta_2:
            raise ConfigError(f"need 0 <= eta_1 <= eta_2, got {self.eta_1}, {self.eta_2}")
        for name in ("alpha_ema", "alpha_q", "epsilon"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0,1], got {v}")
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError(f"gamma must be in [0,1), got {self.gamma}")
        if not self.v_1 < self.v_2:
            raise ConfigError(f"need v_1 < v_2, got {self.v_1}, {self.v_2}")
        for name in ("lr_radae", "lr_sdae", "lr_lr"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}")
        if self.skip < 0:
            raise ConfigError(f"skip must be >= 0, got {self.skip}")
        if self.predict_frames < 1:
            raise ConfigError(f"predict_frames must be >= 1, got {self.predict_frames}")
        if self.escape_after < 0:
            raise ConfigError(f"escape_after must be >= 0, got {self.escape_after}")
        if self.robot_radius <= 0:
            raise ConfigError(f"robot_radius must be > 0, got {self.robot_radius}")
        if self.widths is not None and self.variant != "lr":
            if not self.widths or any(w < 1 for w in self.widths):
                raise ConfigError(f"widths must all be >= 1, got {self.widths}")

    # resolved values -------------------------------------------------------

    def resolved_widths(self) -> list[int]:
        if self.variant == "lr":
            return []
        return list(self.widths) if self.widths is not None \
            else list(DEFAULT_WIDTHS[self.variant])

    def learning_rate(self) -> float:
        return getattr(self, f"lr_{self.variant}")

    @property
    def frame_dim(self) -> int:
        return self.frame_width * (self.frame_height - 2 * self.crop_rows)

    @property
    def theta_turn(self) -> float:
        return math.radians(self.theta_turn_deg)

    def echo(self) -> str:
        """Resolved config as parseable text; reruns reproduce the run exactly."""
        lines = []
        for f in fields(self):
            if f.name == "out":
                continue
            v = getattr(self, f.name)
            if f.name == "widths":
                v = ",".join(str(w) for w in self.resolved_widths())
                if not v:
                    continue
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_INT_KEYS = {"seed", "n", "frame_width", "frame_height", "crop_rows", "delta_nodes",
             "n_sub", "batch", "m", "tau", "eta_1", "eta_2", "window", "skip",
             "predict_frames", "escape_after"}
_FLOAT_KEYS = {"delta", "theta_turn_deg", "lr_radae", "lr_sdae", "lr_lr", "p_c",
               "mu_1", "mu_2", "alpha_ema", "alpha_q", "gamma", "epsilon",
               "u", "v_1", "v_2", "escape_turn_deg", "jitter", "robot_radius"}
_STR_KEYS = {"variant", "world", "selection_mode", "out"}


def parse_config_text(text: str, name: str = "<string>") -> Config:
    values = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{name}:{ln}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key in values:
            raise ConfigError(f"{name}:{ln}: duplicate key {key!r}")
        if key == "widths":
            values[key] = _parse_widths(val)
        elif key in _INT_KEYS:
            try:
                values[key] = int(val)
            except ValueError:
                raise ConfigError(f"{name}:{ln}: {key} expects an integer, got {val!r}")
        elif key in _FLOAT_KEYS:
            try:
                values[key] = float(val)
            except ValueError:
                raise ConfigError(f"{name}:{ln}: {key} expects a number, got {val!r}")
        elif key in _STR_KEYS:
            values[key] = val
        else:
            raise ConfigError(f"{name}:{ln}: unknown key {key!r}")
    return Config(**values)


def parse_config(path) -> Config:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    return parse_config_text(text, name=str(path))


def bundled_path(kind: str, name: str):
    """Path of a packaged world/preset; kind is 'worlds' or 'presets'."""
    root = resources.files("radae") / kind
    return root / name


def preset_config(name: str) -> Config:
    path = bundled_path("presets", f"{name}.cfg")
    if not path.is_file():
        raise ConfigError(f"no bundled preset named {name!r}")
    return parse_config_text(path.read_text(encoding="utf-8"), name=str(path))
