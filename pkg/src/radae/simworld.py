"""Deterministic 2D world: raycast camera, discrete kinematics, collision flag.

Coordinates are meters, x right / y up, headings counterclockwise radians.
The robot is a disc. Obstacles (circles and axis-aligned rectangles) render
as vertical bands whose height falls off with 1/distance; the arena bounds
collide but are invisible, so worlds normally line their perimeter with
rectangle obstacles to make the walls visible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractError
from .perception import RawImage

ACTION_NAMES = ("L", "S", "R")

#: minimum ray distance; hits closer than this are treated as surface contact
RAY_EPS = 1e-9


def normalize_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    r = math.remainder(a, 2.0 * math.pi)
    if r <= -math.pi:
        r += 2.0 * math.pi
    return r


@dataclass(frozen=True)
class RobotPose:
    x: float
    y: float
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", normalize_angle(self.heading))


@dataclass(frozen=True)
class Circle:
    cx: float
    cy: float
    r: float
    albedo: float


@dataclass(frozen=True)
class Rect:
    x0: float
    y0: float
    x1: float
    y1: float
    albedo: float


@dataclass(frozen=True)
class Camera:
    width: int = 128
    height: int = 96
    fov: float = math.radians(100.0)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ContractError("camera dimensions must be >= 1")
        if not 0.0 < self.fov < math.pi:
            raise ConfigError(f"fov must be in (0, pi), got {self.fov}")


@dataclass
class World:
    bounds: tuple[float, float, float, float]
    obstacles: list
    background_albedo: float = 0.7
    robot_radius: float = 0.25
    start: RobotPose | None = None

    def __post_init__(self):
        x0, y0, x1, y1 = self.bounds
        if not (x0 < x1 and y0 < y1):
            raise ConfigError(f"degenerate bounds {self.bounds}")
        if not 0.0 <= self.background_albedo <= 1.0:
            raise ConfigError("background albedo outside [0,1]")
        if self.robot_radius <= 0:
            raise ConfigError("robot radius must be > 0")
        for ob in self.obstacles:
            if not 0.0 <= ob.albedo <= 1.0:
                raise ConfigError(f"albedo outside [0,1]: {ob}")
            if isinstance(ob, Circle):
                if ob.r <= 0:
                    raise ConfigError(f"nonpositive radius: {ob}")
                inside = (x0 <= ob.cx - ob.r and ob.cx + ob.r <= x1
                          and y0 <= ob.cy - ob.r and ob.cy + ob.r <= y1)
            else:
                if not (ob.x0 < ob.x1 and ob.y0 < ob.y1):
                    raise ConfigError(f"degenerate rectangle: {ob}")
                inside = x0 <= ob.x0 and ob.x1 <= x1 and y0 <= ob.y0 and ob.y1 <= y1
            if not inside:
                raise ConfigError(f"obstacle outside bounds: {ob}")

    def start_pose(self) -> RobotPose:
        if self.start is not None:
            return self.start
        x0, y0, x1, y1 = self.bounds
        return RobotPose((x0 + x1) / 2.0, (y0 + y1) / 2.0, 0.0)


@dataclass
class MotionResult:
    frames: list
    collided: bool
    end_pose: RobotPose
    contact_pose: RobotPose | None


# ---------------------------------------------------------------------------
# Ray intersections, vectorized over a fan of directions
# ---------------------------------------------------------------------------

def _ray_circle(ox, oy, dx, dy, c: Circle):
    """Smallest t >= RAY_EPS per ray, inf when missed; inside hits the exit."""
    fx, fy = ox - c.cx, oy - c.cy
    b = dx * fx + dy * fy
    disc = b * b - (fx * fx + fy * fy - c.r * c.r)
    hit = disc >= 0.0
    root = np.sqrt(np.maximum(disc, 0.0))
    t_near = -b - root
    t_far = -b + root
    t = np.where(t_near >= RAY_EPS, t_near, t_far)
    return np.where(hit & (t >= RAY_EPS), t, np.inf)


def _ray_rect(ox, oy, dx, dy, r: Rect):
    """Slab test; entry hit from outside, exit hit from inside."""
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_x = 1.0 / dx
        inv_y = 1.0 / dy
        tx1 = (r.x0 - ox) * inv_x
        tx2 = (r.x1 - ox) * inv_x
        ty1 = (r.y0 - oy) * inv_y
        ty2 = (r.y1 - oy) * inv_y
    # rays parallel to a slab: inside it -> (-inf, inf), outside -> no overlap
    para_x = dx == 0.0
    in_x = (r.x0 <= ox) & (ox <= r.x1)
    txmin = np.where(para_x, np.where(in_x, -np.inf, np.inf), np.minimum(tx1, tx2))
    txmax = np.where(para_x, np.where(in_x, np.inf, -np.inf), np.maximum(tx1, tx2))
    para_y = dy == 0.0
    in_y = (r.y0 <= oy) & (oy <= r.y1)
    tymin = np.where(para_y, np.where(in_y, -np.inf, np.inf), np.minimum(ty1, ty2))
    tymax = np.where(para_y, np.where(in_y, np.inf, -np.inf), np.maximum(ty1, ty2))
    tmin = np.maximum(txmin, tymin)
    tmax = np.minimum(txmax, tymax)
    hit = (tmax >= np.maximum(tmin, RAY_EPS))
    t = np.where(tmin >= RAY_EPS, tmin, tmax)
    return np.where(hit & (t >= RAY_EPS), t, np.inf)


def cast_fan(world: World, ox: float, oy: float, angles: np.ndarray):
    """Nearest obstacle per angle: (t, albedo) arrays, t=inf where nothing hit."""
    dx, dy = np.cos(angles), np.sin(angles)
    best_t = np.full(angles.shape, np.inf)
    best_a = np.zeros(angles.shape)
    for ob in world.obstacles:
        t = _ray_circle(ox, oy, dx, dy, ob) if isinstance(ob, Circle) \
            else _ray_rect(ox, oy, dx, dy, ob)
        closer = t < best_t
        best_t = np.where(closer, t, best_t)
        best_a = np.where(closer, ob.albedo, best_a)
    return best_t, best_a


def render(world: World, pose: RobotPose, cam: Camera = Camera(),
           jitter: float = 0.0, rng: np.random.Generator | None = None) -> RawImage:
    """Column-wise raycast image, grayscale float in [0,1], row 0 at the top."""
    w, h = cam.width, cam.height
    # column 0 looks left of heading, columns sweep rightward across the fov
    angles = pose.heading + cam.fov / 2.0 - (np.arange(w) + 0.5) * (cam.fov / w)
    t, alb = cast_fan(world, pose.x, pose.y, angles)

    rows = np.arange(h, dtype=float)[:, None]
    grad = 0.8 - 0.4 * rows / max(h - 1, 1)
    image = np.broadcast_to(world.background_albedo * grad, (h, w)).copy()

    with np.errstate(divide="ignore"):
        band = 0.75 * h / t  # band height in pixels, inf-safe: t=inf -> band 0
    band = np.where(np.isfinite(t), band, 0.0)
    center = (h - 1) / 2.0
    in_band = np.abs(rows - center) <= band[None, :] / 2.0
    shade = alb / (1.0 + 0.3 * np.where(np.isfinite(t), t, 1.0))
    image = np.where(in_band & np.isfinite(t)[None, :], shade[None, :], image)

    if jitter > 0.0 and rng is not None:
        image = image * (1.0 + rng.uniform(-jitter, jitter))
    return RawImage(width=w, height=h, channels=1,
                    data=np.clip(image, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Collision and kinematics
# ---------------------------------------------------------------------------

def collides(world: World, x: float, y: float) -> bool:
    """Robot disc at (x, y) against every obstacle and the arena bounds."""
    rr = world.robot_radius
    bx0, by0, bx1, by1 = world.bounds
    if x - rr < bx0 or x + rr > bx1 or y - rr < by0 or y + rr > by1:
        return True
    for ob in world.obstacles:
        if isinstance(ob, Circle):
            if math.hypot(x - ob.cx, y - ob.cy) <= ob.r + rr:
                return True
        else:
            nx = min(max(x, ob.x0), ob.x1)
            ny = min(max(y, ob.y0), ob.y1)
            if math.hypot(x - nx, y - ny) <= rr:
                return True
    return False


def execute_action(world: World, pose: RobotPose, action: str, delta: float = 1.0,
                   theta_turn: float = math.radians(30.0), n_sub: int = 10,
                   cam: Camera = Camera()) -> MotionResult:
    """Rotate (L/R) then translate delta in n_sub sub-steps, frame per sub-step.

    Each sub-step advances, renders, then tests the disc; first contact stops
    the motion with the contact pose as the end pose.
    """
    if action not in ACTION_NAMES:
        raise ContractError(f"unknown action {action!r}")
    if delta <= 0:
        raise ConfigError(f"step distance must be > 0, got {delta}")
    if n_sub < 2:
        raise ConfigError(f"n_sub must be >= 2, got {n_sub}")
    heading = pose.heading
    if action == "L":
        heading = normalize_angle(heading + theta_turn)
    elif action == "R":
        heading = normalize_angle(heading - theta_turn)
    step = delta / n_sub
    dx, dy = math.cos(heading), math.sin(heading)
    x, y = pose.x, pose.y
    frames = []
    for _ in range(n_sub):
        x += step * dx
        y += step * dy
        here = RobotPose(x, y, heading)
        frames.append(render(world, here, cam))
        if collides(world, x, y):
            return MotionResult(frames=frames, collided=True,
                                end_pose=here, contact_pose=here)
    return MotionResult(frames=frames, collided=False,
                        end_pose=RobotPose(x, y, heading), contact_pose=None)


# ---------------------------------------------------------------------------
# Scene files
# ---------------------------------------------------------------------------

def parse_world(text: str, name: str = "<string>") -> World:
    """One directive per line: bounds/circle/rect, optional start and background.

    `start x y heading_deg` and `background albedo` extend the base shape
    format; '#' starts a comment.
    """
    bounds = None
    obstacles = []
    start = None
    background = 0.7
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, args = parts[0].lower(), parts[1:]
        try:
            vals = [float(a) for a in args]
        except ValueError:
            raise ConfigError(f"{name}:{ln}: non-numeric field in {raw!r}")
        if kind == "bounds" and len(vals) == 4:
            bounds = tuple(vals)
        elif kind == "circle" and len(vals) == 4:
            obstacles.append(Circle(*vals))
        elif kind == "rect" and len(vals) == 5:
            obstacles.append(Rect(*vals))
        elif kind == "start" and len(vals) == 3:
            start = RobotPose(vals[0], vals[1], math.radians(vals[2]))
        elif kind == "background" and len(vals) == 1:
            background = vals[0]
        else:
            raise ConfigError(f"{name}:{ln}: unknown directive {raw!r}")
    if bounds is None:
        raise ConfigError(f"{name}: missing bounds line")
    return World(bounds=bounds, obstacles=obstacles,
                 background_albedo=background, start=start)


def load_world(path) -> World:
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read world file {path}: {e}")
    return parse_world(text, name=str(path))
