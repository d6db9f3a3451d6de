"""World tests: ray oracles, renderer projection, kinematics, scene parsing."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radae.errors import ConfigError, ContractError
from radae.simworld import (
    Camera,
    Circle,
    MotionResult,
    Rect,
    RobotPose,
    World,
    cast_fan,
    collides,
    execute_action,
    load_world,
    normalize_angle,
    parse_world,
    render,
)

BIG = (-20.0, -20.0, 20.0, 20.0)


def empty_world():
    return World(bounds=BIG, obstacles=[])


# ---------------------------------------------------------------------------
# angles
# ---------------------------------------------------------------------------

def test_normalize_angle_range():
    assert abs(normalize_angle(3 * math.pi) - math.pi) < 1e-12
    assert normalize_angle(-math.pi) == math.pi
    assert abs(normalize_angle(math.pi + 0.1) - (-math.pi + 0.1)) < 1e-12
    for a in np.linspace(-20, 20, 101):
        r = normalize_angle(a)
        assert -math.pi < r <= math.pi


# ---------------------------------------------------------------------------
# ray casting
# ---------------------------------------------------------------------------

def test_ray_circle_head_on():
    w = World(bounds=BIG, obstacles=[Circle(3.0, 0.0, 1.0, 0.5)])
    t, alb = cast_fan(w, 0.0, 0.0, np.array([0.0]))
    assert abs(t[0] - 2.0) < 1e-12 and alb[0] == 0.5


def test_ray_circle_behind_misses():
    w = World(bounds=BIG, obstacles=[Circle(-3.0, 0.0, 1.0, 0.5)])
    t, _ = cast_fan(w, 0.0, 0.0, np.array([0.0]))
    assert np.isinf(t[0])


def test_ray_inside_circle_hits_exit():
    w = World(bounds=BIG, obstacles=[Circle(0.0, 0.0, 2.0, 0.5)])
    t, _ = cast_fan(w, 0.0, 0.0, np.array([0.0]))
    assert abs(t[0] - 2.0) < 1e-12


def test_ray_rect_head_on_and_parallel():
    w = World(bounds=BIG, obstacles=[Rect(2.0, -1.0, 4.0, 1.0, 0.8)])
    t, _ = cast_fan(w, 0.0, 0.0, np.array([0.0]))
    assert abs(t[0] - 2.0) < 1e-12
    # parallel ray outside the slab misses
    w2 = World(bounds=BIG, obstacles=[Rect(2.0, 1.0, 4.0, 2.0, 0.8)])
    t2, _ = cast_fan(w2, 0.0, 0.0, np.array([0.0]))
    assert np.isinf(t2[0])


def test_nearest_obstacle_wins():
    w = World(bounds=BIG, obstacles=[
        Rect(5.0, -1.0, 6.0, 1.0, 0.9),
        Circle(3.0, 0.0, 1.0, 0.2),
    ])
    t, alb = cast_fan(w, 0.0, 0.0, np.array([0.0]))
    assert abs(t[0] - 2.0) < 1e-12 and alb[0] == 0.2


# ---------------------------------------------------------------------------
# renderer
# ---------------------------------------------------------------------------

def test_render_empty_world_pure_gradient():
    cam = Camera(width=16, height=12)
    img = render(empty_world(), RobotPose(0, 0, 0), cam)
    data = img.data
    assert img.channels == 1 and data.shape == (12, 16)
    # every column identical, monotone darker toward the floor
    assert np.allclose(data, data[:, :1])
    col = data[:, 0]
    assert np.all(np.diff(col) < 0)
    assert abs(col[0] - 0.7 * 0.8) < 1e-12


def test_render_deterministic():
    w = World(bounds=BIG, obstacles=[Circle(3.0, 1.0, 1.0, 0.4)])
    cam = Camera(width=24, height=18)
    a = render(w, RobotPose(0, 0, 0.2), cam)
    b = render(w, RobotPose(0, 0, 0.2), cam)
    assert np.array_equal(a.data, b.data)


def band_rows(world, cam, albedo_shade):
    img = render(world, RobotPose(0, 0, 0), cam).data
    center_col = img[:, cam.width // 2]
    return int(np.sum(np.isclose(center_col, albedo_shade)))


def test_render_band_height_inverse_distance():
    cam = Camera(width=101, height=96)
    near = World(bounds=BIG, obstacles=[Rect(1.0, -5.0, 1.5, 5.0, 1.0)])
    far = World(bounds=BIG, obstacles=[Rect(4.0, -5.0, 4.5, 5.0, 1.0)])
    rows_near = band_rows(near, cam, 1.0 / 1.3)        # shade at t=1
    rows_far = band_rows(far, cam, 1.0 / (1 + 0.3 * 4))  # shade at t=4
    assert rows_near > 0 and rows_far > 0
    ratio = rows_near / rows_far
    assert 3.5 <= ratio <= 4.5


def test_render_bounds_invisible():
    # nothing but bounds: image must look exactly like the empty world
    cam = Camera(width=8, height=8)
    img = render(empty_world(), RobotPose(19.0, 0, 0), cam)
    ref = render(empty_world(), RobotPose(0, 0, 0), cam)
    assert np.array_equal(img.data, ref.data)


# ---------------------------------------------------------------------------
# collision + kinematics
# ---------------------------------------------------------------------------

def test_collides_disc_geometry():
    w = World(bounds=(0, 0, 10, 10), obstacles=[Circle(5, 5, 1.0, 0.5)],
              robot_radius=0.25)
    assert collides(w, 5, 6.2)          # 1.2 <= 1.25
    assert not collides(w, 5, 6.3)
    assert collides(w, 0.2, 5)          # bounds
    assert not collides(w, 0.3, 5)
    w2 = World(bounds=(0, 0, 10, 10), obstacles=[Rect(4, 4, 6, 6, 0.5)],
               robot_radius=0.25)
    assert collides(w2, 3.8, 5)
    assert not collides(w2, 3.7, 5)


def test_execute_straight_empty():
    cam = Camera(width=8, height=6)
    res = execute_action(empty_world(), RobotPose(0, 0, 0), "S", cam=cam)
    assert not res.collided and res.contact_pose is None
    assert len(res.frames) == 10
    assert abs(res.end_pose.x - 1.0) < 1e-12 and abs(res.end_pose.y) < 1e-12


def test_execute_collision_stops_at_contact():
    cam = Camera(width=8, height=6)
    w = World(bounds=BIG, obstacles=[Circle(0.5, 0.0, 0.5, 0.5)])
    res = execute_action(w, RobotPose(-0.5, 0, 0), "S", cam=cam)
    assert res.collided
    assert res.end_pose == res.contact_pose
    assert 1 <= len(res.frames) < 10
    # contact at the first sub-step whose disc overlaps the circle
    assert math.hypot(res.end_pose.x - 0.5, res.end_pose.y) <= 0.5 + w.robot_radius


def test_execute_left_right_symmetry():
    cam = Camera(width=8, height=6)
    start = RobotPose(0, 0, 0.3)
    left = execute_action(empty_world(), start, "L", cam=cam)
    right = execute_action(empty_world(), start, "R", cam=cam)
    for res, sign in ((left, 1), (right, -1)):
        assert not res.collided
        d = math.hypot(res.end_pose.x - start.x, res.end_pose.y - start.y)
        assert abs(d - 1.0) < 1e-9
        assert abs(normalize_angle(res.end_pose.heading - start.heading)
                   - sign * math.radians(30)) < 1e-12


def test_execute_rejects_bad_params():
    with pytest.raises(ContractError):
        execute_action(empty_world(), RobotPose(0, 0, 0), "X")
    with pytest.raises(ConfigError):
        execute_action(empty_world(), RobotPose(0, 0, 0), "S", delta=0.0)
    with pytest.raises(ConfigError):
        execute_action(empty_world(), RobotPose(0, 0, 0), "S", n_sub=1)


@given(
    x=st.floats(-5, 5), y=st.floats(-5, 5),
    heading=st.floats(-3.1, 3.1),
    action=st.sampled_from(["L", "S", "R"]),
)
@settings(max_examples=40, deadline=None)
def test_no_collision_in_empty_world(x, y, heading, action):
    cam = Camera(width=4, height=4)
    res = execute_action(empty_world(), RobotPose(x, y, heading), action, cam=cam)
    assert not res.collided and len(res.frames) == 10


# ---------------------------------------------------------------------------
# scene files
# ---------------------------------------------------------------------------

SCENE = """
# test arena
bounds 0 0 24 24
background 0.6
rect 0.2 0.2 23.8 1.0 0.85   # south wall
circle 8 8 1.5 0.2
start 12 12 90
"""


def test_parse_world_roundtrip():
    w = parse_world(SCENE)
    assert w.bounds == (0.0, 0.0, 24.0, 24.0)
    assert w.background_albedo == 0.6
    assert len(w.obstacles) == 2
    assert isinstance(w.obstacles[0], Rect) and isinstance(w.obstacles[1], Circle)
    sp = w.start_pose()
    assert (sp.x, sp.y) == (12.0, 12.0)
    assert abs(sp.heading - math.pi / 2) < 1e-12


def test_parse_world_default_start_is_center():
    w = parse_world("bounds 0 0 10 20\n")
    sp = w.start_pose()
    assert (sp.x, sp.y, sp.heading) == (5.0, 10.0, 0.0)


def test_parse_world_errors():
    with pytest.raises(ConfigError):
        parse_world("circle 1 1 1 0.5\n")  # no bounds
    with pytest.raises(ConfigError):
        parse_world("bounds 0 0 10 10\nwedge 1 2 3\n")
    with pytest.raises(ConfigError):
        parse_world("bounds 0 0 10 10\ncircle a b 1 0.5\n")
    with pytest.raises(ConfigError):
        parse_world("bounds 0 0 10 10\ncircle 9.9 5 1 0.5\n")  # pokes outside
    with pytest.raises(ConfigError):
        parse_world("bounds 0 0 10 10\nrect 3 3 2 4 0.5\n")  # degenerate
    with pytest.raises(ConfigError):
        parse_world("bounds 0 0 10 10\ncircle 5 5 1 1.5\n")  # albedo range


def test_load_world_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_world(tmp_path / "nope.world")
