"""Deterministic 2D kinematic world: differential-drive robots, box
obstacles, a range-only landmark sensor with injectable faults, a
Gauss-Newton localizer and a grid navigator."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .maps import GridMap, load_map
from .planner import inflate_grid, path_clear, plan_path
from .rng import SplitMix64, fnv1a64, mix_seed

MAX_SPEED = 0.5
MAX_TURN = 1.5
TURN_GAIN = 2.5
ROTATE_IN_PLACE = 0.6  # heading error above which the robot turns on the spot
WAYPOINT_TOLERANCE = 0.05
ROBOT_SEPARATION = 0.4
SPAWN_MIN_SEPARATION = 0.01
# with a free goal cell but no path, the navigator waits and plans again
REPLAN_PERIOD = 1.0

# odometry noise: translation std per metre, rotation std per radian and per metre
ODOM_ALPHA_TRANS = 0.1
ODOM_ALPHA_ROT = 0.1
ODOM_ALPHA_ROT_TRANS = 0.05
# localizer tuning: position diffusion the filter assumes (m^2/s) on top of
# the odometry noise model, and the smoothing weight of each new
# residual-based range noise sample
POSITION_DIFFUSION = 0.1
NOISE_SMOOTHING = 0.05
# residual degrees of freedom averaged with equal weight before smoothing
NOISE_POOL_DOF = 4

FAULT_NODE = "laserscan_modification"
FAULT_PARAMS = ("gaussian_noise_std_deviation", "random_drop_percentage")

# shape catalog: model name -> half edge of an axis-aligned square footprint
SHAPES = {"box": 0.2}

DEFAULT_CHANNELS = ("/clock", "/tf", "/scan", "/odom", "/pose_estimate")


def normalize_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


@dataclass
class Pose2D:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    def __post_init__(self) -> None:
        self.theta = normalize_angle(self.theta)

    def distance(self, other: "Pose2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass
class Entity:
    name: str
    kind: str  # "robot" | "obstacle"
    pose: Pose2D
    half_extent: float = 0.0
    model: str = ""

    def contains(self, x: float, y: float) -> bool:
        return self.kind == "obstacle" and abs(x - self.pose.x) <= self.half_extent and abs(y - self.pose.y) <= self.half_extent


@dataclass(frozen=True)
class SensorReading:
    ranges: tuple[float | None, ...]
    timestamp: float

    @property
    def valid(self) -> int:
        return sum(r is not None for r in self.ranges)


@dataclass(frozen=True)
class OdometryDelta:
    forward: float
    rotation: float


class WorldError(Exception):
    pass


class SpawnError(WorldError):
    pass


class UnknownParameter(WorldError):
    pass


def estimate_pose(
    previous: Pose2D,
    reading: SensorReading,
    landmarks: list[tuple[float, float]],
    odom: OdometryDelta,
) -> tuple[Pose2D, int]:
    """Advance ``previous`` by ``odom`` and refine its position from the
    valid ranges. Returns the new estimate and the solver status (OK when
    dead-reckoning was used)."""
    x = previous.x + odom.forward * math.cos(previous.theta)
    y = previous.y + odom.forward * math.sin(previous.theta)
    theta = previous.theta + odom.rotation
    lx, ly, rr = [], [], []
    for (px, py), r in zip(landmarks, reading.ranges):
        if r is not None:
            lx.append(px)
            ly.append(py)
            rr.append(r)
    if len(rr) < 3:
        return Pose2D(x, y, theta), kernels.OK
    ex, ey, status, _ = kernels.trilaterate(lx, ly, rr, x, y)
    if status != kernels.OK:
        return Pose2D(x, y, theta), status
    return Pose2D(ex, ey, theta), status


@dataclass
class Localizer:
    """Odometry prediction blended with the Gauss-Newton fix through a scalar
    Kalman gain. The range noise level is unknown to the filter; it is tracked
    from the fit residuals, so noiseless ranges give a gain of one and the
    estimate snaps onto the fix."""

    process_noise: float = POSITION_DIFFUSION * 0.02  # m^2 per step
    variance: float = 0.0  # per-axis position variance, m^2
    heading_variance: float = 0.0
    noise_variance: float = 0.0
    noise_dof: int = 0
    fixes: int = 0

    def update(
        self,
        previous: Pose2D,
        reading: SensorReading,
        landmarks: list[tuple[float, float]],
        odom: OdometryDelta,
    ) -> tuple[Pose2D, int]:
        f = abs(odom.forward)
        self.heading_variance += (ODOM_ALPHA_ROT * abs(odom.rotation) + ODOM_ALPHA_ROT_TRANS * f) ** 2
        self.variance += (ODOM_ALPHA_TRANS * f) ** 2 + f * f * self.heading_variance + self.process_noise
        x = previous.x + odom.forward * math.cos(previous.theta)
        y = previous.y + odom.forward * math.sin(previous.theta)
        theta = previous.theta + odom.rotation
        valid = [(lm, r) for lm, r in zip(landmarks, reading.ranges) if r is not None]
        if len(valid) < 3:
            return Pose2D(x, y, theta), kernels.OK
        lx = [lm[0] for lm, _ in valid]
        ly = [lm[1] for lm, _ in valid]
        rr = [r for _, r in valid]
        ex, ey, status, _ = kernels.trilaterate(lx, ly, rr, x, y)
        if status != kernels.OK:
            return Pose2D(x, y, theta), status
        r_fix = self._fix_variance(ex, ey, lx, ly, rr)
        total = self.variance + r_fix
        k = self.variance / total if total > 0.0 else 1.0
        self.variance *= 1.0 - k
        self.fixes += 1
        return Pose2D(x + k * (ex - x), y + k * (ey - y), theta), kernels.OK

    def _fix_variance(self, ex, ey, lx, ly, rr) -> float:
        """Per-axis variance of the fix: noise level times the dilution of
        precision of the landmark geometry."""
        a = b = c = rss = 0.0
        for px, py, r in zip(lx, ly, rr):
            d = math.hypot(ex - px, ey - py)
            rss += (d - r) ** 2
            if d > 0.0:
                ux, uy = (ex - px) / d, (ey - py) / d
                a += ux * ux
                b += ux * uy
                c += uy * uy
        dof = len(rr) - 2
        if self.noise_dof < NOISE_POOL_DOF:
            self.noise_variance = (self.noise_variance * self.noise_dof + rss) / (self.noise_dof + dof)
        else:
            self.noise_variance += NOISE_SMOOTHING * (rss / dof - self.noise_variance)
        self.noise_dof += dof
        det = a * c - b * b
        dop = 0.5 * (a + c) / det if det > 1e-12 else 1e6
        return self.noise_variance * dop


@dataclass
class Robot:
    name: str
    pose: Pose2D
    rng: SplitMix64
    v: float = 0.0
    w: float = 0.0
    mode: str = "idle"  # idle | velocity | navigate
    goal: Pose2D | None = None
    tolerance: float = 0.3
    path: list[tuple[float, float]] = field(default_factory=list)
    nav_status: str = "idle"  # idle | active | arrived | unreachable
    estimate: Pose2D | None = None
    last_reading: SensorReading | None = None
    last_odom: OdometryDelta | None = None
    error_sum: float = 0.0
    error_count: int = 0
    divergences: int = 0
    next_replan: float | None = None
    localizer: Localizer = field(default_factory=Localizer)


class ChannelBus:
    """Registry of channel publishers, with scripted late registrations."""

    def __init__(self) -> None:
        self.publishers: dict[str, set[str]] = {}
        self.scheduled: list[tuple[int, str, str]] = []

    def register(self, channel: str, publisher: str) -> None:
        self.publishers.setdefault(channel, set()).add(publisher)

    def schedule(self, channel: str, at_step: int, publisher: str = "scripted") -> None:
        self.scheduled.append((at_step, channel, publisher))

    def poll(self, step_index: int) -> None:
        due = [s for s in self.scheduled if s[0] <= step_index]
        self.scheduled = [s for s in self.scheduled if s[0] > step_index]
        for _, channel, publisher in due:
            self.register(channel, publisher)

    def has_publisher(self, channel: str) -> bool:
        return bool(self.publishers.get(channel))


def shape_of(model: str) -> str:
    """Select a catalog shape from a model URI such as ``pkg://models/box.sdf``."""
    base = re.split(r"[/:]", model)[-1]
    base = base.rsplit(".", 1)[0] if "." in base else base
    if base not in SHAPES:
        raise SpawnError(f"unknown model {model!r}; known shapes: {', '.join(sorted(SHAPES))}")
    return base


class World:
    def __init__(self, grid: GridMap | None = None, seed: int = 0, dt: float = 0.02):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.grid = grid if grid is not None else load_map()
        self.seed = seed
        self.dt = dt
        self.steps = 0
        self._extra_time = 0.0
        self.sigma = 0.0
        self.drop = 0.0
        self.robots: dict[str, Robot] = {}
        self.obstacles: dict[str, Entity] = {}
        self.channels = ChannelBus()
        for ch in DEFAULT_CHANNELS:
            self.channels.register(ch, "world")
        self.log: list[tuple[str, str, dict]] = []
        self._occupied = self.grid.walls.copy()
        self._blocked = inflate_grid(self._occupied, self.grid)

    # -- state ------------------------------------------------------------

    @property
    def clock(self) -> float:
        # n * dt rather than a running sum, so the clock never drifts
        return self.steps * self.dt + self._extra_time

    @property
    def landmarks(self) -> list[tuple[float, float]]:
        return self.grid.landmarks

    @property
    def blocked(self) -> np.ndarray:
        return self._blocked

    def entities(self) -> dict[str, Entity]:
        out = {n: Entity(n, "robot", r.pose) for n, r in self.robots.items()}
        out.update(self.obstacles)
        return out

    def add_robot(self, name: str, pose: Pose2D | None = None) -> Robot:
        if name in self.robots or name in self.obstacles:
            raise WorldError(f"entity {name!r} already exists")
        robot = Robot(name, pose or Pose2D(), SplitMix64(mix_seed(self.seed, fnv1a64(name))))
        self.robots[name] = robot
        return robot

    def robot(self, name: str) -> Robot:
        try:
            return self.robots[name]
        except KeyError:
            raise WorldError(f"no robot named {name!r}") from None

    def poll(self, step_index: int) -> None:
        self.channels.poll(step_index)

    def _emit(self, kind: str, source: str, **data) -> None:
        self.log.append((kind, source, data))

    def drain_log(self) -> list[tuple[str, str, dict]]:
        out, self.log = self.log, []
        return out

    # -- faults -------------------------------------------------------------

    def set_fault_params(self, name: str, value: float) -> None:
        value = float(value)
        if math.isnan(value):
            raise ValueError(f"fault parameter {name!r} must be a number")
        if name == "gaussian_noise_std_deviation":
            self.sigma = max(0.0, value)
        elif name == "random_drop_percentage":
            self.drop = min(1.0, max(0.0, value))
        else:
            raise UnknownParameter(f"unknown fault parameter {name!r}; known: {', '.join(FAULT_PARAMS)}")
        self._emit("parameter", FAULT_NODE, name=name, value=value)

    def set_node_parameter(self, node: str, name: str, value: float) -> None:
        if node != FAULT_NODE:
            raise UnknownParameter(f"unknown node {node!r}")
        self.set_fault_params(name, value)

    # -- commands -------------------------------------------------------------

    def seed_localization(self, name: str, pose: Pose2D) -> None:
        robot = self.robot(name)
        robot.estimate = Pose2D(pose.x, pose.y, pose.theta)
        robot.localizer = Localizer(POSITION_DIFFUSION * self.dt)
        self._emit("localization", name, x=pose.x, y=pose.y, theta=pose.theta)

    def set_pose(self, name: str, pose: Pose2D) -> None:
        robot = self.robot(name)
        robot.pose = Pose2D(pose.x, pose.y, pose.theta)

    def set_velocity(self, name: str, v: float, w: float) -> None:
        robot = self.robot(name)
        robot.mode = "velocity"
        robot.v = max(-MAX_SPEED, min(MAX_SPEED, v))
        robot.w = max(-MAX_TURN, min(MAX_TURN, w))
        robot.nav_status = "idle"

    def navigate(self, name: str, goal: Pose2D, tolerance: float = 0.3) -> bool:
        robot = self.robot(name)
        robot.goal = goal
        robot.tolerance = tolerance
        robot.mode = "navigate"
        robot.v = robot.w = 0.0
        if robot.pose.distance(goal) <= tolerance:
            robot.nav_status = "arrived"
            robot.mode = "idle"
            return True
        return self._replan(robot)

    def _replan(self, robot: Robot) -> bool:
        goal = (robot.goal.x, robot.goal.y)
        path = plan_path(self.grid, self._blocked, (robot.pose.x, robot.pose.y), goal)
        robot.next_replan = None
        if path is None:
            robot.path = []
            if self.grid.in_bounds(*goal) and not self._blocked[self.grid.cell(*goal)]:
                # goal is free space that cannot be reached right now
                robot.nav_status = "active"
                robot.next_replan = self.clock + REPLAN_PERIOD
                self._emit("plan", robot.name, status="no_path")
                return False
            robot.nav_status = "unreachable"
            robot.mode = "idle"
            self._emit("plan", robot.name, status="unreachable")
            return False
        robot.path = path[1:]
        robot.nav_status = "active"
        self._emit("plan", robot.name, status="ok", waypoints=len(path))
        return True

    def spawn(self, name: str, model: str, pose: Pose2D) -> Entity:
        shape = shape_of(model)
        if name in self.robots or name in self.obstacles:
            raise SpawnError(f"entity {name!r} already exists")
        for other in self.entities().values():
            if other.pose.distance(pose) < SPAWN_MIN_SEPARATION:
                raise SpawnError(f"spawn of {name!r} overlaps {other.name!r}")
        h = SHAPES[shape]
        ent = Entity(name, "obstacle", Pose2D(pose.x, pose.y, pose.theta), h, shape)
        self.obstacles[name] = ent
        footprint = self._footprint_cells(ent)
        self._occupied |= footprint
        self._blocked = inflate_grid(self._occupied, self.grid)
        self._emit("spawn", name, model=shape, x=pose.x, y=pose.y)
        new_blocked = inflate_grid(footprint, self.grid)
        for robot in self.robots.values():
            if robot.nav_status != "active":
                continue
            remaining = [(robot.pose.x, robot.pose.y)] + robot.path
            if not path_clear(self.grid, new_blocked, remaining):
                self._replan(robot)
        return ent

    def _footprint_cells(self, ent: Entity) -> np.ndarray:
        g = self.grid
        cols = g.x_min + (np.arange(g.cols) + 0.5) * g.resolution
        rows = g.y_max - (np.arange(g.rows) + 0.5) * g.resolution
        inside_x = np.abs(cols - ent.pose.x) <= ent.half_extent
        inside_y = np.abs(rows - ent.pose.y) <= ent.half_extent
        return np.ascontiguousarray(np.outer(inside_y, inside_x).astype(np.uint8))

    # -- queries --------------------------------------------------------------

    def pose(self, name: str, frame: str = "ground_truth") -> Pose2D:
        robot = self.robot(name)
        if frame == "ground_truth":
            return robot.pose
        if frame == "estimated":
            if robot.estimate is None:
                raise WorldError(f"robot {name!r} has no localization estimate")
            return robot.estimate
        raise WorldError(f"unknown frame {frame!r}")

    def localization_error(self, name: str) -> float:
        robot = self.robot(name)
        if robot.estimate is None:
            raise WorldError(f"robot {name!r} has no localization estimate")
        return robot.estimate.distance(robot.pose)

    def metrics(self) -> dict[str, float]:
        total = sum(r.error_sum for r in self.robots.values())
        count = sum(r.error_count for r in self.robots.values())
        if not count:
            return {}
        return {"mean_localization_error": total / count}

    def channel_sample(self, channel: str) -> dict:
        data: dict = {}
        if channel == "/clock":
            data["t"] = self.clock
        for name, robot in self.robots.items():
            if channel == "/tf":
                data.update({f"{name}.x": robot.pose.x, f"{name}.y": robot.pose.y, f"{name}.theta": robot.pose.theta})
            elif channel == "/pose_estimate" and robot.estimate is not None:
                e = robot.estimate
                data.update({f"{name}.x": e.x, f"{name}.y": e.y, f"{name}.theta": e.theta})
            elif channel == "/odom" and robot.last_odom is not None:
                data.update({f"{name}.forward": robot.last_odom.forward, f"{name}.rotation": robot.last_odom.rotation})
            elif channel == "/scan" and robot.last_reading is not None:
                for i, r in enumerate(robot.last_reading.ranges):
                    data[f"{name}.range{i}"] = r
        return data

    # -- simulation -----------------------------------------------------------

    def read_sensor(self, name: str) -> SensorReading:
        """One range per landmark. Both random draws are taken for every
        landmark so the stream does not depend on the fault settings."""
        robot = self.robot(name)
        out = []
        for lx, ly in self.grid.landmarks:
            u = robot.rng.random()
            z = robot.rng.normal()
            true = math.hypot(robot.pose.x - lx, robot.pose.y - ly)
            out.append(None if u < self.drop else max(0.0, true + self.sigma * z))
        return SensorReading(tuple(out), self.clock)

    def _control(self, robot: Robot) -> tuple[float, float]:
        if robot.mode == "velocity":
            return robot.v, robot.w
        if robot.mode != "navigate" or robot.nav_status != "active":
            return 0.0, 0.0
        p = robot.pose
        if p.distance(robot.goal) <= robot.tolerance:
            robot.nav_status = "arrived"
            robot.mode = "idle"
            robot.path = []
            self._emit("arrived", robot.name, x=p.x, y=p.y)
            return 0.0, 0.0
        if not robot.path:
            if robot.next_replan is None or self.clock + 1e-9 < robot.next_replan or not self._replan(robot):
                return 0.0, 0.0
        while len(robot.path) > 1 and math.hypot(robot.path[0][0] - p.x, robot.path[0][1] - p.y) < WAYPOINT_TOLERANCE:
            robot.path.pop(0)
        tx, ty = robot.path[0]
        err = normalize_angle(math.atan2(ty - p.y, tx - p.x) - p.theta)
        w = max(-MAX_TURN, min(MAX_TURN, TURN_GAIN * err))
        if abs(err) > ROTATE_IN_PLACE:
            return 0.0, w
        dist = math.hypot(tx - p.x, ty - p.y)
        v = min(MAX_SPEED, dist / self.dt) * math.cos(err)
        return v, w

    def _motion_blocked(self, robot: Robot, x: float, y: float) -> bool:
        if self.grid.is_wall(x, y):
            return True
        for ob in self.obstacles.values():
            if ob.contains(x, y):
                return True
        for other in self.robots.values():
            if other is robot:
                continue
            d_new = math.hypot(x - other.pose.x, y - other.pose.y)
            if d_new < ROBOT_SEPARATION and d_new < math.hypot(robot.pose.x - other.pose.x, robot.pose.y - other.pose.y):
                return True
        return False

    def step(self, dt: float | None = None) -> None:
        dt = self.dt if dt is None else dt
        if dt <= 0:
            raise ValueError("dt must be positive")
        for robot in self.robots.values():
            v, w = self._control(robot)
            p = robot.pose
            nx = p.x + v * math.cos(p.theta) * dt
            ny = p.y + v * math.sin(p.theta) * dt
            forward = v * dt
            if v != 0.0 and self._motion_blocked(robot, nx, ny):
                nx, ny, forward = p.x, p.y, 0.0
            robot.pose = Pose2D(nx, ny, p.theta + w * dt)
            self._localize(robot, forward, w * dt)
        if dt == self.dt:
            self.steps += 1
        else:
            self._extra_time += dt

    def _localize(self, robot: Robot, forward: float, rotation: float) -> None:
        n1 = robot.rng.normal()
        n2 = robot.rng.normal()
        odom = OdometryDelta(
            forward + ODOM_ALPHA_TRANS * abs(forward) * n1,
            rotation + (ODOM_ALPHA_ROT * abs(rotation) + ODOM_ALPHA_ROT_TRANS * abs(forward)) * n2,
        )
        robot.last_odom = odom
        reading = self.read_sensor(robot.name)
        robot.last_reading = reading
        if robot.estimate is None:
            return
        estimate, status = robot.localizer.update(robot.estimate, reading, self.grid.landmarks, odom)
        if status != kernels.OK:
            robot.divergences += 1
            self._emit("localization_diverged", robot.name, status=int(status))
        robot.estimate = estimate
        robot.error_sum += estimate.distance(robot.pose)
        robot.error_count += 1
