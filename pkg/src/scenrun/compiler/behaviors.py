"""Standard action behaviors and the builtin plugin catalog.

Each factory takes the bound argument map and the actor name and returns a
leaf behavior. Factories validate what can be checked before execution and
raise PluginError for semantically invalid arguments.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Mapping

from ..btree import ExecutionFault, NodeStatus, TickContext, emit_event
from ..model import PhysicalValue, StructValue
from ..sim.world import Pose2D, SpawnError, UnknownParameter, WorldError, shape_of
from .registry import ActionPlugin, PluginError, PluginRegistry, missing_plugins, register_plugin

log = logging.getLogger(__name__)

SUCCESS = NodeStatus.SUCCESS
RUNNING = NodeStatus.RUNNING
FAILURE = NodeStatus.FAILURE

# time slack when comparing accumulated sim-time against a deadline
TIME_EPS = 1e-9

FRAMES = ("ground_truth", "estimated")


def magnitude(value: Any) -> float:
    if isinstance(value, PhysicalValue):
        return value.magnitude
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    raise PluginError(f"expected a number, got {value!r}")


def to_pose(value: Any) -> Pose2D:
    """Project a pose_3d (or position_3d) struct onto the plane."""
    if not isinstance(value, StructValue):
        raise PluginError(f"expected a pose, got {value!r}")
    if "position" in value.fields:
        pos = value.fields["position"]
        yaw = magnitude(value.fields["orientation"].fields["yaw"]) if "orientation" in value.fields else 0.0
    else:
        pos, yaw = value, 0.0
    return Pose2D(magnitude(pos.fields["x"]), magnitude(pos.fields["y"]), yaw)


def _backend(ctx: TickContext):
    if ctx.backend is None:
        raise ExecutionFault("no simulation backend attached")
    return ctx.backend


class _Leaf:
    """Base for leaf behaviors; ``initialise`` runs on the first tick after a reset."""

    channels: tuple[str, ...] = ()

    def initialise(self, ctx: TickContext) -> None:
        pass

    def update(self, ctx: TickContext) -> NodeStatus:
        raise NotImplementedError


class Wait(_Leaf):
    def __init__(self, duration: float):
        if not duration >= 0:
            raise PluginError(f"wait duration must be non-negative, got {duration}")
        self.duration = duration
        self.start = 0.0

    def initialise(self, ctx):
        self.start = ctx.sim_time

    def update(self, ctx):
        return SUCCESS if ctx.sim_time - self.start + TIME_EPS >= self.duration else RUNNING


class Emit(_Leaf):
    def __init__(self, event: str):
        if not event.isidentifier():
            raise PluginError(f"event name {event!r} is not an identifier")
        self.event = event

    def update(self, ctx):
        emit_event(ctx.blackboard, self.event, ctx.sim_time)
        ctx.record("event", name=self.event)
        return SUCCESS


class Log(_Leaf):
    def __init__(self, message: str):
        self.message = message

    def update(self, ctx):
        log.info("%s", self.message)
        ctx.record("log", message=self.message)
        return SUCCESS


class Record(_Leaf):
    """Declares channels for the event log; the runner gates the start of
    execution until each has a publisher."""

    def __init__(self, channels: list[str], output: str):
        if not all(isinstance(c, str) and c for c in channels):
            raise PluginError("record channels must be non-empty strings")
        self.channels = tuple(channels)
        self.output = output

    def update(self, ctx):
        recorded = ctx.blackboard.get("recorded_channels", [])
        ctx.blackboard.set("recorded_channels", recorded + [c for c in self.channels if c not in recorded])
        return SUCCESS


class SetNodeParameter(_Leaf):
    def __init__(self, node_name: str, parameter_name: str, parameter_value: str):
        self.node_name = node_name
        self.parameter_name = parameter_name
        self.parameter_value = parameter_value

    def update(self, ctx):
        try:
            value = float(self.parameter_value)
        except ValueError:
            raise ExecutionFault(f"parameter value {self.parameter_value!r} is not a number") from None
        try:
            _backend(ctx).set_node_parameter(self.node_name, self.parameter_name, value)
        except UnknownParameter as exc:
            raise ExecutionFault(str(exc)) from None
        ctx.record("parameter", node=self.node_name, name=self.parameter_name, value=value)
        return SUCCESS


class _ActorLeaf(_Leaf):
    def __init__(self, actor: str | None):
        if actor is None:
            raise PluginError(f"{type(self).__name__} must be called on an actor")
        self.actor = actor


class InitLocalization(_ActorLeaf):
    def __init__(self, initial_pose: Pose2D, actor: str | None):
        super().__init__(actor)
        self.pose = initial_pose

    def update(self, ctx):
        try:
            _backend(ctx).seed_localization(self.actor, self.pose)
        except WorldError as exc:
            raise ExecutionFault(str(exc)) from None
        return SUCCESS


class NavToPose(_ActorLeaf):
    def __init__(self, goal: Pose2D, tolerance: float, actor: str | None):
        super().__init__(actor)
        if not tolerance > 0:
            raise PluginError(f"goal tolerance must be positive, got {tolerance}")
        self.goal = goal
        self.tolerance = tolerance

    def initialise(self, ctx):
        try:
            _backend(ctx).navigate(self.actor, self.goal, self.tolerance)
        except WorldError as exc:
            raise ExecutionFault(str(exc)) from None

    def update(self, ctx):
        status = _backend(ctx).robot(self.actor).nav_status
        if status == "arrived":
            return SUCCESS
        if status == "active":
            return RUNNING
        ctx.record("unreachable", x=self.goal.x, y=self.goal.y)
        return FAILURE


class TfCloseTo(_ActorLeaf):
    def __init__(self, reference: Pose2D, threshold: float, frame: str, actor: str | None):
        super().__init__(actor)
        if not threshold > 0:
            raise PluginError(f"threshold must be positive, got {threshold}")
        if frame not in FRAMES:
            raise PluginError(f"unknown frame {frame!r}; expected one of {', '.join(FRAMES)}")
        self.reference = reference
        self.threshold = threshold
        self.frame = frame

    def update(self, ctx):
        backend = _backend(ctx)
        try:
            pose = backend.pose(self.actor, self.frame)
        except WorldError as exc:
            raise ExecutionFault(str(exc)) from None
        if math.hypot(pose.x - self.reference.x, pose.y - self.reference.y) > self.threshold:
            return RUNNING
        truth = backend.pose(self.actor, "ground_truth")
        ctx.record("trigger", frame=self.frame, x=truth.x, y=truth.y, frame_x=pose.x, frame_y=pose.y)
        return SUCCESS


def resolve_frame(frame: str, robot_frame_id: str) -> str:
    """An explicit ``frame`` wins; otherwise a robot frame id ending in
    ``_gt`` selects ground truth and any other id the estimate."""
    if frame:
        return frame
    if robot_frame_id and not robot_frame_id.endswith("_gt"):
        return "estimated"
    return "ground_truth"


class SetVelocity(_ActorLeaf):
    def __init__(self, linear: float, angular: float, actor: str | None):
        super().__init__(actor)
        self.linear = linear
        self.angular = angular

    def update(self, ctx):
        try:
            _backend(ctx).set_velocity(self.actor, self.linear, self.angular)
        except WorldError as exc:
            raise ExecutionFault(str(exc)) from None
        return SUCCESS


class SetPose(_ActorLeaf):
    def __init__(self, pose: Pose2D, actor: str | None):
        super().__init__(actor)
        self.pose = pose

    def update(self, ctx):
        try:
            _backend(ctx).set_pose(self.actor, self.pose)
        except WorldError as exc:
            raise ExecutionFault(str(exc)) from None
        return SUCCESS


class Spawn(_ActorLeaf):
    def __init__(self, pose: Pose2D, model: str, actor: str | None):
        super().__init__(actor)
        try:
            shape_of(model)
        except SpawnError as exc:
            raise PluginError(str(exc)) from None
        self.pose = pose
        self.model = model

    def update(self, ctx):
        try:
            _backend(ctx).spawn(self.actor, self.model, self.pose)
        except SpawnError as exc:
            raise ExecutionFault(str(exc)) from None
        ctx.record("spawn", entity=self.actor, x=self.pose.x, y=self.pose.y)
        return SUCCESS


# -- factories ----------------------------------------------------------------


def _log(args: Mapping[str, Any], actor):
    return Log(args["message"])


def _record(args, actor):
    return Record(list(args["channels"]), args["output"])


def _set_node_parameter(args, actor):
    return SetNodeParameter(args["node_name"], args["parameter_name"], args["parameter_value"])


def _init_localization(args, actor):
    return InitLocalization(to_pose(args["initial_pose"]), actor)


def _nav_to_pose(args, actor):
    return NavToPose(to_pose(args["goal"]), magnitude(args["goal_tolerance"]), actor)


def _tf_close_to(args, actor):
    frame = resolve_frame(args.get("frame", ""), args.get("robot_frame_id", ""))
    return TfCloseTo(to_pose(args["reference_point"]), magnitude(args["threshold"]), frame, actor)


def _set_velocity(args, actor):
    return SetVelocity(magnitude(args["linear"]), magnitude(args["angular"]), actor)


def _set_pose(args, actor):
    return SetPose(to_pose(args["pose"]), actor)


def _spawn(args, actor):
    return Spawn(to_pose(args["spawn_pose"]), args["model"], actor)


STANDARD_PLUGINS = (
    ActionPlugin("osc.standard.log", _log),
    ActionPlugin("osc.standard.record", _record),
    ActionPlugin("osc.standard.set_node_parameter", _set_node_parameter),
    ActionPlugin("osc.robotics.differential_drive_robot.init_localization", _init_localization),
    ActionPlugin("osc.robotics.differential_drive_robot.init_nav2", _init_localization),
    ActionPlugin("osc.robotics.differential_drive_robot.nav_to_pose", _nav_to_pose, ("/tf",)),
    ActionPlugin("osc.robotics.differential_drive_robot.tf_close_to", _tf_close_to, ("/tf", "/pose_estimate")),
    ActionPlugin("osc.robotics.differential_drive_robot.set_velocity", _set_velocity),
    ActionPlugin("osc.sim.sim_object.spawn", _spawn),
    ActionPlugin("osc.sim.differential_drive_robot.set_pose", _set_pose),
)


def standard_registry() -> PluginRegistry:
    """A registry holding every builtin plugin. Fails loudly if a builtin
    library declares an action without an implementation."""
    registry = PluginRegistry()
    for plugin in STANDARD_PLUGINS:
        register_plugin(registry, plugin)
    registry.libraries.update({"osc.standard", "osc.robotics", "osc.sim"})
    missing = missing_plugins(registry)
    if missing:
        raise PluginError(f"builtin actions without a plugin: {', '.join(missing)}")
    return registry
