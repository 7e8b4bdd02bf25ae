import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURES, model_of
from scenrun.btree import NodeStatus, TickContext, TreeKind, snapshot, tick
from scenrun.compiler import (
    STANDARD_PLUGINS,
    CompileError,
    DuplicatePluginError,
    ManifestError,
    PluginRegistry,
    compile_model,
    load_manifest,
    missing_plugins,
    recording_channels,
    register_plugin,
    standard_registry,
)
from scenrun.compiler.behaviors import Wait, resolve_frame
from scenrun.lang import parse_source
from scenrun.model import ParallelSpec, SerialSpec, build_model, load_libraries
from scenrun.sim.maps import load_map
from scenrun.sim.world import Pose2D, World

S, R, F = NodeStatus.SUCCESS, NodeStatus.RUNNING, NodeStatus.FAILURE


def test_every_builtin_action_has_a_plugin():
    reg = standard_registry()
    assert missing_plugins(reg) == []
    assert len(reg.plugins) == len(STANDARD_PLUGINS)


def test_missing_plugin_detected():
    reg = standard_registry().copy()
    del reg.plugins["osc.standard.log"]
    assert missing_plugins(reg) == ["osc.standard.log"]


def test_nav2_tree_shape(nav2_source):
    root = compile_model(model_of(nav2_source), standard_registry())
    assert root.name == "example_nav2" and root.kind is TreeKind.SERIAL
    (par,) = root.children
    assert par.kind is TreeKind.PARALLEL
    main, timeout = par.children
    assert [c.name for c in main.children] == ["init_nav2", "nav_to_pose", "emit end"]
    assert timeout.name == "time_out" and [c.name for c in timeout.children] == ["wait", "emit fail"]
    assert len(root) == 9
    assert [n.id for n in root.walk()] == list(range(9))


def test_compile_requires_concrete(fault_source):
    with pytest.raises(CompileError, match="not concrete"):
        compile_model(model_of(fault_source), standard_registry())


def test_unregistered_action_lists_candidates():
    src = "action nonexistent_action:\n    x: float = 1.0\nscenario s:\n    do serial:\n        nonexistent_action()\n"
    with pytest.raises(CompileError) as exc:
        compile_model(model_of(src), standard_registry())
    msg = str(exc.value.diagnostics[0])
    assert "nonexistent_action" in msg and "osc.standard.log" in msg


def test_factory_rejection_surfaces_as_compile_error():
    src = "import osc.robotics\nscenario s:\n    robot: differential_drive_robot\n    do serial:\n        robot.nav_to_pose(pose_3d(), goal_tolerance: -1m)\n"
    with pytest.raises(CompileError, match="tolerance"):
        compile_model(model_of(src), standard_registry())
    src = "import osc.robotics\nscenario s:\n    do serial:\n        wait elapsed(-1s)\n"
    with pytest.raises(CompileError, match="non-negative"):
        compile_model(model_of(src), standard_registry())


def test_register_and_duplicate():
    reg = PluginRegistry()
    plugin = next(p for p in STANDARD_PLUGINS if p.name == "osc.standard.log")
    register_plugin(reg, plugin)
    src = "scenario s:\n    do serial:\n        log('hi')\n"
    root = compile_model(model_of(src), reg)
    assert root.children[0].children[0].name == "log"
    with pytest.raises(DuplicatePluginError):
        register_plugin(reg, plugin)


def test_manifest_extends_catalog():
    reg = standard_registry()
    added = load_manifest(reg, FIXTURES / "toy.manifest")
    assert added == ["toy.extras.beep"]
    ast = parse_source((FIXTURES / "uses_toy.osc").read_text())
    (model,) = build_model(ast, load_libraries(ast, [FIXTURES / "toylib"]))
    root = compile_model(model, reg)
    ctx = TickContext()
    statuses = [tick(root, ctx) for _ in range(3)]
    assert statuses == [R, R, S]
    assert ctx.blackboard.terminal == "success"


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("toy.extras.beep\n", "expected"),
        ("a.b = nowhere_module_xyz:f\n", "cannot import"),
        ("a.b = toy_plugin.py:missing\n", "no attribute"),
        ("a.b = missing.py:f\n", "not found"),
        ("a.b = toy_plugin.py:make_beep\na.b = toy_plugin.py:make_beep\n", "already registered"),
    ],
)
def test_manifest_errors(tmp_path, text, fragment):
    (tmp_path / "toy_plugin.py").write_text((FIXTURES / "toy_plugin.py").read_text())
    path = tmp_path / "m.manifest"
    path.write_text(text)
    with pytest.raises(ManifestError, match=fragment):
        load_manifest(PluginRegistry(), path)


def test_compile_is_deterministic(nav2_source):
    reg = standard_registry()
    m = model_of(nav2_source)
    assert snapshot(compile_model(m, reg)) == snapshot(compile_model(m, reg))


def test_recording_channels_collected():
    src = (FIXTURES / "gated.osc").read_text()
    root = compile_model(model_of(src), standard_registry())
    assert recording_channels(root) == ["/tf", "/late_topic"]


def test_resolve_frame():
    assert resolve_frame("estimated", "x_gt") == "estimated"
    assert resolve_frame("", "turtlebot4_base_link_gt") == "ground_truth"
    assert resolve_frame("", "base_link") == "estimated"
    assert resolve_frame("", "") == "ground_truth"


# -- structural fidelity ------------------------------------------------------------

labels = st.one_of(st.none(), st.sampled_from(["alpha", "beta", "gamma"]))
leaf_src = st.sampled_from(["emit end", "emit tick", "wait elapsed(1s)", "log('m')"])
spec = st.recursive(
    st.tuples(labels, leaf_src),
    lambda kids: st.tuples(labels, st.sampled_from(["serial", "parallel"]), st.lists(kids, min_size=1, max_size=3)),
    max_leaves=15,
)


def render(s, indent):
    pad = " " * indent
    label = f"{s[0]}: " if s[0] else ""
    if len(s) == 2:
        return [f"{pad}{label}{s[1]}"]
    lines = [f"{pad}{label}{s[1]}:"]
    for c in s[2]:
        lines += render(c, indent + 4)
    return lines


def shape_of_spec(b):
    if isinstance(b, (SerialSpec, ParallelSpec)):
        kind = TreeKind.SERIAL if isinstance(b, SerialSpec) else TreeKind.PARALLEL
        return (kind, b.label, tuple(shape_of_spec(c) for c in b.children))
    return (TreeKind.LEAF, b.label, ())


def shape_of_tree(n):
    kids = tuple(shape_of_tree(c) for c in n.children)
    default = {TreeKind.SERIAL: "serial", TreeKind.PARALLEL: "parallel"}.get(n.kind)
    label = None if n.name == default or n.kind is TreeKind.LEAF and n.name in ("wait", "log", "emit end", "emit tick") else n.name
    return (n.kind, label, kids)


@settings(max_examples=200, deadline=None)
@given(spec.filter(lambda s: len(s) == 3))
def test_structural_fidelity(s):
    src = "scenario s:\n" + "\n".join(render((None, f"do {s[1]}", s[2]), 4)) + "\n"
    root = compile_model(model_of(src), standard_registry())
    assert root.name == "s" and len(root.children) == 1
    model_shape = shape_of_spec(model_of(src).behavior)
    assert shape_of_tree(root.children[0]) == model_shape


# -- standard behaviors against the simulator -----------------------------------------


def world(name="empty", **kw):
    w = World(load_map(name), seed=kw.pop("seed", 0), dt=kw.pop("dt", 0.1))
    w.add_robot("robot")
    return w


def drive(node, w, max_ticks=10_000):
    ctx = TickContext(backend=w, dt=w.dt)
    for n in range(1, max_ticks + 1):
        w.step()
        ctx.sim_time = w.clock
        status = tick(node, ctx)
        if status.finished:
            return status, n, ctx
    return status, max_ticks, ctx


def robot_leaf(source_line, actors="    robot: differential_drive_robot\n", imports="import osc.robotics\nimport osc.sim\n"):
    src = f"{imports}scenario s:\n{actors}    do serial:\n        {source_line}\n"
    return compile_model(model_of(src), standard_registry()).children[0].children[0]


@pytest.mark.parametrize("duration, ticks", [(0.0, 1), (60.0, 601)])
def test_wait_tick_count(duration, ticks):
    from scenrun.btree import leaf

    status, n, _ = drive(leaf("wait", Wait(duration)), world(dt=0.1))
    assert (status, n) == (S, ticks)


def test_emit_leaf_emits():
    root = compile_model(model_of("scenario s:\n    do serial:\n        emit end\n"), standard_registry())
    ctx = TickContext(sim_time=4.2)
    assert tick(root, ctx) is S
    assert ctx.blackboard.events == [("end", 4.2)] and ctx.blackboard.terminal == "success"


def test_nav_to_current_pose_succeeds_first_tick():
    status, n, _ = drive(robot_leaf("robot.nav_to_pose(pose_3d())"), world())
    assert (status, n) == (S, 1)


def test_nav_goal_inside_wall_fails():
    status, n, ctx = drive(robot_leaf("robot.nav_to_pose(pose_3d(position_3d(x: 0.25m, y: 1.75m)))"), world("maze"))
    assert status is F and n == 1
    assert any(kind == "unreachable" for _, _, kind, _ in ctx.trace)


def test_tf_close_to_already_inside():
    status, n, _ = drive(robot_leaf("robot.tf_close_to(position_3d(x: 0.1m), 0.4m)"), world())
    assert (status, n) == (S, 1)


def test_unknown_frame_rejected():
    with pytest.raises(CompileError, match="frame"):
        robot_leaf("robot.tf_close_to(position_3d(), 0.4m, frame: 'map')")


def test_set_velocity_kinematics():
    w = world(dt=0.1)
    node = robot_leaf("robot.set_velocity(0.3, 0.0)")
    status, _, _ = drive(node, w, 1)
    assert status is S
    x0 = w.robot("robot").pose.x
    for _ in range(10):
        w.step()
    assert w.robot("robot").pose.x - x0 == pytest.approx(0.3 * 0.1 * 10, abs=1e-9)
    drive(robot_leaf("robot.set_velocity(0.0, 0.0)"), w, 1)
    x1 = w.robot("robot").pose.x
    w.step()
    assert w.robot("robot").pose.x == x1


def test_set_node_parameter_sets_sigma():
    w = world()
    node = robot_leaf("set_node_parameter('laserscan_modification', 'gaussian_noise_std_deviation', '0.2')", actors="")
    assert drive(node, w, 1)[0] is S
    assert w.sigma == 0.2
    bad = robot_leaf("set_node_parameter('no_such_node', 'x', '0.2')", actors="")
    status, _, ctx = drive(bad, w, 1)
    assert status is F and ctx.blackboard.faults


def test_init_localization_seeds_exactly():
    w = world()
    w.set_pose("robot", Pose2D(0.5, -0.5, 0.0))
    node = robot_leaf("robot.init_localization(pose_3d(position_3d(x: 0.5m, y: -0.5m)))")
    assert drive(node, w, 1)[0] is S
    est = w.pose("robot", "estimated")
    assert abs(est.x - 0.5) < 1e-9 and abs(est.y + 0.5) < 1e-9


def test_spawn_and_duplicate_spawn():
    w = World(load_map("empty"), dt=0.1)
    actors = "    box: sim_object\n    crate: sim_object\n"
    line = "{}.spawn(pose_3d(position_3d(x: 1.0m)), 'pkg://models/box.sdf')"
    assert drive(robot_leaf(line.format("box"), actors), w, 1)[0] is S
    assert w.obstacles["box"].pose.x == 1.0
    status, _, ctx = drive(robot_leaf(line.format("crate"), actors), w, 1)
    assert status is F and "overlaps" in ctx.blackboard.faults[0][1]


def test_unknown_model_uri_rejected():
    with pytest.raises(CompileError, match="model"):
        robot_leaf("box.spawn(pose_3d(), 'pkg://models/teapot.sdf')", "    box: sim_object\n")
