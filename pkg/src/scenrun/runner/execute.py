"""Scenario execution: the tick loop, the recording gate and sweeps."""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..btree import Blackboard, NodeStatus, TickContext, TreeNode, snapshot, tick
from ..compiler import CompileError, PluginError, compile_model, load_manifest, recording_channels, standard_registry
from ..lang import OscError, parse_source, render_diagnostics
from ..model import ScenarioModel, build_model, check_concrete, load_libraries, to_plain
from ..sim.maps import MapError, load_map
from ..sim.rng import mix_seed
from ..sim.world import World
from ..variation import ConcreteVariant, VariationError, enumerate_variations, materialize, variation_axes
from .config import EventLogRecord, ExecutionMode, RunConfig, RunResult, Verdict

log = logging.getLogger(__name__)

ROBOT_TYPES = {"robot", "differential_drive_robot"}


class LoadError(Exception):
    def __init__(self, diagnostics: list[str]):
        super().__init__("\n".join(diagnostics))
        self.diagnostics = diagnostics


def load_models(config: RunConfig) -> list[ScenarioModel]:
    """Parse and build every scenario of ``config.scenario_file``."""
    path = config.scenario_file
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise LoadError([f"{path}: cannot read scenario file: {exc.strerror or exc}"]) from None
    source = data.decode("utf-8", errors="replace")
    try:
        file_ast = parse_source(data, str(path))
        libs = load_libraries(file_ast, config.library_dirs)
        return build_model(file_ast, libs)
    except OscError as exc:
        raise LoadError(render_diagnostics(exc.diagnostics, source).splitlines()) from None


def select_model(models: list[ScenarioModel], name: str | None) -> ScenarioModel:
    if not models:
        raise LoadError(["file declares no scenario"])
    if name is None:
        return models[0]
    for m in models:
        if m.name == name:
            return m
    raise LoadError([f"no scenario named {name!r}; available: {', '.join(m.name for m in models)}"])


def make_registry(config: RunConfig):
    registry = standard_registry()
    if config.plugin_manifest is not None:
        load_manifest(registry, config.plugin_manifest)
    return registry


def _is_robot(td) -> bool:
    return td.name in ROBOT_TYPES or td.inherits in ROBOT_TYPES


class _EventLog:
    def __init__(self) -> None:
        self.records: list[EventLogRecord] = []

    def add(self, t: float, source: str, kind: str, data: dict) -> None:
        self.records.append(EventLogRecord(t, len(self.records), source, kind, _plain_data(data)))

    def dump(self) -> str:
        return "".join(json.dumps(r.to_json(), sort_keys=True) + "\n" for r in self.records)


def _plain_data(data: dict) -> dict:
    return {k: to_plain(v) if not isinstance(v, (int, float, str, bool, type(None))) else v for k, v in data.items()}


@dataclass
class _Loop:
    config: RunConfig
    model: ScenarioModel
    root: TreeNode
    world: World
    variant_id: str | None

    def run(self) -> RunResult:
        cfg = self.config
        bb = Blackboard(self.model.name)
        ctx = TickContext(blackboard=bb, backend=self.world, dt=cfg.dt)
        events = _EventLog()
        gate = recording_channels(self.root)
        tree_log: list[str] = []
        statuses = {n.id: n.status for n in self.root.walk()}
        last_snapshot = None
        events.add(0.0, "runner", "start", {"scenario": self.model.name, "seed": cfg.seed, "map": self.world.grid.name})
        for ch, at in sorted(cfg.delayed_channels.items()):
            self.world.channels.schedule(ch, at)
        start = time.monotonic()
        step_index = 0
        first_tick = None
        verdict, reason = None, ""
        gated_logged = False
        while verdict is None:
            if time.monotonic() - start > cfg.wall_clock_limit:
                verdict, reason = Verdict.TIMEOUT, f"wall-clock limit of {cfg.wall_clock_limit:g} s exceeded"
                break
            self.world.poll(step_index)
            waiting = [ch for ch in gate if not self.world.channels.has_publisher(ch)]
            if waiting:
                if not gated_logged:
                    events.add(0.0, "runner", "gate_wait", {"channels": ",".join(waiting)})
                    gated_logged = True
                step_index += 1
                continue
            if first_tick is None:
                first_tick = step_index
                if gate:
                    events.add(0.0, "runner", "gate_open", {"step": step_index})
            self.world.step()
            ctx.sim_time = self.world.clock
            ctx.step = step_index
            for kind, source, data in self.world.drain_log():
                events.add(ctx.sim_time, source, kind, data)
                if kind == "localization_diverged":
                    bb.set(f"{source}/localization_diverged", True)
            status = tick(self.root, ctx)
            for t, source, kind, data in ctx.trace:
                events.add(t, source, kind, data)
            ctx.trace.clear()
            for kind, source, data in self.world.drain_log():
                events.add(ctx.sim_time, source, kind, data)
            changed = False
            for n in self.root.walk():
                if statuses[n.id] is not n.status:
                    statuses[n.id] = n.status
                    events.add(ctx.sim_time, n.name, "status", {"status": n.status.value})
                    changed = True
            for ch in bb.get("recorded_channels", []):
                events.add(ctx.sim_time, ch, "sample", self.world.channel_sample(ch))
            if cfg.log_tree and changed:
                snap = snapshot(self.root)
                if snap != last_snapshot:
                    tree_log.append(f"t={ctx.sim_time:.3f}\n{snap}\n")
                    last_snapshot = snap
            if bb.terminal is not None:
                verdict = Verdict.SUCCESS if bb.terminal == "success" else Verdict.FAIL
                reason = f"event {_first_terminal(bb)!r} emitted"
            elif status.finished:
                verdict = Verdict.FAIL
                outcome = "failed" if status is NodeStatus.FAILURE else "completed"
                reason = f"behavior tree {outcome} without emitting 'end'"
            step_index += 1
            if cfg.execution_mode is ExecutionMode.REAL_TIME:
                lag = ctx.sim_time - (time.monotonic() - start)
                if lag > 0:
                    time.sleep(lag)
        wall = time.monotonic() - start
        events.add(self.world.clock, "runner", "verdict", {"verdict": verdict.value, "reason": reason})
        metrics = dict(self.world.metrics())
        if first_tick is not None:
            metrics["first_tick_step"] = float(first_tick)
        metrics["steps"] = float(self.world.steps)
        dump = events.dump()
        final = {n: (r.pose.x, r.pose.y, r.pose.theta) for n, r in self.world.robots.items()}
        digest = hashlib.sha256((dump + json.dumps(final, sort_keys=True)).encode()).hexdigest()
        result = RunResult(
            self.model.name,
            verdict,
            self.variant_id,
            sim_duration=self.world.clock,
            wall_duration=wall,
            events=list(bb.events),
            seed=cfg.seed,
            metrics=metrics,
            reason=reason,
            records=events.records,
            first_tick_step=first_tick,
            digest=digest,
        )
        if cfg.output_dir is not None:
            out = Path(cfg.output_dir)
            out.mkdir(parents=True, exist_ok=True)
            (out / "events.jsonl").write_text(dump, encoding="utf-8")
            if cfg.log_tree:
                (out / "tree.log").write_text("\n".join(tree_log), encoding="utf-8")
        return result


def _first_terminal(bb: Blackboard) -> str:
    for name, _ in bb.events:
        if name in ("end", "fail"):
            return name
    return ""


def _error(config: RunConfig, scenario: str, diagnostics: list[str], variant_id: str | None = None) -> RunResult:
    for line in diagnostics:
        log.debug("%s", line)
    return RunResult(
        scenario,
        Verdict.ERROR,
        variant_id,
        seed=config.seed,
        diagnostics=list(diagnostics),
        reason=diagnostics[0] if diagnostics else "error",
    )


def execute_model(config: RunConfig, model: ScenarioModel, variant_id: str | None = None, registry=None) -> RunResult:
    """Compile and run one concrete model. The world is built fresh."""
    check = check_concrete(model)
    if not check:
        n = len(variation_axes(model))
        return _error(
            config,
            model.name,
            [f"scenario {model.name!r} is not concrete: {n} parameter(s) take several values; "
             f"expand it with 'scenrun variations' or run it with 'scenrun sweep'"],
            variant_id,
        )
    try:
        registry = registry if registry is not None else make_registry(config)
        root = compile_model(model, registry)
    except CompileError as exc:
        return _error(config, model.name, [str(d) for d in exc.diagnostics] or ["compilation failed"], variant_id)
    except PluginError as exc:
        return _error(config, model.name, [str(exc)], variant_id)
    try:
        grid = load_map(config.map)
    except MapError as exc:
        return _error(config, model.name, [str(exc)], variant_id)
    world = World(grid, seed=config.seed, dt=config.dt)
    for actor, td in model.actors.items():
        if _is_robot(td):
            world.add_robot(actor)
    try:
        return _Loop(config, model, root, world, variant_id).run()
    except Exception as exc:  # runtime fault outside a leaf's own handling
        log.exception("runtime fault in %s", model.name)
        return _error(config, model.name, [f"runtime fault: {type(exc).__name__}: {exc}"], variant_id)


def run_scenario(config: RunConfig) -> RunResult:
    try:
        model = select_model(load_models(config), config.scenario)
    except LoadError as exc:
        result = _error(config, config.scenario_file.stem, exc.diagnostics)
    else:
        result = execute_model(config, model)
    if config.output_dir is not None:
        from .reports import write_reports

        write_reports([result], config.output_dir)
    return result


def variant_seed(base_seed: int, index: int) -> int:
    return mix_seed(base_seed, index)


def _variant_job(args) -> RunResult:
    config, model, variant, index = args
    concrete = materialize(model, variant)
    cfg = copy.copy(config)
    # a scenario without axes runs exactly as a plain run would
    cfg.seed = variant_seed(config.seed, index) if variant.index_vector else config.seed
    if config.output_dir is not None:
        cfg.output_dir = Path(config.output_dir) / variant.variant_id
    result = execute_model(cfg, concrete, variant.variant_id)
    result.parameters = {
        concrete.call(cid).action.short_name + f"#{cid}.{param}": to_plain(value)
        for (cid, param), value in variant.assignment.items()
    }
    result.parameters = dict(sorted(result.parameters.items()))
    result.index_vector = variant.index_vector
    return result


def expand(config: RunConfig) -> tuple[ScenarioModel, list[ConcreteVariant]]:
    model = select_model(load_models(config), config.scenario)
    return model, enumerate_variations(model, config.max_variants)


def run_sweep(config: RunConfig, parallelism: int = 1) -> list[RunResult]:
    """Run every variant of the scenario. Results come back in enumeration
    order (the order of their index vectors)."""
    if parallelism < 1:
        raise ValueError("parallelism must be positive")
    try:
        model, variants = expand(config)
    except LoadError as exc:
        return [_error(config, config.scenario_file.stem, exc.diagnostics)]
    except VariationError as exc:
        return [_error(config, config.scenario_file.stem, [str(exc)])]
    jobs = [(config, model, v, i) for i, v in enumerate(variants)]
    if parallelism == 1 or len(jobs) == 1:
        results = [_variant_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(_variant_job, jobs))
    if config.output_dir is not None:
        from .reports import write_reports, write_summary

        write_reports(results, config.output_dir)
        write_summary(results, Path(config.output_dir) / "summary.csv")
    return results
