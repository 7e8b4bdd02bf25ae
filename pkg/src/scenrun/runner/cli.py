"""Command-line entry point: ``scenrun run|variations|sweep|check``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from ..model import check_concrete
from ..variation import VariationError, enumerate_variations, variation_axes, write_variants
from .config import ExecutionMode, RunConfig, RunResult
from .execute import LoadError, load_models, run_scenario, run_sweep, select_model
from .reports import exit_code

DEFAULT_OUTPUT = "scenrun-out"


def _delay(text: str) -> tuple[str, int]:
    channel, sep, steps = text.rpartition("=")
    if not sep or not channel:
        raise argparse.ArgumentTypeError("expected CHANNEL=STEPS")
    try:
        n = int(steps)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid step count {steps!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError("step count must be non-negative")
    return channel, n


def _seed(text: str) -> int:
    n = int(text, 0)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return n


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", type=Path, help="scenario file (.osc)")
    p.add_argument("--lib-path", action="append", default=[], type=Path, metavar="DIR", help="library search directory (repeatable)")
    p.add_argument("--plugin-manifest", type=Path, metavar="F", help="file mapping action names to plugin factories")
    p.add_argument("--map", metavar="F", help="occupancy map file, or a bundled map name (maze, empty)")
    p.add_argument("--seed", type=_seed, default=0, metavar="N")
    p.add_argument("--dt", type=_positive, default=0.02, metavar="S", help="simulation step in seconds")
    p.add_argument("--timeout", type=_positive, default=300.0, metavar="S", help="wall-clock limit in seconds")
    p.add_argument("--output", type=Path, default=Path(DEFAULT_OUTPUT), metavar="DIR")
    p.add_argument("--log-tree", action="store_true", help="write tree snapshots to tree.log when statuses change")
    p.add_argument("--real-time", action="store_true", help="pace the simulation to the wall clock")
    p.add_argument("--scenario", metavar="NAME", help="scenario to run when the file declares several")
    p.add_argument("--delay-channel", action="append", default=[], type=_delay, metavar="CH=STEPS",
                   help="register a scripted publisher for CH only after STEPS loop steps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scenrun", description="Scenario execution engine with a built-in 2D simulator.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one concrete scenario")
    _run_flags(p)

    p = sub.add_parser("sweep", help="expand and run every variant of a scenario")
    _run_flags(p)
    p.add_argument("-j", "--jobs", type=int, default=1, metavar="K", help="parallel worker processes")
    p.add_argument("--max", type=int, default=10_000, metavar="N", help="refuse expansions larger than N")

    p = sub.add_parser("variations", help="write one concrete .osc file per variant")
    p.add_argument("file", type=Path)
    p.add_argument("-o", "--output", type=Path, required=True, metavar="DIR")
    p.add_argument("--max", type=int, default=10_000, metavar="N")
    p.add_argument("--lib-path", action="append", default=[], type=Path, metavar="DIR")
    p.add_argument("--scenario", metavar="NAME")

    p = sub.add_parser("check", help="parse, build and check concreteness without running")
    p.add_argument("file", type=Path)
    p.add_argument("--lib-path", action="append", default=[], type=Path, metavar="DIR")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        scenario_file=args.file,
        library_dirs=args.lib_path,
        plugin_manifest=args.plugin_manifest,
        map=args.map,
        seed=args.seed,
        dt=args.dt,
        wall_clock_limit=args.timeout,
        output_dir=args.output,
        log_tree=args.log_tree,
        execution_mode=ExecutionMode.REAL_TIME if args.real_time else ExecutionMode.FAST,
        scenario=args.scenario,
        delayed_channels=dict(args.delay_channel),
        max_variants=getattr(args, "max", 10_000),
    )


def _report(results: list[RunResult]) -> None:
    for r in results:
        line = f"{r.name}: {r.verdict.value.upper()} (sim {r.sim_duration:.2f} s)"
        if r.reason:
            line += f" - {r.reason}"
        print(line)
        for d in r.diagnostics:
            print(f"  {d}", file=sys.stderr)


def _cmd_run(args) -> int:
    result = run_scenario(_config(args))
    _report([result])
    return exit_code([result])


def _cmd_sweep(args) -> int:
    if args.jobs < 1:
        print("scenrun: -j must be at least 1", file=sys.stderr)
        return 2
    results = run_sweep(_config(args), args.jobs)
    _report(results)
    codes = exit_code(results)
    print(f"{len(results)} variant(s); summary in {args.output / 'summary.csv'}")
    return codes


def _cmd_variations(args) -> int:
    cfg = RunConfig(args.file, library_dirs=args.lib_path, scenario=args.scenario)
    try:
        model = select_model(load_models(cfg), args.scenario)
        variants = enumerate_variations(model, args.max)
        written = write_variants(model, variants, args.output)
    except LoadError as exc:
        print("\n".join(exc.diagnostics), file=sys.stderr)
        return 2
    except (VariationError, OSError) as exc:
        print(f"scenrun: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(written)} variant file(s) to {args.output}")
    return 0


def _cmd_check(args) -> int:
    cfg = RunConfig(args.file, library_dirs=args.lib_path)
    try:
        models = load_models(cfg)
    except LoadError as exc:
        print("\n".join(exc.diagnostics), file=sys.stderr)
        return 2
    code = 0
    for m in models:
        check = check_concrete(m)
        if check:
            print(f"{m.name}: concrete")
        else:
            n = math.prod(len(a.values) for a in variation_axes(m))
            params = ", ".join(f"{m.call(c).action.short_name}#{c}.{p}" for c, p in check.unresolved)
            print(f"{m.name}: not concrete ({params}); expands to {n} variant(s)")
            code = 1
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_run, "sweep": _cmd_sweep, "variations": _cmd_variations, "check": _cmd_check}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
