"""Compiled kernels vs the pure-Python twin.

    python benchmarks/bench_kernels.py [--repeat N]

Prints the median wall time per call for each kernel under both backends,
plus one end-to-end scenario run per backend (run in a child process so the
backend switch applies at import).
"""

from __future__ import annotations

import argparse
import os
import statistics
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from scenrun.sim import _kernels_py

try:
    from scenrun.sim import _kernels as _compiled
except ImportError:
    _compiled = None

from scenrun.sim.maps import load_map

import scenrun

SCENARIO = Path(scenrun.__file__).parent / "scenarios" / "example_fault_injection.osc"


def _timeit(fn, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t)
    return statistics.median(samples)


def _cases():
    grid = load_map("maze")
    occupied = np.ascontiguousarray(grid.walls, dtype=np.uint8)
    blocked = np.ascontiguousarray(_kernels_py.inflate(occupied, 2.0), dtype=np.uint8)
    sr, sc = grid.cell(-3.0, -3.0)
    gr, gc = grid.cell(3.0, 3.0)
    lx = [p[0] for p in grid.landmarks]
    ly = [p[1] for p in grid.landmarks]
    truth = (0.7, -1.2)
    rng = np.random.default_rng(0)
    ranges = [float(np.hypot(truth[0] - x, truth[1] - y) + rng.normal(0, 0.2)) for x, y in zip(lx, ly)]
    return {
        "astar maze corner to corner": lambda k: k.astar(blocked, sr, sc, gr, gc),
        "inflate maze r=2 cells": lambda k: k.inflate(occupied, 2.0),
        "line_of_sight diagonal": lambda k: k.line_of_sight(blocked, sr + 0.5, sc + 0.5, gr + 0.5, gc + 0.5),
        "trilaterate 4 ranges": lambda k: k.trilaterate(lx, ly, ranges, 0.0, 0.0),
    }


def _scenario_time(pure: bool) -> float:
    env = dict(os.environ)
    env.pop("SCENRUN_PURE_PYTHON", None)
    if pure:
        env["SCENRUN_PURE_PYTHON"] = "1"
    code = (
        "import time; from scenrun.runner import RunConfig, run_sweep; "
        f"t=time.perf_counter(); run_sweep(RunConfig({str(SCENARIO)!r})); "
        "print(time.perf_counter()-t)"
    )
    out = subprocess.run([sys.executable, "-c", code], env=env, check=True, capture_output=True, text=True)
    return float(out.stdout.strip().splitlines()[-1])


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=50)
    ap.add_argument("--skip-scenario", action="store_true")
    args = ap.parse_args()
    if _compiled is None:
        print("compiled extension not built; only the Python timings are shown")
    print(f"{'kernel':32s} {'python':>12s} {'compiled':>12s} {'speedup':>8s}")
    for name, call in _cases().items():
        t_py = _timeit(lambda: call(_kernels_py), args.repeat)
        if _compiled is None:
            print(f"{name:32s} {t_py * 1e6:10.1f}us")
            continue
        t_c = _timeit(lambda: call(_compiled), args.repeat)
        print(f"{name:32s} {t_py * 1e6:10.1f}us {t_c * 1e6:10.1f}us {t_py / t_c:7.1f}x")
    if not args.skip_scenario:
        t_py = _scenario_time(pure=True)
        line = f"{'64-variant fault sweep':32s} {t_py:11.2f}s"
        if _compiled is not None:
            t_c = _scenario_time(pure=False)
            line += f" {t_c:11.2f}s {t_py / t_c:7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
