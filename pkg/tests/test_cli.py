import json
import subprocess
import sys

import pytest
import xmlschema

from conftest import DATA, FIXTURES, scenario_path
from scenrun.runner.cli import build_parser, main

SCHEMA = xmlschema.XMLSchema(str(DATA / "junit.xsd"))


def scenrun(*args, timeout=120):
    return subprocess.run(
        [sys.executable, "-m", "scenrun.runner.cli", *map(str, args)],
        capture_output=True,
        text=True,
        timeout=timeout,
    )


@pytest.mark.parametrize(
    "fixture, extra, code, verdict",
    [
        ("passing.osc", [], 0, "success"),
        ("timing_out.osc", ["--timeout", "1"], 1, "timeout"),
        ("broken.osc", [], 2, "error"),
    ],
)
def test_run_exit_codes(tmp_path, fixture, extra, code, verdict):
    proc = scenrun("run", FIXTURES / fixture, "--output", tmp_path, *extra)
    assert proc.returncode == code, proc.stderr
    result = json.loads((tmp_path / "result.json").read_text())
    assert result["verdict"] == verdict
    assert SCHEMA.is_valid(str(tmp_path / "junit.xml"))


def test_broken_reports_location(tmp_path):
    proc = scenrun("run", FIXTURES / "broken.osc", "--output", tmp_path)
    assert "broken.osc:6:" in proc.stderr and "^" in proc.stderr


def test_check_contract():
    assert scenrun("check", FIXTURES / "passing.osc").returncode == 0
    proc = scenrun("check", scenario_path("example_fault_injection"))
    assert proc.returncode == 1 and "64 variant" in proc.stdout
    assert scenrun("check", FIXTURES / "broken.osc").returncode == 2


def test_variations_command(tmp_path):
    proc = scenrun("variations", scenario_path("example_fault_injection"), "-o", tmp_path)
    assert proc.returncode == 0
    assert len(list(tmp_path.glob("*.osc"))) == 64
    assert scenrun("variations", scenario_path("example_fault_injection"), "-o", tmp_path / "x", "--max", "10").returncode == 2


def test_sweep_command(tmp_path):
    src = tmp_path / "two.osc"
    src.write_text(
        "import osc.robotics\nscenario two:\n    robot: differential_drive_robot\n    do serial:\n"
        "        robot.nav_to_pose() with:\n"
        "            keep(it.goal in [pose_3d(position_3d(x: 0.1m)), pose_3d(position_3d(x: 0.25m, y: 1.75m))])\n"
        "        emit end\n"
    )
    proc = scenrun("sweep", src, "--output", tmp_path / "out", "-j", "1")
    assert proc.returncode == 1
    assert (tmp_path / "out" / "summary.csv").exists()
    assert 'tests="2" failures="1"' in (tmp_path / "out" / "junit.xml").read_text()


def test_plugin_manifest_and_lib_path(tmp_path):
    proc = scenrun(
        "run", FIXTURES / "uses_toy.osc", "--lib-path", FIXTURES / "toylib", "--plugin-manifest", FIXTURES / "toy.manifest",
        "--output", tmp_path,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    records = [json.loads(x) for x in (tmp_path / "events.jsonl").read_text().splitlines()]
    assert [r["data"]["n"] for r in records if r["type"] == "beep"] == [1, 2, 3]


def test_delay_channel_flag(tmp_path):
    assert main(["run", str(FIXTURES / "gated.osc"), "--delay-channel", "/late_topic=5", "--output", str(tmp_path)]) == 0
    records = [json.loads(x) for x in (tmp_path / "events.jsonl").read_text().splitlines()]
    assert next(r for r in records if r["type"] == "gate_open")["data"]["step"] == 5


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "x.osc", "--dt", "0"],
        ["run", "x.osc", "--seed", "-1"],
        ["run", "x.osc", "--delay-channel", "nope"],
        ["sweep"],
        ["frobnicate"],
    ],
)
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(argv)
    assert exc.value.code == 2


def test_map_flag(tmp_path, capsys):
    code = main(["run", str(scenario_path("example_simulation")), "--map", str(FIXTURES / "walled_off.txt"), "--output", str(tmp_path)])
    assert code == 1
    assert "FAIL" in capsys.readouterr().out
