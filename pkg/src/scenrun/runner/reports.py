"""result.json, junit.xml and summary.csv writers."""

from __future__ import annotations

import csv
import json
import xml.etree.ElementTree as ET
from pathlib import Path

from .config import RunResult, Verdict

SUITE_NAME = "scenrun"


def result_json(result: RunResult) -> str:
    return json.dumps(result.to_json(), indent=2) + "\n"


def junit_xml(results: list[RunResult]) -> str:
    failures = sum(r.verdict in (Verdict.FAIL, Verdict.TIMEOUT) for r in results)
    errors = sum(r.verdict is Verdict.ERROR for r in results)
    total_time = sum(r.wall_duration for r in results)
    suites = ET.Element("testsuites", tests=str(len(results)), failures=str(failures), errors=str(errors), time=f"{total_time:.3f}")
    suite = ET.SubElement(
        suites,
        "testsuite",
        name=SUITE_NAME,
        tests=str(len(results)),
        failures=str(failures),
        errors=str(errors),
        skipped="0",
        time=f"{total_time:.3f}",
    )
    for r in results:
        case = ET.SubElement(suite, "testcase", name=r.name, classname=r.scenario, time=f"{r.wall_duration:.3f}")
        message = r.reason or r.verdict.value
        if r.verdict is Verdict.FAIL:
            el = ET.SubElement(case, "failure", message=message, type="fail")
        elif r.verdict is Verdict.TIMEOUT:
            el = ET.SubElement(case, "failure", message=message, type="timeout")
        elif r.verdict is Verdict.ERROR:
            el = ET.SubElement(case, "error", message=message, type="error")
        else:
            continue
        el.text = "\n".join(r.diagnostics) or message
    ET.indent(suites)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(suites, encoding="unicode") + "\n"


def write_reports(results: list[RunResult], output_dir: str | Path) -> list[Path]:
    """One result.json per result and a single junit.xml. A lone result
    without a variant id writes its result.json at the top level; otherwise
    each goes to ``<output_dir>/<variant>/result.json``."""
    out = Path(output_dir)
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        single = len(results) == 1 and results[0].variant_id is None
        for r in results:
            target = out if single else out / r.name
            target.mkdir(parents=True, exist_ok=True)
            path = target / "result.json"
            path.write_text(result_json(r), encoding="utf-8")
            written.append(path)
        path = out / "junit.xml"
        path.write_text(junit_xml(results), encoding="utf-8")
        written.append(path)
    except OSError as exc:
        raise OSError(f"cannot write reports to {out}: {exc}") from exc
    return written


def write_summary(results: list[RunResult], path: str | Path) -> Path:
    path = Path(path)
    params: list[str] = []
    for r in results:
        for k in r.parameters:
            if k not in params:
                params.append(k)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["variant_id", *params, "verdict", "mean_localization_error"])
        for r in results:
            err = r.metrics.get("mean_localization_error")
            w.writerow([r.name, *(r.parameters.get(k, "") for k in params), r.verdict.value, "" if err is None else repr(err)])
    return path


def exit_code(results: list[RunResult]) -> int:
    verdicts = {r.verdict for r in results}
    if Verdict.ERROR in verdicts:
        return 2
    if verdicts & {Verdict.FAIL, Verdict.TIMEOUT}:
        return 1
    return 0
