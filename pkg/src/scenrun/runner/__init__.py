"""Pipeline orchestration, sweeps, reports and the command line."""

from .config import EventLogRecord, ExecutionMode, RunConfig, RunResult, Verdict
from .execute import execute_model, load_models, run_scenario, run_sweep, variant_seed
from .reports import exit_code, junit_xml, write_reports, write_summary

__all__ = [
    "EventLogRecord", "ExecutionMode", "RunConfig", "RunResult", "Verdict", "execute_model",
    "exit_code", "junit_xml", "load_models", "run_scenario", "run_sweep", "variant_seed",
    "write_reports", "write_summary",
]
