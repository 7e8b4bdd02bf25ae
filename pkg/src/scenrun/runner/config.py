from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path


class ExecutionMode(enum.Enum):
    FAST = "as-fast-as-possible"
    REAL_TIME = "real-time"


class Verdict(enum.Enum):
    SUCCESS = "success"
    FAIL = "fail"
    ERROR = "error"
    TIMEOUT = "timeout"


@dataclass
class RunConfig:
    scenario_file: Path
    library_dirs: list[Path] = field(default_factory=list)
    plugin_manifest: Path | None = None
    map: str | Path | None = None
    seed: int = 0
    dt: float = 0.02
    wall_clock_limit: float = 300.0
    output_dir: Path | None = None
    log_tree: bool = False
    execution_mode: ExecutionMode = ExecutionMode.FAST
    scenario: str | None = None  # which scenario of the file; default the first
    # channel -> loop step at which a scripted publisher registers
    delayed_channels: dict[str, int] = field(default_factory=dict)
    max_variants: int = 10_000

    def __post_init__(self) -> None:
        self.scenario_file = Path(self.scenario_file)
        self.library_dirs = [Path(d) for d in self.library_dirs]
        if self.plugin_manifest is not None:
            self.plugin_manifest = Path(self.plugin_manifest)
        if self.output_dir is not None:
            self.output_dir = Path(self.output_dir)
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.wall_clock_limit > 0:
            raise ValueError(f"wall-clock limit must be positive, got {self.wall_clock_limit}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")


@dataclass
class EventLogRecord:
    t: float
    seq: int
    source: str
    type: str
    data: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"t": self.t, "seq": self.seq, "source": self.source, "type": self.type, "data": self.data}


@dataclass
class RunResult:
    scenario: str
    verdict: Verdict
    variant_id: str | None = None
    sim_duration: float = 0.0
    wall_duration: float = 0.0
    events: list[tuple[str, float]] = field(default_factory=list)
    seed: int = 0
    metrics: dict[str, float] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    reason: str = ""
    parameters: dict[str, object] = field(default_factory=dict)
    index_vector: tuple[int, ...] = ()
    records: list[EventLogRecord] = field(default_factory=list, repr=False)
    first_tick_step: int | None = None
    digest: str = ""

    @property
    def name(self) -> str:
        return self.variant_id or self.scenario

    def to_json(self) -> dict:
        return {
            "scenario": self.scenario,
            "variant": self.variant_id,
            "verdict": self.verdict.value,
            "sim_duration_s": self.sim_duration,
            "wall_duration_s": self.wall_duration,
            "seed": self.seed,
            "events": [{"name": n, "t": t} for n, t in self.events],
            "metrics": dict(self.metrics),
        }
