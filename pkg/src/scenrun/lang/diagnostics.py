"""Source locations, diagnostics and their rendering."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class SourceSpan:
    """A contiguous region of one source file. Line and column are 1-based."""

    file: str
    line: int
    column: int
    length: int = 0

    def __post_init__(self) -> None:
        if self.line < 1 or self.column < 1 or self.length < 0:
            raise ValueError(f"invalid span {self.line}:{self.column}+{self.length}")

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    message: str
    span: SourceSpan | None = None
    severity: str = "error"

    def __str__(self) -> str:
        if self.span is None:
            return f"{self.severity}: {self.message}"
        return f"{self.span}: {self.message}"


class OscError(Exception):
    """Base class for errors that carry a list of diagnostics."""

    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


def render_diagnostics(errors: Iterable[Diagnostic], source: str | None = None) -> str:
    """Render ``file:line:col: message`` lines, each followed by the offending
    source line and a caret marker when ``source`` is available."""
    lines = source.splitlines() if source is not None else []
    out: list[str] = []
    for err in errors:
        out.append(str(err))
        span = err.span
        if span is None or not (1 <= span.line <= len(lines)):
            continue
        text = lines[span.line - 1]
        out.append(f"    {text}")
        caret = " " * (span.column - 1) + "^" + "~" * max(0, span.length - 1)
        out.append(f"    {caret}")
    return "\n".join(out) + ("\n" if out else "")
