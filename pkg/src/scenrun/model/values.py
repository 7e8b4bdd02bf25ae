"""Runtime values of the scenario language.

Values are plain Python where possible: ``str``, ``bool`` and ``list`` stand
for themselves; physical quantities, struct instances, unresolved constraint
targets and name references get small dataclasses.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Union


class Dimension(enum.Enum):
    LENGTH = "length"
    TIME = "time"
    ANGLE = "angle"
    DIMENSIONLESS = "dimensionless"


# unit -> (dimension, factor to SI base unit)
UNIT_TABLE: dict[str, tuple[Dimension, float]] = {
    "m": (Dimension.LENGTH, 1.0),
    "cm": (Dimension.LENGTH, 0.01),
    "s": (Dimension.TIME, 1.0),
    "ms": (Dimension.TIME, 0.001),
    "rad": (Dimension.ANGLE, 1.0),
    "deg": (Dimension.ANGLE, math.pi / 180.0),
    "percent": (Dimension.DIMENSIONLESS, 0.01),
}

BASE_UNIT = {
    Dimension.LENGTH: "m",
    Dimension.TIME: "s",
    Dimension.ANGLE: "rad",
    Dimension.DIMENSIONLESS: "",
}


@dataclass(frozen=True)
class PhysicalValue:
    """A finite magnitude in SI base units together with its dimension."""

    magnitude: float
    dimension: Dimension

    def __post_init__(self) -> None:
        if not math.isfinite(self.magnitude):
            raise ValueError(f"physical value must be finite, got {self.magnitude}")

    @classmethod
    def from_unit(cls, number: float, unit: str | None) -> "PhysicalValue":
        if not unit:
            return cls(float(number), Dimension.DIMENSIONLESS)
        try:
            dim, factor = UNIT_TABLE[unit]
        except KeyError:
            raise ValueError(f"unknown unit {unit!r}") from None
        return cls(float(number) * factor, dim)

    def to_unit(self, unit: str) -> float:
        dim, factor = UNIT_TABLE[unit]
        if dim is not self.dimension:
            raise ValueError(f"cannot express {self.dimension.value} in {unit}")
        return self.magnitude / factor

    def __str__(self) -> str:
        return f"{self.magnitude:g}{BASE_UNIT[self.dimension]}"


@dataclass
class StructValue:
    type_name: str
    fields: dict[str, "Value"] = field(default_factory=dict)

    def __getitem__(self, key: str) -> "Value":
        return self.fields[key]


@dataclass(frozen=True)
class Unresolved:
    """Placeholder for a parameter whose value is chosen by a constraint set."""

    constraint: int


@dataclass(frozen=True)
class NameRef:
    name: str


Value = Union[PhysicalValue, str, bool, StructValue, list, Unresolved, NameRef]


class EvaluationError(Exception):
    pass


def evaluate(value: Value, env: Mapping[str, Value]) -> Value:
    """Fold ``value`` to a closed value, substituting names from ``env``."""
    if isinstance(value, NameRef):
        if value.name not in env:
            raise EvaluationError(f"unbound name {value.name!r}")
        return evaluate(env[value.name], env)
    if isinstance(value, StructValue):
        return StructValue(value.type_name, {k: evaluate(v, env) for k, v in value.fields.items()})
    if isinstance(value, list):
        return [evaluate(v, env) for v in value]
    if isinstance(value, Unresolved):
        raise EvaluationError(f"value chosen by constraint #{value.constraint} is not resolved")
    return value


def type_name_of(value: Value) -> str:
    if isinstance(value, PhysicalValue):
        return {Dimension.DIMENSIONLESS: "float"}.get(value.dimension, value.dimension.value)
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, str):
        return "string"
    if isinstance(value, StructValue):
        return value.type_name
    if isinstance(value, list):
        return "list"
    return type(value).__name__


def to_plain(value: Value):
    """Convert to JSON-friendly Python data (used by reports and hashing)."""
    if isinstance(value, PhysicalValue):
        return value.magnitude
    if isinstance(value, StructValue):
        return {k: to_plain(v) for k, v in value.fields.items()}
    if isinstance(value, list):
        return [to_plain(v) for v in value]
    if isinstance(value, (Unresolved, NameRef)):
        return repr(value)
    return value
