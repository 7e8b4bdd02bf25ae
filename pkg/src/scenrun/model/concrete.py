"""Concreteness: does every parameter have exactly one explicit value?"""

from __future__ import annotations

from dataclasses import dataclass, field

from .types import Relation, ScenarioModel
from .values import StructValue, Unresolved, Value


@dataclass(frozen=True)
class ConcreteCheck:
    unresolved: tuple[tuple[int, str], ...] = field(default=())

    @property
    def is_concrete(self) -> bool:
        return not self.unresolved

    def __bool__(self) -> bool:
        return self.is_concrete


def _has_unresolved(value: Value) -> bool:
    if isinstance(value, Unresolved):
        return True
    if isinstance(value, StructValue):
        return any(_has_unresolved(v) for v in value.fields.values())
    if isinstance(value, list):
        return any(_has_unresolved(v) for v in value)
    return False


def check_concrete(model: ScenarioModel) -> ConcreteCheck:
    """Return the (call id, parameter) pairs that still lack a single value."""
    missing: list[tuple[int, str]] = []
    for call in model.calls():
        for name, value in call.args.items():
            if _has_unresolved(value):
                missing.append((call.call_id, name))
    for cs in model.constraints:
        if cs.relation is Relation.IN and len(cs.values) > 1 and cs.target not in missing:
            missing.append(cs.target)
    return ConcreteCheck(tuple(missing))
