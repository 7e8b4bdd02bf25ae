"""Type definitions and the semantic scenario model."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Union

from ..lang.diagnostics import SourceSpan
from .values import Dimension, Value

PRIMITIVE_DIMENSIONS = {
    "length": Dimension.LENGTH,
    "time": Dimension.TIME,
    "angle": Dimension.ANGLE,
    "float": Dimension.DIMENSIONLESS,
}
PRIMITIVE_TYPES = frozenset(PRIMITIVE_DIMENSIONS) | {"string", "bool"}


class TypeKind(enum.Enum):
    STRUCT = "struct"
    ACTOR = "actor"
    ACTION = "action"


@dataclass(frozen=True)
class TypeRef:
    name: str
    is_list: bool = False

    def __str__(self) -> str:
        return f"list of {self.name}" if self.is_list else self.name


@dataclass
class Param:
    name: str
    type: TypeRef
    default: Value | None = None
    has_default: bool = False


@dataclass
class TypeDef:
    """A struct, actor or action declaration.

    Actions bound to an actor type are declared ``owner.action`` and keep the
    owner separately; ``qualified_name`` is what plugins register under.
    """

    name: str
    kind: TypeKind
    params: list[Param] = field(default_factory=list)
    owner: str | None = None
    library: str = ""
    inherits: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)

    @property
    def qualified_name(self) -> str:
        return f"{self.library}.{self.name}" if self.library else self.name

    @property
    def short_name(self) -> str:
        return self.name.rsplit(".", 1)[-1]

    def param(self, name: str) -> Param | None:
        for p in self.params:
            if p.name == name:
                return p
        return None


# -- behavior description ------------------------------------------------


@dataclass
class SerialSpec:
    children: list["BehaviorSpec"]
    label: str | None = None


@dataclass
class ParallelSpec:
    children: list["BehaviorSpec"]
    label: str | None = None


@dataclass
class ActionCall:
    call_id: int
    action: TypeDef
    call_name: str
    args: dict[str, Value]
    actor: str | None = None
    label: str | None = None
    span: SourceSpan | None = field(default=None, compare=False, repr=False)


@dataclass
class WaitSpec:
    duration: Value
    label: str | None = None


@dataclass
class EmitSpec:
    event: str
    label: str | None = None


BehaviorSpec = Union[SerialSpec, ParallelSpec, ActionCall, WaitSpec, EmitSpec]


class Relation(enum.Enum):
    EQ = "=="
    IN = "in"


@dataclass
class ConstraintSet:
    call_id: int
    param: str
    relation: Relation
    values: list[Value]
    # location of the keep() node in the file AST, and the AST of each value
    node_path: tuple[int, ...] = field(default=(), compare=False, repr=False)
    value_nodes: list = field(default_factory=list, compare=False, repr=False)

    @property
    def target(self) -> tuple[int, str]:
        return (self.call_id, self.param)


@dataclass
class ScenarioModel:
    name: str
    actors: dict[str, TypeDef]
    behavior: BehaviorSpec
    constraints: list[ConstraintSet] = field(default_factory=list)
    file_ast: object = field(default=None, compare=False, repr=False)
    scenario_index: int = field(default=0, compare=False, repr=False)

    def calls(self) -> Iterator[ActionCall]:
        yield from iter_calls(self.behavior)

    def call(self, call_id: int) -> ActionCall:
        for c in self.calls():
            if c.call_id == call_id:
                return c
        raise KeyError(call_id)


def iter_calls(spec: BehaviorSpec) -> Iterator[ActionCall]:
    if isinstance(spec, ActionCall):
        yield spec
    elif isinstance(spec, (SerialSpec, ParallelSpec)):
        for child in spec.children:
            yield from iter_calls(child)
