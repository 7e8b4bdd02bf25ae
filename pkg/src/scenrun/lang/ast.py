"""Lossless syntax tree for scenario files.

Every node has one kind, ordered children, string attributes and a span.
Equality ignores spans, which makes structural comparison of re-parsed
trees a plain ``==``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator

from .diagnostics import SourceSpan


class NodeKind(enum.Enum):
    File = "File"
    Import = "Import"
    ScenarioDecl = "ScenarioDecl"
    StructDecl = "StructDecl"
    ActorDecl = "ActorDecl"
    ActionDecl = "ActionDecl"
    FieldDecl = "FieldDecl"
    DoDirective = "DoDirective"
    Composition = "Composition"
    Invocation = "Invocation"
    NamedArgument = "NamedArgument"
    WaitStatement = "WaitStatement"
    EmitStatement = "EmitStatement"
    KeepConstraint = "KeepConstraint"
    WithBlock = "WithBlock"
    Literal = "Literal"
    ListLiteral = "ListLiteral"
    MemberRef = "MemberRef"


DECLARATIONS = frozenset({NodeKind.ScenarioDecl, NodeKind.StructDecl, NodeKind.ActorDecl, NodeKind.ActionDecl})
EXPRESSIONS = frozenset({NodeKind.Literal, NodeKind.ListLiteral, NodeKind.MemberRef, NodeKind.Invocation})


@dataclass
class Node:
    kind: NodeKind
    span: SourceSpan = field(compare=False, repr=False)
    attrs: dict[str, str] = field(default_factory=dict)
    children: list["Node"] = field(default_factory=list)

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.attrs.get(key, default)

    @property
    def name(self) -> str:
        return self.attrs["name"]

    @property
    def label(self) -> str | None:
        return self.attrs.get("label")

    def of_kind(self, kind: NodeKind) -> list["Node"]:
        return [c for c in self.children if c.kind is kind]

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def at_path(self, path: tuple[int, ...]) -> "Node":
        node = self
        for i in path:
            node = node.children[i]
        return node

    def dump(self, indent: int = 0) -> str:
        """Debug rendering, one node per line."""
        attrs = " ".join(f"{k}={v!r}" for k, v in sorted(self.attrs.items()))
        head = " " * indent + self.kind.value + (f" {attrs}" if attrs else "")
        return "\n".join([head] + [c.dump(indent + 2) for c in self.children])
