"""Tick-driven behavior-tree runtime.

Serial nodes remember their cursor and advance within a tick when a child
succeeds. Parallel nodes tick every unfinished child, fail as soon as one
child fails and succeed once all have succeeded. Leaves delegate to a
behavior object with ``initialise(ctx)`` and ``update(ctx) -> NodeStatus``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Any, Protocol

TERMINAL_EVENTS = {"end": "success", "fail": "fail"}


class NodeStatus(enum.Enum):
    IDLE = "IDLE"
    RUNNING = "RUNNING"
    SUCCESS = "SUCCESS"
    FAILURE = "FAILURE"

    @property
    def finished(self) -> bool:
        return self in (NodeStatus.SUCCESS, NodeStatus.FAILURE)


class TreeKind(enum.Enum):
    SERIAL = "serial"
    PARALLEL = "parallel"
    LEAF = "leaf"


class ExecutionFault(Exception):
    """Raised by a leaf behavior when it cannot carry out its action."""


class Behavior(Protocol):
    def initialise(self, ctx: "TickContext") -> None: ...

    def update(self, ctx: "TickContext") -> NodeStatus: ...


@dataclass
class Blackboard:
    scenario: str = ""
    entries: dict[str, Any] = field(default_factory=dict)
    events: list[tuple[str, float]] = field(default_factory=list)
    faults: list[tuple[str, str, float]] = field(default_factory=list)
    terminal: str | None = None
    terminal_time: float | None = None

    def key(self, name: str) -> str:
        return f"{self.scenario}/{name}"

    def set(self, name: str, value: Any) -> None:
        self.entries[self.key(name)] = value

    def get(self, name: str, default: Any = None) -> Any:
        return self.entries.get(self.key(name), default)


def emit_event(bb: Blackboard, name: str, sim_time: float) -> None:
    if not name.isidentifier():
        raise ValueError(f"event name {name!r} is not an identifier")
    if bb.events and sim_time < bb.events[-1][1]:
        raise ValueError(f"event {name!r} at t={sim_time} precedes the previous event")
    bb.events.append((name, sim_time))
    if bb.terminal is None and name in TERMINAL_EVENTS:
        bb.terminal = TERMINAL_EVENTS[name]
        bb.terminal_time = sim_time


@dataclass
class TickContext:
    sim_time: float = 0.0
    blackboard: Blackboard = field(default_factory=Blackboard)
    backend: Any = None
    dt: float = 0.02
    step: int = 0
    node: "TreeNode | None" = None
    trace: list[tuple[float, str, str, dict]] = field(default_factory=list)

    def record(self, kind: str, **data: Any) -> None:
        """Append a trace record attributed to the leaf being ticked."""
        source = self.node.name if self.node is not None else ""
        self.trace.append((self.sim_time, source, kind, data))


_ids = itertools.count()


@dataclass(eq=False)
class TreeNode:
    name: str
    kind: TreeKind
    children: list["TreeNode"] = field(default_factory=list)
    behavior: Behavior | None = None
    id: int = field(default_factory=lambda: next(_ids))
    status: NodeStatus = NodeStatus.IDLE
    cursor: int = 0

    def __post_init__(self) -> None:
        if self.kind is TreeKind.LEAF:
            if self.children or self.behavior is None:
                raise ValueError(f"leaf {self.name!r} needs a behavior and no children")
        elif not self.children:
            raise ValueError(f"{self.kind.value} node {self.name!r} has no children")

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def __len__(self) -> int:
        return sum(1 for _ in self.walk())


def serial(name: str, *children: TreeNode) -> TreeNode:
    return TreeNode(name, TreeKind.SERIAL, list(children))


def parallel(name: str, *children: TreeNode) -> TreeNode:
    return TreeNode(name, TreeKind.PARALLEL, list(children))


def leaf(name: str, behavior: Behavior) -> TreeNode:
    return TreeNode(name, TreeKind.LEAF, behavior=behavior)


def tick(node: TreeNode, ctx: TickContext) -> NodeStatus:
    if node.status.finished:
        return node.status
    if node.kind is TreeKind.LEAF:
        node.status = _tick_leaf(node, ctx)
    elif node.kind is TreeKind.SERIAL:
        node.status = _tick_serial(node, ctx)
    else:
        node.status = _tick_parallel(node, ctx)
    return node.status


def _tick_leaf(node: TreeNode, ctx: TickContext) -> NodeStatus:
    ctx.node = node
    try:
        if node.status is NodeStatus.IDLE:
            node.behavior.initialise(ctx)
        status = node.behavior.update(ctx)
    except ExecutionFault as fault:
        ctx.blackboard.faults.append((node.name, str(fault), ctx.sim_time))
        ctx.record("fault", message=str(fault))
        return NodeStatus.FAILURE
    finally:
        ctx.node = None
    if status is NodeStatus.IDLE:
        raise RuntimeError(f"behavior of {node.name!r} returned IDLE")
    return status


def _tick_serial(node: TreeNode, ctx: TickContext) -> NodeStatus:
    while node.cursor < len(node.children):
        status = tick(node.children[node.cursor], ctx)
        if status is NodeStatus.SUCCESS:
            node.cursor += 1
            continue
        return status
    return NodeStatus.SUCCESS


def _tick_parallel(node: TreeNode, ctx: TickContext) -> NodeStatus:
    failed = False
    all_done = True
    for child in node.children:
        if child.status.finished:
            failed |= child.status is NodeStatus.FAILURE
            continue
        status = tick(child, ctx)
        if status is NodeStatus.FAILURE:
            failed = True
        elif status is not NodeStatus.SUCCESS:
            all_done = False
    if failed:
        return NodeStatus.FAILURE
    return NodeStatus.SUCCESS if all_done else NodeStatus.RUNNING


def reset(node: TreeNode) -> None:
    for n in node.walk():
        n.status = NodeStatus.IDLE
        n.cursor = 0
        if n.behavior is not None and hasattr(n.behavior, "reset"):
            n.behavior.reset()


def snapshot(node: TreeNode) -> str:
    lines: list[str] = []

    def visit(n: TreeNode, depth: int) -> None:
        lines.append(f"{'  ' * depth}{n.name} [{n.status.value}]")
        for c in n.children:
            visit(c, depth + 1)

    visit(node, 0)
    return "\n".join(lines)


class Constant:
    """Behavior that always returns one status; handy for tests and stubs."""

    def __init__(self, status: NodeStatus):
        self.status = status
        self.updates = 0

    def initialise(self, ctx: TickContext) -> None:
        pass

    def update(self, ctx: TickContext) -> NodeStatus:
        self.updates += 1
        return self.status

    def reset(self) -> None:
        self.updates = 0
