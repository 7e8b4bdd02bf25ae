"""Model-to-tree conversion."""

from __future__ import annotations

from ..btree import TreeKind, TreeNode
from ..lang import Diagnostic
from ..lang.diagnostics import OscError
from ..model import (
    ActionCall,
    EmitSpec,
    ParallelSpec,
    ScenarioModel,
    SerialSpec,
    WaitSpec,
    check_concrete,
)
from .behaviors import Emit, Wait, magnitude
from .registry import PluginError, PluginRegistry


class CompileError(OscError):
    pass


class _Compiler:
    def __init__(self, registry: PluginRegistry):
        self.registry = registry
        self.errors: list[Diagnostic] = []
        self.next_id = 0

    def node(self, name: str, kind: TreeKind, children=(), behavior=None) -> TreeNode:
        n = TreeNode(name, kind, list(children), behavior, id=self.next_id)
        self.next_id += 1
        return n

    def build(self, spec) -> TreeNode | None:
        if isinstance(spec, (SerialSpec, ParallelSpec)):
            kind = TreeKind.SERIAL if isinstance(spec, SerialSpec) else TreeKind.PARALLEL
            # reserve the id so numbering is preorder
            node = self.node(spec.label or kind.value, kind, [None])
            node.children = [self.build(c) for c in spec.children]
            return None if None in node.children else node
        if isinstance(spec, WaitSpec):
            return self.leaf(spec.label or "wait", lambda: Wait(magnitude(spec.duration)), None)
        if isinstance(spec, EmitSpec):
            return self.leaf(spec.label or f"emit {spec.event}", lambda: Emit(spec.event), None)
        if isinstance(spec, ActionCall):
            return self.action(spec)
        raise TypeError(f"unknown behavior spec {spec!r}")

    def leaf(self, name: str, make, span) -> TreeNode | None:
        try:
            behavior = make()
        except PluginError as exc:
            self.errors.append(Diagnostic(f"{name}: {exc}", span))
            return None
        return self.node(name, TreeKind.LEAF, behavior=behavior)

    def action(self, call: ActionCall) -> TreeNode | None:
        qname = call.action.qualified_name
        plugin = self.registry.get(qname)
        if plugin is None:
            known = ", ".join(self.registry.names()) or "none"
            self.errors.append(
                Diagnostic(f"no plugin registered for action {qname!r}; registered: {known}", call.span)
            )
            return None
        name = call.label or call.action.short_name

        def make():
            behavior = plugin.factory(dict(call.args), call.actor)
            if behavior is None:
                raise PluginError(f"factory for {qname!r} returned no behavior")
            return behavior

        return self.leaf(name, make, call.span)


def compile_model(model: ScenarioModel, registry: PluginRegistry) -> TreeNode:
    """Root is a serial node named after the scenario wrapping the ``do``
    composition. Raises CompileError with every problem found."""
    check = check_concrete(model)
    if not check:
        targets = ", ".join(f"call #{c} {p}" for c, p in check.unresolved)
        raise CompileError([Diagnostic(f"scenario {model.name!r} is not concrete ({targets}); expand it with 'scenrun variations'")])
    comp = _Compiler(registry)
    root = comp.node(model.name, TreeKind.SERIAL, [None])
    body = comp.build(model.behavior)
    if comp.errors or body is None:
        raise CompileError(comp.errors)
    root.children = [body]
    return root


def recording_channels(root: TreeNode) -> list[str]:
    """Channels declared by ``record`` style behaviors, in tree order."""
    seen: list[str] = []
    for n in root.walk():
        if n.behavior is None:
            continue
        for ch in getattr(n.behavior, "channels", ()):
            if ch not in seen:
                seen.append(ch)
    return seen
