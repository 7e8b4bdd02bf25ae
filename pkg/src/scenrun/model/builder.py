"""AST to semantic model: symbol resolution and type checking."""

from __future__ import annotations

import copy
from typing import Iterator, Mapping

from ..lang import Diagnostic, Node, NodeKind
from ..lang.diagnostics import OscError
from .library import PRELUDE, builtin_ast, builtin_library_names
from .types import (
    PRIMITIVE_DIMENSIONS,
    PRIMITIVE_TYPES,
    ActionCall,
    BehaviorSpec,
    ConstraintSet,
    EmitSpec,
    Param,
    ParallelSpec,
    Relation,
    ScenarioModel,
    SerialSpec,
    TypeDef,
    TypeKind,
    TypeRef,
    WaitSpec,
)
from .values import EvaluationError, NameRef, PhysicalValue, StructValue, Unresolved, Value, evaluate

CONSTANTS: dict[str, Value] = {"true": True, "false": False}

_DECL_KINDS = {
    NodeKind.StructDecl: TypeKind.STRUCT,
    NodeKind.ActorDecl: TypeKind.ACTOR,
    NodeKind.ActionDecl: TypeKind.ACTION,
}


class ModelError(OscError):
    pass


class _Fail(Exception):
    def __init__(self, message: str, node: Node | None):
        self.diagnostic = Diagnostic(message, node.span if node is not None else None)


def _paths(root: Node) -> dict[int, tuple[int, ...]]:
    out: dict[int, tuple[int, ...]] = {}
    stack: list[tuple[Node, tuple[int, ...]]] = [(root, ())]
    while stack:
        node, path = stack.pop()
        out[id(node)] = path
        for i, child in enumerate(node.children):
            stack.append((child, path + (i,)))
    return out


def _describe_expr(node: Node) -> str:
    if node.kind is NodeKind.Literal:
        t = node.attrs["type"]
        if t == "string":
            return "string literal"
        if t == "number":
            return "dimensionless number"
        return f"literal in {node.attrs['unit']}"
    if node.kind is NodeKind.ListLiteral:
        return "list"
    if node.kind is NodeKind.Invocation:
        return f"{node.name}(...)"
    return f"name {node.name!r}"


class _Symbols:
    """Declarations visible to one file, resolved lazily into TypeDefs."""

    def __init__(self, sources: list[tuple[str, Node]]):
        self.nodes: dict[TypeKind, dict[str, tuple[Node, str]]] = {k: {} for k in TypeKind}
        self.defs: dict[tuple[TypeKind, str], TypeDef] = {}
        self.resolving: set[tuple[TypeKind, str]] = set()
        self.errors: list[Diagnostic] = []
        for lib, ast in sources:
            for decl in ast.children:
                kind = _DECL_KINDS.get(decl.kind)
                if kind is None:
                    continue
                table = self.nodes[kind]
                if decl.name in table:
                    prev_lib = table[decl.name][1] or "the scenario file"
                    self.errors.append(
                        Diagnostic(f"duplicate {kind.value} declaration {decl.name!r} (also in {prev_lib})", decl.span)
                    )
                    continue
                table[decl.name] = (decl, lib)

    def has(self, kind: TypeKind, name: str) -> bool:
        return name in self.nodes[kind]

    def get(self, kind: TypeKind, name: str, ref: Node | None = None) -> TypeDef:
        key = (kind, name)
        if key in self.defs:
            return self.defs[key]
        if name not in self.nodes[kind]:
            raise _Fail(f"unknown {kind.value} {name!r}", ref)
        if key in self.resolving:
            raise _Fail(f"cyclic definition of {kind.value} {name!r}", ref)
        self.resolving.add(key)
        try:
            td = self._make(kind, name)
        finally:
            self.resolving.discard(key)
        self.defs[key] = td
        return td

    def _make(self, kind: TypeKind, name: str) -> TypeDef:
        node, lib = self.nodes[kind][name]
        params: list[Param] = []
        parent = node.get("inherits")
        if parent is not None:
            params = copy.deepcopy(self.get(kind, parent, node).params)
        owner = None
        if kind is TypeKind.ACTION and "." in name:
            owner = name.rsplit(".", 1)[0]
            if not self.has(TypeKind.ACTOR, owner):
                raise _Fail(f"action {name!r} is bound to unknown actor type {owner!r}", node)
        seen = {p.name for p in params}
        for f in node.children:
            if f.name in seen:
                raise _Fail(f"duplicate parameter {f.name!r} in {kind.value} {name!r}", f)
            seen.add(f.name)
            tref = TypeRef(f.attrs["type"], bool(f.get("list")))
            self.check_type(tref, f)
            param = Param(f.name, tref)
            if f.children:
                param.default = coerce(f.children[0], tref, self, f"default of {f.name!r}")
                param.has_default = True
            params.append(param)
        return TypeDef(name, kind, params, owner, lib, parent, node.span)

    def check_type(self, tref: TypeRef, node: Node) -> None:
        if tref.name not in PRIMITIVE_TYPES and not self.has(TypeKind.STRUCT, tref.name):
            raise _Fail(f"unknown type {tref.name!r}", node)

    def actor_chain(self, type_name: str) -> list[str]:
        chain = []
        current: str | None = type_name
        while current is not None and current not in chain:
            chain.append(current)
            current = self.get(TypeKind.ACTOR, current).inherits
        return chain

    def all_defs(self) -> Iterator[TypeDef]:
        for kind, table in self.nodes.items():
            for name in table:
                yield self.get(kind, name)


def coerce(node: Node, tref: TypeRef, symbols: _Symbols, what: str) -> Value:
    """Convert an expression AST to a Value of type ``tref`` or fail."""

    def mismatch() -> _Fail:
        return _Fail(f"dimension mismatch: {what} expects {tref}, got {_describe_expr(node)}", node)

    if tref.is_list:
        if node.kind is not NodeKind.ListLiteral:
            raise mismatch()
        elem = TypeRef(tref.name)
        return [coerce(c, elem, symbols, what) for c in node.children]
    if node.kind is NodeKind.MemberRef:
        try:
            value = evaluate(NameRef(node.name), CONSTANTS)
        except EvaluationError as exc:
            raise _Fail(str(exc), node) from None
        if tref.name == "bool" and isinstance(value, bool):
            return value
        raise mismatch()
    name = tref.name
    if name in PRIMITIVE_DIMENSIONS:
        if node.kind is not NodeKind.Literal or node.attrs["type"] == "string":
            raise mismatch()
        pv = PhysicalValue.from_unit(float(node.attrs["text"]), node.get("unit"))
        if pv.dimension is not PRIMITIVE_DIMENSIONS[name]:
            raise mismatch()
        return pv
    if name == "string":
        if node.kind is NodeKind.Literal and node.attrs["type"] == "string":
            return node.attrs["value"]
        raise mismatch()
    if name == "bool":
        raise mismatch()
    if node.kind is not NodeKind.Invocation or node.name != name:
        if node.kind is NodeKind.Invocation and symbols.has(TypeKind.STRUCT, node.name):
            raise _Fail(f"dimension mismatch: {what} expects {name}, got {node.name}", node)
        raise mismatch()
    struct = symbols.get(TypeKind.STRUCT, name, node)
    fields = bind_arguments(node, struct, symbols, constrained=set())
    return StructValue(name, fields)


def bind_arguments(node: Node, td: TypeDef, symbols: _Symbols, constrained: set[str]) -> dict[str, Value]:
    """Merge positional and named arguments of an invocation against the
    declared parameter order; fill defaults; report missing ones."""
    values: dict[str, Value] = {}
    positional = [c for c in node.children if c.kind not in (NodeKind.NamedArgument, NodeKind.WithBlock)]
    named = node.of_kind(NodeKind.NamedArgument)
    label = f"{td.kind.value} {td.short_name!r}"
    if len(positional) > len(td.params):
        raise _Fail(f"too many positional arguments for {label}", positional[len(td.params)])
    for param, arg in zip(td.params, positional):
        values[param.name] = coerce(arg, param.type, symbols, f"parameter {param.name!r}")
    for arg in named:
        param = td.param(arg.name)
        if param is None:
            raise _Fail(f"unknown named argument {arg.name!r} for {label}", arg)
        if arg.name in values:
            raise _Fail(f"argument {arg.name!r} given more than once", arg)
        values[arg.name] = coerce(arg.children[0], param.type, symbols, f"parameter {param.name!r}")
    for param in td.params:
        if param.name in values or param.name in constrained:
            continue
        if param.has_default:
            values[param.name] = copy.deepcopy(param.default)
        else:
            raise _Fail(f"missing required argument {param.name!r} for {label}", node)
    return {p.name: values[p.name] for p in td.params if p.name in values}


class _ScenarioBuilder:
    def __init__(self, decl: Node, index: int, file_ast: Node, symbols: _Symbols, paths: dict[int, tuple[int, ...]]):
        self.decl = decl
        self.index = index
        self.file_ast = file_ast
        self.symbols = symbols
        self.paths = paths
        self.errors: list[Diagnostic] = []
        self.actors: dict[str, TypeDef] = {}
        self.constraints: list[ConstraintSet] = []
        self.next_call = 0

    def build(self) -> ScenarioModel | None:
        behavior: BehaviorSpec | None = None
        for member in self.decl.children:
            if member.kind is NodeKind.FieldDecl:
                self.add_actor(member)
        directives = self.decl.of_kind(NodeKind.DoDirective)
        if not directives:
            self.errors.append(Diagnostic(f"scenario {self.decl.name!r} has no 'do' directive", self.decl.span))
        else:
            behavior = self.behavior(directives[0].children[0])
        if self.errors or behavior is None:
            return None
        return ScenarioModel(self.decl.name, self.actors, behavior, self.constraints, self.file_ast, self.index)

    def add_actor(self, f: Node) -> None:
        try:
            if f.name in self.actors:
                raise _Fail(f"duplicate actor name {f.name!r}", f)
            if f.get("list") or f.children:
                raise _Fail(f"scenario field {f.name!r} must name a single actor type", f)
            type_name = f.attrs["type"]
            if not self.symbols.has(TypeKind.ACTOR, type_name):
                raise _Fail(f"unknown actor type {type_name!r}", f)
            self.actors[f.name] = self.symbols.get(TypeKind.ACTOR, type_name, f)
        except _Fail as fail:
            self.errors.append(fail.diagnostic)

    def behavior(self, node: Node) -> BehaviorSpec | None:
        try:
            return self._behavior(node)
        except _Fail as fail:
            self.errors.append(fail.diagnostic)
            return None

    def _behavior(self, node: Node) -> BehaviorSpec | None:
        label = node.label
        if node.kind is NodeKind.Composition:
            children = [self.behavior(c) for c in node.children]
            cls = SerialSpec if node.attrs["operator"] == "serial" else ParallelSpec
            return cls([c for c in children if c is not None], label)
        if node.kind is NodeKind.EmitStatement:
            return EmitSpec(node.attrs["event"], label)
        if node.kind is NodeKind.WaitStatement:
            return WaitSpec(self.wait_duration(node.children[0]), label)
        return self.action_call(node)

    def wait_duration(self, expr: Node) -> Value:
        if expr.kind is not NodeKind.Invocation or expr.name != "elapsed":
            raise _Fail("wait expects elapsed(<time>)", expr)
        args = [c for c in expr.children]
        if len(args) != 1:
            raise _Fail("elapsed() takes exactly one argument", expr)
        arg = args[0]
        if arg.kind is NodeKind.NamedArgument:
            if arg.name != "duration":
                raise _Fail(f"unknown named argument {arg.name!r} for elapsed()", arg)
            arg = arg.children[0]
        return coerce(arg, TypeRef("time"), self.symbols, "elapsed()")

    def resolve_action(self, node: Node) -> tuple[TypeDef, str | None]:
        parts = node.name.split(".")
        if len(parts) > 1 and parts[0] in self.actors:
            actor = parts[0]
            rest = ".".join(parts[1:])
            for type_name in self.symbols.actor_chain(self.actors[actor].name):
                qualified = f"{type_name}.{rest}"
                if self.symbols.has(TypeKind.ACTION, qualified):
                    return self.symbols.get(TypeKind.ACTION, qualified, node), actor
            raise _Fail(f"unknown action {rest!r} for actor {actor!r} of type {self.actors[actor].name!r}", node)
        if not self.symbols.has(TypeKind.ACTION, node.name):
            if len(parts) > 1 and not self.symbols.has(TypeKind.ACTION, node.name):
                raise _Fail(f"unknown actor or action {node.name!r}", node)
            raise _Fail(f"unknown action {node.name!r}", node)
        td = self.symbols.get(TypeKind.ACTION, node.name, node)
        if td.owner is not None:
            raise _Fail(f"action {node.name!r} must be called on an actor of type {td.owner!r}", node)
        return td, None

    def action_call(self, node: Node) -> ActionCall:
        td, actor = self.resolve_action(node)
        call_id = self.next_call
        self.next_call += 1
        keeps = [k for w in node.of_kind(NodeKind.WithBlock) for k in w.children]
        constrained: dict[str, Node] = {}
        for keep in keeps:
            pname = keep.attrs["field"]
            if td.param(pname) is None:
                raise _Fail(f"'it.{pname}' references unknown parameter of action {td.short_name!r}", keep)
            if pname in constrained:
                raise _Fail(f"parameter {pname!r} is constrained more than once", keep)
            constrained[pname] = keep
        explicit = {a.name for a in node.of_kind(NodeKind.NamedArgument)}
        positional = [c for c in node.children if c.kind not in (NodeKind.NamedArgument, NodeKind.WithBlock)]
        explicit |= {p.name for p in td.params[: len(positional)]}
        for pname, keep in constrained.items():
            if pname in explicit:
                raise _Fail(f"parameter {pname!r} is both assigned and constrained", keep)
        args = bind_arguments(node, td, self.symbols, set(constrained))
        for pname, keep in constrained.items():
            param = td.param(pname)
            expr = keep.children[0]
            what = f"parameter {pname!r}"
            if keep.attrs["relation"] == "==":
                relation, value_nodes = Relation.EQ, [expr]
            else:
                if expr.kind is not NodeKind.ListLiteral:
                    raise _Fail(f"'in' constraint on {pname!r} requires a list of values", expr)
                relation, value_nodes = Relation.IN, list(expr.children)
            values = [coerce(v, param.type, self.symbols, what) for v in value_nodes]
            if relation is Relation.IN:
                kinds = {type(v) for v in values}
                if len(kinds) > 1:
                    raise _Fail(f"values of {pname!r} do not share one type", expr)
            index = len(self.constraints)
            self.constraints.append(
                ConstraintSet(call_id, pname, relation, values, self.paths[id(keep)], value_nodes)
            )
            args[pname] = copy.deepcopy(values[0]) if len(values) == 1 else Unresolved(index)
        args = {p.name: args[p.name] for p in td.params if p.name in args}
        return ActionCall(call_id, td, node.name, args, actor, node.label, node.span)


def _visible_sources(file_ast: Node, library_asts: Mapping[str, Node]) -> tuple[list[tuple[str, Node]], list[Diagnostic]]:
    builtins = set(builtin_library_names())
    sources: list[tuple[str, Node]] = []
    errors: list[Diagnostic] = []
    seen: set[str] = set()
    pending: list[tuple[str, Node | None]] = [(n, None) for n in PRELUDE]
    pending += [(i.name, i) for i in file_ast.of_kind(NodeKind.Import)]
    while pending:
        name, imp = pending.pop(0)
        if name in seen:
            continue
        seen.add(name)
        if name in library_asts:
            ast = library_asts[name]
        elif name in builtins:
            ast = builtin_ast(name)
        else:
            errors.append(Diagnostic(f"unknown import {name!r}", imp.span if imp is not None else None))
            continue
        sources.append((name, ast))
        pending += [(i.name, i) for i in ast.of_kind(NodeKind.Import)]
    sources.append(("", file_ast))
    return sources, errors


def build_model(file_ast: Node, library_asts: Mapping[str, Node] | None = None) -> list[ScenarioModel]:
    """Build one verified ScenarioModel per ``scenario`` declaration.

    ``library_asts`` maps import names to parsed library files; imports not
    found there fall back to the builtin libraries. Raises ModelError with all
    diagnostics collected.
    """
    sources, errors = _visible_sources(file_ast, library_asts or {})
    symbols = _Symbols(sources)
    errors += symbols.errors
    for td_kind, table in symbols.nodes.items():
        for name in table:
            try:
                symbols.get(td_kind, name)
            except _Fail as fail:
                errors.append(fail.diagnostic)
    models: list[ScenarioModel] = []
    if errors:
        raise ModelError(errors)
    paths = _paths(file_ast)
    for index, decl in enumerate(file_ast.children):
        if decl.kind is not NodeKind.ScenarioDecl:
            continue
        builder = _ScenarioBuilder(decl, index, file_ast, symbols, paths)
        model = builder.build()
        errors += builder.errors
        if model is not None:
            models.append(model)
    names = [m.name for m in models]
    for name in set(names):
        if names.count(name) > 1:
            errors.append(Diagnostic(f"duplicate scenario name {name!r}", None))
    if errors:
        raise ModelError(errors)
    return models


def visible_typedefs(file_ast: Node, library_asts: Mapping[str, Node] | None = None) -> list[TypeDef]:
    """All declarations visible to a file (used for plugin coverage checks)."""
    sources, errors = _visible_sources(file_ast, library_asts or {})
    symbols = _Symbols(sources)
    if errors or symbols.errors:
        raise ModelError(errors + symbols.errors)
    try:
        return list(symbols.all_defs())
    except _Fail as fail:
        raise ModelError([fail.diagnostic]) from None
