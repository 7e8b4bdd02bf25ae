"""Canonical pretty-printer; ``parse(tokenize(pretty(ast))) == ast``."""

from __future__ import annotations

from .ast import Node, NodeKind
from .lexer import encode_string

INDENT = "    "


def pretty(node: Node) -> str:
    if node.kind is not NodeKind.File:
        raise ValueError("pretty() expects a File node")
    out: list[str] = []
    prev_import = False
    for child in node.children:
        if child.kind is NodeKind.Import:
            out.append(f"import {child.name}")
            prev_import = True
            continue
        if out and (prev_import or child.kind is NodeKind.ScenarioDecl or child.children):
            out.append("")
        prev_import = False
        _decl(child, out)
    return "\n".join(out) + "\n" if out else ""


def _decl(node: Node, out: list[str]) -> None:
    if node.kind is NodeKind.ScenarioDecl:
        out.append(f"scenario {node.name}:")
        for member in node.children:
            if member.kind is NodeKind.FieldDecl:
                out.append(INDENT + _field(member))
            else:
                _composition(member.children[0], out, 1, prefix="do ")
        return
    keyword = {NodeKind.ActorDecl: "actor", NodeKind.StructDecl: "struct", NodeKind.ActionDecl: "action"}[node.kind]
    head = f"{keyword} {node.name}"
    if node.get("inherits"):
        head += f" inherits {node.attrs['inherits']}"
    if not node.children:
        out.append(head)
        return
    out.append(head + ":")
    for f in node.children:
        out.append(INDENT + _field(f))


def _field(node: Node) -> str:
    type_ref = ("list of " if node.get("list") else "") + node.attrs["type"]
    text = f"{node.name}: {type_ref}"
    if node.children:
        text += f" = {expr(node.children[0])}"
    return text


def _label(node: Node) -> str:
    return f"{node.label}: " if node.label is not None else ""


def _composition(node: Node, out: list[str], depth: int, prefix: str = "") -> None:
    out.append(INDENT * depth + prefix + _label(node) + node.attrs["operator"] + ":")
    for child in node.children:
        _behavior(child, out, depth + 1)


def _behavior(node: Node, out: list[str], depth: int) -> None:
    pad = INDENT * depth
    kind = node.kind
    if kind is NodeKind.Composition:
        _composition(node, out, depth)
    elif kind is NodeKind.WaitStatement:
        out.append(pad + _label(node) + "wait " + expr(node.children[0]))
    elif kind is NodeKind.EmitStatement:
        out.append(pad + _label(node) + "emit " + node.attrs["event"])
    elif kind is NodeKind.Invocation:
        with_blocks = node.of_kind(NodeKind.WithBlock)
        line = pad + _label(node) + _call(node)
        if not with_blocks:
            out.append(line)
            return
        out.append(line + " with:")
        for keep in with_blocks[0].children:
            rel = keep.attrs["relation"]
            out.append(pad + INDENT + f"keep(it.{keep.attrs['field']} {rel} {expr(keep.children[0])})")
    else:
        raise ValueError(f"not a behavior: {kind}")


def _call(node: Node) -> str:
    args = ", ".join(_arg(a) for a in node.children if a.kind is not NodeKind.WithBlock)
    return f"{node.name}({args})"


def _arg(node: Node) -> str:
    if node.kind is NodeKind.NamedArgument:
        return f"{node.name}: {expr(node.children[0])}"
    return expr(node)


def expr(node: Node) -> str:
    kind = node.kind
    if kind is NodeKind.Literal:
        t = node.attrs["type"]
        if t == "string":
            return encode_string(node.attrs["value"])
        return node.attrs["text"] + (node.attrs.get("unit") or "")
    if kind is NodeKind.ListLiteral:
        return "[" + ", ".join(expr(c) for c in node.children) + "]"
    if kind is NodeKind.MemberRef:
        return node.name
    if kind is NodeKind.Invocation:
        return _call(node)
    raise ValueError(f"not an expression: {kind}")
