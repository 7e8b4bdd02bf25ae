"""Locating and loading library files for ``import`` statements.

``import a.b`` resolves to ``<dir>/a/b.osc`` in the first library directory
that has it, falling back to the libraries shipped with the engine. A user
file that shadows a builtin wins, with a warning.
"""

from __future__ import annotations

import functools
import logging
from importlib import resources
from pathlib import Path
from typing import Iterable

from ..lang import Diagnostic, Node, NodeKind, parse_source
from ..lang.diagnostics import OscError

log = logging.getLogger(__name__)

PRELUDE = ("osc.standard",)


class LibraryError(OscError):
    pass


@functools.lru_cache(maxsize=None)
def builtin_library_names() -> tuple[str, ...]:
    root = resources.files("scenrun.model") / "libs"
    names = []
    for pkg in root.iterdir():
        if not pkg.is_dir():
            continue
        for f in pkg.iterdir():
            if f.name.endswith(".osc"):
                names.append(f"{pkg.name}.{f.name[:-4]}")
    return tuple(sorted(names))


@functools.lru_cache(maxsize=None)
def builtin_source(name: str) -> str:
    parts = name.split(".")
    f = resources.files("scenrun.model") / "libs"
    for p in parts[:-1]:
        f = f / p
    return (f / f"{parts[-1]}.osc").read_text(encoding="utf-8")


@functools.lru_cache(maxsize=None)
def _builtin_ast(name: str) -> Node:
    return parse_source(builtin_source(name), f"<builtin {name}>")


def builtin_ast(name: str) -> Node:
    import copy

    return copy.deepcopy(_builtin_ast(name))


def find_library(name: str, search_dirs: Iterable[Path]) -> Path | None:
    rel = Path(*name.split(".")).with_suffix(".osc")
    for d in search_dirs:
        candidate = Path(d) / rel
        if candidate.is_file():
            return candidate
    return None


def load_libraries(file_ast: Node, search_dirs: Iterable[str | Path] = ()) -> dict[str, Node]:
    """Transitively load every library imported by ``file_ast`` (plus the
    prelude). Raises LibraryError listing unknown imports and parse failures."""
    dirs = [Path(d) for d in search_dirs]
    builtins = set(builtin_library_names())
    loaded: dict[str, Node] = {}
    errors: list[Diagnostic] = []
    pending: list[tuple[str, Node | None]] = [(n, None) for n in PRELUDE]
    pending += [(imp.name, imp) for imp in file_ast.of_kind(NodeKind.Import)]
    while pending:
        name, imp = pending.pop(0)
        if name in loaded:
            continue
        path = find_library(name, dirs)
        if path is not None:
            if name in builtins:
                log.warning("library %s at %s shadows the builtin library of the same name", name, path)
            try:
                ast = parse_source(path.read_text(encoding="utf-8"), str(path))
            except OscError as exc:
                errors.extend(exc.diagnostics)
                continue
        elif name in builtins:
            ast = builtin_ast(name)
        else:
            errors.append(Diagnostic(f"unknown import {name!r}", imp.span if imp is not None else None))
            continue
        loaded[name] = ast
        pending += [(i.name, i) for i in ast.of_kind(NodeKind.Import)]
    if errors:
        raise LibraryError(errors)
    return loaded
