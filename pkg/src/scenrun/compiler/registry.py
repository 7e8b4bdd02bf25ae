"""Action plugins and the registry that maps declared actions to them."""

from __future__ import annotations

import importlib
import importlib.util
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

from ..btree import Behavior
from ..model import TypeKind, builtin_library_names, visible_typedefs
from ..lang import Node, NodeKind, SourceSpan

Factory = Callable[[Mapping[str, Any], "str | None"], Behavior]


class PluginError(Exception):
    pass


class DuplicatePluginError(PluginError):
    pass


class ManifestError(PluginError):
    pass


@dataclass(frozen=True)
class ActionPlugin:
    name: str
    factory: Factory
    channels: tuple[str, ...] = ()


@dataclass
class PluginRegistry:
    plugins: dict[str, ActionPlugin] = field(default_factory=dict)
    libraries: set[str] = field(default_factory=set)

    def __contains__(self, name: str) -> bool:
        return name in self.plugins

    def get(self, name: str) -> ActionPlugin | None:
        return self.plugins.get(name)

    def names(self) -> list[str]:
        return sorted(self.plugins)

    def copy(self) -> "PluginRegistry":
        return PluginRegistry(dict(self.plugins), set(self.libraries))


def register_plugin(registry: PluginRegistry, plugin: ActionPlugin) -> None:
    if plugin.name in registry.plugins:
        raise DuplicatePluginError(f"action plugin {plugin.name!r} is already registered")
    registry.plugins[plugin.name] = plugin


def _resolve_entry(identifier: str, base: Path) -> Any:
    """``module:attr`` or ``path/to/file.py:attr`` (relative to ``base``)."""
    target, sep, attr = identifier.partition(":")
    if not sep or not attr:
        raise ManifestError(f"plugin identifier {identifier!r} must have the form module:attribute")
    if target.endswith(".py"):
        path = Path(target)
        if not path.is_absolute():
            path = base / path
        if not path.is_file():
            raise ManifestError(f"plugin file not found: {path}")
        mod_name = f"_scenrun_plugin_{abs(hash(str(path.resolve())))}"
        mod_spec = importlib.util.spec_from_file_location(mod_name, path)
        module = importlib.util.module_from_spec(mod_spec)
        mod_spec.loader.exec_module(module)
    else:
        try:
            module = importlib.import_module(target)
        except ImportError as exc:
            raise ManifestError(f"cannot import plugin module {target!r}: {exc}") from exc
    obj = module
    for part in attr.split("."):
        try:
            obj = getattr(obj, part)
        except AttributeError:
            raise ManifestError(f"plugin module {target!r} has no attribute {attr!r}") from None
    return obj


def load_manifest(registry: PluginRegistry, path: str | Path) -> list[str]:
    """Register every ``qualified.action = module:factory`` line of a
    manifest file. Blank lines and ``#`` comments are ignored."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read plugin manifest {path}: {exc}") from exc
    added = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, ident = (s.strip() for s in line.partition("="))
        if not sep or not name or not ident:
            raise ManifestError(f"{path}:{lineno}: expected 'action.name = module:factory'")
        obj = _resolve_entry(ident, path.parent)
        if isinstance(obj, ActionPlugin):
            plugin = ActionPlugin(name, obj.factory, obj.channels)
        elif callable(obj):
            plugin = ActionPlugin(name, obj, tuple(getattr(obj, "channels", ())))
        else:
            raise ManifestError(f"{path}:{lineno}: {ident!r} is neither a factory nor an ActionPlugin")
        try:
            register_plugin(registry, plugin)
        except DuplicatePluginError as exc:
            raise ManifestError(f"{path}:{lineno}: {exc}") from None
        registry.libraries.add(name.rsplit(".", 1)[0])
        added.append(name)
    return added


def missing_plugins(registry: PluginRegistry, library_names: list[str] | None = None) -> list[str]:
    """Qualified names of actions declared in the given libraries (default:
    every builtin) that have no registered plugin."""
    names = list(library_names) if library_names is not None else list(builtin_library_names())
    span = SourceSpan("<libraries>", 1, 1)
    probe = Node(NodeKind.File, span, children=[Node(NodeKind.Import, span, {"name": n}) for n in names])
    return sorted(
        td.qualified_name
        for td in visible_typedefs(probe)
        if td.kind is TypeKind.ACTION and td.library and td.qualified_name not in registry
    )
