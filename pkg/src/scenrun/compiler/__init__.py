"""Scenario compilation onto behavior trees and the action plugin catalog."""

from .behaviors import STANDARD_PLUGINS, resolve_frame, standard_registry, to_pose
from .compile import CompileError, compile_model, recording_channels
from .registry import (
    ActionPlugin,
    DuplicatePluginError,
    ManifestError,
    PluginError,
    PluginRegistry,
    load_manifest,
    missing_plugins,
    register_plugin,
)

# ``compile`` is the public name; the alias keeps the builtin unshadowed inside modules
compile = compile_model

__all__ = [
    "ActionPlugin", "CompileError", "DuplicatePluginError", "ManifestError", "PluginError",
    "PluginRegistry", "STANDARD_PLUGINS", "compile", "compile_model", "load_manifest",
    "missing_plugins", "recording_channels", "register_plugin", "resolve_frame",
    "standard_registry", "to_pose",
]
