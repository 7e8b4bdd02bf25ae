"""Semantic model: resolved, type-checked scenarios."""

from .builder import ModelError, build_model, visible_typedefs
from .concrete import ConcreteCheck, check_concrete
from .library import LibraryError, builtin_library_names, builtin_source, load_libraries
from .types import (
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
    iter_calls,
)
from .values import (
    Dimension,
    EvaluationError,
    NameRef,
    PhysicalValue,
    StructValue,
    Unresolved,
    Value,
    evaluate,
    to_plain,
)

__all__ = [
    "ActionCall", "BehaviorSpec", "ConcreteCheck", "ConstraintSet", "Dimension", "EmitSpec",
    "EvaluationError", "LibraryError", "ModelError", "NameRef", "Param", "ParallelSpec",
    "PhysicalValue", "Relation", "ScenarioModel", "SerialSpec", "StructValue", "TypeDef",
    "TypeKind", "TypeRef", "Unresolved", "Value", "WaitSpec", "build_model", "builtin_library_names",
    "builtin_source", "check_concrete", "evaluate", "iter_calls", "load_libraries", "to_plain",
    "visible_typedefs",
]
