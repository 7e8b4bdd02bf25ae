"""Expansion of value-list constraints into concrete scenario variants.

Variants are enumerated in lexicographic order of their index vectors with
the last axis varying fastest, so variant ids are stable between runs.
"""

from __future__ import annotations

import copy
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

from .lang import Node, NodeKind, pretty
from .model import Relation, ScenarioModel
from .model.values import Value

DEFAULT_MAX_VARIANTS = 10_000


class VariationError(Exception):
    pass


@dataclass(frozen=True)
class VariationAxis:
    constraint: int
    target: tuple[int, str]
    values: tuple


@dataclass
class ConcreteVariant:
    base_name: str
    index_vector: tuple[int, ...]
    assignment: dict[tuple[int, str], Value] = field(default_factory=dict)

    @property
    def index_key(self) -> str:
        return "_".join(str(i) for i in self.index_vector)

    @property
    def variant_id(self) -> str:
        if not self.index_vector:
            return self.base_name
        return f"{self.base_name}.{self.index_key}"


def variation_axes(model: ScenarioModel) -> list[VariationAxis]:
    # constraints are recorded in source order by the builder
    return [
        VariationAxis(i, cs.target, tuple(cs.values))
        for i, cs in enumerate(model.constraints)
        if cs.relation is Relation.IN and len(cs.values) > 1
    ]


def enumerate_variations(model: ScenarioModel, max_variants: int = DEFAULT_MAX_VARIANTS) -> list[ConcreteVariant]:
    axes = variation_axes(model)
    total = math.prod(len(a.values) for a in axes)
    if total > max_variants:
        raise VariationError(
            f"scenario {model.name!r} expands to {total} variants, more than the limit of {max_variants}"
        )
    variants = []
    for idx in itertools.product(*(range(len(a.values)) for a in axes)):
        assignment = {a.target: a.values[i] for a, i in zip(axes, idx)}
        variants.append(ConcreteVariant(model.name, tuple(idx), assignment))
    return variants


def materialize(model: ScenarioModel, variant: ConcreteVariant) -> ScenarioModel:
    """Return a deep copy of ``model`` with the variant's values substituted."""
    out = copy.deepcopy(model)
    by_target = {cs.target: cs for cs in out.constraints}
    for target, value in variant.assignment.items():
        cs = by_target.get(target)
        if cs is None:
            raise VariationError(f"variant targets {target}, which is not constrained in {model.name!r}")
        try:
            call = out.call(target[0])
        except KeyError:
            raise VariationError(f"variant targets unknown action call #{target[0]}") from None
        if target[1] not in call.args:
            raise VariationError(f"action call #{target[0]} has no parameter {target[1]!r}")
        call.args[target[1]] = copy.deepcopy(value)
        if cs.relation is Relation.IN:
            # keep the chosen value node so the variant reprints the source literal
            for v, node in zip(cs.values, cs.value_nodes):
                if v == value:
                    cs.value_nodes = [node]
                    break
        cs.values = [copy.deepcopy(value)]
    return out


def variant_ast(model: ScenarioModel, variant: ConcreteVariant) -> Node:
    """Source tree for one variant: imports, library declarations and only
    this scenario, with each varied ``keep(... in [...])`` rewritten to ``==``."""
    file_ast: Node = copy.deepcopy(model.file_ast)
    for i, cs in enumerate(model.constraints):
        if cs.target not in variant.assignment:
            continue
        keep = file_ast.at_path(cs.node_path)
        value = variant.assignment[cs.target]
        chosen = next(n for v, n in zip(cs.values, cs.value_nodes) if v == value)
        keep.attrs["relation"] = "=="
        keep.children = [copy.deepcopy(chosen)]
    keep_index = model.scenario_index
    file_ast.children = [
        c for j, c in enumerate(file_ast.children) if c.kind is not NodeKind.ScenarioDecl or j == keep_index
    ]
    return file_ast


def variant_filename(variant: ConcreteVariant) -> str:
    if not variant.index_vector:
        return f"{variant.base_name}.osc"
    return f"{variant.base_name}_{variant.index_key}.osc"


def write_variants(model: ScenarioModel, variants: list[ConcreteVariant], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for variant in variants:
        path = out / variant_filename(variant)
        text = pretty(variant_ast(model, variant))
        try:
            path.write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write variant file {path}: {exc}") from exc
        written.append(path)
    return written
