import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import model_of
from scenrun.lang import parse_source, pretty
from scenrun.model import build_model, check_concrete
from scenrun.variation import (
    VariationError,
    enumerate_variations,
    materialize,
    variation_axes,
    write_variants,
)


def axes_source(sizes, name="grid"):
    """A scenario with one set_node_parameter call per axis; axis ``k`` takes
    values 'k.0', 'k.1', ..."""
    lines = ["import osc.standard", f"scenario {name}:", "    do serial:"]
    for k, n in enumerate(sizes):
        values = ", ".join(f"'{k}.{i}'" for i in range(n))
        lines += [
            f"        set_node_parameter(node_name: 'n{k}', parameter_name: 'p{k}') with:",
            f"            keep(it.parameter_value in [{values}])",
        ]
    lines.append("        emit end")
    return "\n".join(lines) + "\n"


def test_fault_injection_expands_to_64(fault_source, tmp_path):
    m = model_of(fault_source)
    variants = enumerate_variations(m)
    assert len(variants) == 64
    assert variants[0].variant_id == "example_fault_injection.0_0"
    assert variants[1].index_vector == (0, 1)  # last axis fastest
    assert variants[-1].index_vector == (7, 7)
    files = write_variants(m, variants, tmp_path)
    assert len(files) == 64 == len(list(tmp_path.glob("*.osc")))


def test_axes_in_source_order(fault_source):
    axes = variation_axes(model_of(fault_source))
    assert [a.target for a in axes] == [(0, "parameter_value"), (1, "parameter_value")]
    assert axes[0].values == ("0.0", "0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7")


def test_zero_axes_single_variant(nav2_source, tmp_path):
    m = model_of(nav2_source)
    (v,) = enumerate_variations(m)
    assert v.assignment == {} and v.index_vector == () and v.variant_id == "example_nav2"
    assert materialize(m, v) == m
    (path,) = write_variants(m, [v], tmp_path)
    assert path.read_text() == pretty(parse_source(nav2_source))


def test_nested_loop_oracle_2_3_5():
    m = model_of(axes_source((2, 3, 5)))
    variants = enumerate_variations(m)
    assert len(variants) == 30
    oracle = set()
    for a in range(2):
        for b in range(3):
            for c in range(5):
                oracle.add((f"0.{a}", f"1.{b}", f"2.{c}"))
    got = {tuple(v.assignment[(k, "parameter_value")] for k in range(3)) for v in variants}
    assert got == oracle


def test_every_variant_of_2_3_is_concrete():
    m = model_of(axes_source((2, 3)))
    for v in enumerate_variations(m):
        c = materialize(m, v)
        assert check_concrete(c)
        assert [c.call(k).args["parameter_value"] for k in range(2)] == [f"{k}.{i}" for k, i in enumerate(v.index_vector)]


def test_materialize_fault_injection_variant(fault_source):
    m = model_of(fault_source)
    v = next(v for v in enumerate_variations(m) if v.index_vector == (2, 0))
    c = materialize(m, v)
    assert c.call(0).args["parameter_value"] == "0.2"
    assert c.call(1).args["parameter_value"] == "0.0"
    assert check_concrete(c)
    assert not check_concrete(m), "original must stay untouched"


def test_written_files_reparse_concrete_2_2(tmp_path):
    m = model_of(axes_source((2, 2)))
    files = write_variants(m, enumerate_variations(m), tmp_path)
    assert sorted(p.name for p in files) == [f"grid_{i}_{j}.osc" for i in range(2) for j in range(2)]
    for path in files:
        (rebuilt,) = build_model(parse_source(path.read_text(), str(path)))
        assert check_concrete(rebuilt)


def test_cap_rejects_large_products():
    m = model_of(axes_source((10, 10, 10)))
    with pytest.raises(VariationError, match="1000"):
        enumerate_variations(m, max_variants=999)
    assert len(enumerate_variations(m, max_variants=1000)) == 1000


def test_write_variants_reports_io_failure(tmp_path):
    blocker = tmp_path / "f"
    blocker.write_text("")
    m = model_of(axes_source((2,)))
    with pytest.raises(OSError, match=str(blocker)):
        write_variants(m, enumerate_variations(m), blocker / "sub")


sizes_strategy = st.lists(st.integers(1, 12), min_size=0, max_size=5).filter(lambda s: math.prod(s) <= 10_000)


@settings(max_examples=60, deadline=None)
@given(sizes_strategy)
def test_product_law(sizes):
    m = model_of(axes_source(sizes))
    variants = enumerate_variations(m)
    varied = [n for n in sizes if n > 1]
    assert len(variants) == math.prod(varied)
    vectors = [v.index_vector for v in variants]
    assert vectors == sorted(vectors)
    assert vectors == list(itertools.product(*(range(n) for n in varied)))
    assert len({v.variant_id for v in variants}) == len(variants)
    assignments = {tuple(sorted(v.assignment.items())) for v in variants}
    assert len(assignments) == len(variants)


@settings(max_examples=30, deadline=None)
@given(sizes_strategy.filter(lambda s: math.prod(s) <= 200), st.data())
def test_materialize_is_pure(sizes, data):
    m = model_of(axes_source(sizes))
    variants = enumerate_variations(m)
    v = data.draw(st.sampled_from(variants))
    before = model_of(axes_source(sizes))
    assert materialize(m, v) == materialize(m, v)
    assert m == before
