from __future__ import annotations

import pytest

from idos.constructions import CodeParams, GeneratorSpec, construct_b, custom_spec, make_spec
from idos.debt import WindowPattern
from idos.exponents import ExponentMatrix
from idos.field import field_create
from idos.verify import (
    GuardrailAbort,
    estimate_cases,
    lemma1_oracle_suite,
    thick_column_plans,
    verify_dominance_structure,
    verify_idos,
    verify_superregular_route,
)


def test_construction_b_small_passes_both_modes():
    spec, ctx = make_spec("B", 2, 1, 1, 1)
    inv = verify_idos(spec, ctx, "invertibility")
    rt = verify_idos(spec, ctx, "roundtrip")
    assert inv.passed and rt.passed and inv.matrices_checked == 3


def test_construction_a_counterexample_is_found_by_both_modes():
    spec, ctx = make_spec("A", 4, 2, 1, 2)
    inv = verify_idos(spec, ctx, "invertibility")
    rt = verify_idos(spec, ctx, "roundtrip")
    bad = {"ell": 3, "counts": [1, 1, 4], "received_sets": [[1], [4], [1, 2, 3, 4]]}
    assert [p for p, _ in inv.failures] == [bad]
    assert [p for p, _ in rt.failures] == [bad]


def test_all_zero_custom_spec_fails():
    ctx = field_create(37)
    z = ExponentMatrix.of([[0, 0]] * 4)
    report = verify_idos(custom_spec(CodeParams(4, 2, 1, 2), [z, z], ctx), ctx)
    assert not report.passed
    assert any(r == "singular decoding matrix" for _, r in report.failures)


def test_guardrail():
    spec, ctx = make_spec("A", 4, 2, 1, 2)
    assert estimate_cases(spec.params) == 157
    with pytest.raises(GuardrailAbort):
        verify_idos(spec, ctx, max_cases=100)


def test_guardrail_env(monkeypatch):
    monkeypatch.setenv("IDOS_MAX_CASES", "5")
    spec, ctx = make_spec("A", 4, 2, 1, 2)
    with pytest.raises(GuardrailAbort):
        verify_idos(spec, ctx)


def test_parallel_report_identical():
    spec, ctx = make_spec("A", 4, 2, 1, 2)
    one = verify_idos(spec, ctx, "both", jobs=1)
    three = verify_idos(spec, ctx, "both", jobs=3)
    assert one.to_json() == three.to_json()


def test_report_field_order_and_timing():
    spec, ctx = make_spec("B", 2, 1, 1, 1)
    r = verify_idos(spec, ctx)
    assert list(r.to_json()) == ["verdict", "params", "spec_id", "mode", "windows_checked",
                                 "matrices_checked", "failures", "dominance_stats"]
    assert "elapsed" in r.to_json(timing=True)


def test_context_must_match():
    spec, _ = make_spec("B", 2, 1, 1, 1)
    with pytest.raises(ValueError):
        verify_idos(spec, field_create(18))


def test_thick_column_plans():
    plans = thick_column_plans((0, 2, 4), 2)
    assert [p.j for p in plans] == [1, 2, 3]
    assert [p.r for p in plans] == [0, 0, 2]
    assert plans[2].own_rows == (2, 3, 4, 5) and plans[2].next_rows == ()
    assert plans[1].own_rows == (0, 1) and plans[1].next_rows == (2, 3, 4, 5)


def test_dominance_structure_small_cases():
    assert verify_dominance_structure(2, 1, 1).passed
    assert verify_dominance_structure(4, 2, 1).passed


def test_dominance_structure_flags_counterexample():
    r = verify_dominance_structure(4, 2, 2)
    assert r.matrices_checked == 157 and r.max_dominant_sum <= 36
    assert [p["received_sets"] for p, _ in r.failures] == [[[1], [4], [1, 2, 3, 4]]]


def test_superregular_route_small():
    spec, ctx = make_spec("B", 2, 1, 1, 1)
    r = verify_superregular_route(spec, 2, ctx, minor_cap=2)
    assert r.passed and r.minors_checked > 0 and r.minors_trivial > 0


def test_superregular_structure_worked_example():
    spec = GeneratorSpec(CodeParams(4, 2, 2, 3), "B", tuple(reversed(construct_b(4, 2, 2))), 10,
                         override=True)
    r = verify_superregular_route(spec, 4, minor_cap=0)
    assert r.structural_ok and r.diagonal_ok


def test_superregular_route_flags_construction_a():
    spec, ctx = make_spec("A", 4, 2, 1, 2)
    assert not verify_superregular_route(spec, 2, ctx, minor_cap=0).structural_ok


def test_oracle_suite():
    r = lemma1_oracle_suite(trials=50, size=3, max_entry=6, seed=1)
    assert r.asserted == 50 and r.passed and r.generated >= 50
    one = lemma1_oracle_suite(trials=1, size=1, max_entry=0, seed=0, neg_inf_rate=0.0)
    assert one.nonsingular == 1
