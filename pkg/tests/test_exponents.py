from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from idos.constructions import construct_a
from idos.exponents import (
    ExponentMatrix,
    PreconditionUnmet,
    check_dominance_implies_invertible,
    decompose_dominance,
    find_dominant_permutation,
    find_dominant_submatrix,
    lift,
    max_weight_assignment,
)
from idos.field import field_create

from _oracles import brute_dominant, perm_sums


def E(rows):
    return ExponentMatrix.of(rows)


def test_lift_examples():
    ctx = field_create(37)
    assert lift(E([[0]]), ctx).entries == [1]
    assert lift(E([[None]]), ctx).entries == [0]
    a = ctx.pow_alpha
    assert lift(E([[0, 0], [1, 2]]), ctx).entries == [1, 1, a(1), a(2)]


def test_dominant_permutation_examples():
    rep = find_dominant_permutation(E([[0, 0], [1, 2]]))
    assert rep.exists and rep.sigma_star == (0, 1)
    assert rep.dominant_sum == 2 and rep.runner_up_sum == 1
    assert not find_dominant_permutation(E([[0, 0], [0, 0]])).exists
    rep = find_dominant_permutation(E([[0, None], [None, 5]]))
    assert rep.exists and rep.sigma_star == (0, 1) and rep.dominant_sum == 5


def test_report_json_is_one_based():
    obj = find_dominant_permutation(E([[0, 0], [1, 2]])).to_json()
    assert obj["sigma_star"] == [1, 2]


def test_dominant_submatrix_of_worked_example_blocks():
    m1, m0 = construct_a(4, 2)
    assert find_dominant_submatrix(m0)[0] == (2, 3)
    assert find_dominant_submatrix(m1)[0] == (0, 1)


def test_dominant_submatrix_square_case_matches_permutation():
    M = E([[0, 0], [1, 2]])
    rows, rep = find_dominant_submatrix(M)
    assert rows == (0, 1) and rep == find_dominant_permutation(M)


def test_constrained_submatrix():
    m1, m0 = construct_a(4, 2)
    # forcing the top row of M^(0) leaves the bottom row as partner
    rows, _ = find_dominant_submatrix(m0, forced_rows=[0])
    assert rows == (0, 3)
    rows, _ = find_dominant_submatrix(m0, allowed_rows=[0, 1, 2])
    assert rows == (1, 2)


def test_decomposition_of_zero_four_window():
    m1, m0 = construct_a(4, 2)
    # window (0,4): rows are slot 2, columns s(1) | s(2)
    M = E([list(m1.entries[i]) + list(m0.entries[i]) for i in range(4)])
    cert = decompose_dominance(M, [[0, 1], [2, 3]])
    assert cert is not None
    assert set(cert.rows[0]).isdisjoint(cert.rows[1])
    rep = find_dominant_permutation(M)
    assert cert.sigma_star == rep.sigma_star and cert.total == rep.dominant_sum


def test_decomposition_single_part_equals_existence():
    rng = random.Random(3)
    for _ in range(100):
        M = E([[rng.choice([None, *range(6)]) for _ in range(3)] for _ in range(3)])
        cert = decompose_dominance(M, [[0, 1, 2]])
        assert (cert is not None) == find_dominant_permutation(M).exists


def test_decomposition_with_shared_rows_fails():
    # both columns prefer row 0 on their own
    M = E([[5, 5], [0, 1]])
    assert decompose_dominance(M, [[0], [1]]) is None


def test_invertibility_from_dominance():
    assert check_dominance_implies_invertible(E([[0, 0], [1, 2]]), 3)
    assert check_dominance_implies_invertible(E([[0]]), 1)
    with pytest.raises(PreconditionUnmet):
        check_dominance_implies_invertible(E([[0, 0], [0, 0]]), 3)


def test_assignment_matches_brute_force():
    rng = random.Random(17)
    for _ in range(300):
        n = rng.randint(1, 6)
        rows = [[rng.choice([None, None, *range(8)]) for _ in range(n)] for _ in range(n)]
        M = E(rows)
        expect = brute_dominant(rows)
        rep = find_dominant_permutation(M, method="assignment")
        assert rep.exists == (expect is not None)
        if expect:
            assert (rep.sigma_star, rep.dominant_sum) == expect
        best = max(perm_sums(rows).values(), default=None)
        got = max_weight_assignment(M)
        assert (got[1] if got else None) == best


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=1, max_value=5).flatmap(
    lambda n: st.lists(st.lists(st.one_of(st.none(), st.integers(0, 12)), min_size=n, max_size=n),
                       min_size=n, max_size=n)))
def test_brute_and_assignment_agree(rows):
    M = E(rows)
    assert find_dominant_permutation(M, "brute") == find_dominant_permutation(M, "assignment")


def test_large_matrix_uses_assignment():
    m1, m0 = construct_a(6, 4)
    M = E([list(m0.entries[i]) + [None] * 4 for i in range(2, 6)]
          + [list(m1.entries[i]) + list(m0.entries[i]) for i in range(4)])
    rep = find_dominant_permutation(M)
    assert rep.exists


def test_json_round_trip():
    M = E([[0, None], [3, 4]])
    obj = M.to_json()
    assert obj == {"rows": 2, "cols": 2, "entries": [0, None, 3, 4]}
    assert ExponentMatrix.from_json(obj) == M
    assert ExponentMatrix.from_json({"rows": 2, "cols": 2, "entries": [[0, None], [3, 4]]}) == M
