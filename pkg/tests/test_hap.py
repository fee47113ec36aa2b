import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from approval_envy.core import Allocation, Instance
from approval_envy.envy import AllocationLevel, allocation_level, approval_count
from approval_envy.hap import (
    compute_max_envy, hap_has_ef, is_unanimous_envy_hap, max_matchings, perfect_matching,
    solve_hap, threshold_matching, unanimous_pair,
)

from conftest import brute_force_min_level


@st.composite
def hap_instances(draw, max_n=5, max_u=5):
    n = draw(st.integers(1, max_n))
    rows = draw(st.lists(st.lists(st.integers(0, max_u), min_size=n, max_size=n), min_size=n, max_size=n))
    return Instance.from_rows(rows)


def test_common_ranking_is_unanimous():
    inst = Instance.from_rows([[5, 4, 3, 2, 1]] * 5)
    assert is_unanimous_envy_hap(inst)
    worse, better = unanimous_pair(inst)
    assert inst.u(0, better) > inst.u(0, worse)
    m = compute_max_envy(inst)
    assert m.max_envy[0][0] == 0 and all(m.max_envy[i][j] == 5 for i in range(5) for j in range(1, 5))
    assert solve_hap(inst).unanimous


def test_rotated_rankings_are_envy_free():
    inst = Instance.from_rows([[3, 2, 1], [1, 3, 2], [2, 1, 3]])
    assert not is_unanimous_envy_hap(inst)
    res = solve_hap(inst)
    assert res.k == 1 and res.matching == Allocation((0, 1, 2))
    assert hap_has_ef(inst)


def test_rejects_non_square():
    with pytest.raises(ValueError):
        compute_max_envy(Instance.from_rows([[1, 2, 3], [1, 2, 3]]))


@given(hap_instances())
def test_max_envy_matches_definition(inst):
    mat = compute_max_envy(inst)
    n = inst.n
    for i in range(n):
        for j in range(n):
            others = [j2 for j2 in range(n) if inst.u(i, j2) > inst.u(i, j)]
            expected = max((int(mat.prec_counts[j][j2]) for j2 in others), default=0)
            assert mat.max_envy[i][j] == expected
    for perm in itertools.islice(itertools.permutations(range(n)), 10):
        alloc = Allocation(perm)
        # the matrix bounds the approval count of every envy an agent feels
        for i in range(n):
            for h in range(n):
                if i != h and inst.u(i, alloc.owner.index(h)) > inst.u(i, alloc.owner.index(i)):
                    assert approval_count(inst, alloc, i, h) <= mat.max_envy[i][alloc.owner.index(i)]


@settings(max_examples=200)
@given(st.integers(1, 7), st.integers(0, 2**32 - 1), st.floats(0.1, 0.9))
def test_perfect_matching_matches_scipy(n, seed, density):
    rng = np.random.default_rng(seed)
    A = rng.random((n, n)) < density
    match = perfect_matching([np.flatnonzero(A[i]).tolist() for i in range(n)], n)
    sci = maximum_bipartite_matching(csr_matrix(A.astype(int)), perm_type="column")
    assert (match is not None) == bool((sci >= 0).all())
    if match is not None:
        assert sorted(match) == list(range(n)) and all(A[i, match[i]] for i in range(n))


@given(hap_instances())
def test_threshold_matching_is_feasible_and_monotone(inst):
    mat = compute_max_envy(inst)
    found = [threshold_matching(mat, t) is not None for t in range(inst.n + 1)]
    assert found[-1] and found == sorted(found)
    for t in range(inst.n):
        pi = threshold_matching(mat, t)
        if pi is not None:
            assert allocation_level(inst, pi).rank <= t + 1


@settings(max_examples=150)
@given(hap_instances())
def test_solve_hap_matches_brute_force(inst):
    res = solve_hap(inst)
    best = brute_force_min_level(inst, one_item_each=True)
    got = AllocationLevel.unanimous() if res.unanimous else AllocationLevel(res.k)
    assert got == best
    assert res.unanimous == is_unanimous_envy_hap(inst)
    assert res.matchings_solved <= max_matchings(inst.n)
    if not res.unanimous:
        assert allocation_level(inst, res.matching) == best
    assert hap_has_ef(inst) == (res.k == 1)


def test_matching_oracle_via_assignment():
    """Cross-check threshold feasibility against a min-cost assignment."""
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        inst = Instance.from_rows(rng.integers(0, 10, size=(n, n)).tolist())
        mat = compute_max_envy(inst)
        for t in range(n + 1):
            cost = (mat.max_envy > t).astype(int)
            r, c = linear_sum_assignment(cost)
            assert (cost[r, c].sum() == 0) == (threshold_matching(mat, t) is not None)
