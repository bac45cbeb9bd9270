from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bundle
from stablecy.bimod import bruteforce_scydim
from stablecy.classify import (CongruenceProblem, InadmissibleType, instantiate, m_delta, parse_range, recheck,
                               scydim, solve_min_congruence, sweep)
from stablecy.exactlin import NoSolution
from stablecy.families import parse_type
from table_oracle import grid, oracle


def cy(text, p=2):
    return scydim(parse_type(text), p)


def test_m_delta():
    assert m_delta("A", 5) == 5
    assert m_delta("D", 4) == 5
    assert (m_delta("E", 6), m_delta("E", 7), m_delta("E", 8)) == (11, 17, 29)


def test_congruence_examples():
    assert solve_min_congruence(CongruenceProblem(12, 5, 11, 0, 11, hi_open=True)) == 5
    with pytest.raises(NoSolution):
        solve_min_congruence(CongruenceProblem(4, 1, 2, 0, 100))
    assert solve_min_congruence(CongruenceProblem(1, 0, 7, 0, 7, lo_open=True)) == 7
    with pytest.raises(NoSolution):
        solve_min_congruence(CongruenceProblem(1, 3, 7, 0, 2))


def test_congruence_against_exhaustive_search():
    rng = np.random.default_rng(11)
    for _ in range(10_000):
        m = int(rng.integers(1, 10_001))
        a, b = (int(x) for x in rng.integers(-3 * m, 3 * m + 1, size=2))
        lo = int(rng.integers(-m, m + 1))
        hi = lo + int(rng.integers(0, 2 * m + 1))
        lo_open, hi_open = (bool(x) for x in rng.integers(0, 2, size=2))
        prob = CongruenceProblem(a, b, m, lo, hi, lo_open, hi_open)
        ls = np.arange(prob.first, prob.last + 1, dtype=np.int64)
        hits = ls[(a * ls - b) % m == 0]
        if hits.size:
            assert solve_min_congruence(prob) == hits[0]
        else:
            with pytest.raises(NoSolution):
                solve_min_congruence(prob)


@pytest.mark.parametrize("text,p,value", [
    ("D6:nonstd", 2, 5), ("D9:nonstd", 2, 9), ("A5:r=2:t=2", 2, 4), ("D4:r=2:t=2", 2, 14),
    ("E6:r=1:t=2", 0, 10), ("D5:r=3:t=2", 0, 6), ("D4:r=2:t=2", 0, None), ("D4:r=2:t=2", 3, None),
    ("D4:r=7:t=3", 0, None), ("A5:r=1:t=2", 2, None),
])
def test_examples(text, p, value):
    res = cy(text, p)
    assert res.value == value
    assert not recheck(parse_type(text), res)
    if value is not None and res.problem is not None:
        assert res.solution_l is not None


def test_normalization_flag():
    assert "assumed-normalization" in cy("D6:r=1/3:t=1", 3).flags
    assert "assumed-normalization" not in cy("D6:r=1:t=1", 3).flags
    assert "odd-n-not-cross-checked" in cy("A7:r=1:t=2").flags


def test_truncated_polynomials_are_not_tabulated():
    with pytest.raises(InadmissibleType):
        cy("trunc:3")


def test_full_grid_matches_scan_oracle():
    cells = 0
    for text in grid():
        t = parse_type(text)
        for p in (0, 2, 3):
            res = scydim(t, p)
            want = oracle(t.tree, t.index, t.frequency, t.torsion, t.standard, p)
            assert res.value == want, (text, p)
            assert not recheck(t, res)
            cells += 1
    assert cells > 500


@given(st.integers(1, 40), st.integers(4, 40), st.sampled_from([0, 2, 3, 5]))
def test_finiteness_is_gcd_characterized(r, n, p):
    from math import gcd
    assert cy(f"D{n}:r={r}:t=2", p).finite == (gcd(n - 1, r) == 1 and (r % 2 == 1 or p == 2))
    k = n // 2
    assert cy(f"A{2 * k + 1}:r={r}:t=2", p).finite == (gcd(r + k + 1, 2 * r) == 1)
    assert cy(f"E6:r={r}:t=2", p).finite == (gcd(6, r) == 1)
    assert not cy(f"D4:r={r}:t=3", p).finite


def test_sweep():
    cells = sweep("A{2*n+1}:r={r}:t=2", {"n": range(1, 5), "r": range(1, 7)}, [0, 2, 3])
    assert len(cells) == 72
    assert all(c.result is not None and not c.audit for c in cells)
    assert sweep("A{2*n+1}:r={r}:t=2", {"n": range(1, 1), "r": range(1, 7)}, [2]) == []
    bad = sweep("A{2*n}:r={r}:t=2", {"n": [2], "r": [1]}, [2])
    assert bad[0].result is None and bad[0].error
    assert instantiate("D{3*k}:r={r}/3:t=1", {"k": 2, "r": 1}) == "D6:r=1/3:t=1"
    assert parse_range("n=1..4, r=2") == {"n": range(1, 5), "r": range(2, 3)}


@pytest.mark.parametrize("name,p,depth", [("A5:r=2:t=2", 2, 5), ("A5:r=2:t=2", 3, 5), ("D4:r=2:t=2", 3, 5),
                                          ("trunc:3", 2, 2)])
def test_cross_oracle_with_bruteforce(name, p, depth):
    B = bundle(name, p)
    bf = bruteforce_scydim(B, depth)
    try:
        res = scydim(B.type, p)
    except InadmissibleType:
        return
    for rep in bf.reports:
        if rep.verdict is None:
            continue
        if rep.verdict.status.confirmed and bf.proven and rep.degree == bf.value:
            assert res.value == rep.degree
        if rep.verdict.status.refuted:
            assert res.value != rep.degree
