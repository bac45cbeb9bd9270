"""Acceptance criteria 1-9.

Run with ``pytest tests/test_acceptance.py`` (a summary line per criterion is
printed at the end of the session) or standalone with
``python3 tests/test_acceptance.py``.
"""

import itertools
import json
import math
import os
import sys
import time
from collections import Counter

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from conftest import bundle  # noqa: E402
from stablecy import cli  # noqa: E402
from stablecy.algebra import is_symmetric_form, verify_frobenius  # noqa: E402
from stablecy.bimod import bruteforce_scydim, projective_cover, recognize_twist, regular_bimodule  # noqa: E402
from stablecy.classify import recheck, scydim  # noqa: E402
from stablecy.exactlin import F2, Field  # noqa: E402
from stablecy.families import expected_resolution_term, parse_type, witness_inner_element  # noqa: E402
from stablecy.morph import (RightIdeal, is_inner, is_inner_modulo_socle, stable_hom_cyclic,  # noqa: E402
                            stably_inner_truncated_poly)
from table_oracle import grid, oracle  # noqa: E402

RESULTS: dict[int, tuple[bool, str, float]] = {}


def record(n):
    def deco(fn):
        def wrapper():
            t0 = time.perf_counter()
            try:
                ok, detail = fn()
            except Exception as exc:  # a crash is a failed criterion, reported as such
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            RESULTS[n] = (ok, detail, time.perf_counter() - t0)
            return ok, detail
        wrapper.criterion = n
        wrapper.__name__ = fn.__name__
        return wrapper
    return deco


def summary_lines():
    return [f"criterion {n}: {'PASS' if ok else 'FAIL'} ({secs:.2f}s) {detail}"
            for n, (ok, detail, secs) in sorted(RESULTS.items())]


# -- 1 ------------------------------------------------------------------------------

@record(1)
def criterion_1():
    got = {s: scydim(parse_type(s), 2).describe() for s in ["D6:nonstd", "D9:nonstd"]}
    inf = [scydim(parse_type(f"D4:r={k}:t=3"), p).describe() for k in range(1, 11) for p in (0, 2, 3)]
    ok = got == {"D6:nonstd": "Finite(5)", "D9:nonstd": "Finite(9)"} and set(inf) == {"Infinite"}
    return ok, f"{got}, D4:r=1..10:t=3 -> {sorted(set(inf))}"


# -- 2 ------------------------------------------------------------------------------

@record(2)
def criterion_2():
    cases = [("A5:r=2:t=2", 2, 4), ("D4:r=2:t=2", 2, 14), ("D4:r=2:t=2", 0, None), ("D4:r=2:t=2", 3, None),
             ("E6:r=1:t=2", 0, 10), ("D5:r=3:t=2", 0, 6)]
    bad = []
    for s, p, want in cases:
        t = parse_type(s)
        scan = oracle(t.tree, t.index, t.frequency, t.torsion, t.standard, p)
        if scan != want:
            bad.append(f"oracle {s} p={p}: {scan} != {want}")
        if scydim(t, p).value != want:
            bad.append(f"classifier {s} p={p}")
    cells = 0
    for s in grid(5, 8):
        t = parse_type(s)
        for p in (0, 2, 3):
            res = scydim(t, p)
            cells += 1
            if res.value != oracle(t.tree, t.index, t.frequency, t.torsion, t.standard, p) or recheck(t, res):
                bad.append(f"sweep {s} p={p}")
    return not bad, f"{len(cases)} worked examples, {cells} sweep cells; mismatches: {bad[:5]}"


# -- 3 ------------------------------------------------------------------------------

def _cli_json(argv):
    import contextlib
    import io
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(argv + ["--json", "--stable-output"])
    return code, json.loads(buf.getvalue())


@record(3)
def criterion_3():
    code1, r1 = _cli_json(["verify", "trunc:2", "--char", "2", "--max-degree", "2"])
    ok1 = code1 == 0 and r1["results"]["bruteforce"] == {"value": 0, "proven": True, "inconclusive_degrees": []}
    code2, r2 = _cli_json(["verify", "A5:r=2:t=2", "--char", "2", "--max-degree", "6", "--dim-cap", "20000"])
    res = r2["results"]
    d4 = res["degrees"][4]
    ok2 = (code2 == 0 and d4["verdict"]["status"] == "ConfirmedInner"
           and d4.get("twist_vs_sigma_power") == {"k": 1, "inner": "inner"}
           and "inner_witness" in res and res["adjudication"] == "agreement: Finite(4)")
    return ok1 and ok2, (f"trunc:2 -> {r1['results']['bruteforce']}; A5:r=2:t=2 -> Omega^5 twist vs sigma "
                         f"{d4.get('twist_vs_sigma_power')}, {res['adjudication']}")


# -- 4 ------------------------------------------------------------------------------

@record(4)
def criterion_4():
    cases = [("A5:r=2:t=2", 5), ("D4:r=2:t=2", 5), ("D6:nonstd", 6)]
    details, ok = [], True
    for name, period in cases:
        B = bundle(name, 2)
        top = period + 2
        M = regular_bimodule(B.algebra)
        perm = B.sigma.vertex_permutation()
        for d in range(top + 1):
            cov = projective_cover(M, degree=d + 1)
            if cov.pattern != expected_resolution_term(B.type, d, perm):
                ok = False
                details.append(f"{name} Q_{d} mismatch")
            M = cov.kernel
        details.append(f"{name}: Q_0..Q_{top} equal")
    return ok, "; ".join(details)


# -- 5 ------------------------------------------------------------------------------

@record(5)
def criterion_5():
    B = bundle("D6:nonstd", 2)
    bf = bruteforce_scydim(B, 5)
    rep = bf.reports[5]
    kind = is_inner(rep.twist).kind if rep.twist is not None else "no twist"
    return kind == "inner", f"Omega^6 twist is {kind}"


# -- 6 ------------------------------------------------------------------------------

def _trunc(n):
    return bundle(f"trunc:{n}", 2).algebra


def _poly_map(A, coeffs):
    from stablecy.morph import AlgebraMorphism
    f = A.field
    t = A.arrow("t")
    img, power = A.zero(), t
    for i in range(1, A.dim):
        img = f.reduce(img + coeffs.get(i, 0) * power)
        power = A.mul(power, t)
    return AlgebraMorphism.from_generators(A, {"t": img})


@record(6)
def criterion_6():
    tested, bad, strict = 0, [], []
    for n in range(2, 9):
        A = _trunc(n)
        s = math.ceil(n / 2)
        for bits in itertools.product([0, 1], repeat=n - 2):
            coeffs = {1: 1, **{i + 2: b for i, b in enumerate(bits)}}
            phi = _poly_map(A, coeffs)
            crit = stably_inner_truncated_poly(phi).status.confirmed
            want = all(coeffs.get(i, 0) == 0 for i in range(2, s))
            modsoc = is_inner_modulo_socle(phi).status.confirmed
            tested += 1
            if crit != want or (modsoc and not crit):
                bad.append((n, coeffs))
        if n >= 4:
            phi = _poly_map(A, {1: 1, n - 2: 1})
            if stably_inner_truncated_poly(phi).status.confirmed and not is_inner_modulo_socle(phi).status.confirmed:
                strict.append(n)
    ok = not bad and strict == list(range(4, 9))
    return ok, f"{tested} maps, mismatches {bad[:3]}, strict-inclusion witnesses for n in {strict}"


# -- 7 ------------------------------------------------------------------------------

@record(7)
def criterion_7():
    from test_morph import brute_stable_hom, tpow, trunc
    pairs, bad = 0, []
    for n in range(2, 7):
        A = trunc(n, Field(3))
        ideals = [RightIdeal(A, [tpow(A, k)]) for k in range(n + 1)]
        for (i, I), (j, J) in itertools.product(enumerate(ideals), repeat=2):
            pairs += 1
            if stable_hom_cyclic(A, I, J).dim != brute_stable_hom(A, I, J):
                bad.append((n, i, j))
    A1 = bundle("trunc:1", 3).algebra
    zero = [RightIdeal(A1, []), RightIdeal(A1, [A1.one()])]
    pairs += 4
    if any(stable_hom_cyclic(A1, I, J).dim for I in zero for J in zero):
        bad.append((1,))
    return not bad, f"{pairs} ideal pairs for n <= 6, mismatches {bad[:3]}"


# -- 8 ------------------------------------------------------------------------------

FAMILIES = [("trunc:3", 2), ("trunc:4", 3), ("A5:r=2:t=2", 2), ("A5:r=2:t=2", 3), ("A5:r=3:t=2", 3),
            ("D4:r=2:t=2", 2), ("D4:r=2:t=2", 3), ("D6:r=2:t=2", 2), ("D6:nonstd", 2), ("D9:nonstd", 2)]


@record(8)
def criterion_8():
    bad = []
    for name, p in FAMILIES:
        B = bundle(name, p)
        A, nu, f = B.algebra, B.nakayama, B.field
        G = verify_frobenius(A, B.eps)
        # eps(b_i b_j) = eps(b_j nu(b_i)) for all basis pairs
        rhs = f.matmul(nu.matrix.T, G.T)
        if not np.array_equal(G, rhs):
            bad.append(f"{name}/F_{p}: identity")
        if is_symmetric_form(A, B.eps) and not nu.is_identity():
            bad.append(f"{name}/F_{p}: symmetric but nu != id")
    # displayed generator formulas for (A_5, 2, 2) over F_3, signs included
    B = bundle("A5:r=2:t=2", 3)
    A, nu, f = B.algebra, B.nakayama, B.field
    r, n = 2, 2
    ring = lambda i, m: (i - 1) % m + 1
    for i in range(1, 2 * r + 1):
        for j in range(n + 1):
            sign = (-1 if i % (2 * r) < r else 1) if j == 0 else (-1 if (i + 1) % (2 * r) < r else 1) if j == n else 1
            if not np.array_equal(nu(A.arrow(f"a_h{i}_{j}")), f.reduce(sign * A.arrow(f"a_h{ring(i - 1, 2 * r)}_{j}"))):
                bad.append(f"nu(alpha_{i},{j})")
    for i in range(1, r + 1):
        if not np.array_equal(nu(A.idempotent(str(i))), A.idempotent(str(ring(i - 1, r)))):
            bad.append(f"nu(e_{i})")
    witness_inner_element(B, 1)
    return not bad, f"{len(FAMILIES)} families, A5 nu formulas over F_3; failures {bad[:3]}"


# -- 9 ------------------------------------------------------------------------------

@record(9)
def criterion_9():
    import test_algebra
    import test_bimod
    import test_exactlin
    suites = [
        test_exactlin.test_rank_nullity, test_exactlin.test_rref_is_idempotent_and_row_equivalent,
        test_exactlin.test_solve_recovers_consistent_systems, test_exactlin.test_inverse_when_square,
        test_exactlin.test_subspace_sum_and_intersection_dimensions,
        test_algebra.test_random_elements_associate,
        test_bimod.test_recognize_twist_round_trip_random_instances,
    ]
    for fn in suites:
        fn()
    for name, p in [("trunc:3", 3), ("A5:r=2:t=2", 2), ("D6:nonstd", 2)]:
        test_bimod.test_basic_bimodules_satisfy_relations(name, p)
    for name, p in [("trunc:3", 3), ("A5:r=2:t=2", 2), ("D4:r=2:t=2", 2), ("D6:nonstd", 2)]:
        test_bimod.test_cover_is_minimal_and_exact(name, p)
    return True, f"{len(suites) + 7} property suites green"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8,
            criterion_9]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[f"criterion_{c.criterion}" for c in CRITERIA])
def test_acceptance(criterion):
    ok, detail = criterion()
    print(f"criterion {criterion.criterion}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


if __name__ == "__main__":
    for c in CRITERIA:
        c()
    print("\n".join(summary_lines()))
    sys.exit(0 if all(ok for ok, _, _ in RESULTS.values()) else 1)
