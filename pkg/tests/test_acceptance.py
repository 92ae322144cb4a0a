"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines and timings.  Every tolerance is pinned here; nothing is deferred to
later calibration.
"""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from boxpoints.arith import crt_lattices, gauss_reduce, xi_partial_sums, xi_sum
from boxpoints.bounds import (
    BoxProfile,
    bound_box_product,
    bound_lopsided,
    bound_thin_box,
    perturbation_gap,
)
from boxpoints.cli import run_theta_table
from boxpoints.counters import count_sums_naive, count_sums_pipeline, fit_exponent
from boxpoints.detlab import sum_compare, vanishing_demo
from boxpoints.forms import divides, parse_form

CONIC = parse_form("x1^2 + x2^2 - x3^2")


def _report(name, started, detail=""):
    extra = f" [{detail}]" if detail else ""
    print(f"ACCEPT {name}: PASS ({time.perf_counter() - started:.2f}s){extra}")


def truncate3(v: float) -> str:
    return f"{math.floor(v * 1000) / 1000:.3f}"


# printed three-decimal truncations of the known exponent table, k = 4..8
THETA_TABLE_PRINTED = {
    "5/3": ["1.666", "1.666", "1.666", "1.666", "1.666"],
    "3/sqrt(k)+2/(k-1)": ["2.166", "1.841", "1.624", "1.467", "1.346"],
    "3/sqrt(k)+2/k": ["2.000", "1.741", "1.558", "1.419", "1.310"],
    "3/2+1/(2k-2)": ["1.666", "1.625", "1.600", "1.583", "1.571"],
}


def test_criterion_01_theta_table():
    t0 = time.perf_counter()
    rows = run_theta_table((4, 5, 6, 7, 8))
    checked = 0
    for label, *values in rows:
        expected = THETA_TABLE_PRINTED[label]
        got = [truncate3(v) for v in values]
        assert got == expected, f"{label}: {got} != {expected}"
        checked += len(values)
    assert checked == 20
    assert time.perf_counter() - t0 < 1.0
    _report("01 theta-table (20 entries)", t0)


def test_criterion_02_thin_box_reduction():
    t0 = time.perf_counter()
    rng = random.Random(20240)
    worst = 0.0
    for _ in range(10_000):
        d = rng.randint(2, 8)
        beta = rng.uniform(0.05, 0.9)
        tau = rng.uniform(beta + 0.005, 1.0)
        p = BoxProfile(alpha=0.0, beta=beta, tau=tau, degree=d)
        diff = abs(bound_lopsided(p).exponent - bound_thin_box(p).exponent)
        worst = max(worst, diff)
        assert diff <= 1e-12
    assert time.perf_counter() - t0 < 1.0
    _report("02 alpha=0 reduction, 1e4 profiles", t0, f"max diff {worst:.2e}")


def test_criterion_03_regime_boundary():
    t0 = time.perf_counter()
    rng = random.Random(20241)
    for _ in range(10_000):
        d = rng.randint(2, 8)
        alpha = rng.uniform(0.01, 0.45)
        beta = rng.uniform(alpha, min(0.95, 1 - alpha))
        tau = rng.uniform(beta + 0.005, 1.0)
        p = BoxProfile(alpha=alpha, beta=beta, tau=tau, degree=d)
        lop = bound_lopsided(p)
        box = bound_box_product(p)
        sharper = lop.applicable and lop.exponent <= box.exponent + 1e-9
        assert sharper == (tau >= alpha + beta - 1e-12), (alpha, beta, tau, d)
    # exact boundary: equality within 1e-9
    for _ in range(300):
        alpha = rng.uniform(0.05, 0.45)
        beta = rng.uniform(alpha, min(0.9, 1 - alpha))
        p = BoxProfile(alpha=alpha, beta=beta, tau=alpha + beta, degree=3)
        lop = bound_lopsided(p)
        assert lop.applicable
        assert abs(lop.exponent - bound_box_product(p).exponent) <= 1e-9
    assert time.perf_counter() - t0 < 5.0
    _report("03 regime boundary iff, 1e4 profiles", t0)


def test_criterion_04_perturbation_gap():
    t0 = time.perf_counter()
    rng = random.Random(20242)
    worst = -math.inf
    for _ in range(1000):
        d = rng.randint(2, 6)
        alpha = rng.uniform(0.02, 0.45)
        beta = rng.uniform(alpha + 0.005, min(0.9, 1 - alpha - 0.005))
        tau = rng.uniform(max(alpha + beta, 1 / d) + 0.005, 1.0)
        p = BoxProfile(alpha=alpha, beta=beta, tau=tau, degree=d)
        f3 = rng.randint(1, d)
        f1 = rng.randint(0, d - f3)
        kappa = Fraction(2 * f1 + (d - f3 - f1), f3) + 3
        for eps in (0.01, 0.1, 1.0):
            gap = perturbation_gap(p, kappa, eps).gap
            worst = max(worst, gap / eps)
            assert gap <= eps
    assert time.perf_counter() - t0 < 1.0
    _report("04 g(delta)-g(0) <= eps, 1e3 profiles x 3 eps", t0, f"max gap/eps {worst:.2e}")


def test_criterion_05_closed_form_sums_and_count():
    t0 = time.perf_counter()
    b = (1.0, 2.0, 3.0)
    f = (1, 1, 1)
    consts = []
    for D in (100, 200, 400):
        A = 2.5 * D
        cmp_ = sum_compare(D, A, b, f)
        worst = max(
            max(c.sigma_residual, c.tau_residual) for c in cmp_.per_index
        )
        consts.append(worst / A)
        assert cmp_.e_enum >= cmp_.e_lower_closed
        if D == 400:
            rel = (cmp_.e_enum - cmp_.e_lower_closed) / cmp_.e_enum
            assert rel <= 0.05, rel
    # fitted residual constant non-increasing in D
    assert consts[0] >= consts[1] - 1e-9 >= consts[2] - 2e-9
    assert max(consts) <= 1.0
    assert time.perf_counter() - t0 < 30.0
    _report("05 closed-form sums, D in {100,200,400}", t0, f"C = {consts}")


def test_criterion_06_determinant_vanishing_demo():
    t0 = time.perf_counter()
    demo = vanishing_demo(CONIC, (20, 21, 500), D=3, A=9.2, prime_cap=60)
    assert all(tr.E <= 12 for tr in demo.traces)
    nonzero = demo.nonzero_primes()
    eligible = demo.eligible_primes()
    # below the split at least one nonzero determinant occurs
    assert nonzero, "no prime produced a nonzero determinant"
    split = demo.max_nonzero_p
    # beyond the split every tested fiber vanishes, and such fibers exist
    above = [p for p in eligible if p > split]
    assert above, "no eligible fibers above the split"
    for tr in demo.traces:
        if tr.p > split and tr.vanished is not None:
            assert tr.vanished
    # primes past the computed threshold exp(f(A*)) all vanish
    for tr in demo.traces:
        if math.log(tr.p) > demo.threshold_log_p and tr.vanished is not None:
            assert tr.vanished
    # every rank-deficient fiber yielded a certified auxiliary form
    deficient = [
        tr for tr in demo.traces if tr.vanished is None or tr.vanished is True
    ]
    assert deficient
    for tr in deficient:
        assert tr.auxiliary is not None
        g = parse_form(tr.auxiliary)
        assert not divides(CONIC, g)
    assert time.perf_counter() - t0 < 120.0
    _report(
        "06 determinant vanishing demo",
        t0,
        f"nonzero at p<= {split}, all-zero from p = {demo.min_all_zero_p}, "
        f"exp(f(A*)) = {math.exp(demo.threshold_log_p):.1f}",
    )


@pytest.mark.parametrize("k", [4, 5, 6])
def test_criterion_07_pipeline_equals_naive(k):
    t0 = time.perf_counter()
    for X in (50, 100, 150, 200):
        naive = count_sums_naive(k, X)
        pipe = count_sums_pipeline(k, X)
        assert pipe.nontrivial == naive.nontrivial, (k, X)
        assert pipe.total == naive.total, (k, X)
    _report(f"07 pipeline == naive, k={k}, X in {{50,100,150,200}}", t0)


def test_criterion_08_exact_small_facts():
    t0 = time.perf_counter()
    for X in (10, 100, 500):
        res = count_sums_naive(4 if X < 500 else 5, X)
        assert res.trivial == 2 * X * X - X
    assert count_sums_naive(5, 500).nontrivial == 0
    res4 = count_sums_naive(4, 160, solutions=True)
    assert res4.nontrivial >= 8
    assert res4.nontrivial % 8 == 0
    # the known orbit is present among the ordered solutions
    orbit = {
        (59, 158, 133, 134), (59, 158, 134, 133),
        (158, 59, 133, 134), (158, 59, 134, 133),
        (133, 134, 59, 158), (133, 134, 158, 59),
        (134, 133, 59, 158), (134, 133, 158, 59),
    }
    assert orbit <= set(res4.solutions)
    assert time.perf_counter() - t0 < 60.0
    _report("08 exact small facts", t0, f"N4(160) nontrivial = {res4.nontrivial}")


def test_criterion_09_lattice_decomposition_exact():
    t0 = time.perf_counter()
    xis = [n for n in range(1, 1001, 2) if _squarefree(n)]
    checked_lattices = 0
    for k in (4, 5, 6):
        for xi in xis:
            lats = crt_lattices(k, xi)
            reduced = [gauss_reduce(lat) for lat in lats]
            for lat in reduced:
                n1 = lat.e1[0] ** 2 + lat.e1[1] ** 2
                n2 = lat.e2[0] ** 2 + lat.e2[1] ** 2
                assert lat.det**2 <= n1 * n2 <= 4 * lat.det**2
                checked_lattices += 1
            _assert_union_equals_residue_set(k, xi, lats)
    assert time.perf_counter() - t0 < 120.0
    _report(
        "09 lattice decomposition, odd squarefree xi <= 1000, k in {4,5,6}",
        t0,
        f"{checked_lattices} reduced bases",
    )


def _squarefree(n: int) -> bool:
    p = 3
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 2
    return True


def _assert_union_equals_residue_set(k, xi, lats):
    pk = np.array([pow(a, k, xi) for a in range(xi)], dtype=np.int64)
    brute = pk[:, None] == pk[None, :]
    w = np.arange(xi, dtype=np.int64)[:, None]
    y = np.arange(xi, dtype=np.int64)[None, :]
    union = np.zeros((xi, xi), dtype=bool)
    for lat in lats:
        d0 = lat.signed_det()
        s_num = w * lat.e2[1] - y * lat.e2[0]
        t_num = y * lat.e1[0] - w * lat.e1[1]
        union |= (s_num % d0 == 0) & (t_num % d0 == 0)
    assert np.array_equal(union, brute), f"union mismatch at k={k}, xi={xi}"


def test_criterion_10_kernel_sum_growth():
    t0 = time.perf_counter()
    theta, eps = 0.625, 0.1
    top = xi_sum(theta, 10**6, eps)
    assert top.partial_sum <= top.bound
    grid = sorted({int(v) for v in np.geomspace(10**3, 10**6, 40)})
    partials = xi_partial_sums(theta, grid)
    for y, s in zip(grid, partials):
        assert s <= top.c_eps * y ** (1 - theta + eps)
    # slope over the top decade, where the asymptotic regime has set in
    window = [(y, s) for y, s in zip(grid, partials) if y >= 10**5]
    slope = fit_exponent(window).slope
    assert 0.355 <= slope <= 0.425, slope
    assert time.perf_counter() - t0 < 60.0
    _report("10 kernel-sum growth", t0, f"slope {slope:.4f}, target 0.375")


def test_criterion_11_note_property_suite_is_the_gate():
    # The headline asymptotics are not reproducible at desk scale; the gate
    # is the property suite above (reductions, regime boundaries, closed-form
    # agreement, oracle equivalence).  This placeholder records the note.
    _report("11 asymptotics out of desk scope (note)", time.perf_counter())
