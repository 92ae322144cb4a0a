import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boxpoints.bounds import (
    BoxProfile,
    DegenerateProfileError,
    RegimeError,
    bound_box_product,
    bound_lopsided,
    bound_thin_box,
    f_of_A,
    g_eval,
    make_profile,
    optimization_constants,
    optimization_constants_from_logs,
    paucity_exponents,
    perturb,
    perturbation_gap,
    perturbed_coordinates,
    prime_threshold_closed_form,
)
from boxpoints.forms import parse_form


def valid_profile(rng, d=None, alpha_zero=False):
    d = d or rng.randint(2, 8)
    alpha = 0.0 if alpha_zero else rng.uniform(0.02, 0.45)
    beta = rng.uniform(alpha + 0.01, min(0.9, 1 - alpha - 0.01))
    tau = rng.uniform(max(alpha + beta, 1 / d) + 0.01, 1.0)
    return BoxProfile(alpha=alpha, beta=beta, tau=tau, degree=d)


class TestMakeProfile:
    def test_cusp_profile(self, cusp):
        p = make_profile(cusp, (1, 10, 1000))
        assert p.alpha == 0
        assert math.isclose(p.beta, 1 / 3)
        assert math.isclose(p.tau, 1 / 3)

    def test_cube_box(self, cusp):
        p = make_profile(cusp, (100, 100, 100))
        assert math.isclose(p.alpha, 1) and math.isclose(p.beta, 1)

    def test_two_scale_box(self, cusp):
        p = make_profile(cusp, (10, 10, 100))
        assert math.isclose(p.alpha, 0.5) and math.isclose(p.beta, 0.5)
        # T = max(10^2*100, 10^3) = 10^4, so tau = 4/(3*2)
        assert math.isclose(p.tau, 2 / 3)

    def test_degenerate_unit_box(self, cusp):
        with pytest.raises(ValueError):
            make_profile(cusp, (1, 1, 1))


class TestBoxProduct:
    def test_cusp_example(self, cusp):
        p = make_profile(cusp, (1, 10, 1000))
        rep = bound_box_product(p)
        assert math.isclose(rep.exponent, 1 / 3)
        # the bound value is (P1 P2 P3 / T^(1/d))^(1/d) = 10
        assert math.isclose(math.exp(rep.exponent * math.log(1000)), 10)

    def test_point_like(self):
        p = BoxProfile(alpha=0.0, beta=0.0, tau=1 / 3, degree=3)
        assert math.isclose(bound_box_product(p).exponent, (1 - 1 / 3) / 3)

    def test_cube_recovers_two_over_d(self, cusp):
        p = make_profile(cusp, (50, 50, 50))
        assert math.isclose(bound_box_product(p).exponent, 2 / 3)


class TestThinBox:
    def test_log_example(self):
        # log P2 = 3, log P3 = 6, log T = 6 in base 10: bound value 10^3
        p = BoxProfile(alpha=0.0, beta=0.5, tau=1 / 3, degree=3)
        rep = bound_thin_box(p)
        value = math.exp(rep.exponent * math.log(10**6))
        assert math.isclose(value, 1000)

    def test_minimal_t(self):
        # T = P2^d makes the bound P3^(1/d)
        d = 4
        p = BoxProfile(alpha=0.0, beta=0.6, tau=0.6, degree=d)
        assert math.isclose(bound_thin_box(p).exponent, 1 / d)

    def test_cusp_direct(self, cusp):
        p = make_profile(cusp, (1, 10, 1000))
        assert math.isclose(bound_thin_box(p).exponent, 1 / 3)

    def test_alpha_positive_warns_in_diagnostics(self):
        p = BoxProfile(alpha=0.2, beta=0.5, tau=0.8, degree=3)
        assert "alpha" in bound_thin_box(p).diagnostics


class TestLopsided:
    def test_reduces_to_thin_box_at_alpha_zero(self, cusp):
        p = make_profile(cusp, (1, 10, 1000))
        assert abs(bound_lopsided(p).exponent - bound_thin_box(p).exponent) <= 1e-12

    def test_numeric_example(self):
        p = BoxProfile(alpha=0.2, beta=0.2, tau=0.9, degree=4)
        rep = bound_lopsided(p)
        # independent evaluation through the h components
        h1 = (0.4 - 0.04) / 0.7
        h2 = 0.8 / 0.7
        h3 = 0.04 / 0.7
        assert math.isclose(rep.exponent, (h1 - h3 * h2) / 4)
        assert math.isclose(rep.exponent, 0.1122449, abs_tol=5e-8)

    def test_inapplicable_outside_regime(self):
        p = BoxProfile(alpha=1.0, beta=1.0, tau=1.0, degree=3)
        rep = bound_lopsided(p)
        assert not rep.applicable
        assert rep.exponent == math.inf
        assert "box_product" in rep.diagnostics

    def test_boundary_equals_box_product(self):
        rng = random.Random(7)
        for _ in range(200):
            a = rng.uniform(0.05, 0.45)
            b = rng.uniform(a, min(0.9, 1 - a))
            p = BoxProfile(alpha=a, beta=b, tau=a + b, degree=3)
            lop = bound_lopsided(p)
            assert lop.applicable
            assert abs(lop.exponent - bound_box_product(p).exponent) < 1e-9

    def test_regime_characterisation(self):
        rng = random.Random(11)
        for _ in range(2000):
            p = valid_profile(rng)
            lop = bound_lopsided(p)
            box = bound_box_product(p)
            sharper = lop.applicable and lop.exponent <= box.exponent + 1e-9
            assert sharper == (p.tau >= p.alpha + p.beta - 1e-12)


class TestGEval:
    def test_x_zero_matches_bound(self):
        p = BoxProfile(alpha=0.2, beta=0.3, tau=0.7, degree=3)
        ge = g_eval(p, Fraction(4), 0.0)
        assert math.isclose(ge.g / 3, bound_lopsided(p).exponent)

    def test_alpha_zero_value(self):
        p = BoxProfile(alpha=0.0, beta=0.4, tau=0.8, degree=3)
        assert math.isclose(g_eval(p, 3, 0.0).g, 0.4 / 0.8)

    def test_finite_at_small_offset(self):
        p = BoxProfile(alpha=0.2, beta=0.2, tau=0.9, degree=4)
        ge = g_eval(p, 3, 0.01)
        assert math.isfinite(ge.g)

    def test_degenerate_denominator(self):
        p = BoxProfile(alpha=0.3, beta=0.7, tau=0.7 + 1e-16, degree=3)
        with pytest.raises(DegenerateProfileError):
            g_eval(p, 3, 0.0)

    @given(
        x=st.floats(0, 0.02),
        seed=st.integers(0, 10**6),
    )
    @settings(max_examples=200)
    def test_derivative_bounds(self, x, seed):
        # |alpha'|, |beta'|, |tau'| <= 6d, checked by central differences
        rng = random.Random(seed)
        p = valid_profile(rng)
        d = p.degree
        f3 = rng.randint(1, d)
        rem = d - f3
        f1 = rng.randint(0, rem)
        kappa = Fraction(2 * f1 + (rem - f1), f3) + 3
        h = 1e-7
        lo = perturbed_coordinates(p, kappa, max(0.0, x - h))
        hi = perturbed_coordinates(p, kappa, x + h)
        span = (x + h) - max(0.0, x - h)
        for a, bval in zip(lo, hi):
            assert abs(bval - a) / span <= 6 * d * (1 + 1e-3)

    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=200)
    def test_tau_minus_alpha_floor(self, seed):
        # tau(x) - alpha(x) >= 1/(2d) whenever tau >= max(alpha+beta, 1/d)
        rng = random.Random(seed)
        p = valid_profile(rng)
        d = p.degree
        kappa = rng.uniform(3, 3 * d)
        delta = 0.01 / (180 * d**3)
        for t in range(11):
            x = delta * t / 10
            ax, _, tx = perturbed_coordinates(p, kappa, x)
            assert tx - ax >= 1 / (2 * d) - 1e-12

    @given(seed=st.integers(0, 10**6))
    @settings(max_examples=300)
    def test_g_at_most_4d(self, seed):
        rng = random.Random(seed)
        p = valid_profile(rng)
        assert g_eval(p, 3, 0.0).g <= 4 * p.degree + 1e-9


class TestPerturb:
    def test_kappa_example(self):
        f = parse_form("x1^2*x3 - x2^3")
        pert = perturb(f, (2, 10, 1000), 0.1)
        assert pert.f_triple == (2, 0, 1)
        assert pert.kappa == Fraction(7)

    def test_delta_rule(self):
        f = parse_form("x1^2*x3 - x2^3")
        pert = perturb(f, (2, 10, 1000), 0.1)
        assert math.isclose(pert.delta, 0.1 / 4860)

    def test_log_tprime_identity(self, cusp):
        for eps in (0.01, 0.1, 1.0):
            pert = perturb(cusp, (3, 30, 3000), eps)
            lp3 = math.log(3000)
            lt = math.log(compute_t_value(cusp, (3, 30, 3000)))
            expected = lt + 3 * cusp.degree * pert.delta * lp3
            assert abs(pert.log_tprime - expected) <= 1e-12 * max(1, expected)

    def test_separation_inequalities(self, cusp):
        pert = perturb(cusp, (5, 50, 5000), 0.05)
        b1, b2, b3 = pert.log_b
        assert 0 < b1 < b2 < b3 <= pert.c * b1 + 1e-9
        for lo, hi in ((b1, b2), (b1, b3), (b2, b3)):
            assert b3 <= pert.c * (hi - lo) + 1e-9

    def test_unit_p1_rejected(self, cusp):
        with pytest.raises(RegimeError):
            perturb(cusp, (1, 10, 1000), 0.1)

    def test_f3_zero_rejected(self):
        f = parse_form("x1*x2^2 - x1^3")  # no x3 anywhere
        with pytest.raises(RegimeError):
            perturb(f, (2, 10, 1000), 0.1)


def compute_t_value(form, box):
    from boxpoints.forms import compute_T

    return compute_T(form, box).value


class TestPerturbationGap:
    def test_zero_offset_gap_is_zero(self):
        p = BoxProfile(alpha=0.2, beta=0.3, tau=0.7, degree=3)
        g0 = g_eval(p, 4, 0.0)
        assert g0.g - g_eval(p, 4, 0.0).g == 0

    def test_gap_below_eps(self):
        rng = random.Random(23)
        for _ in range(500):
            p = valid_profile(rng)
            d = p.degree
            f3 = rng.randint(1, d)
            f1 = rng.randint(0, d - f3)
            kappa = Fraction(2 * f1 + (d - f3 - f1), f3) + 3
            for eps in (0.01, 0.1, 1.0):
                rep = perturbation_gap(p, kappa, eps)
                assert rep.gap <= eps

    def test_component_drifts_within_bounds(self):
        p = BoxProfile(alpha=0.2, beta=0.2, tau=0.9, degree=4)
        rep = perturbation_gap(p, Fraction(11, 2), 0.05)
        assert rep.gap <= 0.05
        assert all(rep.components_within_bounds)


class TestOptimizationConstants:
    def test_rejects_phi_boundary(self):
        with pytest.raises(RegimeError):
            optimization_constants_from_logs((1.0, 2.0, 3.0), 7.0, 3, 10)

    def test_hand_example(self):
        c = optimization_constants_from_logs((1.0, 2.0, 3.0), 8.0, 3, 3)
        assert math.isclose(c.lam, 0.5)
        assert math.isclose(c.phi, 1.5)
        assert math.isclose(c.gamma, 5.5)
        assert math.isclose(c.a_star, 11.0)
        assert not c.log_t_condition  # 8 < d(b1+b2) = 9
        assert not c.a_star_in_interval

    def test_lambda_zero_makes_f_constant(self):
        # log T' = d b3 kills lambda
        c = optimization_constants_from_logs((1.0, 2.0, 3.0), 9.0, 3, 5)
        assert math.isclose(c.lam, 0.0, abs_tol=1e-12)
        vals = {f_of_A(c, a) for a in (10.1, 12.0, 14.9)}
        assert max(vals) - min(vals) < 1e-12

    def test_interval_membership_iff_condition(self):
        rng = random.Random(5)
        hits = {True: 0, False: 0}
        for _ in range(500):
            b1 = rng.uniform(0.5, 2)
            b2 = b1 + rng.uniform(0.05, 2)
            b3 = b2 + rng.uniform(0.05, 3)
            d = rng.randint(2, 6)
            t = rng.uniform(d * b1 + 0.05, d * b3)
            try:
                c = optimization_constants_from_logs((b1, b2, b3), t, d, 12)
            except RegimeError:
                continue
            assert c.lam >= -1e-12
            assert c.a_star_in_interval == c.log_t_condition
            hits[c.log_t_condition] += 1
        assert hits[True] > 0 and hits[False] > 0

    def test_stationarity_at_a_star(self):
        c = optimization_constants_from_logs((1.0, 2.0, 3.5), 10.8, 3, 20)
        assert c.log_t_condition
        h = 1e-4 * c.a_star
        diff = (f_of_A(c, c.a_star + h) - f_of_A(c, c.a_star - h)) / (2 * h)
        assert abs(diff) < 1e-8

    def test_a_star_minimises_over_grid(self):
        c = optimization_constants_from_logs((1.0, 2.0, 3.5), 10.8, 3, 20)
        lo, hi = c.D * c.b[1], c.D * c.b[2]
        fstar = f_of_A(c, c.a_star)
        for i in range(1, 400):
            a = lo + (hi - lo) * i / 400
            assert f_of_A(c, a) >= fstar - 1e-12

    def test_threshold_closed_form_matches_f_at_a_star(self):
        b = (1.0, 2.0, 3.5)
        t = 10.8
        c = optimization_constants_from_logs(b, t, 3, 20)
        assert math.isclose(
            f_of_A(c, c.a_star), prime_threshold_closed_form(b, t, 3), rel_tol=1e-10
        )

    def test_from_perturbed_profile(self):
        f = parse_form("x1*x2*x3")
        pert = perturb(f, (4, 8, 64), 0.1)
        c = optimization_constants(pert, D=15)
        assert c.phi > 0


class TestPaucityExponents:
    def test_k4(self):
        row = paucity_exponents(4).as_tuple()
        expect = (5 / 3, 3 / 2 + 2 / 3, 2.0, 5 / 3)
        assert all(math.isclose(a, b) for a, b in zip(row, expect))

    def test_k5(self):
        row = paucity_exponents(5).as_tuple()
        expect = (5 / 3, 3 / 5**0.5 + 0.5, 3 / 5**0.5 + 0.4, 1.625)
        assert all(math.isclose(a, b) for a, b in zip(row, expect))

    def test_large_k_limit(self):
        assert math.isclose(paucity_exponents(10**9).three_halves_plus, 1.5, abs_tol=1e-8)

    def test_k_below_4_rejected(self):
        with pytest.raises(ValueError):
            paucity_exponents(3)
