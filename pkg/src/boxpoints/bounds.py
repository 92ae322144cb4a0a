"""Exponent calculus for point counts on plane curves in lopsided boxes.

Everything here works with the log-ratio coordinates

    alpha = log P1 / log P3,   beta = log P2 / log P3,
    tau   = log T / (d log P3),

where T is the maximal monomial box size of the form.  Bounds are reported as
the coefficient c such that the count is O(P3^(c + eps)); implied constants
are never tracked.  Double precision is used throughout, with cross-checks at
1e-10; exact arithmetic lives in the forms and detlab modules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .forms import TernaryForm, Triple, compute_T

__all__ = [
    "BoxProfile",
    "PerturbedProfile",
    "OptimizationConstants",
    "BoundReport",
    "GEval",
    "GapReport",
    "PaucityExponents",
    "make_profile",
    "bound_box_product",
    "bound_thin_box",
    "bound_lopsided",
    "g_eval",
    "perturb",
    "perturbation_gap",
    "optimization_constants",
    "optimization_constants_from_logs",
    "prime_threshold_closed_form",
    "f_of_A",
    "paucity_exponents",
    "RegimeError",
    "DegenerateProfileError",
]

_CROSS_CHECK_TOL = 1e-10
_DEGENERATE_TOL = 1e-12


class RegimeError(ValueError):
    """The hypotheses of the requested bound are not satisfied."""


class DegenerateProfileError(ValueError):
    """A denominator in the exponent formulas is numerically degenerate."""


@dataclass(frozen=True)
class BoxProfile:
    """Log-ratio profile of a box against a form of the given degree.

    Profiles may be built from raw (alpha, beta, tau, degree), so the box and
    T fields are optional.  ``t_at_least_p3`` is a validity flag for the
    T >= P3 consequence of absolute irreducibility, not an assertion: the
    calculator accepts profiles violating it.
    """

    alpha: float
    beta: float
    tau: float
    degree: int
    box: tuple[float, float, float] | None = None
    t_value: float | None = None
    f_triple: Triple | None = None
    t_tied: bool = False

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise ValueError("degree must be at least 1")
        if not (-1e-12 <= self.alpha <= self.beta <= 1 + 1e-12):
            raise ValueError(f"need 0 <= alpha <= beta <= 1, got {self.alpha}, {self.beta}")
        if not (0 < self.tau <= 1 + 1e-12):
            raise ValueError(f"need 0 < tau <= 1, got {self.tau}")

    @property
    def t_at_least_p3(self) -> bool:
        return self.degree * self.tau >= 1 - 1e-12


def make_profile(form: TernaryForm, box: tuple[float, float, float]) -> BoxProfile:
    """Build the (alpha, beta, tau) profile of a form against a box."""
    p1, p2, p3 = box
    if not (1 <= p1 <= p2 <= p3):
        raise ValueError("box must satisfy 1 <= P1 <= P2 <= P3")
    if p3 <= 1:
        raise ValueError("P3 must exceed 1, otherwise the log ratios degenerate")
    t = compute_T(form, box)
    lp3 = math.log(p3)
    return BoxProfile(
        alpha=math.log(p1) / lp3,
        beta=math.log(p2) / lp3,
        tau=t.log_value / (form.degree * lp3),
        degree=form.degree,
        box=(float(p1), float(p2), float(p3)),
        t_value=t.value,
        f_triple=t.triple,
        t_tied=t.tied,
    )


@dataclass(frozen=True)
class BoundReport:
    """One evaluated bound: identifier, exponent in log-P3 units, validity."""

    bound: str
    exponent: float
    applicable: bool
    diagnostics: str = ""

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "exponent": self.exponent,
            "applicable": self.applicable,
            "diagnostics": self.diagnostics,
        }


def bound_box_product(profile: BoxProfile, degree: int | None = None) -> BoundReport:
    """General bound (P1 P2 P3 / T^(1/d))^(1/d): exponent (alpha+beta+1-tau)/d."""
    d = profile.degree if degree is None else degree
    exponent = (profile.alpha + profile.beta + 1 - profile.tau) / d
    return BoundReport("box_product", exponent, True)


def bound_thin_box(profile: BoxProfile) -> BoundReport:
    """Thin-box bound exp(log P2 log P3 / log T): exponent beta/(d tau).

    Stated for P1 = 1 (alpha = 0); for alpha > 0 the value is still computed
    but flagged in the diagnostics.
    """
    if profile.tau <= 0:
        raise DegenerateProfileError("tau must be positive for the thin-box bound")
    exponent = profile.beta / (profile.degree * profile.tau)
    note = ""
    if profile.alpha > _DEGENERATE_TOL:
        note = "warning: profile has alpha > 0; the thin-box bound assumes P1 = 1"
    return BoundReport("thin_box", exponent, True, note)


def _g_closed_form(alpha: float, beta: float, tau: float) -> float:
    num = alpha * beta + (alpha + beta - alpha * beta) * (tau - alpha - beta)
    return num / ((tau - alpha) * (tau - beta))


def _g_components(alpha: float, beta: float, tau: float) -> tuple[float, float, float, float]:
    h1 = (alpha + beta - alpha * beta) / (tau - alpha)
    h2 = (1 - beta) / (tau - alpha)
    h3 = alpha * alpha / (tau - beta)
    return h1, h2, h3, h1 - h3 * h2


def bound_lopsided(profile: BoxProfile, degree: int | None = None) -> BoundReport:
    """Sharper bound for lopsided boxes, valid in the regime tau >= alpha+beta.

    Exponent g(0)/d computed from the h-components and cross-checked against
    the closed form to 1e-10.  Outside the regime (or when tau is within
    1e-12 of alpha or beta) the report is inapplicable, carries an infinite
    exponent, and records the box_product fallback in the diagnostics.
    """
    d = profile.degree if degree is None else degree
    a, b, t = profile.alpha, profile.beta, profile.tau
    fallback = bound_box_product(profile, d)
    if t < a + b - _DEGENERATE_TOL:
        note = f"regime tau >= alpha+beta fails (tau={t!r} < {a + b!r})"
        if abs(t - a) >= _DEGENERATE_TOL and abs(t - b) >= _DEGENERATE_TOL:
            note += f"; raw formula value {_g_closed_form(a, b, t) / d!r}"
        return BoundReport(
            "lopsided",
            math.inf,
            False,
            note + f"; fallback box_product={fallback.exponent!r}",
        )
    if a == 0.0:
        # exact reduction to the thin-box bound at P1 = 1
        return BoundReport("lopsided", b / (d * t), True)
    if abs(t - a) < _DEGENERATE_TOL or abs(t - b) < _DEGENERATE_TOL:
        return BoundReport(
            "lopsided",
            math.inf,
            False,
            f"degenerate: tau coincides with alpha or beta; fallback box_product={fallback.exponent!r}",
        )
    _, _, _, g0 = _g_components(a, b, t)
    closed = _g_closed_form(a, b, t)
    if abs(g0 - closed) > _CROSS_CHECK_TOL * max(1.0, abs(closed)):
        raise ArithmeticError(
            f"h-component evaluation {g0!r} disagrees with closed form {closed!r}"
        )
    return BoundReport("lopsided", g0 / d, True)


class GEval(NamedTuple):
    """Value of g at a perturbation offset, with its h-components."""

    g: float
    h1: float
    h2: float
    h3: float
    alpha_x: float
    beta_x: float
    tau_x: float


def perturbed_coordinates(
    profile: BoxProfile, kappa: float | Fraction, x: float
) -> tuple[float, float, float]:
    """alpha(x), beta(x), tau(x) under the (x, 2x, 3x)/(1 + kappa x) drift."""
    k = float(kappa)
    den = 1 + k * x
    return (
        (profile.alpha + x) / den,
        (profile.beta + 2 * x) / den,
        (profile.tau + 3 * x) / den,
    )


def g_eval(profile: BoxProfile, kappa: float | Fraction, x: float) -> GEval:
    """Evaluate g and its h-components at perturbation offset x >= 0."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    ax, bx, tx = perturbed_coordinates(profile, kappa, x)
    if tx - bx < 1e-15 or tx - ax < 1e-15:
        raise DegenerateProfileError(
            f"denominator degenerate at x={x}: tau(x)-beta(x)={tx - bx}, tau(x)-alpha(x)={tx - ax}"
        )
    h1, h2, h3, g = _g_components(ax, bx, tx)
    return GEval(g, h1, h2, h3, ax, bx, tx)


@dataclass(frozen=True)
class PerturbedProfile:
    """Profile after the stabilising box inflation B_i = P_i * P3^(i delta)-style.

    kappa is the exact rational (2 f1 + f2)/f3 + 3, delta = eps/(180 d^3), and
    c = 1/delta + kappa.  log_b holds (log B1, log B2, log B3).
    """

    base: BoxProfile
    f_triple: Triple
    kappa: Fraction
    delta: float
    eps: float
    B: tuple[float, float, float]
    log_b: tuple[float, float, float]
    log_tprime: float
    c: float


def perturb(form: TernaryForm, box: tuple[float, float, float], eps: float) -> PerturbedProfile:
    """Inflate the box to separate the log sizes, per the delta = eps/(180 d^3) rule.

    Requires P1 > 1 (use bound_thin_box when P1 = 1) and a maximal triple with
    f3 != 0.  Verifies log T' = log T + 3 d delta log P3 and the separation
    inequalities 0 < b1 < b2 < b3 <= c*b1, b3 <= c*(bj - bi).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    p1, p2, p3 = box
    if p1 <= 1:
        raise RegimeError("P1 must exceed 1; for P1 = 1 use bound_thin_box directly")
    t = compute_T(form, box)
    f1, f2, f3 = t.triple
    if f3 == 0:
        raise RegimeError(
            f"maximal triple {t.triple} has f3 = 0; the perturbation regime needs f3 != 0"
        )
    d = form.degree
    kappa = Fraction(2 * f1 + f2, f3) + 3
    delta = eps / (180 * d**3)
    lp3 = math.log(p3)
    b1 = math.log(p1) + delta * lp3
    b2 = math.log(p2) + 2 * delta * lp3
    b3 = (1 + float(kappa) * delta) * lp3
    log_tprime = f1 * b1 + f2 * b2 + f3 * b3
    expected = t.log_value + 3 * d * delta * lp3
    if abs(log_tprime - expected) > 1e-9 * max(1.0, abs(expected)):
        raise ArithmeticError(
            f"log T' = {log_tprime!r} disagrees with log T + 3 d delta log P3 = {expected!r}"
        )
    c = 1 / delta + float(kappa)
    tol = 1e-9 * max(1.0, b3)
    bs = (b1, b2, b3)
    if not (0 < b1 < b2 < b3 <= c * b1 + tol):
        raise ArithmeticError(f"separation inequalities fail for b = {bs}, c = {c}")
    for i in range(3):
        for j in range(i + 1, 3):
            if b3 > c * (bs[j] - bs[i]) + tol:
                raise ArithmeticError(
                    f"b3 <= c*(b{j + 1} - b{i + 1}) fails: {b3} > {c * (bs[j] - bs[i])}"
                )
    return PerturbedProfile(
        base=make_profile(form, box),
        f_triple=t.triple,
        kappa=kappa,
        delta=delta,
        eps=eps,
        B=(math.exp(b1), math.exp(b2), math.exp(b3)),
        log_b=bs,
        log_tprime=log_tprime,
        c=c,
    )


@dataclass(frozen=True)
class GapReport:
    """g(delta) - g(0) together with the per-component drift bounds."""

    gap: float
    delta: float
    h_drift: tuple[float, float, float]
    h_bounds: tuple[float, float, float]

    @property
    def components_within_bounds(self) -> tuple[bool, bool, bool]:
        tol = 1e-12
        return tuple(
            drift <= bound + tol for drift, bound in zip(self.h_drift, self.h_bounds)
        )  # type: ignore[return-value]


def perturbation_gap(
    profile: BoxProfile, kappa: float | Fraction, eps: float
) -> GapReport:
    """g(delta) - g(0) for delta = eps/(180 d^3); stays at or below eps.

    Also reports |h_i(delta) - h_i(0)| against the drift bounds 72 d^3 delta,
    60 d^3 delta and 24 d delta for numerical inspection.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = profile.degree
    delta = eps / (180 * d**3)
    g0 = g_eval(profile, kappa, 0.0)
    gd = g_eval(profile, kappa, delta)
    drift = (abs(gd.h1 - g0.h1), abs(gd.h2 - g0.h2), abs(gd.h3 - g0.h3))
    bounds = (72 * d**3 * delta, 60 * d**3 * delta, 24 * d * delta)
    return GapReport(gd.g - g0.g, delta, drift, bounds)


@dataclass(frozen=True)
class OptimizationConstants:
    """Constants of the determinant-size optimisation over the cap A.

    f(A) = (lam A^2 + gamma D^2)/(lam A + phi D)^2 has its turning point at
    a_star = gamma D / phi.  ``log_t_condition`` records whether
    log T' >= d(b1 + b2), which is exactly the condition for a_star to land
    inside (D b2, D b3].
    """

    lam: float
    phi: float
    gamma: float
    D: int
    a_star: float
    log_t_condition: bool
    b: tuple[float, float, float]
    log_tprime: float
    degree: int

    @property
    def a_star_in_interval(self) -> bool:
        return self.D * self.b[1] < self.a_star <= self.D * self.b[2] + 1e-9


def optimization_constants_from_logs(
    b: tuple[float, float, float], log_tprime: float, degree: int, D: int
) -> OptimizationConstants:
    """Build the optimisation constants from raw log box sizes.

    Raises RegimeError when phi <= 0 (the boundary case: the turning-point
    analysis needs phi > 0).  lam >= 0 always holds since log T' <= d b3.
    """
    b1, b2, b3 = b
    if not (0 < b1 < b2 < b3):
        raise ValueError("need 0 < b1 < b2 < b3")
    if D < 1:
        raise ValueError("D must be at least 1")
    d = degree
    den = (b3 - b1) * (b3 - b2)
    lam = (d * b3 - log_tprime) / den
    phi = (d * b1 * b2 + b3 * (log_tprime - d * b1 - d * b2)) / den
    if lam < -1e-12:
        raise ArithmeticError(f"lam = {lam!r} negative: log T' exceeds d b3")
    if phi <= 0:
        raise RegimeError(f"phi = {phi!r} <= 0: optimisation regime boundary")
    gamma = phi * (b1 + b2) + lam * b1 * b2
    a_star = gamma * D / phi
    cond = log_tprime >= d * (b1 + b2) - 1e-12
    consts = OptimizationConstants(
        lam=lam,
        phi=phi,
        gamma=gamma,
        D=D,
        a_star=a_star,
        log_t_condition=cond,
        b=(b1, b2, b3),
        log_tprime=log_tprime,
        degree=d,
    )
    # gamma > phi*b2 is unconditional for phi > 0; gamma <= phi*b3 iff cond
    if consts.a_star <= D * b2 - 1e-9:
        raise ArithmeticError("a_star fell at or below D b2; formula inconsistency")
    if cond != (a_star <= D * b3 + 1e-9 * max(1.0, D * b3)):
        raise ArithmeticError("a_star interval membership disagrees with the log T' condition")
    return consts


def optimization_constants(
    perturbed: PerturbedProfile, degree: int | None = None, D: int = 10
) -> OptimizationConstants:
    d = perturbed.base.degree if degree is None else degree
    return optimization_constants_from_logs(perturbed.log_b, perturbed.log_tprime, d, D)


def f_of_A(consts: OptimizationConstants, A: float) -> float:
    """Evaluate f(A) = (lam A^2 + gamma D^2)/(lam A + phi D)^2."""
    den = consts.lam * A + consts.phi * consts.D
    if den <= 0:
        raise ZeroDivisionError(f"lam*A + phi*D = {den!r} must be positive")
    return (consts.lam * A * A + consts.gamma * consts.D**2) / (den * den)


def prime_threshold_closed_form(
    b: tuple[float, float, float], log_tprime: float, degree: int
) -> float:
    """Closed form for the minimal log p forcing determinant vanishing.

    Equals f(a_star); the o(1) corrections of the asymptotic statement are not
    tracked, so this is the main term only.
    """
    b1, b2, b3 = b
    d = degree
    num = d * b1 * b2 * b3 + (b1 * b3 + b2 * b3 - b1 * b2) * (log_tprime - d * b1 - d * b2)
    den = (log_tprime - d * b1) * (log_tprime - d * b2)
    return num / den


@dataclass(frozen=True)
class PaucityExponents:
    """The four exponent bounds for nontrivial equal sums of two k-th powers."""

    k: int
    five_thirds: float
    sqrt_k: float
    sqrt_k_refined: float
    three_halves_plus: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.five_thirds, self.sqrt_k, self.sqrt_k_refined, self.three_halves_plus)


def paucity_exponents(k: int) -> PaucityExponents:
    """theta_k values: count of nontrivial solutions is O(X^(theta_k + eps)).

    Rows: 5/3; max(1, 3/sqrt(k) + 2/(k-1)); max(1, 3/sqrt(k) + 2/k);
    3/2 + 1/(2k-2).
    """
    if k < 4:
        raise ValueError("k must be at least 4")
    rk = 3 / math.sqrt(k)
    return PaucityExponents(
        k=k,
        five_thirds=5 / 3,
        sqrt_k=max(1.0, rk + 2 / (k - 1)),
        sqrt_k_refined=max(1.0, rk + 2 / k),
        three_halves_plus=1.5 + 1 / (2 * k - 2),
    )
