"""Small-scale executable model of the determinant method.

The pieces: weighted exponent sets of degree-D monomials, their enumerated
sums against closed forms, nonsingular curve points mod p, fibers of box
points over a residue class, the exact interpolation determinant with its
p-adic valuation, and auxiliary-form extraction from rank-deficient fibers.

Everything arithmetic is exact (big integers, fractions); the p-adic
valuation of a determinant is meaningless in floating point.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .arith import is_prime, next_prime, primes_up_to
from .bounds import (
    OptimizationConstants,
    f_of_A,
    optimization_constants_from_logs,
    prime_threshold_closed_form,
)
from .counters import curve_points
from .forms import TernaryForm, Triple, compute_T, divides

__all__ = [
    "ExponentSet",
    "ModPFiber",
    "DeterminantRecord",
    "SumComparison",
    "IndexComparison",
    "FiberTrace",
    "DemoResult",
    "build_exponent_set",
    "build_mjk",
    "sum_compare",
    "boundary_band_count",
    "modp_curve_points",
    "fiber",
    "determinant_delta",
    "auxiliary_form",
    "suggested_prime",
    "vanishing_demo",
]

Weights = tuple[float, float, float]


def _sigma(e: Triple, b: Weights) -> float:
    return e[0] * b[0] + e[1] * b[1] + e[2] * b[2]


@dataclass(frozen=True)
class ExponentSet:
    """Degree-D exponent triples with weighted size at most A, avoiding the
    all-coordinates-dominate condition against the maximal triple."""

    D: int
    A: float
    b: Weights
    f_triple: Triple
    members: tuple[Triple, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    def sigma(self, e: Triple) -> float:
        return _sigma(e, self.b)

    def is_member(self, e: Triple) -> bool:
        return (
            all(v >= 0 for v in e)
            and sum(e) == self.D
            and self.sigma(e) <= self.A
            and any(e[j] < self.f_triple[j] for j in range(3))
        )


def build_exponent_set(
    D: int, A: float, b: Weights, f_triple: Triple
) -> ExponentSet:
    """Exact enumeration, members sorted lexicographically.

    Empty results are legitimate (always so when A <= D*b1).
    """
    if D < 1:
        raise ValueError("D must be at least 1")
    if not (0 < b[0] < b[1] < b[2]):
        raise ValueError("weights must satisfy 0 < b1 < b2 < b3")
    if any(f < 0 for f in f_triple):
        raise ValueError("f_triple must be componentwise nonnegative")
    members = []
    for e1 in range(D + 1):
        for e2 in range(D - e1 + 1):
            e = (e1, e2, D - e1 - e2)
            if _sigma(e, b) <= A and any(e[j] < f_triple[j] for j in range(3)):
                members.append(e)
    return ExponentSet(D=D, A=A, b=tuple(b), f_triple=tuple(f_triple), members=tuple(members))


def build_mjk(D: int, A: float, b: Weights, j: int, k: int) -> list[tuple[int, int]]:
    """Pairs (m_j, m_k) with m_j + m_k = D and m_j b_j + m_k b_k <= A.

    Indices j, k are 1-based and distinct.
    """
    if j == k or not {j, k} <= {1, 2, 3}:
        raise ValueError("j, k must be distinct members of {1, 2, 3}")
    bj, bk = b[j - 1], b[k - 1]
    return [
        (mj, D - mj) for mj in range(D + 1) if mj * bj + (D - mj) * bk <= A
    ]


def _tau_pairs(j: int, k: int) -> tuple[tuple[int, int], tuple[int, int]]:
    return ((j, k), (k, j))


def _closed_pair_sum(D: int, A: float, b: Weights, j: int, k: int) -> float:
    """(1/2) sum over permutations (g, h) of {j, k} with b_h < A/D of
    (A^2 - D^2 b_h^2)/(b_g - b_h)."""
    total = 0.0
    for g, h in _tau_pairs(j, k):
        bg, bh = b[g - 1], b[h - 1]
        if bh < A / D:
            total += (A * A - D * D * bh * bh) / (bg - bh)
    return total / 2


def _closed_pair_count(D: int, A: float, b: Weights, j: int, k: int) -> float:
    """Sum over permutations (g, h) of {j, k} with b_h < A/D of
    (A - D b_h)/(b_g - b_h)."""
    total = 0.0
    for g, h in _tau_pairs(j, k):
        bg, bh = b[g - 1], b[h - 1]
        if bh < A / D:
            total += (A - D * bh) / (bg - bh)
    return total


@dataclass(frozen=True)
class IndexComparison:
    """Per-index sums: the subset with e_i < f_i against the pair-set model."""

    i: int
    jk: tuple[int, int]
    f_i: int
    enum_sigma_sum: float
    enum_tau_sum: float
    closed_tau_sum: float
    enum_count: int
    closed_count: float

    @property
    def sigma_residual(self) -> float:
        return abs(self.enum_sigma_sum - self.f_i * self.closed_tau_sum)

    @property
    def tau_residual(self) -> float:
        return abs(self.enum_tau_sum - self.closed_tau_sum)


@dataclass(frozen=True)
class SumComparison:
    """Enumerated sums and counts against their closed forms."""

    D: int
    A: float
    b: Weights
    f_triple: Triple
    per_index: tuple[IndexComparison, IndexComparison, IndexComparison]
    e_enum: int
    e_lower_closed: float

    def max_residual(self) -> float:
        return max(
            max(c.sigma_residual, c.tau_residual) for c in self.per_index
        )


def sum_compare(D: int, A: float, b: Weights, f_triple: Triple) -> SumComparison:
    """Enumerate the weighted sums and compare with the closed forms.

    Requires D b2 < A <= D b3 (outside that window the exponent set is either
    everything or trivially empty and the closed forms do not apply).
    """
    if not (D * b[1] < A <= D * b[2]):
        raise ValueError(f"A = {A} outside the window (D b2, D b3] = ({D * b[1]}, {D * b[2]}]")
    eset = build_exponent_set(D, A, b, f_triple)
    per = []
    for i in (1, 2, 3):
        j, k = [t for t in (1, 2, 3) if t != i]
        subset = [e for e in eset.members if e[i - 1] < f_triple[i - 1]]
        enum_sigma = math.fsum(_sigma(e, b) for e in subset)
        pairs = build_mjk(D, A, b, j, k)
        bj, bk = b[j - 1], b[k - 1]
        enum_tau = math.fsum(mj * bj + mk * bk for mj, mk in pairs)
        per.append(
            IndexComparison(
                i=i,
                jk=(j, k),
                f_i=f_triple[i - 1],
                enum_sigma_sum=enum_sigma,
                enum_tau_sum=enum_tau,
                closed_tau_sum=_closed_pair_sum(D, A, b, j, k),
                enum_count=len(subset),
                closed_count=_closed_pair_count(D, A, b, j, k),
            )
        )
    e_lower = sum(
        f_triple[c.i - 1] * c.closed_count for c in per
    )
    return SumComparison(
        D=D,
        A=A,
        b=tuple(b),
        f_triple=tuple(f_triple),
        per_index=(per[0], per[1], per[2]),
        e_enum=eset.size,
        e_lower_closed=e_lower,
    )


def boundary_band_count(
    D: int, A: float, b: Weights, j: int, k: int, d: int
) -> int:
    """Number of split pairs m_j + m_k = D with A < m_j b_j + m_k b_k <= A + d b3."""
    if j == k or not {j, k} <= {1, 2, 3}:
        raise ValueError("j, k must be distinct members of {1, 2, 3}")
    bj, bk = b[j - 1], b[k - 1]
    hi = A + d * b[2]
    return sum(
        1
        for mj in range(D + 1)
        if A < mj * bj + (D - mj) * bk <= hi
    )


# ---------------------------------------------------------------------------
# mod-p fibers and the interpolation determinant


def modp_curve_points(form: TernaryForm, p: int) -> list[Triple]:
    """Nonsingular projective zeros of the form mod p, canonical reps.

    Canonical representative: first nonzero coordinate equals 1.  Points with
    vanishing gradient mod p are excluded.
    """
    if not is_prime(p):
        raise ValueError(f"p = {p} must be prime")
    if all(c % p == 0 for _, c in form.terms):
        raise ValueError(f"p = {p} divides every coefficient of the form")
    reps = (
        [(1, a, c) for a in range(p) for c in range(p)]
        + [(0, 1, c) for c in range(p)]
        + [(0, 0, 1)]
    )
    out = []
    for t in reps:
        if form.evaluate_mod(t, p) != 0:
            continue
        if form.gradient_mod(t, p) == (0, 0, 0):
            continue
        out.append(t)
    return out


@dataclass(frozen=True)
class ModPFiber:
    """Box points lying over one nonsingular residue class.

    Contains every primitive zero x of the form in the box with x congruent
    to a scalar multiple of t mod p.  ``target_size`` carries the suggested
    working prime size log^2(max|coeff| * B3) when the caller computed one.
    """

    form: TernaryForm
    box: tuple[int, int, int]
    p: int
    t: Triple
    points: tuple[Triple, ...]
    target_size: float | None = None


def _is_multiple_mod(x: Triple, t: Triple, p: int) -> bool:
    return (
        (x[0] * t[1] - x[1] * t[0]) % p == 0
        and (x[0] * t[2] - x[2] * t[0]) % p == 0
        and (x[1] * t[2] - x[2] * t[1]) % p == 0
    )


def fiber(
    form: TernaryForm,
    box: Sequence[float],
    p: int,
    t: Triple,
    points: Sequence[Triple] | None = None,
) -> ModPFiber:
    """Collect the box points congruent to a multiple of t mod p.

    ``points`` may carry a precomputed list of primitive zeros in the box
    (from counters.curve_points) to avoid rescanning per residue class.
    """
    pts = curve_points(form, box) if points is None else points
    sel = tuple(sorted(x for x in pts if _is_multiple_mod(x, t, p)))
    ibox = tuple(int(v) for v in box)
    return ModPFiber(form=form, box=ibox, p=p, t=tuple(t), points=sel)


def _det_bareiss(rows: list[list[int]]) -> int:
    a = [r[:] for r in rows]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _monomial_row(x: Triple, members: Sequence[Triple]) -> list[int]:
    return [x[0] ** e[0] * x[1] ** e[1] * x[2] ** e[2] for e in members]


@dataclass(frozen=True)
class DeterminantRecord:
    """Exact interpolation determinant over the first E fiber points.

    nu_p is the exact p-adic valuation, math.inf when the determinant is
    zero.  ``size_bound_ok`` is the a priori bound |det| <= E^E * prod of
    column sizes, which must hold.
    """

    dimension: int
    delta: int
    nu_p: int | float
    log_abs_delta: float
    size_bound_ok: bool
    vanished: bool


def determinant_delta(fib: ModPFiber, eset: ExponentSet) -> DeterminantRecord:
    """Exact determinant of the monomial matrix on the first E fiber points.

    Rows are the lexicographically first E points, columns the exponent-set
    members; the sign is ordering-dependent but |delta| and nu_p are not.
    """
    E = eset.size
    if E == 0:
        raise ValueError("empty exponent set")
    if len(fib.points) < E:
        raise ValueError(
            f"fiber has {len(fib.points)} points, fewer than E = {E}; "
            "use auxiliary_form instead"
        )
    pts = fib.points[:E]
    rows = [_monomial_row(x, eset.members) for x in pts]
    delta = _det_bareiss(rows)
    if delta == 0:
        nu: int | float = math.inf
        log_abs = -math.inf
    else:
        nu = 0
        d = abs(delta)
        while d % fib.p == 0:
            d //= fib.p
            nu += 1
        log_abs = _log_int(abs(delta))
    # |delta| <= E^E * prod over members of B1^e1 B2^e2 B3^e3, exactly
    s1 = sum(e[0] for e in eset.members)
    s2 = sum(e[1] for e in eset.members)
    s3 = sum(e[2] for e in eset.members)
    bound = E**E * fib.box[0] ** s1 * fib.box[1] ** s2 * fib.box[2] ** s3
    ok = abs(delta) <= bound
    if delta != 0 and fib.p ** int(nu) > abs(delta):
        raise ArithmeticError("p^nu exceeds |delta| for a nonzero delta")
    return DeterminantRecord(
        dimension=E,
        delta=delta,
        nu_p=nu,
        log_abs_delta=log_abs,
        size_bound_ok=ok,
        vanished=delta == 0,
    )


def _log_int(n: int) -> float:
    return math.log(n)


def _kernel_vector(rows: list[list[int]], ncols: int) -> list[int] | None:
    """Primitive integer kernel vector of the row system, or None if full rank.

    Reduced row echelon over the rationals; the kernel vector is built from
    the first free column, so an empty system returns the first unit vector.
    """
    m = [[Fraction(v) for v in row] for row in rows]
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        pv = m[r][c]
        m[r] = [v / pv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * bb for a, bb in zip(m[i], m[r])]
        pivots.append((r, c))
        r += 1
        if r == len(m):
            break
    pivot_cols = {c for _, c in pivots}
    free = [c for c in range(ncols) if c not in pivot_cols]
    if not free:
        return None
    c0 = free[0]
    vec = [Fraction(0)] * ncols
    vec[c0] = Fraction(1)
    for ri, ci in pivots:
        vec[ci] = -m[ri][c0]
    lcm = 1
    for v in vec:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    ints = [int(v * lcm) for v in vec]
    g = 0
    for v in ints:
        g = math.gcd(g, abs(v))
    ints = [v // g for v in ints]
    lead = next(v for v in ints if v)
    if lead < 0:
        ints = [-v for v in ints]
    return ints


class AuxiliaryFormError(ArithmeticError):
    """The extracted form failed its certification (should not happen)."""


def auxiliary_form(fib: ModPFiber, eset: ExponentSet) -> TernaryForm | None:
    """Nonzero integer form supported on the exponent set vanishing on the fiber.

    Returns None when the evaluation matrix has full column rank (no such
    form from this data).  The result is certified: it vanishes at every
    fiber point and is not divisible by the curve form.
    """
    if eset.size == 0:
        raise ValueError("empty exponent set")
    rows = [_monomial_row(x, eset.members) for x in fib.points]
    vec = _kernel_vector(rows, eset.size)
    if vec is None:
        return None
    g = TernaryForm.from_terms(
        {e: c for e, c in zip(eset.members, vec) if c}
    )
    for x in fib.points:
        if g.evaluate(x) != 0:
            raise AuxiliaryFormError(f"extracted form does not vanish at {x}")
    if divides(fib.form, g):
        raise AuxiliaryFormError("extracted form is divisible by the curve form")
    return g


def suggested_prime(form: TernaryForm, box: Sequence[float]) -> int:
    """Smallest prime at least log^2(max|coeff| * B3), the working prime size."""
    target = math.log(form.max_abs_coefficient() * float(box[2])) ** 2
    return next_prime(math.ceil(target))


# ---------------------------------------------------------------------------
# vanishing demonstration


@dataclass(frozen=True)
class FiberTrace:
    """One (p, t) record of the demonstration sweep."""

    p: int
    t: Triple
    n_points: int
    E: int
    log_abs_delta: float | None
    nu_p: float | None
    vanished: bool | None
    auxiliary: str | None

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "t": list(self.t),
            "E": self.E,
            "n_points": self.n_points,
            "log_abs_delta": self.log_abs_delta,
            "nu_p": self.nu_p,
            "vanished": self.vanished,
            "auxiliary_form": self.auxiliary,
        }


@dataclass(frozen=True)
class DemoResult:
    """Sweep summary: traces, the computed log-p threshold, empirical split."""

    traces: tuple[FiberTrace, ...]
    threshold_log_p: float
    suggested_p: int
    max_nonzero_p: int | None
    min_all_zero_p: int | None
    margin: float | None
    consts: OptimizationConstants

    def nonzero_primes(self) -> list[int]:
        return sorted({tr.p for tr in self.traces if tr.vanished is False})

    def eligible_primes(self) -> list[int]:
        return sorted({tr.p for tr in self.traces if tr.vanished is not None})


def vanishing_demo(
    form: TernaryForm,
    box: Sequence[float],
    D: int,
    A: float,
    prime_cap: int = 60,
) -> DemoResult:
    """Sweep odd primes and watch the interpolation determinant collapse.

    For each prime up to the cap and each nonsingular residue class, the
    first-E determinant is computed exactly when the fiber is deep enough;
    rank-deficient fibers (too few points, or a vanishing determinant) yield
    a certified auxiliary form.  The reported threshold exp(f(A*)) is the
    main term only; the asymptotic statement carries unquantified lower-order
    corrections, so the empirical split is reported alongside, not asserted
    equal.
    """
    ibox = tuple(int(v) for v in box)
    t_res = compute_T(form, ibox)
    b = tuple(math.log(v) for v in ibox)
    log_t = _sigma(t_res.triple, b)
    consts = optimization_constants_from_logs(b, log_t, form.degree, D)
    f_star = f_of_A(consts, consts.a_star)
    closed = prime_threshold_closed_form(b, log_t, form.degree)
    if abs(f_star - closed) > 1e-8 * max(1.0, abs(closed)):
        raise ArithmeticError(
            f"f(A*) = {f_star!r} disagrees with the closed-form threshold {closed!r}"
        )
    eset = build_exponent_set(D, A, b, t_res.triple)
    if eset.size == 0:
        raise ValueError("exponent set is empty; raise A")
    pts = curve_points(form, ibox)
    traces = []
    for p in primes_up_to(prime_cap):
        if p == 2:
            continue
        for t in modp_curve_points(form, p):
            fib = fiber(form, ibox, p, t, points=pts)
            if not fib.points:
                continue
            if len(fib.points) >= eset.size:
                rec = determinant_delta(fib, eset)
                aux = auxiliary_form(fib, eset) if rec.vanished else None
                traces.append(
                    FiberTrace(
                        p=p,
                        t=t,
                        n_points=len(fib.points),
                        E=eset.size,
                        log_abs_delta=None if rec.vanished else rec.log_abs_delta,
                        nu_p=None if rec.vanished else float(rec.nu_p),
                        vanished=rec.vanished,
                        auxiliary=None if aux is None else str(aux),
                    )
                )
            else:
                aux = auxiliary_form(fib, eset)
                traces.append(
                    FiberTrace(
                        p=p,
                        t=t,
                        n_points=len(fib.points),
                        E=eset.size,
                        log_abs_delta=None,
                        nu_p=None,
                        vanished=None,
                        auxiliary=None if aux is None else str(aux),
                    )
                )
    nonzero = sorted({tr.p for tr in traces if tr.vanished is False})
    eligible = sorted({tr.p for tr in traces if tr.vanished is not None})
    max_nonzero = nonzero[-1] if nonzero else None
    zeros_above = [p for p in eligible if max_nonzero is None or p > max_nonzero]
    min_all_zero = zeros_above[0] if zeros_above else None
    margin = (
        math.log(min_all_zero) / f_star - 1 if min_all_zero is not None else None
    )
    return DemoResult(
        traces=tuple(traces),
        threshold_log_p=f_star,
        suggested_p=suggested_prime(form, ibox),
        max_nonzero_p=max_nonzero,
        min_all_zero_p=min_all_zero,
        margin=margin,
        consts=consts,
    )
