"""Exact desk-scale counters.

Three independent counting routes live here: a brute-force scan for integer
points on a plane curve in a box, a meet-in-the-middle counter for equal sums
of two k-th powers, and a lattice-decomposition pipeline that recounts the
nontrivial solutions through the v1/v2 substitution.  The pipeline and the
naive counter must agree exactly; that equality is the central correctness
property of the decomposition.

All counts are exact integers.  Guards keep the scans at desk scale and
raise GuardExceeded rather than start an unbounded computation.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .arith import crt_lattices, gauss_reduce, iter_lattice_points, odd_squarefree_kernel
from .forms import TernaryForm, Triple

__all__ = [
    "CountResult",
    "SolutionQuadruple",
    "FitResult",
    "GuardExceeded",
    "curve_points",
    "count_curve_bruteforce",
    "count_sums_naive",
    "count_sums_pipeline",
    "classify_trivial",
    "fit_exponent",
]

DEFAULT_CELL_GUARD = 50_000_000
DEFAULT_X_GUARD = 2000
DEFAULT_PIPELINE_X_GUARD = 600


class GuardExceeded(RuntimeError):
    """A requested scan exceeds the configured desk-scale guard."""


@dataclass(frozen=True)
class CountResult:
    """Exact count with the parameters that produced it."""

    label: str
    params: dict
    total: int
    trivial: int
    nontrivial: int
    elapsed: float
    solutions: tuple | None = None

    def __post_init__(self) -> None:
        if self.total != self.trivial + self.nontrivial:
            raise ValueError("total must equal trivial + nontrivial")
        if min(self.total, self.trivial, self.nontrivial) < 0:
            raise ValueError("counts must be nonnegative")


@dataclass(frozen=True)
class SolutionQuadruple:
    """Positive quadruple with w^k + x^k = y^k + z^k, verified on construction."""

    w: int
    x: int
    y: int
    z: int
    k: int

    def __post_init__(self) -> None:
        if min(self.w, self.x, self.y, self.z) < 1:
            raise ValueError("quadruple entries must be positive")
        if self.w**self.k + self.x**self.k != self.y**self.k + self.z**self.k:
            raise ValueError("not a solution of the equal-sums equation")


def classify_trivial(quad: SolutionQuadruple | tuple[int, int, int, int], k: int | None = None) -> bool:
    """True when (y, z) is a permutation of (w, x) as multisets."""
    if isinstance(quad, SolutionQuadruple):
        w, x, y, z = quad.w, quad.x, quad.y, quad.z
    else:
        w, x, y, z = quad
    return sorted((w, x)) == sorted((y, z))


def _int_box(box: Sequence[float]) -> tuple[int, int, int]:
    out = []
    for v in box:
        iv = int(v)
        if iv != v or iv < 0:
            raise ValueError(f"box entries must be nonnegative integers, got {v}")
        out.append(iv)
    return (out[0], out[1], out[2])


def curve_points(
    form: TernaryForm, box: Sequence[float], cell_guard: int = DEFAULT_CELL_GUARD
) -> list[Triple]:
    """All primitive integer zeros of the form with |x_i| <= box_i, sorted.

    Vectorised over (x2, x3) planes when the values fit in int64; otherwise a
    plain exact loop.  Both x and -x appear; the origin never does (its gcd
    is 0).
    """
    b1, b2, b3 = _int_box(box)
    cells = (2 * b1 + 1) * (2 * b2 + 1) * (2 * b3 + 1)
    if cells > cell_guard:
        raise GuardExceeded(f"box scan of {cells} cells exceeds guard {cell_guard}")

    bound = sum(
        abs(c) * b1**e1 * b2**e2 * b3**e3 for (e1, e2, e3), c in form.terms
    )
    pts: list[Triple] = []
    if bound < 2**62:
        r2 = np.arange(-b2, b2 + 1, dtype=np.int64)
        r3 = np.arange(-b3, b3 + 1, dtype=np.int64)
        pow2 = {e: r2**e for e in {t[0][1] for t in form.terms}}
        pow3 = {e: r3**e for e in {t[0][2] for t in form.terms}}
        for x1 in range(-b1, b1 + 1):
            acc = np.zeros((r2.size, r3.size), dtype=np.int64)
            for (e1, e2, e3), c in form.terms:
                acc += (c * x1**e1) * pow2[e2][:, None] * pow3[e3][None, :]
            for i2, i3 in zip(*np.nonzero(acc == 0)):
                x2, x3 = int(r2[i2]), int(r3[i3])
                if math.gcd(math.gcd(abs(x1), abs(x2)), abs(x3)) == 1:
                    pts.append((x1, x2, x3))
    else:
        for x1 in range(-b1, b1 + 1):
            for x2 in range(-b2, b2 + 1):
                for x3 in range(-b3, b3 + 1):
                    if form.evaluate((x1, x2, x3)) == 0:
                        if math.gcd(math.gcd(abs(x1), abs(x2)), abs(x3)) == 1:
                            pts.append((x1, x2, x3))
    pts.sort()
    return pts


def count_curve_bruteforce(
    form: TernaryForm, box: Sequence[float], cell_guard: int = DEFAULT_CELL_GUARD
) -> CountResult:
    """Exact count of primitive integer zeros in the box (x and -x both count)."""
    t0 = time.perf_counter()
    pts = curve_points(form, box, cell_guard)
    n = len(pts)
    return CountResult(
        label="curve_bruteforce",
        params={"form": str(form), "box": tuple(int(v) for v in box)},
        total=n,
        trivial=0,
        nontrivial=n,
        elapsed=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# naive equal-sums counter (meet in the middle)


def _pair_sums_chunk(k: int, X: int, a_lo: int, a_hi: int) -> dict[int, int]:
    pows = [i**k for i in range(X + 1)]
    out: dict[int, int] = {}
    for a in range(a_lo, a_hi + 1):
        pa = pows[a]
        for b in range(1, X + 1):
            s = pa + pows[b]
            out[s] = out.get(s, 0) + 1
    return out


def count_sums_naive(
    k: int,
    X: int,
    variant: str = "two-two",
    solutions: bool = False,
    workers: int = 1,
    x_guard: int = DEFAULT_X_GUARD,
) -> CountResult:
    """Exact counts for w^k + x^k = y^k + z^k (or the three-one variant).

    Sums are exact big integers grouped in a dictionary keyed by the sum, so
    the memory cost is O(X^2).  For the two-two variant the total counts
    ordered quadruples in [1, X]^4; trivial means (y, z) is a permutation of
    (w, x), which gives exactly 2 X^2 - X ordered quadruples.  With
    ``solutions=True`` the nontrivial ordered quadruples are returned too.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if X < 1:
        raise ValueError("X must be at least 1")
    if X > x_guard:
        raise GuardExceeded(f"X = {X} exceeds memory guard {x_guard}")
    if variant not in ("two-two", "three-one"):
        raise ValueError(f"unknown variant {variant!r}")
    t0 = time.perf_counter()
    pows = [i**k for i in range(X + 1)]

    if variant == "three-one":
        sums2: dict[int, int] = {}
        for w in range(1, X + 1):
            pw = pows[w]
            for x in range(w, X + 1):  # unordered w <= x, weight 2 off-diagonal
                s = pw + pows[x]
                sums2[s] = sums2.get(s, 0) + (1 if w == x else 2)
        total = 0
        for z in range(1, X + 1):
            pz = pows[z]
            for y in range(1, X + 1):
                total += sums2.get(pz - pows[y], 0)
        return CountResult(
            label="sums_naive",
            params={"k": k, "X": X, "variant": variant},
            total=total,
            trivial=0,
            nontrivial=total,
            elapsed=time.perf_counter() - t0,
        )

    if workers > 1 and not solutions:
        chunk = max(1, X // workers)
        ranges = [(a, min(a + chunk - 1, X)) for a in range(1, X + 1, chunk)]
        merged: dict[int, int] = {}
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_pair_sums_chunk, *zip(*[(k, X, lo, hi) for lo, hi in ranges])):
                for s, c in part.items():
                    merged[s] = merged.get(s, 0) + c
        counts = merged
        pair_lists: dict[int, list[tuple[int, int]]] | None = None
    else:
        pair_lists = {}
        for a in range(1, X + 1):
            pa = pows[a]
            for b in range(1, X + 1):
                pair_lists.setdefault(pa + pows[b], []).append((a, b))
        counts = {s: len(v) for s, v in pair_lists.items()}

    total = sum(c * c for c in counts.values())
    trivial = 2 * X * X - X
    nontrivial = total - trivial
    sols = None
    if solutions:
        assert pair_lists is not None
        quads = []
        for s, pairs in pair_lists.items():
            if len(pairs) < 2:
                continue
            for w, x in pairs:
                for y, z in pairs:
                    if sorted((w, x)) != sorted((y, z)):
                        quads.append((w, x, y, z))
        quads.sort()
        sols = tuple(quads)
    return CountResult(
        label="sums_naive",
        params={"k": k, "X": X, "variant": variant},
        total=total,
        trivial=trivial,
        nontrivial=nontrivial,
        elapsed=time.perf_counter() - t0,
        solutions=sols,
    )


# ---------------------------------------------------------------------------
# pipeline counter: lattice decomposition in (w, y), monotone solve for v2


@lru_cache(maxsize=None)
def _reduced_lattices(k: int, xi: int):
    return tuple(gauss_reduce(lat) for lat in crt_lattices(k, xi))


def _binary_form_coeffs(k: int, v1: int) -> list[int]:
    # f(v1, v2) = sum_j C(k, 2j+1) v1^(2j) v2^(k-1-2j); Horner in v2^2
    return [math.comb(k, 2 * j + 1) * v1 ** (2 * j) for j in range((k + 1) // 2)]


def _pipeline_count_v1(k: int, X: int, v1: int, pows: list[int]) -> int:
    xi, _ = odd_squarefree_kernel(v1)
    cands: set[tuple[int, int]] = set()
    for lat in _reduced_lattices(k, xi):
        for w, y in iter_lattice_points(lat, (2, X), (1, X)):
            if y < w:
                cands.add((w, y))
    if not cands:
        return 0
    coeffs = _binary_form_coeffs(k, v1)
    odd_tail = (k - 1) % 2

    def f_at(v2: int) -> int:
        u = v2 * v2
        s = 0
        for cj in coeffs:
            s = s * u + cj
        return s * v2 if odd_tail else s

    lo0 = v1 + 2  # v2 >= v1 + 2 keeps x = (v2 - v1)/2 >= 1
    hi0 = 2 * X
    if lo0 > hi0:
        return 0
    f_lo, f_hi = f_at(lo0), f_at(hi0)
    shift = k - 1
    count = 0
    for w, y in cands:
        t = (pows[w] - pows[y]) << shift
        if t % v1:
            continue
        q = t // v1
        if q < f_lo or q > f_hi:
            continue
        lo, hi = lo0, hi0
        while lo < hi:
            mid = (lo + hi) // 2
            if f_at(mid) < q:
                lo = mid + 1
            else:
                hi = mid
        if f_at(lo) != q:
            continue
        v2 = lo
        if (v2 - v1) % 2:
            continue
        x = (v2 - v1) // 2
        z = (v2 + v1) // 2
        if not (x < y <= z < w):
            continue
        # orbit of the representative x < y <= z < w under side swap and
        # in-pair reordering: 8 ordered quadruples, 4 when y == z
        count += 8 if y < z else 4
    return count


def _pipeline_chunk(k: int, X: int, v1_list: tuple[int, ...]) -> int:
    pows = [i**k for i in range(X + 1)]
    return sum(_pipeline_count_v1(k, X, v1, pows) for v1 in v1_list)


def count_sums_pipeline(
    k: int,
    X: int,
    workers: int = 1,
    x_guard: int = DEFAULT_PIPELINE_X_GUARD,
) -> CountResult:
    """Exact nontrivial count via the lattice-decomposition pipeline.

    Representatives x < y <= z < w are enumerated by fixing v1 = z - x,
    restricting (w, y) to the union of residue lattices of the odd squarefree
    kernel of v1 (a necessary condition since v1 divides the transformed
    equation), and solving for v2 = z + x by integer bisection against the
    strictly increasing odd-binomial form.  Each representative contributes
    its orbit size (8, or 4 when y = z).  The trivial count is the exact
    closed form 2 X^2 - X.
    """
    if k < 4:
        raise ValueError("the pipeline needs k >= 4")
    if X < 1:
        raise ValueError("X must be at least 1")
    if X > x_guard:
        raise GuardExceeded(f"X = {X} exceeds pipeline guard {x_guard}")
    t0 = time.perf_counter()
    v1_all = tuple(range(1, max(1, X - 1)))
    if workers > 1 and v1_all:
        chunks = [v1_all[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            nontrivial = sum(
                pool.map(_pipeline_chunk, [k] * len(chunks), [X] * len(chunks), chunks)
            )
    else:
        pows = [i**k for i in range(X + 1)]
        nontrivial = sum(_pipeline_count_v1(k, X, v1, pows) for v1 in v1_all)
    trivial = 2 * X * X - X
    return CountResult(
        label="sums_pipeline",
        params={"k": k, "X": X},
        total=trivial + nontrivial,
        trivial=trivial,
        nontrivial=nontrivial,
        elapsed=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    n_used: int


def fit_exponent(samples: Iterable[tuple[float, float]]) -> FitResult:
    """Least-squares slope of log(count) against log(X).

    Nonpositive counts are dropped; at least three samples must remain.
    """
    pts = [(x, c) for x, c in samples if c > 0 and x > 0]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 positive samples, got {len(pts)}")
    xs = np.log([p[0] for p in pts])
    ys = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(xs, ys, 1)
    return FitResult(float(slope), float(intercept), len(pts))
