"""Number-theoretic substrate: squarefree kernels, k-th power residues,
CRT lattice decomposition, 2-D Gauss reduction, box enumeration, kernel sums.

The central contract is exactness of the lattice decomposition: for odd
squarefree xi, the union of the returned lattices is exactly the pair set
{(w, y) : xi | w^k - y^k}.  Lattices from branches where a prime divides both
coordinates have determinant a multiple of xi; the pure residue-class
branches have determinant exactly xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as _product
from typing import Iterator

import numpy as np

Pair = tuple[int, int]

__all__ = [
    "PlaneLattice",
    "ResiduePairSet",
    "XiSumResult",
    "primes_up_to",
    "is_prime",
    "next_prime",
    "odd_squarefree_kernel",
    "xi_table",
    "power_residue_pairs",
    "crt_lattices",
    "gauss_reduce",
    "lattice_points_in_box",
    "iter_lattice_points",
    "xi_sum",
    "xi_partial_sums",
]

# Rosser-Schoenfeld: pi(x) < 1.25506 x / log x for x > 1; used only to bound
# the Euler-product tail from above.
_PI_UPPER = 1.25506


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return [int(p) for p in np.nonzero(sieve)[0]]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    m = max(2, n)
    while not is_prime(m):
        m += 1
    return m


def odd_squarefree_kernel(n: int) -> tuple[int, int]:
    """Product of the distinct odd primes dividing n, and their number."""
    if n < 1:
        raise ValueError("n must be positive")
    m = n
    while m % 2 == 0:
        m //= 2
    xi = 1
    omega = 0
    p = 3
    while p * p <= m:
        if m % p == 0:
            xi *= p
            omega += 1
            while m % p == 0:
                m //= p
        p += 2
    if m > 1:
        xi *= m
        omega += 1
    return xi, omega


def xi_table(limit: int) -> np.ndarray:
    """Array a with a[n] = odd squarefree kernel of n, for 0 <= n <= limit."""
    a = np.ones(limit + 1, dtype=np.int64)
    for p in primes_up_to(limit):
        if p > 2:
            a[p::p] *= p
    return a


@dataclass(frozen=True)
class ResiduePairSet:
    """Residue pairs (a, b) mod p with a^k congruent to b^k.

    The set is {(lam * b, b) : b != 0, lam^k = 1} together with (0, 0); the
    lambda list has gcd(k, p-1) elements.
    """

    modulus: int
    power: int
    lambdas: tuple[int, ...]

    def pair_set(self) -> frozenset[Pair]:
        p = self.modulus
        pairs = {(lam * b % p, b) for b in range(1, p) for lam in self.lambdas}
        pairs.add((0, 0))
        return frozenset(pairs)

    def verify(self) -> bool:
        p, k = self.modulus, self.power
        return all(pow(a, k, p) == pow(b, k, p) for a, b in self.pair_set())


@lru_cache(maxsize=None)
def power_residue_pairs(k: int, p: int) -> ResiduePairSet:
    """Enumerate the k-th power residue pair structure mod an odd prime.

    Brute force over residues; intended for p up to about 1e6.
    """
    if p == 2 or not is_prime(p):
        raise ValueError(f"p = {p} must be an odd prime")
    lambdas = tuple(a for a in range(1, p) if pow(a, k, p) == 1)
    return ResiduePairSet(modulus=p, power=k, lambdas=lambdas)


@dataclass(frozen=True)
class PlaneLattice:
    """Rank-2 integer sublattice spanned by basis rows e1, e2 (w, y pairs)."""

    e1: Pair
    e2: Pair
    det: int
    offset: Pair = (0, 0)  # reserved for shifted classes; always zero here

    def __post_init__(self) -> None:
        cross = self.e1[0] * self.e2[1] - self.e1[1] * self.e2[0]
        if cross == 0:
            raise ValueError(f"degenerate basis {self.e1}, {self.e2}")
        if abs(cross) != self.det:
            raise ValueError(f"stated determinant {self.det} != |{cross}|")

    @classmethod
    def from_basis(cls, e1: Pair, e2: Pair) -> "PlaneLattice":
        cross = e1[0] * e2[1] - e1[1] * e2[0]
        return cls(e1=tuple(e1), e2=tuple(e2), det=abs(cross))

    def signed_det(self) -> int:
        return self.e1[0] * self.e2[1] - self.e1[1] * self.e2[0]

    def contains(self, w: int, y: int) -> bool:
        d0 = self.signed_det()
        s_num = w * self.e2[1] - y * self.e2[0]
        t_num = y * self.e1[0] - w * self.e1[1]
        return s_num % d0 == 0 and t_num % d0 == 0


def _crt_pair(r1: int, m1: int, r2: int, m2: int) -> int:
    inv = pow(m1, -1, m2)
    return (r1 + m1 * ((r2 - r1) * inv % m2)) % (m1 * m2)


def _odd_squarefree_factors(xi: int) -> list[int]:
    if xi < 1 or xi % 2 == 0:
        raise ValueError(f"xi = {xi} must be odd and positive")
    m = xi
    out = []
    p = 3
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                raise ValueError(f"xi = {xi} is not squarefree")
            out.append(p)
        p += 2
    if m > 1:
        out.append(m)
    return out


def crt_lattices(k: int, xi: int) -> list[PlaneLattice]:
    """Decompose {(w, y) : xi | w^k - y^k} into a union of plane lattices.

    Per prime p | xi the pairs split into the classes w = lam*y (mod p) for
    each k-th root of unity lam, plus the class p | w, p | y.  Choices are
    combined across primes by the Chinese Remainder Theorem.  The union is
    exactly the pair set; overlaps occur only on the divisible-by-p classes.
    """
    primes = _odd_squarefree_factors(xi)
    if not primes:
        return [PlaneLattice.from_basis((1, 0), (0, 1))]
    choices = []
    for p in primes:
        rps = power_residue_pairs(k, p)
        choices.append([("lam", p, lam) for lam in rps.lambdas] + [("zero", p, 0)])
    out = []
    for combo in _product(*choices):
        m_lam, m_zero, lam = 1, 1, 0
        for kind, p, val in combo:
            if kind == "lam":
                lam = _crt_pair(lam, m_lam, val % p, p)
                m_lam *= p
            else:
                m_zero *= p
        # w = lam*y (mod m_lam), m_zero | w, m_zero | y
        e1 = (lam * m_zero, m_zero)
        e2 = (m_lam * m_zero, 0)
        out.append(PlaneLattice.from_basis(e1, e2))
    return out


def _norm2(v: Pair) -> int:
    return v[0] * v[0] + v[1] * v[1]


def _canonical(v: Pair) -> Pair:
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        return (-v[0], -v[1])
    return v


def gauss_reduce(lattice: PlaneLattice) -> PlaneLattice:
    """Lagrange-Gauss reduction of a plane lattice basis.

    Afterwards e1 is a shortest nonzero vector and |e1| <= |e2|, which gives
    det <= |e1||e2| <= 2 det (the actual constant is 2/sqrt(3)).  Vectors are
    sign-normalised to positive first nonzero coordinate; equal-length ties
    go to the lexicographically smaller canonical representative.
    """
    u, v = lattice.e1, lattice.e2
    if _norm2(u) > _norm2(v):
        u, v = v, u
    while True:
        n = _norm2(u)
        mu = round(Fraction(u[0] * v[0] + u[1] * v[1], n))
        v = (v[0] - mu * u[0], v[1] - mu * u[1])
        if _norm2(v) >= _norm2(u):
            break
        u, v = v, u
    u, v = _canonical(u), _canonical(v)
    if _norm2(u) == _norm2(v) and v < u:
        u, v = v, u
    return PlaneLattice(e1=u, e2=v, det=lattice.det, offset=lattice.offset)


def _coef_interval(coef: int, lo: int, hi: int) -> tuple[int, int] | None:
    """Integer s range with coef*s in [lo, hi]; None when empty, (None-free)."""
    if coef == 0:
        return (-(1 << 62), 1 << 62) if lo <= 0 <= hi else None
    if coef < 0:
        coef, lo, hi = -coef, -hi, -lo
    smin = -((-lo) // coef)
    smax = hi // coef
    if smin > smax:
        return None
    return smin, smax


def iter_lattice_points(
    lattice: PlaneLattice, w_range: Pair, y_range: Pair
) -> Iterator[Pair]:
    """Yield all lattice points (w, y) inside the inclusive integer rectangle.

    Enumerates through the basis parametrisation (w, y) = s*e1 + t*e2; exact,
    and matches a direct divisibility scan.
    """
    (a, b), (c, d) = lattice.e1, lattice.e2
    d0 = lattice.signed_det()
    w_lo, w_hi = w_range
    y_lo, y_hi = y_range
    if w_lo > w_hi or y_lo > y_hi:
        return
    corners = [
        Fraction(a * y - b * w, d0) for w in (w_lo, w_hi) for y in (y_lo, y_hi)
    ]
    t_lo, t_hi = math.ceil(min(corners)), math.floor(max(corners))
    for t in range(t_lo, t_hi + 1):
        iw = _coef_interval(a, w_lo - t * c, w_hi - t * c)
        if iw is None:
            continue
        iy = _coef_interval(b, y_lo - t * d, y_hi - t * d)
        if iy is None:
            continue
        s_lo, s_hi = max(iw[0], iy[0]), min(iw[1], iy[1])
        for s in range(s_lo, s_hi + 1):
            yield (s * a + t * c, s * b + t * d)


def lattice_points_in_box(
    lattice: PlaneLattice, w_range: Pair, y_range: Pair
) -> int:
    """Exact count of lattice points in the inclusive rectangle."""
    return sum(1 for _ in iter_lattice_points(lattice, w_range, y_range))


@dataclass(frozen=True)
class XiSumResult:
    """Partial kernel sum against its Euler-product upper bound."""

    theta: float
    limit: int
    eps: float
    partial_sum: float
    bound: float
    c_eps: float
    a_eps: float


def xi_sum(theta: float, limit: int, eps: float, prime_cap: int = 100_000) -> XiSumResult:
    """Compensated partial sum of xi(n)^(-theta) for n <= limit, with bound.

    The bound is c_eps * limit^(1 - theta + eps) where c_eps is the Euler
    product over p <= prime_cap of (1 + p^(-1-eps) A_eps), A_eps =
    1/(1 - 2^-eps), inflated by a rigorous tail estimate so that it upper
    bounds the full product.  The partial sum is checked against the bound.
    """
    if not (0 < theta <= 1):
        raise ValueError("theta must satisfy 0 < theta <= 1")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if limit < 1:
        raise ValueError("limit must be at least 1")
    vals = xi_table(limit)[1:].astype(float) ** (-theta)
    partial = math.fsum(vals.tolist())
    a_eps = 1 / (1 - 2 ** (-eps))
    ps = np.array([p for p in primes_up_to(prime_cap)], dtype=float)
    log_prod = float(np.log1p(a_eps * ps ** (-1 - eps)).sum())
    tail = a_eps * _PI_UPPER * (1 + eps) * prime_cap ** (-eps) / (eps * math.log(prime_cap))
    c_eps = math.exp(log_prod + tail)
    bound = c_eps * limit ** (1 - theta + eps)
    if partial > bound:
        raise ArithmeticError(
            f"partial sum {partial!r} exceeds its upper bound {bound!r}; "
            "this contradicts the Euler-product estimate"
        )
    return XiSumResult(
        theta=theta,
        limit=limit,
        eps=eps,
        partial_sum=partial,
        bound=bound,
        c_eps=c_eps,
        a_eps=a_eps,
    )


def xi_partial_sums(theta: float, limits: list[int]) -> list[float]:
    """Partial sums of xi(n)^(-theta) at each requested limit (ascending)."""
    if not limits:
        raise ValueError("need at least one limit")
    top = max(limits)
    vals = xi_table(top)[1:].astype(float) ** (-theta)
    cs = np.cumsum(vals)
    return [float(cs[y - 1]) for y in limits]
