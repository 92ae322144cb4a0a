"""Sparse exact arithmetic for integer ternary and binary forms.

Forms are stored as sorted tuples of (exponent-tuple, coefficient) pairs with
arbitrary-precision integer coefficients.  No floating point enters the
arithmetic here; the determinant work downstream depends on exactness.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple

Triple = tuple[int, int, int]
Pair = tuple[int, int]

__all__ = [
    "TernaryForm",
    "BinaryForm",
    "TValue",
    "parse_form",
    "compute_T",
    "equal_sums_binary_form",
    "substitute_lattice_basis",
    "divides",
    "FormSyntaxError",
    "InhomogeneityError",
    "ZeroFormError",
    "DegenerateBasisError",
]


class FormSyntaxError(ValueError):
    """Form text could not be parsed."""


class InhomogeneityError(ValueError):
    """The monomials of a form do not share a common total degree."""


class ZeroFormError(ValueError):
    """All coefficients cancelled; the zero form is not representable."""


class DegenerateBasisError(ValueError):
    """A substitution basis is linearly dependent."""


def _accumulate(pairs: Iterable[tuple[tuple[int, ...], int]]) -> dict[tuple[int, ...], int]:
    acc: dict[tuple[int, ...], int] = {}
    for exps, coeff in pairs:
        acc[exps] = acc.get(exps, 0) + coeff
    return {e: c for e, c in acc.items() if c != 0}


@dataclass(frozen=True)
class TernaryForm:
    """Homogeneous integer form in x1, x2, x3, stored sparsely."""

    terms: tuple[tuple[Triple, int], ...]
    degree: int

    def __post_init__(self) -> None:
        if not self.terms:
            raise ZeroFormError("a form must have at least one nonzero term")
        if self.degree < 1:
            raise InhomogeneityError("degree must be at least 1")
        for exps, coeff in self.terms:
            if coeff == 0:
                raise ValueError("zero coefficient stored")
            if len(exps) != 3 or any(e < 0 for e in exps):
                raise ValueError(f"bad exponent triple {exps}")
            if sum(exps) != self.degree:
                raise InhomogeneityError(
                    f"monomial {exps} has degree {sum(exps)}, expected {self.degree}"
                )

    @classmethod
    def from_terms(
        cls, terms: Mapping[Triple, int] | Iterable[tuple[Triple, int]]
    ) -> "TernaryForm":
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc = _accumulate((tuple(e), int(c)) for e, c in items)
        if not acc:
            raise ZeroFormError("all coefficients cancelled")
        degrees = {sum(e) for e in acc}
        if len(degrees) != 1:
            raise InhomogeneityError(f"mixed degrees {sorted(degrees)}")
        return cls(tuple(sorted(acc.items())), degrees.pop())

    def coefficient(self, exps: Triple) -> int:
        for e, c in self.terms:
            if e == exps:
                return c
        return 0

    def monomials(self) -> tuple[Triple, ...]:
        return tuple(e for e, _ in self.terms)

    def max_abs_coefficient(self) -> int:
        return max(abs(c) for _, c in self.terms)

    def evaluate(self, x: tuple[int, int, int]) -> int:
        x1, x2, x3 = x
        total = 0
        for (e1, e2, e3), c in self.terms:
            total += c * x1**e1 * x2**e2 * x3**e3
        return total

    def evaluate_mod(self, x: tuple[int, int, int], p: int) -> int:
        x1, x2, x3 = (v % p for v in x)
        total = 0
        for (e1, e2, e3), c in self.terms:
            total += c * pow(x1, e1, p) * pow(x2, e2, p) * pow(x3, e3, p)
        return total % p

    def partial(self, axis: int) -> "TernaryForm | None":
        """d/dx_axis (axis in 1..3); None when the derivative vanishes."""
        acc: dict[Triple, int] = {}
        i = axis - 1
        for exps, c in self.terms:
            if exps[i] == 0:
                continue
            new = list(exps)
            new[i] -= 1
            key = (new[0], new[1], new[2])
            acc[key] = acc.get(key, 0) + c * exps[i]
        acc = {e: c for e, c in acc.items() if c}
        if not acc:
            return None
        return TernaryForm.from_terms(acc)

    def gradient_mod(self, x: tuple[int, int, int], p: int) -> tuple[int, int, int]:
        out = []
        for axis in (1, 2, 3):
            d = self.partial(axis)
            out.append(0 if d is None else d.evaluate_mod(x, p))
        return (out[0], out[1], out[2])

    def __mul__(self, other: "TernaryForm") -> "TernaryForm":
        if not isinstance(other, TernaryForm):
            return NotImplemented
        prods = (
            ((a1 + b1, a2 + b2, a3 + b3), ca * cb)
            for (a1, a2, a3), ca in self.terms
            for (b1, b2, b3), cb in other.terms
        )
        return TernaryForm.from_terms(_accumulate(prods))

    def to_json(self) -> str:
        return json.dumps({"terms": [[*e, c] for e, c in self.terms]})

    def __str__(self) -> str:
        parts = []
        for (e1, e2, e3), c in self.terms:
            mono = "*".join(
                f"x{i}^{e}" if e > 1 else f"x{i}"
                for i, e in ((1, e1), (2, e2), (3, e3))
                if e > 0
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        out = " + ".join(parts).replace("+ -", "- ")
        return out


@dataclass(frozen=True)
class BinaryForm:
    """Homogeneous integer form in two variables, stored sparsely."""

    terms: tuple[tuple[Pair, int], ...]
    degree: int

    def __post_init__(self) -> None:
        if not self.terms:
            raise ZeroFormError("a form must have at least one nonzero term")
        for exps, coeff in self.terms:
            if coeff == 0:
                raise ValueError("zero coefficient stored")
            if sum(exps) != self.degree or any(e < 0 for e in exps):
                raise InhomogeneityError(f"bad monomial {exps} for degree {self.degree}")

    @classmethod
    def from_terms(
        cls, terms: Mapping[Pair, int] | Iterable[tuple[Pair, int]]
    ) -> "BinaryForm":
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc = _accumulate((tuple(e), int(c)) for e, c in items)
        if not acc:
            raise ZeroFormError("all coefficients cancelled")
        degrees = {sum(e) for e in acc}
        if len(degrees) != 1:
            raise InhomogeneityError(f"mixed degrees {sorted(degrees)}")
        return cls(tuple(sorted(acc.items())), degrees.pop())

    def evaluate(self, v: tuple[int, int]) -> int:
        v1, v2 = v
        return sum(c * v1**e1 * v2**e2 for (e1, e2), c in self.terms)

    def coefficient(self, exps: Pair) -> int:
        for e, c in self.terms:
            if e == exps:
                return c
        return 0

    def __str__(self) -> str:
        parts = []
        for (e1, e2), c in self.terms:
            mono = "*".join(
                f"{n}^{e}" if e > 1 else n
                for n, e in (("v1", e1), ("v2", e2))
                if e > 0
            )
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts).replace("+ -", "- ")


_FACTOR_RE = re.compile(r"^(?:(?P<int>\d+)|x(?P<var>[123])(?:\^(?P<exp>\d+))?)$")
_TERM_RE = re.compile(r"[+-]?[^+-]+")


def parse_form(text: str) -> TernaryForm:
    """Parse a ternary form from monomial-sum syntax or a JSON term list.

    Monomial syntax: sums of signed products like ``3*x1^2*x3 - x2^3``.
    JSON alternative: ``{"terms": [[e1, e2, e3, coeff], ...]}``.
    """
    src = text.strip()
    if not src:
        raise FormSyntaxError("empty form text")
    if src.startswith("{"):
        try:
            doc = json.loads(src)
            raw = doc["terms"]
            pairs = [((int(e1), int(e2), int(e3)), int(c)) for e1, e2, e3, c in raw]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise FormSyntaxError(f"bad JSON term list: {exc}") from exc
        return TernaryForm.from_terms(pairs)

    compact = src.replace(" ", "")
    chunks = [m.group() for m in _TERM_RE.finditer(compact)]
    if not chunks or "".join(chunks) != compact:
        raise FormSyntaxError(f"cannot split {text!r} into signed monomials")

    pairs = []
    for chunk in chunks:
        sign = 1
        if chunk.startswith("-"):
            sign, chunk = -1, chunk[1:]
        elif chunk.startswith("+"):
            chunk = chunk[1:]
        coeff = sign
        exps = [0, 0, 0]
        for factor in chunk.split("*"):
            m = _FACTOR_RE.match(factor)
            if m is None:
                raise FormSyntaxError(f"bad factor {factor!r} in {text!r}")
            if m.group("int") is not None:
                coeff *= int(m.group("int"))
            else:
                exps[int(m.group("var")) - 1] += int(m.group("exp") or 1)
        pairs.append(((exps[0], exps[1], exps[2]), coeff))
    return TernaryForm.from_terms(pairs)


def _log_big(fr: Fraction) -> float:
    return math.log(fr.numerator) - math.log(fr.denominator)


class TValue(NamedTuple):
    """Maximal monomial box size, with the triple attaining it."""

    value: float
    log_value: float
    triple: Triple
    tied: bool


def compute_T(form: TernaryForm, box: tuple[float, float, float]) -> TValue:
    """Maximum of P1^e1 P2^e2 P3^e3 over the monomials of the form.

    Comparisons are exact (box entries are treated as exact rationals).  Ties
    are broken toward the lexicographically largest (e3, e2, e1) and flagged,
    since the choice of maximal triple is a convention, not forced.
    """
    p1, p2, p3 = box
    if not (1 <= p1 <= p2 <= p3):
        raise ValueError("box must satisfy 1 <= P1 <= P2 <= P3")
    fr = (Fraction(p1), Fraction(p2), Fraction(p3))
    sizes = {
        e: fr[0] ** e[0] * fr[1] ** e[1] * fr[2] ** e[2] for e in form.monomials()
    }
    best = max(sizes.values())
    winners = [e for e, v in sizes.items() if v == best]
    triple = max(winners, key=lambda e: (e[2], e[1], e[0]))
    try:
        value = float(best)
    except OverflowError:
        value = math.inf
    return TValue(value, _log_big(best), triple, len(winners) > 1)


def equal_sums_binary_form(k: int) -> BinaryForm:
    """The odd-binomial binary form of degree k-1 from the v1/v2 substitution.

    f(v1, v2) = sum over 0 <= j < k/2 of C(k, 2j+1) v1^(2j) v2^(k-2j-1).
    All coefficients are positive, so f is strictly increasing in v2 > 0.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    terms = {
        (2 * j, k - 2 * j - 1): math.comb(k, 2 * j + 1)
        for j in range((k + 1) // 2)
    }
    return BinaryForm.from_terms(terms)


def substitute_lattice_basis(k: int, e1: Pair, e2: Pair) -> BinaryForm:
    """Expand 2^(k-1) * ((u1*e1[0] + u2*e2[0])^k - (u1*e1[1] + u2*e2[1])^k).

    e1 and e2 are (w-component, y-component) basis vectors; the result is the
    degree-k form in (u1, u2) whose integer zeros pull back to w^k = y^k plus
    the target value under the substitution (w, y) = u1*e1 + u2*e2.
    """
    a, b = e1
    c, d = e2
    if a * d - b * c == 0:
        raise DegenerateBasisError(f"basis {e1}, {e2} is linearly dependent")
    scale = 1 << (k - 1)
    terms = {}
    for i in range(k + 1):
        coeff = math.comb(k, i) * (a**i * c ** (k - i) - b**i * d ** (k - i))
        if coeff:
            terms[(i, k - i)] = scale * coeff
    return BinaryForm.from_terms(terms)


def _lead(terms: dict[Triple, Fraction]) -> Triple:
    return max(terms)


def divides(f: TernaryForm, g: TernaryForm) -> bool:
    """Exact divisibility of forms over the rationals.

    Single-divisor multivariate reduction under lexicographic order: the
    remainder vanishes if and only if f divides g, and the first term forced
    into the remainder certifies non-divisibility early.
    """
    if g.degree < f.degree:
        return False
    lead_f = max(e for e, _ in f.terms)
    cf = Fraction(dict(f.terms)[lead_f])
    rest_f = {e: Fraction(c) for e, c in f.terms if e != lead_f}
    rem = {e: Fraction(c) for e, c in g.terms}
    while rem:
        lt = _lead(rem)
        if any(lt[i] < lead_f[i] for i in range(3)):
            return False
        shift = (lt[0] - lead_f[0], lt[1] - lead_f[1], lt[2] - lead_f[2])
        q = rem.pop(lt) / cf
        for e, c in rest_f.items():
            key = (e[0] + shift[0], e[1] + shift[1], e[2] + shift[2])
            new = rem.get(key, Fraction(0)) - q * c
            if new:
                rem[key] = new
            else:
                rem.pop(key, None)
    return True
