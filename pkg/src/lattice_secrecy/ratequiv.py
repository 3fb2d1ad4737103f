"""Rational equivalence of quadratic forms via local invariants.

Two nondegenerate forms of equal rank over Q are equivalent exactly when they
share the discriminant square class, the signature, and the Hasse-Witt
invariant at every place.  Everything here is exact: rationals are reduced to
integers in the same square class before any p-adic work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .errors import DimensionMismatch, Singular, ValidationError
from .lattice import LatticeSpec, c_ell
from .qseries import divisors

Place = Union[int, str]
INF = "inf"


@dataclass(frozen=True)
class DiagonalizedForm:
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        e = tuple(Fraction(x) for x in self.entries)
        if any(x == 0 for x in e):
            raise Singular("diagonal entries must be nonzero")
        object.__setattr__(self, "entries", e)

    @property
    def rank(self) -> int:
        return len(self.entries)

    @property
    def discriminant(self) -> Fraction:
        return math.prod(self.entries, start=Fraction(1))

    @property
    def signature(self) -> tuple[int, int]:
        pos = sum(1 for x in self.entries if x > 0)
        return pos, self.rank - pos


def diagonalize(G: Sequence[Sequence]) -> DiagonalizedForm:
    """Congruent diagonal form of a nonsingular symmetric rational matrix."""
    n = len(G)
    a = [[Fraction(x) for x in row] for row in G]
    if any(len(row) != n for row in a):
        raise ValidationError("matrix must be square")
    if any(a[i][j] != a[j][i] for i in range(n) for j in range(n)):
        raise ValidationError("matrix must be symmetric")
    # clear denominators: scaling by a square keeps the congruence class
    den = math.lcm(*(x.denominator for row in a for x in row)) if n else 1
    a = [[x * den * den for x in row] for row in a]
    out = []
    for k in range(n):
        if a[k][k] == 0:
            j = next((j for j in range(k + 1, n) if a[j][j] != 0), None)
            if j is not None:
                _swap(a, k, j)
            else:
                j = next((j for j in range(k + 1, n) if a[k][j] != 0), None)
                if j is None:
                    raise Singular("matrix is singular")
                # row/column k += row/column j makes the pivot 2 a_kj
                for i in range(n):
                    a[k][i] += a[j][i]
                for i in range(n):
                    a[i][k] += a[i][j]
        pivot = a[k][k]
        for i in range(k + 1, n):
            f = a[i][k] / pivot
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
                for j in range(k, n):
                    a[j][i] -= f * a[j][k]
        out.append(pivot / (den * den))
    return DiagonalizedForm(tuple(out))


def _swap(a, i, j):
    a[i], a[j] = a[j], a[i]
    for row in a:
        row[i], row[j] = row[j], row[i]


def _square_free_integer(x: Fraction) -> int:
    """An integer in the same square class as ``x`` (not reduced further)."""
    x = Fraction(x)
    return x.numerator * x.denominator


def _valuation(n: int, p: int) -> tuple[int, int]:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def hilbert_symbol(a, b, p: Place) -> int:
    """Hilbert symbol ``(a, b)_p`` for nonzero rationals and a prime or ``"inf"``."""
    a, b = Fraction(a), Fraction(b)
    if a == 0 or b == 0:
        raise ValidationError("Hilbert symbol needs nonzero arguments")
    if p == INF:
        return -1 if a < 0 and b < 0 else 1
    p = int(p)
    alpha, u = _valuation(_square_free_integer(a), p)
    beta, v = _valuation(_square_free_integer(b), p)
    if p == 2:
        e = _eps(u) * _eps(v) + alpha * _omega(v) + beta * _omega(u)
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return sign * _legendre(u, p) ** beta * _legendre(v, p) ** alpha


def _eps(u: int) -> int:
    return ((u - 1) // 2) % 2


def _omega(u: int) -> int:
    return ((u * u - 1) // 8) % 2


def _legendre(u: int, p: int) -> int:
    r = pow(u % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def hasse_witt(f: DiagonalizedForm, p: Place) -> int:
    e = f.entries
    out = 1
    for i in range(len(e)):
        for j in range(i + 1, len(e)):
            out *= hilbert_symbol(e[i], e[j], p)
    return out


def prime_factors(n: int) -> list[int]:
    n = abs(n)
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return out


def relevant_places(values: Iterable[Fraction], extra: Iterable[int] = ()) -> list[Place]:
    """``inf``, 2, the given primes, and every prime in a numerator or denominator."""
    primes = {2, *extra}
    for x in values:
        x = Fraction(x)
        primes.update(prime_factors(x.numerator))
        primes.update(prime_factors(x.denominator))
    return [INF, *sorted(primes)]


def is_rational_square(x: Fraction) -> bool:
    x = Fraction(x)
    return x > 0 and math.isqrt(x.numerator) ** 2 == x.numerator and \
        math.isqrt(x.denominator) ** 2 == x.denominator


def power_lattice(base: LatticeSpec, k: int) -> LatticeSpec:
    """Orthogonal sum of ``k`` copies of a diagonal lattice."""
    return LatticeSpec.diagonal(list(base.scales) * k)


@dataclass
class EquivalenceReport:
    equivalent: bool
    discriminants: tuple[Fraction, Fraction]
    same_square_class: bool
    signatures: tuple[tuple[int, int], tuple[int, int]]
    places: list[dict]

    def to_json(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "discriminant": {
                "lhs": str(self.discriminants[0]),
                "rhs": str(self.discriminants[1]),
                "ratio_is_square": self.same_square_class,
            },
            "signature": {"lhs": list(self.signatures[0]), "rhs": list(self.signatures[1])},
            "places": self.places,
        }


def compare_forms(lhs: DiagonalizedForm, rhs: DiagonalizedForm, extra_primes: Iterable[int] = ()) -> EquivalenceReport:
    if lhs.rank != rhs.rank:
        raise DimensionMismatch(f"ranks differ: {lhs.rank} vs {rhs.rank}")
    d1, d2 = lhs.discriminant, rhs.discriminant
    square = is_rational_square(d1 / d2)
    places = relevant_places(lhs.entries + rhs.entries, extra_primes)
    table = []
    for p in places:
        table.append({"p": str(p), "eps_lhs": hasse_witt(lhs, p), "eps_rhs": hasse_witt(rhs, p)})
    same_eps = all(r["eps_lhs"] == r["eps_rhs"] for r in table)
    sig = (lhs.signature, rhs.signature)
    return EquivalenceReport(square and same_eps and sig[0] == sig[1], (d1, d2), square, sig, table)


def rationally_equivalent(L: LatticeSpec, ell: int, k: int) -> EquivalenceReport:
    """Compare the quadratic form of ``L`` with that of ``(C^ell)^k``."""
    if k < 1:
        raise ValidationError("k must be positive")
    nd = len(divisors(ell))
    if L.dim != k * nd:
        raise DimensionMismatch(f"dimension {L.dim} differs from k*d(ell) = {k * nd}")
    ref = power_lattice(c_ell(ell), k)
    return compare_forms(diagonalize(L.gram_matrix()), diagonalize(ref.gram_matrix()),
                         prime_factors(ell))
