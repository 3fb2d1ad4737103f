"""Exact truncated q-expansions on the 1/24 exponent grid.

A :class:`QExpansion` stores a sparse map ``index -> Fraction`` meaning
``sum c_i q^(i/24)`` with ``q = exp(-pi*y)``, together with ``order``: every
index below ``order`` is known exactly, nothing at or above it is.

Constructors take ``order`` in *full* q-powers (``q^0 .. q^(order-1)`` are
known); the ``QExpansion.order`` attribute itself counts grid steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import OffGridExponent, ValidationError, ZeroLeadingCoefficient

GRID = 24
DEFAULT_ORDER = 32


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"coefficient must be exact (int/Fraction/str), got {type(x).__name__}")


@dataclass(frozen=True)
class QExpansion:
    """Immutable truncated Laurent series in ``q^(1/24)``.

    Negative indices are allowed so that inverses of series with a positive
    leading exponent can be formed; theta series and the final eta quotients
    live on nonnegative indices only.
    """

    coeffs: Mapping[int, Fraction]
    order: int
    grid: int = field(default=GRID, init=False)

    def __post_init__(self):
        clean = {}
        for i, c in self.coeffs.items():
            if not isinstance(i, int):
                raise ValidationError(f"exponent index must be an integer, got {i!r}")
            c = _frac(c)
            if c and i < self.order:
                clean[i] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    # -- construction -----------------------------------------------------

    @classmethod
    def one(cls, order: int = DEFAULT_ORDER) -> "QExpansion":
        return cls({0: Fraction(1)}, GRID * order)

    @classmethod
    def monomial(cls, index: int, coeff=1, order: int = DEFAULT_ORDER) -> "QExpansion":
        """``coeff * q^(index/24)``; ``order`` in full q-powers."""
        return cls({index: _frac(coeff)}, GRID * order)

    @classmethod
    def from_q_coeffs(cls, coeffs: Iterable, order: int | None = None) -> "QExpansion":
        """``sum c_m q^m`` from a list; by default every listed power is known."""
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs)
        if order > len(coeffs):
            raise ValidationError("order exceeds the number of supplied coefficients")
        return cls({GRID * m: _frac(c) for m, c in enumerate(coeffs[:order])}, GRID * order)

    # -- inspection -------------------------------------------------------

    @property
    def q_order(self) -> int:
        """Number of leading full q-powers that are known."""
        return self.order // GRID if self.order > 0 else 0

    def coeff(self, index: int) -> Fraction:
        if index >= self.order:
            raise IndexError(f"index {index} beyond truncation order {self.order}")
        return self.coeffs.get(index, Fraction(0))

    def q_coeff(self, m: int) -> Fraction:
        return self.coeff(GRID * m)

    def q_coeffs(self, count: int | None = None) -> list[Fraction]:
        """Coefficients of ``q^0 .. q^(count-1)``; requires integral support."""
        if any(i % GRID for i in self.coeffs):
            raise OffGridExponent("series has fractional q-exponents")
        if count is None:
            count = self.q_order
        return [self.q_coeff(m) for m in range(count)]

    @property
    def valuation(self) -> int:
        """Leading exponent index; ``order`` for a series with no known nonzero term."""
        return next(iter(self.coeffs), self.order)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __repr__(self):
        shown = list(self.coeffs.items())[:6]
        terms = " + ".join(f"{c}*q^({i}/24)" for i, c in shown) or "0"
        return f"QExpansion({terms}{' + ...' if len(self.coeffs) > 6 else ''}, order={self.order})"

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "QExpansion":
        if isinstance(other, QExpansion):
            return other
        if isinstance(other, (int, Fraction)):
            return QExpansion({0: _frac(other)}, self.order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.coeffs)
        for i, c in other.coeffs.items():
            out[i] = out.get(i, 0) + c
        return QExpansion(out, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return QExpansion({i: -c for i, c in self.coeffs.items()}, self.order)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "QExpansion":
        c = _frac(c)
        return QExpansion({i: c * v for i, v in self.coeffs.items()}, self.order)

    def shift(self, k: int) -> "QExpansion":
        """Multiply by ``q^(k/24)``."""
        return QExpansion({i + k: c for i, c in self.coeffs.items()}, self.order + k)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, QExpansion):
            return NotImplemented
        return mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        return pow_int(self, e)

    def __eq__(self, other):
        if not isinstance(other, QExpansion):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, tuple(self.coeffs.items())))

    def truncate(self, order: int) -> "QExpansion":
        """Restrict to indices below ``order`` (grid steps)."""
        return QExpansion(self.coeffs, min(order, self.order))

    def agrees_with(self, other: "QExpansion") -> bool:
        """Equality up to the common truncation order."""
        o = min(self.order, other.order)
        return self.truncate(o).coeffs == other.truncate(o).coeffs

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "grid": GRID,
            "order": self.order,
            "terms": [[i, f"{c.numerator}/{c.denominator}"] for i, c in self.coeffs.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "QExpansion":
        if data.get("grid", GRID) != GRID:
            raise ValidationError(f"unsupported grid {data.get('grid')}; only 24 is supported")
        return cls({int(i): Fraction(c) for i, c in data["terms"]}, int(data["order"]))


def add(a: QExpansion, b: QExpansion) -> QExpansion:
    return a + b


def mul(a: QExpansion, b: QExpansion) -> QExpansion:
    """Cauchy product; the result is known below
    ``min(order_a + val_b, order_b + val_a)``."""
    order = min(a.order + b.valuation, b.order + a.valuation)
    out: dict[int, Fraction] = {}
    for i, ci in a.coeffs.items():
        for j, cj in b.coeffs.items():
            k = i + j
            if k < order:
                out[k] = out.get(k, 0) + ci * cj
    return QExpansion(out, order)


def invert(a: QExpansion) -> QExpansion:
    """Multiplicative inverse ``q^(-v) u^(-1)`` of ``a = q^v u``."""
    if a.is_zero:
        raise ZeroLeadingCoefficient("cannot invert a series with no known nonzero term")
    v = a.valuation
    u0 = a.coeffs[v]
    tail = [(i - v, c) for i, c in a.coeffs.items() if i != v]
    length = a.order - v  # relative indices of the unit part that are known
    inv0 = 1 / u0
    b: dict[int, Fraction] = {0: inv0}
    for j in range(1, length):
        s = 0
        for i, c in tail:
            if i > j:
                break
            bj = b.get(j - i)
            if bj:
                s += c * bj
        if s:
            b[j] = -s * inv0
    return QExpansion({j - v: c for j, c in b.items()}, length - v)


def pow_int(a: QExpansion, e: int) -> QExpansion:
    """Integer power by repeated squaring; negative powers go through :func:`invert`."""
    if e < 0:
        return pow_int(invert(a), -e)
    if e == 0:
        return QExpansion({0: Fraction(1)}, a.order)
    result = None
    base = a
    while True:
        if e & 1:
            result = base if result is None else mul(result, base)
        e >>= 1
        if not e:
            return result
        base = mul(base, base)


def theta_one_dim(scale: int, order: int = DEFAULT_ORDER) -> QExpansion:
    """Theta series ``sum_n q^(a n^2)`` of the rank-one lattice ``sqrt(a) Z``."""
    if scale < 1:
        raise ValidationError(f"scale must be a positive integer, got {scale}")
    coeffs = {0: Fraction(1)}
    n = 1
    while scale * n * n < order:
        coeffs[GRID * scale * n * n] = Fraction(2)
        n += 1
    return QExpansion(coeffs, GRID * order)


def eta_scaled(d, order: int = DEFAULT_ORDER) -> QExpansion:
    """q-expansion of ``eta(d*y) = q^(d/12) prod_{n>=1} (1 - q^(2nd))``."""
    d = Fraction(d)
    if d <= 0:
        raise ValidationError(f"eta scale must be positive, got {d}")
    lead = 2 * d  # grid index of q^(d/12)
    step = 48 * d  # grid index of q^(2d)
    if lead.denominator != 1:
        raise OffGridExponent(f"eta({d}*y) has leading exponent {d / 12}, off the 1/24 grid")
    lead, step = int(lead), int(step)
    total = GRID * order
    length = total - lead
    if length <= 0:
        return QExpansion({}, total)
    # dense product of (1 - x^(n*step)) over the relative index range
    c = [0] * length
    c[0] = 1
    k = step
    while k < length:
        for i in range(length - 1, k - 1, -1):
            if c[i - k]:
                c[i] -= c[i - k]
        k += step
    return QExpansion({lead + i: Fraction(v) for i, v in enumerate(c) if v}, total)


def divisors(n: int) -> list[int]:
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))
