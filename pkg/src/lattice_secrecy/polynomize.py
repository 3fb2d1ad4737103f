"""Eta quotients ``g_ell``, exact polynomial fitting of theta series, and the
decision procedure for the modified secrecy conjecture.

For the supported levels the theta series of a suitable ``ell``-modular
lattice is ``Theta_{C^ell}^k * P(g_ell)`` for a polynomial ``P`` with rational
coefficients.  Since ``g_ell`` increases on ``]0, 1/sqrt(ell)]`` from 0 to
``x* = g_ell(1/sqrt(ell))``, the conjecture reduces to a statement about
``P`` on ``]0, x*[``, which :func:`check_conjecture` settles with exact Sturm
root isolation and a rigorous enclosure of ``x*``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from mpmath import iv

from . import sturm
from .errors import NoExactFit, UnsupportedLevel, ValidationError
from .lattice import c_ell, theta_series
from .qseries import GRID, QExpansion, divisors, eta_scaled, invert, mul, pow_int
from .special import (
    Interval,
    eta,
    hi_fraction,
    lo,
    hi,
    lo_fraction,
    precision_scope,
    to_iv,
)

SUPPORTED_LEVELS = (3, 5, 6, 7, 11, 14, 15, 23)
PRIME_LEVELS = (3, 5, 7, 11, 23)
COMPOSITE_LEVELS = (6, 14, 15)


def _prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def d_ell_const(ell: int) -> tuple[Fraction, Fraction]:
    """``(D_ell, alpha_ell)`` with ``D_ell = 24 d(ell) / prod_{p | ell} (p + 1)``
    and ``alpha_ell = D_ell / d(ell)``."""
    if ell < 2:
        raise ValidationError("level must be at least 2")
    nd = len(divisors(ell))
    D = Fraction(24 * nd, math.prod(p + 1 for p in _prime_factors(ell)))
    return D, D / nd


def _check_level(ell: int) -> None:
    if ell not in SUPPORTED_LEVELS:
        raise UnsupportedLevel(f"level {ell} is not supported; use one of {SUPPORTED_LEVELS}")


def _alpha(ell: int) -> int:
    alpha = d_ell_const(ell)[1]
    if alpha.denominator != 1:
        raise UnsupportedLevel(f"exponent alpha_{ell} = {alpha} is not an integer")
    return int(alpha)


def _quotient_shape(ell: int) -> tuple[int, tuple[Fraction, ...], tuple[Fraction, ...]]:
    """(m, numerator scales, denominator scales) with
    ``g_ell = (prod_num eta^(m)(s y) / prod_den eta^(m)(s y))^alpha``."""
    if ell % 2:
        return ell, (Fraction(1, 2), Fraction(2)), (Fraction(1), Fraction(1))
    return ell // 2, (Fraction(1, 2), Fraction(4)), (Fraction(1), Fraction(2))


@lru_cache(maxsize=None)
def g_ell_series(ell: int, order: int = 32) -> QExpansion:
    """Exact q-expansion of ``g_ell`` through ``q^(order-1)``."""
    _check_level(ell)
    alpha = _alpha(ell)
    m, num, den = _quotient_shape(ell)
    work = order + 4

    def eta_product(scale):
        out = QExpansion.one(work)
        for d in divisors(m):
            out = mul(out, eta_scaled(d * scale, work))
        return out

    top = mul(eta_product(num[0]), eta_product(num[1]))
    bottom = mul(eta_product(den[0]), eta_product(den[1]))
    g = pow_int(mul(top, invert(bottom)), alpha)
    if g.order < GRID * order:
        raise ValidationError("internal: insufficient working order for g_ell")
    return g.truncate(GRID * order)


def g_ell_value(ell: int, y, precision: float = 1e-20) -> Interval:
    """Enclosure of ``g_ell(y)`` from eta values."""
    _check_level(ell)
    alpha = _alpha(ell)
    m, num, den = _quotient_shape(ell)
    with precision_scope(precision):
        y = to_iv(y)

        def eta_product(scale):
            out = iv.mpf(1)
            for d in divisors(m):
                out *= eta(to_iv(d * scale) * y, precision / 100)
            return out

        q = eta_product(num[0]) * eta_product(num[1]) / (eta_product(den[0]) * eta_product(den[1]))
        return q**alpha


def x_star(ell: int, precision: float = 1e-20) -> Interval:
    """``g_ell(1/sqrt(ell))``, the right end of the criterion interval."""
    with precision_scope(precision):
        return g_ell_value(ell, 1 / iv.sqrt(iv.mpf(ell)), precision)


# -- polynomials ----------------------------------------------------------------


@dataclass(frozen=True)
class SecrecyPolynomial:
    """``Theta_L = Theta_{C^ell}^k * sum_i coeffs[i] g_ell^i``."""

    ell: int
    k: int
    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        c = tuple(Fraction(x) for x in self.coeffs)
        while len(c) > 1 and c[-1] == 0:
            c = c[:-1]
        if not c:
            c = (Fraction(0),)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: Fraction) -> Fraction:
        return sturm.evaluate(self.coeffs, Fraction(x))

    def to_json(self) -> dict:
        return {"ell": self.ell, "k": self.k, "coeffs": [_frac_str(c) for c in self.coeffs]}


def _frac_str(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def default_max_degree(k: int) -> int:
    return k + 4


def fit_polynomial(theta: QExpansion, ell: int, k: int, max_degree: int | None = None) -> SecrecyPolynomial:
    """Solve ``theta = Theta_{C^ell}^k * sum c_i g_ell^i`` exactly.

    Because ``g_ell = q + O(q^2)`` the system is unit triangular: ``c_i`` is the
    coefficient of ``q^i`` in what remains after subtracting the lower terms.
    The fit stops at the least degree whose residual vanishes through every
    known coefficient of ``theta``.
    """
    _check_level(ell)
    if k < 1:
        raise ValidationError("k must be a positive integer")
    if theta.coeffs.get(0) != 1 or theta.valuation != 0:
        raise ValidationError("theta series must start with constant term 1")
    if any(i % GRID for i in theta.coeffs):
        raise ValidationError("theta series must have integral exponents")
    avail = theta.q_order
    if max_degree is None:
        # keep at least one known coefficient as an independent check of the fit
        max_degree = min(default_max_degree(k), avail - 2)
    elif max_degree >= avail:
        raise ValidationError(f"max_degree {max_degree} needs more than {avail} known coefficients")
    if max_degree < 0:
        raise ValidationError("theta series carries too few known coefficients")

    base = pow_int(theta_series(c_ell(ell), avail), k)
    residual = mul(theta, invert(base)).truncate(GRID * avail)
    g = g_ell_series(ell, avail)
    g_pow = QExpansion.one(avail)
    coeffs: list[Fraction] = []
    for i in range(max_degree + 1):
        c = residual.q_coeff(i)
        coeffs.append(c)
        if c:
            residual = residual - g_pow.scale(c)
        if residual.is_zero:
            return SecrecyPolynomial(ell, k, tuple(coeffs))
        g_pow = mul(g_pow, g).truncate(GRID * avail)
    first = residual.valuation // GRID
    raise NoExactFit(
        f"residual coefficient of q^{first} is {residual.coeffs[residual.valuation]} after "
        f"fitting degree {max_degree} (ell={ell}, k={k}, {avail} known q-powers)",
        first_failing_power=first,
    )


def reconstruct(P: SecrecyPolynomial, order: int) -> QExpansion:
    """``Theta_{C^ell}^k * P(g_ell)`` through ``q^(order-1)``."""
    g = g_ell_series(P.ell, order)
    total = QExpansion({}, GRID * order)
    g_pow = QExpansion.one(order)
    for c in P.coeffs:
        total = total + g_pow.scale(c)
        g_pow = mul(g_pow, g).truncate(GRID * order)
    return mul(pow_int(theta_series(c_ell(P.ell), order), P.k), total).truncate(GRID * order)


# -- decision procedure -----------------------------------------------------------


@dataclass
class Verdict:
    outcome: str  # "Holds" | "Fails" | "Inconclusive"
    mode: str
    x_star: tuple[Fraction, Fraction]
    critical_points: list[tuple[Fraction, Fraction]] = field(default_factory=list)
    witness: Fraction | None = None
    margin: tuple[Fraction, Fraction] | None = None
    note: str | None = None

    def to_json(self) -> dict:
        out = {
            "outcome": self.outcome,
            "mode": self.mode,
            "x_star": [float(self.x_star[0]), float(self.x_star[1])],
            "critical_points": [[float(a), float(b)] for a, b in self.critical_points],
        }
        if self.witness is not None:
            out["witness"] = float(self.witness)
            out["witness_exact"] = _frac_str(self.witness)
        if self.margin is not None:
            out["margin"] = [float(self.margin[0]), float(self.margin[1])]
        if self.note:
            out["note"] = self.note
        return out


MODES = ("exact_iff", "sufficient")


def default_mode(ell: int) -> str:
    return "exact_iff" if ell in PRIME_LEVELS else "sufficient"


class _Unresolved(Exception):
    pass


def check_conjecture(P: SecrecyPolynomial, mode: str | None = None, precision: float = 1e-12,
                     max_refinements: int = 5) -> Verdict:
    """Decide whether ``P(x) > P(x*)`` (``exact_iff``) or ``P(x) >= P(x*)``
    (``sufficient``) for every ``x`` in ``]0, x*[``.

    The minimum of ``P - P(x*)`` over ``[0, x*]`` is attained at 0, at ``x*`` or
    at a root of ``P'``; each candidate is compared with ``P(x*)`` using exact
    rational bounds.  Comparisons that stay unresolved after refining ``x*``
    ``max_refinements`` times yield ``Inconclusive``.
    """
    _check_level(P.ell)
    mode = mode or default_mode(P.ell)
    if mode not in MODES:
        raise ValidationError(f"mode must be one of {MODES}")
    if mode == "exact_iff" and P.ell not in PRIME_LEVELS:
        raise ValidationError(f"exact_iff mode needs a prime level, got {P.ell}; use 'sufficient'")

    xs = x_star(P.ell, precision)
    if P.degree == 0:
        return Verdict(
            "Holds", mode, (lo_fraction(xs), hi_fraction(xs)),
            note="constant polynomial: the modified secrecy function equals that of (C^ell)^k",
        )
    last = None
    for step in range(max_refinements + 1):
        xs = x_star(P.ell, precision * 1e-8**step)
        try:
            return _decide(P, mode, lo_fraction(xs), hi_fraction(xs))
        except _Unresolved as exc:
            last = (exc, xs)
    exc, xs = last
    return Verdict("Inconclusive", mode, (lo_fraction(xs), hi_fraction(xs)), note=str(exc))


def _decide(P: SecrecyPolynomial, mode: str, a: Fraction, b: Fraction) -> Verdict:
    p = list(P.coeffs)
    dp = sturm.derivative(p)
    tiny = (b - a) / 8
    crits = sturm.isolate_roots(dp, Fraction(0), b)
    refined = []
    for iv_ in crits:
        lo_, hi_ = sturm.refine_root(dp, iv_, tiny)
        if hi_ >= a and lo_ <= b:
            raise _Unresolved("a critical point of P lies inside the x* enclosure")
        refined.append((lo_, hi_))
    crits = [c for c in refined if c[1] < a]

    # no critical point in [a, b]: P is monotone there
    pa, pb = sturm.evaluate(p, a), sturm.evaluate(p, b)
    px = (min(pa, pb), max(pa, pb))
    rising = sturm.evaluate(dp, a) > 0

    if rising:
        # P(x) < P(x*) just left of x*; P' > 0 between the last critical point and a
        start = crits[-1][1] if crits else Fraction(0)
        w = a / 2 if a / 2 > start else (start + a) / 2
        assert sturm.evaluate(p, w) < px[0]
        return Verdict("Fails", mode, (a, b), crits, witness=w,
                       note="P is increasing at x*")

    strict = mode == "exact_iff"
    candidates = [(Fraction(0), Fraction(0))] + crits
    lows, highs = [], []
    for lo_, hi_ in candidates:
        if lo_ != hi_:
            lo_, hi_ = sturm.refine_root(dp, (lo_, hi_), (b - a) / 1024)
        v_lo, v_hi = sturm.enclose(p, lo_, hi_)
        if v_lo > px[1] or (not strict and lo_ == hi_ and v_lo >= px[1]):
            lows.append(v_lo)
            highs.append(v_hi)
            continue
        if v_hi < px[0]:
            return Verdict("Fails", mode, (a, b), crits,
                           witness=_witness_below(p, lo_, hi_, px[0], a),
                           note="P dips below P(x*) inside ]0, x*[")
        raise _Unresolved("P at a critical point or at 0 cannot be separated from P(x*)")
    margin = (min(lows) - px[1], min(highs) - px[0])
    return Verdict("Holds", mode, (a, b), crits, margin=margin)


def _witness_below(p: Sequence[Fraction], lo_: Fraction, hi_: Fraction, target: Fraction,
                   a: Fraction) -> Fraction:
    """A rational point in ``]0, a[`` where ``p`` is certainly below ``target``."""
    if lo_ == hi_ == 0:
        # P(0) < P(x*): by continuity some small positive x works
        w = a / 2
        while sturm.evaluate(p, w) >= target:
            w /= 2
        return w
    w = (lo_ + hi_) / 2
    if w <= 0:
        w = hi_
    return w


def verdict_is_holds(v: Verdict) -> bool:
    return v.outcome == "Holds"
