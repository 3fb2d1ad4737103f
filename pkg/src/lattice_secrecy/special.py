"""Rigorous enclosures of theta_3, eta and their derivatives on the positive
real axis.

Intervals are :mod:`mpmath` ``iv`` numbers (outward-rounded binary endpoints).
Series are summed directly and an explicit analytic tail bound is added as
``[0, tail]``, so every result is a genuine enclosure.

Conventions: ``theta3(y) = sum_n exp(-pi n^2 y)`` and
``eta(y) = exp(-pi y/12) prod_n (1 - exp(-2 pi n y))``.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction

from mpmath import iv, mpf
from mpmath.libmp import fone, fzero, mpf_le, mpf_lt, mpf_sub, to_float, to_rational

from .errors import PrecisionUnreachable, ValidationError

Interval = type(iv.mpf(1))

DEFAULT_PRECISION = 1e-25
MAX_TERMS = 200_000
MAX_BITS = 2048


# -- interval helpers ------------------------------------------------------


@contextmanager
def working_bits(bits: int):
    """Temporarily raise the ``iv`` working precision (never lowers it)."""
    old = iv.prec
    iv.prec = max(old, bits)
    try:
        yield
    finally:
        iv.prec = old


def precision_scope(precision: float):
    """Context in which interval arithmetic on returned enclosures keeps the
    accuracy they were computed with."""
    return working_bits(bits_for(precision))


def bits_for(precision: float) -> int:
    if not precision > 0:
        raise ValidationError("precision must be positive")
    return max(80, int(-math.log2(precision)) + 40)


def to_iv(x) -> Interval:
    """Exact enclosure of an int, Fraction, float, decimal string or interval."""
    if isinstance(x, Interval):
        return x
    if isinstance(x, Fraction):
        return iv.mpf(x.numerator) / iv.mpf(x.denominator)
    if isinstance(x, tuple):
        return iv.make_mpf((to_iv(x[0])._mpi_[0], to_iv(x[1])._mpi_[1]))
    return iv.mpf(x)


def lo(x: Interval) -> float:
    """Lower endpoint rounded down to a float."""
    return to_float(x._mpi_[0], rnd="f")


def hi(x: Interval) -> float:
    """Upper endpoint rounded up to a float."""
    return to_float(x._mpi_[1], rnd="c")


def endpoints(x: Interval) -> tuple[mpf, mpf]:
    """Exact endpoints as ``mpf`` values (no rounding)."""
    a, b = to_iv(x)._mpi_
    return mpf(_Raw(a)), mpf(_Raw(b))


class _Raw:
    # lets mpf() adopt a raw libmp tuple without rounding to mp.prec
    def __init__(self, raw):
        self._mpf_ = raw


def lo_fraction(x: Interval) -> Fraction:
    return Fraction(*map(int, to_rational(x._mpi_[0])))


def hi_fraction(x: Interval) -> Fraction:
    return Fraction(*map(int, to_rational(x._mpi_[1])))


def width(x: Interval) -> float:
    """Width rounded up to a float."""
    a, b = x._mpi_
    return to_float(mpf_sub(b, a, 64, "u"), rnd="c")


def certainly_lt(a, b) -> bool:
    """True iff every point of ``a`` is strictly below every point of ``b``."""
    return mpf_lt(to_iv(a)._mpi_[1], to_iv(b)._mpi_[0])


def certainly_gt(a, b) -> bool:
    return certainly_lt(b, a)


def overlaps(a, b) -> bool:
    a0, a1 = to_iv(a)._mpi_
    b0, b1 = to_iv(b)._mpi_
    return mpf_le(a0, b1) and mpf_le(b0, a1)


def contains(x, value) -> bool:
    a, b = to_iv(x)._mpi_
    v0, v1 = to_iv(value)._mpi_
    return mpf_le(a, v0) and mpf_le(v1, b)


def hull(a, b) -> Interval:
    a0, a1 = to_iv(a)._mpi_
    b0, b1 = to_iv(b)._mpi_
    return iv.make_mpf((b0 if mpf_lt(b0, a0) else a0, b1 if mpf_lt(a1, b1) else a1))


def is_point(x: Interval) -> bool:
    a, b = x._mpi_
    return a == b


def mid_fraction(x: Interval) -> Fraction:
    return (lo_fraction(x) + hi_fraction(x)) / 2


def _pos(y) -> Interval:
    y = to_iv(y)
    if not mpf_lt(fzero, y._mpi_[0]):
        raise ValidationError("argument must be positive")
    return y


def _finish(value: Interval, y: Interval, precision: float) -> Interval:
    """Check the width target for point arguments (relative above 1)."""
    if is_point(y) and width(value) > precision * max(1.0, abs(hi(value))):
        raise PrecisionUnreachable(f"enclosure width {float(width(value)):.3g} exceeds {precision:.3g}")
    return value


# -- theta_3 ----------------------------------------------------------------


def _theta_series(nu: int, y: Interval, precision: float) -> Interval:
    """``2 sum_{n>=1} (-pi n^2)^nu exp(-pi n^2 y)`` with a rigorous tail."""
    ylo = lo(y)
    # terms n >= N are decreasing once pi n^2 y > nu; the ratio of consecutive
    # terms is then bounded by ((N+1)/N)^(2nu) exp(-pi (2N+1) y) < 1
    n_min = max(1, math.ceil(math.sqrt((nu + 1) / (math.pi * ylo))) + 1)
    n = n_min
    while True:
        ratio = ((n + 1) / n) ** (2 * nu) * math.exp(-math.pi * (2 * n + 1) * ylo)
        log_term = 2 * nu * math.log(n) + nu * math.log(math.pi) - math.pi * n * n * ylo
        if ratio < 0.5 and log_term + math.log(4.0) < math.log(precision) - 3:
            break
        n += 1
        if n > MAX_TERMS:
            raise PrecisionUnreachable(f"theta series cutoff exceeds {MAX_TERMS} terms")
    cutoff = n
    pi = iv.pi
    s = iv.mpf(0)
    for k in range(1, cutoff):
        s += (k * k) ** nu * iv.exp(-pi * k * k * y)
    # rigorous tail for k >= cutoff evaluated at the lower end of y
    yl = iv.make_mpf((y._mpi_[0], y._mpi_[0]))
    first = iv.mpf(cutoff * cutoff) ** nu * iv.exp(-pi * cutoff * cutoff * yl)
    r = (iv.mpf(cutoff + 1) / cutoff) ** (2 * nu) * iv.exp(-pi * (2 * cutoff + 1) * yl)
    tail = first / (1 - r)
    s += iv.make_mpf((fzero, tail._mpi_[1]))
    sign = -1 if nu % 2 else 1
    return sign * 2 * pi**nu * s


def theta3(y, precision: float = DEFAULT_PRECISION) -> Interval:
    """Enclosure of ``theta_3(y) = 1 + 2 sum exp(-pi n^2 y)``."""
    return theta3_deriv(0, y, precision)


def theta3_deriv(nu: int, y, precision: float = DEFAULT_PRECISION) -> Interval:
    """Enclosure of the ``nu``-th derivative of theta_3 at ``y`` (true sign)."""
    if nu not in (0, 1, 2, 3, 4):
        raise ValidationError(f"derivative order must be in 0..4, got {nu}")
    with working_bits(bits_for(precision)):
        yy = _pos(y)
        value = _theta_series(nu, yy, precision / 4)
        if nu == 0:
            value = 1 + value
    return _finish(value, yy, precision)


@dataclass(frozen=True)
class ThetaBounds:
    """Three-term lower and upper series for ``(-1)^nu theta_3^(nu)`` on
    ``y >= 1``: ``2 pi^nu (e^{-pi y} + 4^nu e^{-4 pi y} + 9^nu e^{-9 pi y})``
    below, and the same with ``2*9^nu + 1`` as last coefficient above
    (plus the constant 1 when ``nu == 0``)."""

    nu: int

    def _series(self, y, last: int, precision: float) -> Interval:
        with working_bits(bits_for(precision)):
            y = to_iv(y)
            pi = iv.pi
            nu = self.nu
            s = 2 * iv.exp(-pi * y) + 2 * 4**nu * iv.exp(-4 * pi * y) + last * iv.exp(-9 * pi * y)
            s = pi**nu * s
            return 1 + s if nu == 0 else s

    def lower(self, y, precision: float = DEFAULT_PRECISION) -> Interval:
        return self._series(y, 2 * 9**self.nu, precision)

    def upper(self, y, precision: float = DEFAULT_PRECISION) -> Interval:
        return self._series(y, 2 * 9**self.nu + 1, precision)

    def coefficients(self) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
        """Multipliers of ``pi^nu e^{-pi y}, pi^nu e^{-4 pi y}, pi^nu e^{-9 pi y}``."""
        nu = self.nu
        low = (2, 2 * 4**nu, 2 * 9**nu)
        return low, low[:2] + (low[2] + 1,)


# -- eta ----------------------------------------------------------------------


def eta(y, precision: float = DEFAULT_PRECISION) -> Interval:
    """Enclosure of the Dedekind eta function on the imaginary axis."""
    bits = bits_for(precision)
    with working_bits(bits):
        yy = _pos(y)
        ylo = lo(yy)
        x = math.exp(-2 * math.pi * ylo)
        # -log prod_{n>N}(1-x^n) <= x^(N+1) / ((1-x)(1-x^(N+1)))
        n = 1
        while x ** (n + 1) / ((1 - x) * (1 - x ** (n + 1))) > precision / 8:
            n += 1
            if n > MAX_TERMS:
                raise PrecisionUnreachable(f"eta product cutoff exceeds {MAX_TERMS} factors")
        pi = iv.pi
        q2 = iv.exp(-2 * pi * yy)
        p = iv.exp(-pi * yy / 12)
        qn = iv.mpf(1)
        for _ in range(n):
            qn = qn * q2
            p = p * (1 - qn)
        xl = iv.exp(-2 * pi * iv.make_mpf((yy._mpi_[0], yy._mpi_[0])))
        xn1 = xl ** (n + 1)
        bound = xn1 / ((1 - xl) * (1 - xn1))
        factor = iv.make_mpf((iv.exp(-bound)._mpi_[0], fone))
        value = p * factor
    return _finish(value, yy, precision)


# -- log-derivative combinations ----------------------------------------------


def log_derivs_in_y(y, precision: float = DEFAULT_PRECISION) -> list[Interval]:
    """``[g', g'', g''', g'''']`` for ``g = log theta_3`` at ``y``."""
    t = [theta3_deriv(nu, y, precision) for nu in range(5)]
    return _log_derivs_from(t)


def _log_derivs_from(t: list[Interval]) -> list[Interval]:
    t0, t1, t2, t3, t4 = t
    g1 = t1 / t0
    g2 = t2 / t0 - t1**2 / t0**2
    g3 = t3 / t0 - 3 * t2 * t1 / t0**2 + 2 * t1**3 / t0**3
    g4 = (
        t4 / t0
        - 4 * t3 * t1 / t0**2
        - 3 * t2**2 / t0**2
        + 12 * t2 * t1**2 / t0**3
        - 6 * t1**4 / t0**4
    )
    return [g1, g2, g3, g4]


def chain_to_log_scale(y: Interval, g: list[Interval], order: int) -> Interval:
    """Derivative of ``x -> G(exp x)`` from derivatives ``g`` of ``G`` at ``y = exp x``."""
    g1, g2, g3, g4 = g
    if order == 1:
        return y * g1
    if order == 2:
        return y**2 * g2 + y * g1
    if order == 3:
        return y**3 * g3 + 3 * y**2 * g2 + y * g1
    if order == 4:
        return y**4 * g4 + 6 * y**3 * g3 + 7 * y**2 * g2 + y * g1
    raise ValidationError(f"derivative order must be in 1..4, got {order}")


def log_theta_log_derivs(x, order: int, precision: float = DEFAULT_PRECISION) -> Interval:
    """Enclosure of the ``order``-th derivative of ``f(x) = log theta_3(e^x)``."""
    if order not in (1, 2, 3, 4):
        raise ValidationError(f"derivative order must be in 1..4, got {order}")
    with working_bits(bits_for(precision)):
        y = iv.exp(to_iv(x))
        g = log_derivs_in_y(y, precision / 1e6)
        return chain_to_log_scale(y, g, order)
