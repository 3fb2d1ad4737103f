"""Machine checks of the interval-checkable technical lemmas.

Every report is a list of :class:`Record` objects; ``certified`` is true only
when an interval comparison separates strictly.  Grid checks are spot checks
at the listed points, not proofs over the continuum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from mpmath import iv

from .errors import ValidationError
from .special import (
    Interval,
    ThetaBounds,
    certainly_gt,
    certainly_lt,
    contains,
    hi,
    lo,
    precision_scope,
    theta3_deriv,
    to_iv,
)


@dataclass(frozen=True)
class Record:
    target: str
    where: tuple[float, float]
    bound: tuple[float, float]
    certified: bool

    def to_json(self) -> dict:
        return {"target": self.target, "where": list(self.where), "bound": list(self.bound),
                "certified": self.certified}


def _bound(x: Interval) -> tuple[float, float]:
    return lo(x), hi(x)


def to_jsonl(records: Iterable[Record]) -> str:
    return "".join(json.dumps(r.to_json()) + "\n" for r in records)


# -- trapezoid kernel and the convolution identity -----------------------------


@dataclass(frozen=True)
class TrapezoidKernel:
    k: float
    h: float

    def __post_init__(self):
        if not 0 <= self.k < self.h:
            raise ValidationError("trapezoid needs 0 <= k < h")

    def __call__(self, x):
        return trapezoid(x, self.k, self.h)


def trapezoid(x, k: float, h: float):
    """``T(x; k, h)``: zero outside ``[-h, h]``, plateau ``h - k`` on ``[-k, k]``
    and linear ramps in between.  Works elementwise on arrays."""
    if not 0 <= k < h:
        raise ValidationError("trapezoid needs 0 <= k < h")
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.clip(h - ax, 0.0, h - k)
    return float(out) if out.ndim == 0 else out


_N = np.arange(1, 80, dtype=float)


def _theta_float(y):
    """``theta_3`` and its first two derivatives in float, vectorized over ``y``."""
    y = np.asarray(y, dtype=float)[..., None]
    w = np.exp(-np.pi * _N**2 * y)
    t0 = 1 + 2 * w.sum(-1)
    t1 = -2 * np.pi * (_N**2 * w).sum(-1)
    t2 = 2 * np.pi**2 * (_N**4 * w).sum(-1)
    return t0, t1, t2


def log_theta_exp(x):
    """``f(x) = log theta_3(e^x)`` in double precision."""
    return np.log(_theta_float(np.exp(x))[0])


def log_theta_exp_dd(x):
    """``f''(x)`` for ``f(x) = log theta_3(e^x)`` in double precision."""
    y = np.exp(np.asarray(x, dtype=float))
    t0, t1, t2 = _theta_float(y)
    g1 = t1 / t0
    g2 = t2 / t0 - g1**2
    return y**2 * g2 + y * g1


def _simpson(f: Callable, a: float, b: float, n: int) -> float:
    if n % 2:
        n += 1
    u = np.linspace(a, b, n + 1)
    w = np.ones(n + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return float((b - a) / (3 * n) * np.dot(w, f(u)))


def convolution_identity_residual(k: float, h: float, x: float, n: int = 200,
                                  f: Callable = log_theta_exp, f2: Callable = log_theta_exp_dd) -> float:
    """``|f(x+h) - f(x+k) - f(x-k) + f(x-h) - int f''(u) T(u-x) du|``.

    The integral uses composite Simpson with ``n`` subintervals on each panel
    between the kinks ``x-h, x-k, x+k, x+h`` of the kernel.
    """
    if not 0 <= k < h:
        raise ValidationError("need 0 <= k < h")
    lhs = f(x + h) - f(x + k) - f(x - k) + f(x - h)

    def integrand(u):
        return f2(u) * trapezoid(u - x, k, h)

    cuts = sorted({x - h, x - k, x + k, x + h})
    integral = sum(_simpson(integrand, a, b, n) for a, b in zip(cuts, cuts[1:]) if b > a)
    return abs(float(lhs) - integral)


# -- fourth derivative of log theta_3(e^x) on [0, log 3/2] ----------------------


def h_upper_bound(m, M, precision: float = 1e-30) -> Interval:
    """Enclosure of the endpoint bound for ``h(y)`` valid for all ``y`` in ``[m, M]``
    (``1 <= m < M``): lower series taken at ``M``, upper series at ``m``."""
    with precision_scope(precision):
        m, M = to_iv(m), to_iv(M)
        t = [ThetaBounds(nu).lower(M, precision) for nu in range(5)]  # at M
        T = [ThetaBounds(nu).upper(m, precision) for nu in range(5)]  # at m
        fourth = (
            M**4 * T[4] / t[0]
            - 4 * m**4 * t[3] * t[1] / T[0] ** 2
            - 3 * m**4 * t[2] ** 2 / T[0] ** 2
            + 12 * M**4 * T[2] * T[1] ** 2 / t[0] ** 3
            - 6 * m**4 * t[1] ** 4 / T[0] ** 4
        )
        third = -m**3 * t[3] / T[0] + 3 * M**3 * T[2] * T[1] / t[0] ** 2 - 2 * m**3 * t[1] ** 3 / T[0] ** 3
        second = M**2 * T[2] / t[0] - m**2 * t[1] ** 2 / T[0] ** 2
        first = -m * t[1] / T[0]
        return fourth + 6 * third + 7 * second + first


H_THRESHOLD = Fraction(-16, 100)


def verify_fourth_derivative_sweep(pieces: int = 500, start: Fraction = Fraction(1),
                                   step: Fraction = Fraction(1, 1000)) -> list[Record]:
    """Certify the endpoint bound ``< -0.16`` on ``[start + (j-1) step, start + j step]``
    for ``j = 1..pieces``."""
    out = []
    for j in range(1, pieces + 1):
        m, M = start + (j - 1) * step, start + j * step
        out.append(_h_record(m, M))
    return out


def widened_fourth_derivative_check(m: Fraction = Fraction(1), M: Fraction = Fraction(2)) -> Record:
    """The same bound over one wide interval; the crude endpoint estimate is
    only useful on short intervals, so this is expected not to certify."""
    return _h_record(Fraction(m), Fraction(M))


def _h_record(m: Fraction, M: Fraction) -> Record:
    b = h_upper_bound(m, M)
    return Record("h(y) < -0.16", (float(m), float(M)), _bound(b), certainly_lt(b, to_iv(H_THRESHOLD)))


# -- third derivative expression for y >= 3/2 ----------------------------------


def third_derivative_numerator(y, precision: float = 1e-40) -> Interval:
    with precision_scope(precision):
        y = to_iv(y)
        t0, t1, t2, t3 = (theta3_deriv(nu, y, precision) for nu in range(4))
        return (
            t1 * t0**2
            + 3 * y * t2 * t0**2
            - 3 * y * t1**2 * t0
            + y**2 * t3 * t0**2
            - 3 * y**2 * t2 * t1 * t0
            + 2 * y**2 * t1**3
        )


def verify_third_derivative_negativity(y_grid: Sequence = (Fraction(3, 2), 5, 10)) -> list[Record]:
    """At each grid point certify the numerator ``< 0`` and ``< -20 y^2 e^{-pi y}``."""
    out = []
    for y in y_grid:
        y = Fraction(y)
        if y < Fraction(3, 2):
            raise ValidationError("grid points must be at least 3/2")
        with precision_scope(1e-40):
            v = third_derivative_numerator(y)
            yi = to_iv(y)
            cap = -20 * yi**2 * iv.exp(-iv.pi * yi)
            where = (float(y), float(y))
            out.append(Record("numerator < 0", where, _bound(v), certainly_lt(v, 0)))
            out.append(Record("numerator < -20 y^2 exp(-pi y)", where, _bound(v - cap),
                              certainly_lt(v, cap)))
    return out


# -- log eta(e^x) ---------------------------------------------------------------

# x-derivatives of exp(-c e^x) are P_r(u) exp(-u) with u = c e^x
_EXP_POLYS = {
    1: (0, -1),
    2: (0, -1, 1),
    3: (0, -1, 3, -1),
    4: (0, -1, 7, -6, 1),
}
_BELL = {1: 1, 2: 2, 3: 5, 4: 15}


def _sigma_over_n(n: int) -> Fraction:
    return Fraction(sum(d for d in range(1, n + 1) if n % d == 0), n)


def log_eta_exp_deriv(x, order: int, precision: float = 1e-30) -> Interval:
    """Enclosure of the ``order``-th derivative of ``f(x) = log eta(e^x)``.

    Uses ``f(x) = -pi e^x/12 - sum_N (sigma(N)/N) exp(-2 pi N e^x)``.  For the
    tail ``|P_r(u)| <= B_r max(u, 1)^r`` (``B_r`` the Bell number, the sum of
    the absolute coefficients) and ``sigma(N)/N <= N``.
    """
    if order not in _EXP_POLYS:
        raise ValidationError("derivative order must be in 1..4")
    poly = _EXP_POLYS[order]
    with precision_scope(precision):
        x = to_iv(x)
        ex = iv.exp(x)
        c = 2 * iv.pi * ex
        a = 2 * math.pi * math.exp(lo(x)) * (1 - 1e-12)  # lower bound for the decay rate
        s = order + 1
        # choose K so that the geometric tail bound is below the target
        K = max(2, math.ceil(s / a) + 1)
        while True:
            rho = ((K + 2) / (K + 1)) ** s * math.exp(-a)
            first = (K + 1) ** s * math.exp(-a * (K + 1))
            if rho < 0.9 and first / (1 - rho) * _BELL[order] * max(1.0, hi(c)) ** order < precision / 10:
                break
            K += 1
        total = -iv.pi * ex / 12
        for N in range(1, K + 1):
            u = c * N
            p = sum((co * u**i for i, co in enumerate(poly) if co), iv.mpf(0))
            total -= to_iv(_sigma_over_n(N)) * p * iv.exp(-u)
        # rigorous tail from N = K + 1 on, geometric with ratio rho
        al = iv.mpf(a)
        rho_iv = (iv.mpf(K + 2) / (K + 1)) ** s * iv.exp(-al)
        first_iv = iv.mpf(K + 1) ** s * iv.exp(-al * (K + 1))
        cmax = iv.mpf(max(1.0, hi(c)))
        tail = _BELL[order] * cmax**order * first_iv / (1 - rho_iv)
        t = hi(tail)
        return total + iv.mpf([-t, t])


def verify_eta_derivative_properties(x_grid: Sequence | None = None) -> list[Record]:
    """Spot checks of concavity, oddness and monotonicity for ``log eta(e^x)``."""
    if x_grid is None:
        x_grid = [Fraction(j, 10) for j in range(-10, 11)]
    xs = sorted(Fraction(x) for x in x_grid)
    if any(-x not in xs for x in xs):
        raise ValidationError("grid must be symmetric about 0")
    out = []
    f3 = {}
    for x in xs:
        where = (float(x), float(x))
        f2 = log_eta_exp_deriv(x, 2)
        out.append(Record("f''(x) < 0", where, _bound(f2), certainly_lt(f2, 0)))
        if x >= 0:
            f4 = log_eta_exp_deriv(x, 4)
            out.append(Record("f''''(x) < 0", where, _bound(f4), certainly_lt(f4, 0)))
        f3[x] = log_eta_exp_deriv(x, 3)
    for x in xs:
        if x >= 0:
            with precision_scope(1e-30):
                s = f3[x] + f3[-x]
            out.append(Record("f'''(x) + f'''(-x) contains 0", (float(x), float(-x)), _bound(s),
                              contains(s, 0)))
    for a, b in zip(xs, xs[1:]):
        out.append(Record("f''' strictly decreasing", (float(a), float(b)),
                          (lo(f3[a]) - hi(f3[b]), hi(f3[a]) - lo(f3[b])), certainly_gt(f3[a], f3[b])))
    return out


def all_certified(records: Iterable[Record]) -> bool:
    return all(r.certified for r in records)
