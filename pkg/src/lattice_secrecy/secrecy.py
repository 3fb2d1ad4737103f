"""Secrecy functions, the theta-quotient classifier and unimodality scans.

``xi`` is the quotient of the theta function of the scaled cube
``(ell^(1/4) Z)^n`` by the lattice theta function; ``xi_modified`` divides
``Theta_{D^ell}^(n/2)`` instead.  Every value is an interval enclosure.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

from mpmath import iv

from .errors import OddDimensionNonSquareLevel, PrecisionUnreachable, ValidationError
from .lattice import LatticeSpec, ThetaData, c_ell, d_ell, theta_series
from .qseries import GRID
from .special import (
    DEFAULT_PRECISION,
    Interval,
    certainly_gt,
    certainly_lt,
    hi,
    lo,
    overlaps,
    precision_scope,
    theta3,
    to_iv,
    working_bits,
)

LatticeLike = Union[LatticeSpec, ThetaData]

# Gram lattices are evaluated from this many known q-powers plus a tail bound
GRAM_EVAL_ORDER = 40


def _is_square(n: int) -> bool:
    return math.isqrt(n) ** 2 == n


def theta_value(L: LatticeLike, y, precision: float = DEFAULT_PRECISION) -> Interval:
    """Enclosure of ``Theta_L(y)``."""
    with precision_scope(precision):
        y = to_iv(y)
        if isinstance(L, LatticeSpec) and L.kind == "diagonal":
            out = iv.mpf(1)
            for a in L.scales:
                out *= theta3(a * y, precision)
            return out
        if isinstance(L, LatticeSpec):
            L = ThetaData(theta_series(L, GRAM_EVAL_ORDER), L.dim)
        return _series_value(L, y, precision)


def _series_value(data: ThetaData, y: Interval, precision: float) -> Interval:
    q = iv.exp(-iv.pi * y)
    total = iv.mpf(0)
    for i, c in data.series.coeffs.items():
        total += int(c) * q ** (i // GRID)
    return total + _packing_tail(data, y)


def _packing_tail(data: ThetaData, y: Interval) -> Interval:
    """``[0, B]`` with ``B >= sum_{m >= M} a_m exp(-pi y m)``.

    Balls of radius ``sqrt(mu)/2`` around lattice points are disjoint, so at
    most ``(2 sqrt(m/mu) + 1)^n`` vectors have norm ``<= m``.  Consecutive
    terms of the bound have ratio at most ``(1 + 1/m)^(n/2) exp(-pi y)``.
    """
    n = data.dim
    mu = data.min_norm
    start = data.series.q_order
    ylo = iv.make_mpf((y._mpi_[0], y._mpi_[0]))
    if lo(ylo) <= 0:
        raise ValidationError("argument must be positive")
    decay = iv.exp(-iv.pi * ylo)

    def term(m):
        return (2 * iv.sqrt(iv.mpf(m) / mu) + 1) ** n * decay**m

    # smallest m0 >= start where the ratio bound drops below 1
    m0 = max(start, math.floor(n / (2 * math.pi * lo(ylo))) + 1)
    while True:
        r = (1 + iv.mpf(1) / m0) ** (n / 2) * decay
        if hi(r) < 1:
            break
        m0 += 1
    if m0 - start > 100_000:
        raise PrecisionUnreachable("tail bound needs too many explicit terms")
    bound = iv.mpf(0)
    for m in range(start, m0):
        bound += term(m)
    bound += term(m0) / (1 - r)
    return iv.make_mpf((iv.mpf(0)._mpi_[0], bound._mpi_[1]))


def xi(L: LatticeLike, ell: int, y, precision: float = DEFAULT_PRECISION) -> Interval:
    """Secrecy function ``theta_3(y sqrt(ell))^n / Theta_L(y)``."""
    with precision_scope(precision):
        y = to_iv(y)
        num = theta3(y * iv.sqrt(ell), precision) ** L.dim
        return num / theta_value(L, y, precision)


def xi_modified(L: LatticeLike, ell: int, y, precision: float = DEFAULT_PRECISION) -> Interval:
    """Modified secrecy function ``Theta_{D^ell}(y)^(n/2) / Theta_L(y)``."""
    n = L.dim
    if n % 2 and not _is_square(ell):
        raise OddDimensionNonSquareLevel(f"dimension {n} is odd and level {ell} is not a square")
    with precision_scope(precision):
        y = to_iv(y)
        base = theta3(y, precision) * theta3(ell * y, precision)
        num = base ** (n // 2)
        if n % 2:
            num *= iv.sqrt(base)
        return num / theta_value(L, y, precision)


def theta_quotient(kappa, lam, y, precision: float = DEFAULT_PRECISION) -> Interval:
    """``theta_3(lam y) theta_3(y/lam) / (theta_3(kappa y) theta_3(y/kappa))``."""
    with precision_scope(precision):
        y = to_iv(y)
        kappa, lam = to_iv(kappa), to_iv(lam)
        num = theta3(lam * y, precision) * theta3(y / lam, precision)
        den = theta3(kappa * y, precision) * theta3(y / kappa, precision)
        return num / den


def hs_expression(a, b, y, precision: float = DEFAULT_PRECISION) -> Interval:
    """``theta_3(y) theta_3(aby) / (theta_3(ay) theta_3(by))``."""
    with precision_scope(precision):
        y, a, b = to_iv(y), to_iv(a), to_iv(b)
        return (theta3(y, precision) * theta3(a * b * y, precision)) / (
            theta3(a * y, precision) * theta3(b * y, precision)
        )


class HSCase(enum.Enum):
    CONSTANT = "ConstantCase"
    MAX_AT_SYMMETRY = "MaxAtSymmetry"
    MIN_AT_SYMMETRY = "MinAtSymmetry"


def classify_hs(a, b) -> HSCase:
    """Shape of ``theta_3(y) theta_3(aby) / (theta_3(ay) theta_3(by))`` at
    ``y = 1/sqrt(ab)``: a constant when a or b is 1, a maximum when both lie on
    the same side of 1, a minimum otherwise."""
    if a <= 0 or b <= 0:
        raise ValidationError("a and b must be positive")
    if a == 1 or b == 1:
        return HSCase.CONSTANT
    return HSCase.MAX_AT_SYMMETRY if (a - 1) * (b - 1) > 0 else HSCase.MIN_AT_SYMMETRY


# -- scans ------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Points ``s * ratio^i`` for ``i = -half_width .. half_width``."""

    ratio: float = 1.1
    half_width: int = 10

    def points(self, s: float) -> list[float]:
        if self.ratio <= 1 or self.half_width < 1:
            raise ValidationError("grid needs ratio > 1 and at least one point per side")
        return [s * self.ratio**i for i in range(-self.half_width, self.half_width + 1)]


@dataclass
class Cell:
    left: float
    right: float
    verdict: str  # "up" | "down" | "inconclusive"


@dataclass
class ScanReport:
    symmetry_point: float
    samples: list[tuple[float, Interval]]
    cells: list[Cell]
    symmetry_ok: list[bool]
    extremum: str | None = None  # "max" | "min" | None
    bracket: tuple[float, float] | None = None
    contradictions: list[int] = field(default_factory=list)

    @property
    def inconclusive_cells(self) -> list[int]:
        return [i for i, c in enumerate(self.cells) if c.verdict == "inconclusive"]

    def brackets(self, y: float) -> bool:
        return self.bracket is not None and self.bracket[0] <= y <= self.bracket[1]

    def to_json(self) -> dict:
        return {
            "symmetry_point": self.symmetry_point,
            "extremum": self.extremum,
            "bracket": list(self.bracket) if self.bracket else None,
            "contradictions": self.contradictions,
            "symmetry_ok": all(self.symmetry_ok),
            "cells": [[c.left, c.right, c.verdict] for c in self.cells],
        }


def unimodality_scan(
    fn: Callable[[Interval], Interval],
    symmetry_point,
    grid: GridSpec | Sequence[float] = GridSpec(),
) -> ScanReport:
    """Certify the monotonicity pattern of ``fn`` on a grid symmetric about
    ``symmetry_point`` (in the sense ``y <-> s^2/y``).

    A cell is "up"/"down" only when the enclosures at its endpoints are
    strictly separated; monotonicity between grid points is not claimed.
    """
    s_iv = to_iv(symmetry_point)
    s = (lo(s_iv) + hi(s_iv)) / 2
    ys = grid.points(s) if isinstance(grid, GridSpec) else sorted(float(y) for y in grid)
    if len(ys) < 3 or not (ys[0] < s < ys[-1]):
        raise ValidationError("grid must have at least 3 points straddling the symmetry point")
    for y in ys:
        partner = s * s / y
        if min(abs(partner - z) for z in ys) > 1e-9 * partner:
            raise ValidationError(f"grid is not symmetric: no partner for {y}")

    values = [fn(to_iv(y)) for y in ys]
    cells = []
    for (y0, v0), (y1, v1) in zip(zip(ys, values), zip(ys[1:], values[1:])):
        if certainly_lt(v0, v1):
            verdict = "up"
        elif certainly_gt(v0, v1):
            verdict = "down"
        else:
            verdict = "inconclusive"
        cells.append(Cell(y0, y1, verdict))

    with working_bits(256):
        partners = [s_iv * s_iv / to_iv(y) for y in ys]
    symmetry_ok = [overlaps(fn(p), v) for p, v in zip(partners, values)]

    report = ScanReport(s, list(zip(ys, values)), cells, symmetry_ok)
    certified = [(i, c.verdict) for i, c in enumerate(cells) if c.verdict != "inconclusive"]
    if certified:
        first, last = certified[0][1], certified[-1][1]
        if first == "up" and last == "down":
            report.extremum = "max"
        elif first == "down" and last == "up":
            report.extremum = "min"
    if report.extremum:
        rising = "up" if report.extremum == "max" else "down"
        falling = "down" if rising == "up" else "up"
        last_rise = max(i for i, v in certified if v == rising)
        first_fall = min(i for i, v in certified if v == falling)
        report.bracket = (cells[last_rise].left, cells[first_fall].right)
        # any certified cell of the falling kind before one of the rising kind
        report.contradictions = [i for i, v in certified if v == falling and i < last_rise]
        report.contradictions += [i for i, v in certified if v == rising and i > first_fall]
    return report


# -- profiles ----------------------------------------------------------------


@dataclass
class SecrecyProfile:
    lattice: LatticeLike
    ell: int
    kind: str  # "original" | "modified"
    samples: list[tuple[float, Interval]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["y", "lo", "hi"])
        for y, v in self.samples:
            w.writerow([repr(y), repr(lo(v)), repr(hi(v))])
        return buf.getvalue()


def secrecy_profile(
    L: LatticeLike, ell: int, ys: Sequence[float], kind: str = "original",
    precision: float = DEFAULT_PRECISION,
) -> SecrecyProfile:
    if kind not in ("original", "modified"):
        raise ValidationError(f"unknown secrecy function kind {kind!r}")
    if any(y <= 0 for y in ys):
        raise ValidationError("sample points must be positive")
    f = xi if kind == "original" else xi_modified
    return SecrecyProfile(L, ell, kind, [(y, f(L, ell, y, precision)) for y in ys])


# -- counterexample checks ----------------------------------------------------


def symmetry_point(ell: int) -> Interval:
    return 1 / iv.sqrt(iv.mpf(ell))


def d_ell_below_one(ell: int, precision: float = DEFAULT_PRECISION) -> tuple[bool, Interval]:
    """Certify ``Xi_{D^ell}(1/sqrt(ell)) < 1``; returns (certified, enclosure)."""
    with precision_scope(precision):
        v = xi(d_ell(ell), ell, symmetry_point(ell), precision)
        return certainly_lt(v, 1), v


def d_ell_exceeds_symmetry_value(ell: int, factor: float = 10.0,
                                 precision: float = DEFAULT_PRECISION) -> bool:
    """Certify ``Xi_{D^ell}(factor/sqrt(ell)) > Xi_{D^ell}(1/sqrt(ell))``."""
    with precision_scope(precision):
        s = symmetry_point(ell)
        return certainly_gt(xi(d_ell(ell), ell, factor * s, precision), xi(d_ell(ell), ell, s, precision))


def c_ell_scan(ell: int, kind: str, grid: GridSpec = GridSpec(),
               precision: float = DEFAULT_PRECISION) -> ScanReport:
    L = c_ell(ell)
    f = xi if kind == "original" else xi_modified
    return unimodality_scan(lambda y: f(L, ell, y, precision), symmetry_point(ell), grid)
