"""Lattice specifications and their theta series.

Two kinds of lattice are supported: orthogonal sums ``sqrt(a_1) Z + ... +
sqrt(a_n) Z`` (``kind="diagonal"``) and lattices given by an integral Gram
matrix (``kind="gram"``).  Theta series of the former are products of
one-dimensional series; the latter are counted by enumerating lattice points
inside an ellipsoid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import NotPositiveDefinite, ValidationError, WrongSpecKind
from .qseries import DEFAULT_ORDER, GRID, QExpansion, divisors, theta_one_dim


def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


@dataclass(frozen=True)
class LatticeSpec:
    kind: str
    scales: tuple[int, ...] = ()
    matrix: tuple[tuple[int, ...], ...] = ()
    ell: int | None = None

    def __post_init__(self):
        if self.kind == "diagonal":
            if not self.scales:
                raise ValidationError("diagonal lattice needs at least one scale")
            scales = tuple(sorted(int(a) for a in self.scales))
            if scales[0] < 1:
                raise ValidationError("scales must be positive integers")
            object.__setattr__(self, "scales", scales)
        elif self.kind == "gram":
            m = tuple(tuple(int(x) for x in row) for row in self.matrix)
            n = len(m)
            if n == 0 or any(len(row) != n for row in m):
                raise ValidationError("Gram matrix must be square and nonempty")
            if any(m[i][j] != m[j][i] for i in range(n) for j in range(n)):
                raise ValidationError("Gram matrix must be symmetric")
            object.__setattr__(self, "matrix", m)
            if any(d <= 0 for d in leading_minors(m)):
                raise NotPositiveDefinite("Gram matrix is not positive definite")
        else:
            raise ValidationError(f"unknown lattice kind {self.kind!r}")
        if self.ell is not None:
            if self.ell < 1:
                raise ValidationError("level must be a positive integer")
            if self.dim % 2 and not _is_square(self.ell):
                raise ValidationError(
                    f"odd dimension {self.dim} is impossible for non-square level {self.ell}"
                )
            if self.kind == "diagonal" and not check_diagonal_modularity(self, self.ell):
                raise ValidationError(f"scales {self.scales} do not pair to level {self.ell}")

    @classmethod
    def diagonal(cls, scales: Sequence[int], ell: int | None = None) -> "LatticeSpec":
        return cls("diagonal", scales=tuple(scales), ell=ell)

    @classmethod
    def gram(cls, matrix: Sequence[Sequence[int]], ell: int | None = None) -> "LatticeSpec":
        return cls("gram", matrix=tuple(tuple(r) for r in matrix), ell=ell)

    @property
    def dim(self) -> int:
        return len(self.scales) if self.kind == "diagonal" else len(self.matrix)

    def gram_matrix(self) -> tuple[tuple[int, ...], ...]:
        if self.kind == "gram":
            return self.matrix
        n = self.dim
        return tuple(tuple(self.scales[i] if i == j else 0 for j in range(n)) for i in range(n))

    def determinant(self) -> Fraction:
        return math.prod(leading_minors(self.gram_matrix())[-1:]) if self.dim else Fraction(1)

    def to_json(self) -> dict:
        out: dict = {"type": self.kind}
        if self.kind == "diagonal":
            out["scales"] = list(self.scales)
        else:
            out["matrix"] = [list(r) for r in self.matrix]
        if self.ell is not None:
            out["ell"] = self.ell
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "LatticeSpec":
        kind = data.get("type")
        ell = data.get("ell")
        if kind == "diagonal":
            return cls.diagonal(data["scales"], ell)
        if kind == "gram":
            return cls.gram(data["matrix"], ell)
        raise ValidationError(f"unknown lattice type {kind!r}")


def leading_minors(m: Sequence[Sequence[int]]) -> list[Fraction]:
    """Leading principal minors by exact Gaussian elimination."""
    n = len(m)
    a = [[Fraction(x) for x in row] for row in m]
    minors = []
    det = Fraction(1)
    for k in range(n):
        pivot = a[k][k]
        det *= pivot
        minors.append(det)
        if pivot == 0:
            # a zero leading minor: the remaining ones are not needed to reject
            minors.extend([Fraction(0)] * (n - k - 1))
            break
        for i in range(k + 1, n):
            f = a[i][k] / pivot
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return minors


def d_ell(ell: int) -> LatticeSpec:
    """``D^ell = Z + sqrt(ell) Z``."""
    if ell < 2:
        raise ValidationError("level must be at least 2")
    return LatticeSpec.diagonal([1, ell])


def c_ell(ell: int) -> LatticeSpec:
    """``C^ell``: one summand ``sqrt(d) Z`` for every positive divisor ``d`` of ``ell``."""
    if ell < 2:
        raise ValidationError("level must be at least 2")
    return LatticeSpec.diagonal(divisors(ell))


def check_diagonal_modularity(L: LatticeSpec, ell: int) -> bool:
    """``a_k a_{n+1-k} == ell`` for every k."""
    if L.kind != "diagonal":
        raise WrongSpecKind("modularity pairing check needs a diagonal lattice")
    a = L.scales
    return all(a[k] * a[-1 - k] == ell for k in range(len(a)))


def theta_series(L: LatticeSpec, order: int = DEFAULT_ORDER) -> QExpansion:
    """Theta series through ``q^(order-1)``."""
    if L.kind == "diagonal":
        out = QExpansion.one(order)
        for a in L.scales:
            out = out * theta_one_dim(a, order)
        return out
    counts = norm_counts(L.matrix, order)
    return QExpansion({GRID * m: c for m, c in enumerate(counts)}, GRID * order)


def norm_counts(gram: Sequence[Sequence[int]], bound: int) -> list[int]:
    """``counts[m] = #{v in Z^n : v^T G v = m}`` for ``0 <= m < bound``.

    Fincke-Pohst style enumeration: with ``v^T G v = sum_i r_i (v_i + sum_{j>i}
    mu_ij v_j)^2`` each coordinate, from the last to the first, ranges over an
    interval determined by the norm budget left by the coordinates already
    fixed.  Floating point only bounds the search; norms are computed exactly.
    """
    n = len(gram)
    g = [[int(x) for x in row] for row in gram]
    r, mu = _ldl(g)
    counts = [0] * bound
    limit = bound - 1  # norms are integers, so v^T G v < bound means <= bound - 1
    slack = 1e-9 * (limit + 1)
    v = [0] * n

    def recurse(i: int, budget: float, exact: int):
        # exact: value of the quadratic form restricted to coordinates > i
        centre = -sum(mu[i][j] * v[j] for j in range(i + 1, n))
        half = math.sqrt(max(budget, 0.0) / r[i]) + 1e-9
        lo_, hi_ = math.ceil(centre - half), math.floor(centre + half)
        cross = sum(g[i][j] * v[j] for j in range(i + 1, n))
        for x in range(lo_, hi_ + 1):
            v[i] = x
            e = exact + g[i][i] * x * x + 2 * x * cross
            if i == 0:
                if e <= limit:
                    counts[e] += 1
            else:
                d = x - centre
                recurse(i - 1, budget - r[i] * d * d + slack, e)
        v[i] = 0

    recurse(n - 1, limit + slack, 0)
    return counts


def _ldl(g: list[list[int]]) -> tuple[list[float], list[list[float]]]:
    """``G = U^T diag(r) U`` with unit upper-triangular ``U``; entries of
    ``U`` above the diagonal returned as ``mu[i][j]`` (``j > i``)."""
    n = len(g)
    a = [[float(x) for x in row] for row in g]
    r = [0.0] * n
    mu = [[0.0] * n for _ in range(n)]
    for i in range(n):
        s = a[i][i] - sum(mu[k][i] ** 2 * r[k] for k in range(i))
        if s <= 0:
            raise NotPositiveDefinite("Gram matrix is not positive definite")
        r[i] = s
        for j in range(i + 1, n):
            mu[i][j] = (a[i][j] - sum(mu[k][i] * mu[k][j] * r[k] for k in range(i))) / s
    return r, mu


@dataclass(frozen=True)
class ThetaData:
    """A lattice known only through (part of) its theta series.

    ``series`` must have integral support; ``dim`` is the lattice dimension,
    needed for the volume bound on the unknown tail.
    """

    series: QExpansion
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("dimension must be positive")
        if self.series.coeffs.get(0) != 1:
            raise ValidationError("theta series must have constant term 1")
        if any(i % GRID or i < 0 or c < 0 or c.denominator != 1 for i, c in self.series.coeffs.items()):
            raise ValidationError("theta coefficients must be nonnegative integers at integral powers")

    @property
    def min_norm(self) -> int:
        """Smallest nonzero norm, or the truncation order if none is known."""
        return min((i // GRID for i, c in self.series.coeffs.items() if i > 0 and c),
                   default=self.series.q_order)

    @classmethod
    def from_json(cls, data: Mapping) -> "ThetaData":
        coeffs = data["q_coeffs"]
        if "dim" not in data:
            raise ValidationError("theta input needs 'dim' for evaluation")
        return cls(QExpansion.from_q_coeffs([int(c) for c in coeffs]), int(data["dim"]))
