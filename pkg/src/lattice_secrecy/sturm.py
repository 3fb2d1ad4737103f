"""Exact univariate polynomials over Q and Sturm-sequence root isolation.

Polynomials are lists of :class:`~fractions.Fraction` coefficients, lowest
degree first.  No floating point is used anywhere in this module.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Poly = list[Fraction]


def normalize(p: Sequence) -> Poly:
    q = [Fraction(c) for c in p]
    while q and q[-1] == 0:
        q.pop()
    return q


def degree(p: Poly) -> int:
    return len(normalize(p)) - 1


def evaluate(p: Sequence[Fraction], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def derivative(p: Sequence[Fraction]) -> Poly:
    return normalize([i * c for i, c in enumerate(p)][1:])


def divmod_poly(a: Poly, b: Poly) -> tuple[Poly, Poly]:
    a, b = normalize(a), normalize(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    r = list(a)
    lead = b[-1]
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        f = r[-1] / lead
        q[shift] = f
        for i, c in enumerate(b):
            r[shift + i] -= f * c
        r = normalize(r)
    return normalize(q), r


def gcd_poly(a: Poly, b: Poly) -> Poly:
    a, b = normalize(a), normalize(b)
    while b:
        a, b = b, divmod_poly(a, b)[1]
    if not a:
        return a
    return [c / a[-1] for c in a]


def squarefree(p: Poly) -> Poly:
    """``p / gcd(p, p')``: same distinct roots, all simple."""
    p = normalize(p)
    if len(p) <= 1:
        return p
    g = gcd_poly(p, derivative(p))
    return divmod_poly(p, g)[0] if len(g) > 1 else p


def sturm_sequence(p: Poly) -> list[Poly]:
    p = normalize(p)
    seq = [p, derivative(p)]
    while seq[-1]:
        r = divmod_poly(seq[-2], seq[-1])[1]
        seq.append([-c for c in r])
    return seq[:-1]


def sign_variations(seq: list[Poly], x: Fraction) -> int:
    signs = [v > 0 for v in (evaluate(p, x) for p in seq) if v != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def count_roots(p: Sequence, a: Fraction, b: Fraction) -> int:
    """Number of distinct real roots of ``p`` in the half-open interval ``(a, b]``."""
    p = squarefree(normalize(p))
    if len(p) <= 1:
        return 0
    seq = sturm_sequence(p)
    return sign_variations(seq, Fraction(a)) - sign_variations(seq, Fraction(b))


def isolate_roots(p: Sequence, a: Fraction, b: Fraction) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals ``(lo, hi]`` each containing exactly one distinct root
    of ``p`` in ``(a, b]``; an exact rational root ``r`` is reported as ``(r, r)``."""
    p = squarefree(normalize(p))
    if len(p) <= 1:
        return []
    seq = sturm_sequence(p)
    a, b = Fraction(a), Fraction(b)
    out: list[tuple[Fraction, Fraction]] = []
    stack = [(a, b, sign_variations(seq, a), sign_variations(seq, b))]
    while stack:
        lo, hi, vlo, vhi = stack.pop()
        n = vlo - vhi
        if n == 0:
            continue
        if n == 1:
            if evaluate(p, hi) == 0:
                out.append((hi, hi))
            else:
                out.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        vmid = sign_variations(seq, mid)
        stack.append((lo, mid, vlo, vmid))
        stack.append((mid, hi, vmid, vhi))
    return sorted(out)


def refine_root(p: Sequence, iso: tuple[Fraction, Fraction], width: Fraction) -> tuple[Fraction, Fraction]:
    """Bisect an isolating interval of a simple root of ``squarefree(p)``."""
    p = squarefree(normalize(p))
    lo, hi = iso
    if lo == hi:
        return iso
    if evaluate(p, hi) == 0:
        return hi, hi
    s_hi = evaluate(p, hi) > 0
    while hi - lo > width:
        mid = (lo + hi) / 2
        v = evaluate(p, mid)
        if v == 0:
            return mid, mid
        if (v > 0) == s_hi:
            hi = mid
        else:
            lo = mid
    return lo, hi


def enclose(p: Sequence[Fraction], lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Exact rational bounds for ``p`` over ``[lo, hi]`` via a Taylor shift to the midpoint."""
    p = normalize(p)
    if not p:
        return Fraction(0), Fraction(0)
    m = (lo + hi) / 2
    h = (hi - lo) / 2
    # coefficients of p(m + t)
    shifted = []
    cur = list(p)
    for _ in range(len(p)):
        shifted.append(evaluate(cur, m))
        cur = derivative(cur)
    fact = Fraction(1)
    spread = Fraction(0)
    for j in range(1, len(shifted)):
        fact *= j
        spread += abs(shifted[j]) / fact * h**j
    return shifted[0] - spread, shifted[0] + spread
