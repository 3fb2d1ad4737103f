import itertools
import random

import pytest

from lattice_secrecy.errors import NotPositiveDefinite, ValidationError, WrongSpecKind
from lattice_secrecy.lattice import (
    LatticeSpec,
    ThetaData,
    c_ell,
    check_diagonal_modularity,
    d_ell,
    norm_counts,
    theta_series,
)
from lattice_secrecy.qseries import QExpansion


def brute_counts(gram, bound, box):
    n = len(gram)
    counts = [0] * bound
    for v in itertools.product(range(-box, box + 1), repeat=n):
        m = sum(gram[i][j] * v[i] * v[j] for i in range(n) for j in range(n))
        if m < bound:
            counts[m] += 1
    return counts


def test_d_ell_and_c_ell():
    assert d_ell(3).scales == (1, 3)
    assert d_ell(2).scales == (1, 2)
    assert check_diagonal_modularity(d_ell(7), 7)
    assert c_ell(6).scales == (1, 2, 3, 6)
    assert c_ell(3) == d_ell(3)
    assert c_ell(12).scales == (1, 2, 3, 4, 6, 12)


def test_modularity_pairing():
    assert check_diagonal_modularity(LatticeSpec.diagonal([1, 2, 4]), 4)
    assert not check_diagonal_modularity(LatticeSpec.diagonal([1, 2]), 3)
    for ell in (6, 14, 15):
        assert check_diagonal_modularity(c_ell(ell), ell)
    with pytest.raises(WrongSpecKind):
        check_diagonal_modularity(LatticeSpec.gram([[1]]), 1)


def test_scales_sorted():
    assert LatticeSpec.diagonal([4, 1, 2]).scales == (1, 2, 4)


def test_gram_examples():
    assert theta_series(LatticeSpec.gram([[1]]), 10).q_coeffs() == [1, 2, 0, 0, 2, 0, 0, 0, 0, 2]
    assert theta_series(LatticeSpec.gram([[1, 0], [0, 3]]), 20) == theta_series(LatticeSpec.diagonal([1, 3]), 20)
    a2 = theta_series(LatticeSpec.gram([[2, 1], [1, 2]]), 9).q_coeffs()
    assert a2 == brute_counts([[2, 1], [1, 2]], 9, 6)
    assert a2[:9] == [1, 0, 6, 0, 0, 0, 6, 0, 6]


def test_e8_counts():
    # E8 in the even-coordinate basis (Cartan matrix of E8)
    cartan = [
        [2, -1, 0, 0, 0, 0, 0, 0],
        [-1, 2, -1, 0, 0, 0, 0, 0],
        [0, -1, 2, -1, 0, 0, 0, -1],
        [0, 0, -1, 2, -1, 0, 0, 0],
        [0, 0, 0, -1, 2, -1, 0, 0],
        [0, 0, 0, 0, -1, 2, -1, 0],
        [0, 0, 0, 0, 0, -1, 2, 0],
        [0, 0, -1, 0, 0, 0, 0, 2],
    ]
    counts = norm_counts(cartan, 9)
    # 240 sigma_3(m) at q^(2m)
    assert counts == [1, 0, 240, 0, 2160, 0, 6720, 0, 17520]


def test_random_gram_against_brute_force():
    rng = random.Random(7)
    for _ in range(15):
        n = rng.choice([2, 3])
        while True:
            b = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
            g = [[sum(b[k][i] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
            try:
                LatticeSpec.gram(g)
                break
            except NotPositiveDefinite:
                continue
        # the box must hold every vector of norm < 12; use a generous one
        assert norm_counts(g, 12) == brute_counts(g, 12, 12), g


def test_gram_vs_product_all_small_diagonals():
    count = 0
    for n in range(1, 5):
        for scales in itertools.combinations_with_replacement(range(1, 7), n):
            diag = LatticeSpec.diagonal(scales)
            gram = LatticeSpec.gram(diag.gram_matrix())
            assert theta_series(gram, 31) == theta_series(diag, 31), scales
            count += 1
    assert count == 209


def test_theta_properties_of_gram_specs():
    for g in ([[2, 1], [1, 2]], [[2, 1, 0], [1, 2, 1], [0, 1, 3]], [[1, 0], [0, 5]]):
        c = theta_series(LatticeSpec.gram(g), 15).q_coeffs()
        assert c[0] == 1
        assert c[1] % 2 == 0
        assert all(x >= 0 and x.denominator == 1 for x in c)


def test_c_ell_q1_coefficient():
    for ell in range(2, 30):
        assert theta_series(c_ell(ell), 3).q_coeff(1) == 2


def test_validation():
    with pytest.raises(NotPositiveDefinite):
        LatticeSpec.gram([[1, 2], [2, 1]])
    with pytest.raises(ValidationError):
        LatticeSpec.gram([[1, 2], [0, 1]])
    with pytest.raises(ValidationError):
        LatticeSpec.diagonal([0, 1])
    with pytest.raises(ValidationError):
        LatticeSpec.diagonal([1, 2, 3], ell=3)  # odd dimension, non-square level
    assert LatticeSpec.diagonal([1, 2, 4], ell=4).dim == 3
    with pytest.raises(ValidationError):
        LatticeSpec.diagonal([1, 2], ell=3)


def test_json_roundtrip():
    for spec in (LatticeSpec.diagonal([1, 3], ell=3), LatticeSpec.gram([[2, 1], [1, 2]])):
        assert LatticeSpec.from_json(spec.to_json()) == spec
    with pytest.raises(ValidationError):
        LatticeSpec.from_json({"type": "hexagonal"})


def test_theta_data():
    d = ThetaData.from_json({"q_coeffs": [1, 0, 6, 0, 0, 0, 6], "dim": 2})
    assert d.min_norm == 2
    with pytest.raises(ValidationError):
        ThetaData.from_json({"q_coeffs": [1, 2]})
    with pytest.raises(ValidationError):
        ThetaData(QExpansion.from_q_coeffs([2, 1]), 1)
