"""Involution lattice classifier."""

import random

import pytest
from sympy import Matrix

from selmerlab.lattices import (
    REGULAR_BLOCK,
    SIGN_BLOCK,
    TRIVIAL_BLOCK,
    block_diag,
    classify_extension,
    decompose,
    lattice,
    norm_index,
)


def rand_unimodular(n, rng):
    M = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(6 * n):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        c = rng.choice([-2, -1, 1, 2])
        for k in range(n):
            M[i][k] += c * M[j][k]
    return M


def conjugate(action, U):
    Ui = Matrix(U).inv()
    G = Matrix(U) * Matrix([list(r) for r in action]) * Ui
    return [[int(x) for x in row] for row in G.tolist()]


def test_basic_examples():
    assert decompose(lattice(REGULAR_BLOCK)) == (0, 0, 1)
    assert decompose(lattice([[1, 0], [0, -1]])) == (1, 1, 0)
    assert decompose(block_diag(*([TRIVIAL_BLOCK] * 3))) == (3, 0, 0)


def test_norm_index_examples():
    assert norm_index(lattice(REGULAR_BLOCK)) == 1
    assert norm_index(lattice(TRIVIAL_BLOCK)) == 2
    assert norm_index(block_diag([[1, 0], [0, -1]], REGULAR_BLOCK)) == 2


def test_rejects_non_involution():
    with pytest.raises(ValueError):
        lattice([[1, 1], [0, 1]])


def test_reconstruction_all_multiplicities_rank_le_6():
    for n1 in range(4):
        for n2 in range(4):
            for n3 in range(3):
                n = n1 + n2 + 2 * n3
                if n == 0 or n > 6:
                    continue
                L = block_diag(*([TRIVIAL_BLOCK] * n1 + [SIGN_BLOCK] * n2
                                 + [REGULAR_BLOCK] * n3))
                assert decompose(L) == (n1, n2, n3)
                assert norm_index(L) == 1 << n1


def test_conjugation_invariance():
    rng = random.Random(17)
    cases = [(1, 1, 1), (2, 0, 1), (0, 2, 2), (3, 1, 1)]
    for n1, n2, n3 in cases:
        L = block_diag(*([TRIVIAL_BLOCK] * n1 + [SIGN_BLOCK] * n2
                         + [REGULAR_BLOCK] * n3))
        for _ in range(50):
            U = rand_unimodular(L.rank, rng)
            L2 = lattice(conjugate(L.action, U))
            assert decompose(L2) == (n1, n2, n3)
            assert norm_index(L2) == 1 << n1


def test_classify_extension():
    assert classify_extension((0, 0), 1) == "trivial-summand"
    assert classify_extension((1, 0), -1) == "nonsplit"
    assert classify_extension((0, 1), 1) == "nonsplit"
    out = classify_extension((0, 0, 0), -1)
    assert out not in ("trivial-summand", "regular-type")
    with pytest.raises(ValueError):
        classify_extension((0,), 2)
