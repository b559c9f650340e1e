import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from paramodular.errors import DimensionMismatch, SingularMatrix
from paramodular.exactmat import (
    Mat,
    crt,
    hermite_normal_form,
    hnf_rows,
    is_symplectic,
    lattice_intersection,
    left_kernel,
    rational_inverse,
    saturation,
    smith_normal_form,
    xgcd,
)


def test_snf_identity():
    I = Mat.identity(2)
    U, D, V = smith_normal_form(I)
    assert D == I and U @ I @ V == D


def test_snf_diag_2_3():
    U, D, V = smith_normal_form(Mat.diagonal([2, 3]))
    assert [D[0, 0], D[1, 1]] == [1, 6]
    assert U @ Mat.diagonal([2, 3]) @ V == D


def test_snf_diag_1_p():
    A = Mat.diagonal([1, 7])
    U, D, V = smith_normal_form(A)
    assert D == A


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 10**6))
def test_snf_properties(nr, nc, seed):
    rng = random.Random(seed)
    A = Mat([[rng.randint(-9, 9) for _ in range(nc)] for _ in range(nr)])
    U, D, V = smith_normal_form(A)
    assert U @ A @ V == D
    assert abs(U.det()) == 1 and abs(V.det()) == 1
    ds = [D[i, i] for i in range(min(nr, nc))]
    for a, b in zip(ds, ds[1:]):
        assert a >= 0
        assert (b % a == 0) if a else (b == 0)


def test_hnf_examples():
    I = Mat.identity(3)
    H, U = hermite_normal_form(I)
    assert H == I and U == I
    H, U = hermite_normal_form(Mat([[2, 0], [1, 1]]))
    assert H == Mat([[1, 1], [0, 2]])
    assert U @ Mat([[2, 0], [1, 1]]) == H
    H, _ = hermite_normal_form(Mat.zeros(2, 2))
    assert H.is_zero()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_hnf_uniqueness(seed):
    # two bases of the same lattice have the same Hermite form
    rng = random.Random(seed)
    A = Mat([[rng.randint(-6, 6) for _ in range(3)] for _ in range(3)])
    ops = Mat.identity(3)
    for _ in range(4):
        i, j = rng.sample(range(3), 2)
        E = [[1 if a == b else 0 for b in range(3)] for a in range(3)]
        E[i][j] = rng.randint(-3, 3)
        ops = Mat(E) @ ops
    H1, _ = hermite_normal_form(A)
    H2, _ = hermite_normal_form(ops @ A)
    assert H1 == H2


def test_rational_inverse():
    assert rational_inverse(Mat.identity(2)) == Mat.identity(2)
    D = Mat.diagonal([1, Fraction(3)])
    assert rational_inverse(D) == Mat.diagonal([1, Fraction(1, 3)])
    with pytest.raises(SingularMatrix):
        rational_inverse(Mat([[1, 1], [1, 1]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_inverse_roundtrip(seed):
    rng = random.Random(seed)
    while True:
        A = Mat([[Fraction(rng.randint(-5, 5), rng.randint(1, 4))
                  for _ in range(3)] for _ in range(3)])
        if A.det() != 0:
            break
    assert A @ rational_inverse(A) == Mat.identity(3)
    assert rational_inverse(rational_inverse(A)) == A


def test_is_symplectic():
    J = Mat([[0, 1], [-1, 0]])
    assert is_symplectic(Mat.identity(2), J)
    assert not is_symplectic(Mat.diagonal([2, 2]), J)
    # the paramodular flip for the level form
    t = 3
    Jt = Mat([[0, t], [-t, 0]])
    flip = Mat([[0, Fraction(-1, t)], [t, 0]])
    assert is_symplectic(flip, Jt)
    with pytest.raises(DimensionMismatch):
        is_symplectic(Mat.identity(3), Mat.identity(3))


def test_kernel_and_saturation():
    A = Mat([[1, 2, 3], [2, 4, 6]])
    K = left_kernel(A)
    assert K.nrows == 1 and (K @ A).is_zero()
    S = saturation(Mat([[2, 4], [0, 0]]))
    assert S == Mat([[1, 2]])
    X = lattice_intersection(Mat([[2, 0], [0, 1]]), Mat([[1, 0], [0, 3]]))
    assert X == Mat([[2, 0], [0, 3]])


def test_json_codec():
    A = Mat([[1, Fraction(-3, 7)], [0, 12345678901234567890]])
    assert Mat.from_json(A.to_json()) == A


def test_crt_xgcd():
    g, s, t = xgcd(12, 18)
    assert g == 6 and s * 12 + t * 18 == 6
    x = crt([1, 2], [3, 5])
    assert x % 3 == 1 and x % 5 == 2


def test_hnf_rows_key():
    assert hnf_rows([[0, 0], [0, 0]]) == []
    assert hnf_rows([[2, 2], [0, 2]]) == [[2, 0], [0, 2]]
