import random

import numpy as np
import pytest

from paramodular.altlat import IsotropicSubmodule
from paramodular.errors import (
    InadmissibleD,
    IntegralityViolation,
    NotContainedInRadical,
    NotInHalfSpace,
    NotStabilizing,
)
from paramodular.exactmat import Mat, hnf_rows, is_symplectic
from paramodular.garrett import (
    CombinedLattice,
    GarrettTriple,
    admissible_triples,
    embed_factor_pair,
    garrett_representative,
    kernel_identity_check,
    orbit_invariants,
    project_isotropic,
    rebuild_from_pair,
    sp_generators_symplectic,
    split_divisors,
    split_radical,
)


def test_admissible_triples_level_one():
    trips = admissible_triples(2, 2, 1, 1, 1, 1)
    assert [(t.d, t.d_prime, t.r) for t in trips] == \
        [(1, 1, 0), (1, 1, 1), (1, 1, 2)]


def test_admissible_triples_level_p():
    trips = admissible_triples(1, 1, 2, 2, 2, 2)
    assert [(t.d, t.d_prime, t.r) for t in trips] == [(2, 2, 0), (1, 1, 1)]
    with pytest.raises(InadmissibleD):
        GarrettTriple(1, 1, 1, 2, 0, 2, 2, 2, 2)


def test_split_divisors():
    assert split_divisors([1, 2], 1, 1) == [2, 1]
    assert split_divisors([1, 2], 1, 2) == [1, 2]
    tl = split_divisors([1, 2, 3, 6], 2, 6)
    prod_tail = tl[2] * tl[3]
    assert prod_tail == 6 and tl[0] * tl[1] * tl[2] * tl[3] == 36


def test_projection_and_rebuild():
    comb = CombinedLattice((1,), (1,))
    X = IsotropicSubmodule.from_rows(comb.L, [[1, 0, 0, 1], [0, 1, 1, 0]])
    pair = project_isotropic(comb, X)
    assert pair.r == 1
    assert rebuild_from_pair(comb, pair) == X.generators

    X0 = IsotropicSubmodule.from_rows(comb.L, [list(r) for r in comb.x0_rows().rows])
    pair0 = project_isotropic(comb, X0)
    assert pair0.r == 0
    assert pair0.rad1.nrows == 1 and pair0.rad2.nrows == 1
    assert rebuild_from_pair(comb, pair0) == \
        Mat(hnf_rows([list(r) for r in X0.generators.rows]))


def test_rank_bookkeeping_random():
    rng = random.Random(17)
    comb = CombinedLattice((1, 2), (2,))
    g1s = sp_generators_symplectic([1, 2])
    g2s = sp_generators_symplectic([2])
    g1s += [g.inverse() for g in g1s]
    g2s += [g.inverse() for g in g2s]
    X0 = comb.x0_rows()
    for _ in range(12):
        s1, s2 = Mat.identity(4), Mat.identity(2)
        for _w in range(5):
            s1 = s1 @ rng.choice(g1s)
            s2 = s2 @ rng.choice(g2s)
        sig = embed_factor_pair(comb, s1, s2)
        act = comb.E @ sig.transpose() @ comb.E.inverse()
        X = IsotropicSubmodule.from_rows(comb.L, [list(r) for r in (X0 @ act).rows])
        pair = project_isotropic(comb, X)
        assert pair.rad1.nrows == comb.m - pair.r
        assert pair.rad2.nrows == comb.n - pair.r
        assert rebuild_from_pair(comb, pair) == X.generators


def test_split_radical():
    comb = CombinedLattice((1, 2), (2,))
    L = comb.L1
    Z = IsotropicSubmodule.from_rows(L, [[1, 0, 0, 0]])
    X = Mat(hnf_rows([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1]]))
    Zr, Xp = split_radical(L, X, Z)
    merged = Mat(hnf_rows([list(r) for r in Zr.rows] + [list(r) for r in Xp.rows]))
    assert merged == X
    # Z = X: trivial complement
    Z2 = IsotropicSubmodule.from_rows(L, [[1, 0, 0, 0]])
    X2 = Mat(hnf_rows([[1, 0, 0, 0]]))
    _, Xp2 = split_radical(L, X2, Z2)
    assert Xp2.nrows == 0
    # Z = 0
    Z0 = IsotropicSubmodule(Mat.zeros(0, 4), 0)
    _, Xp0 = split_radical(L, X2, Z0)
    assert Xp0 == X2
    with pytest.raises(NotContainedInRadical):
        split_radical(L, Mat([[0, 1, 0, 0]]),
                      IsotropicSubmodule.from_rows(L, [[0, 0, 0, 1]]))


def test_representative_r0_identity():
    comb = CombinedLattice((1,), (2,))
    trip = GarrettTriple(1, 1, 1, 2, 0, 1, 2, 1, 2)
    rep = garrett_representative(comb, trip)
    assert rep.full == Mat.identity(4)
    assert orbit_invariants(comb, rep.full)[:3] == (1, 2, 0)


def test_representative_roundtrip_with_block():
    comb = CombinedLattice((2,), (2,))
    trip = GarrettTriple(1, 1, 1, 1, 1, 2, 2, 2, 2)
    rep = garrett_representative(comb, trip, Mat([[3]]))
    assert rep.C == Mat([[0, 6], [6, 0]])
    assert is_symplectic(rep.full, comb.J)
    d, dp, r, cls = orbit_invariants(comb, rep.full)
    assert (d, dp, r) == (1, 1, 1)
    assert list(cls) == [3] and cls[3].mu == (1,)
    from fractions import Fraction
    with pytest.raises(IntegralityViolation):
        garrett_representative(comb, trip, Mat([[Fraction(1, 2)]]))


def test_not_stabilizing():
    from fractions import Fraction as F
    comb = CombinedLattice((1,), (2,))
    g = Mat([[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, F(1, 2), 0], [0, 0, 0, 1]])
    with pytest.raises(NotStabilizing):
        orbit_invariants(comb, g)


def test_kernel_identity_special():
    comb = CombinedLattice((2,), (2,))
    trip = GarrettTriple(1, 1, 1, 1, 1, 2, 2, 2, 2)
    rep = garrett_representative(comb, trip)
    rng = np.random.default_rng(5)
    for _ in range(10):
        z = np.array([[complex(rng.uniform(-1, 1), rng.uniform(0.8, 2.0))]])
        w = np.array([[complex(rng.uniform(-1, 1), rng.uniform(0.8, 2.0))]])
        assert kernel_identity_check(rep, z, w, 1e-10)
        Cn = np.array([[float(x) for x in row] for row in rep.C.rows],
                      dtype=complex)
        lhs = np.linalg.det(Cn @ np.diag([z[0, 0], w[0, 0]]) + np.eye(2))
        assert abs(lhs - (1 - 4 * z[0, 0] * w[0, 0])) < 1e-12
    with pytest.raises(NotInHalfSpace):
        kernel_identity_check(rep, np.array([[0.1j]]), np.array([[1j]]))


def test_not_maximal():
    from paramodular.errors import NotMaximal
    comb = CombinedLattice((1,), (1,))
    small = IsotropicSubmodule.from_rows(comb.L, [[1, 0, 0, 0]])
    with pytest.raises(NotMaximal):
        project_isotropic(comb, small)
