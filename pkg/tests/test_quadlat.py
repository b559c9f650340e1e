import random

import pytest

from paramodular.errors import NotEven, NotPositiveDefinite
from paramodular.exactmat import Mat, rational_inverse
from paramodular.quadlat import (
    ParamodularChain,
    QuadLattice,
    aut_order,
    aut_order_and_gens,
    constant_chain,
    e8_lattice,
    enumerate_chain_classes,
    invariants,
    isometry_test,
    pmodular_coords,
    pmodular_sublattices,
    shell_counts,
    short_vectors,
    short_vectors_exact,
)


def test_validation():
    with pytest.raises(NotEven):
        QuadLattice(Mat([[1]]))
    with pytest.raises(NotPositiveDefinite):
        QuadLattice(Mat([[-2]]))
    with pytest.raises(NotPositiveDefinite):
        QuadLattice(Mat([[2, 3], [3, 2]]))


def test_invariants(e8):
    N, disc, dual = invariants(e8)
    assert (N, disc) == (1, 1)
    assert dual == rational_inverse(e8.gram)
    # unimodular means the dual has the same Gram
    assert dual.is_integral()
    A1 = QuadLattice(Mat([[2]]))
    assert (A1.level(), A1.disc()) == (4, 2)
    A1s = QuadLattice(Mat([[4]]))
    assert (A1s.level(), A1s.disc()) == (8, 4)


def test_shells_against_exact(e8):
    assert shell_counts(e8, 3) == {0: 1, 1: 240, 2: 2160, 3: 6720}
    sve = short_vectors_exact(e8, 2)
    svc = short_vectors(e8, 2)
    assert {q: len(v) for q, v in sve.items()} == {0: 1, 1: 240, 2: 2160}
    assert {q: sorted(v) for q, v in sve.items()} == \
        {q: sorted(v) for q, v in svc.items()}


def test_shells_random_forms():
    rng = random.Random(6)
    for _ in range(8):
        n = rng.randint(1, 3)
        while True:
            B = Mat([[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)])
            G = B @ B.transpose()
            G = G.scale(2)
            try:
                L = QuadLattice(G)
                break
            except (NotPositiveDefinite, NotEven):
                continue
        bound = rng.randint(1, 8)
        a = {q: len(v) for q, v in short_vectors_exact(L, bound).items()}
        b = shell_counts(L, bound)
        assert a == b


def test_isometry(e8):
    rng = random.Random(3)
    perm = list(range(8))
    rng.shuffle(perm)
    P = Mat([[1 if j == perm[i] else 0 for j in range(8)] for i in range(8)])
    other = QuadLattice(P @ e8.gram @ P.transpose())
    g = isometry_test(e8, other)
    assert g is not None
    assert g.transpose() @ other.gram @ g == e8.gram
    assert isometry_test(e8, QuadLattice(Mat.diagonal([2] * 8))) is None
    assert isometry_test(e8, QuadLattice(Mat([[2]]))) is None


def test_aut_orders(e8):
    assert aut_order(QuadLattice(Mat([[2]]))) == 2
    assert aut_order(QuadLattice(Mat.diagonal([2, 4]))) == 4
    order, gens = aut_order_and_gens(e8)
    assert order == 696729600
    for g in gens[:3]:
        assert g.transpose() @ e8.gram @ g == e8.gram


def test_pmodular_sublattices(e8):
    mats = pmodular_coords(e8, 2)
    assert len(mats) == 270
    K = mats[0]
    KL = QuadLattice(K @ e8.gram @ K.transpose())
    assert KL.disc() == 256
    # dual rescaled equals the lattice
    assert rational_inverse(KL.gram).scale(2).is_integral()
    # rescaling by the prime is even unimodular
    half = Mat([[x // 2 for x in row] for row in KL.gram.rows])
    assert abs(half.det()) == 1 and all(half[i, i] % 2 == 0 for i in range(8))
    subs = pmodular_sublattices(e8, 2)
    assert len(subs) == 270 and all(s.disc() == 256 for s in subs[:5])


def test_chain_validation(e8):
    I = Mat.identity(8)
    chain = constant_chain(e8, 2)
    assert chain.T == (1, 1)
    K = pmodular_coords(e8, 2)[0]
    ch = ParamodularChain(e8, (I, K), (1, 2))
    assert ch.member(1).disc() == 256
    with pytest.raises(AssertionError):
        ParamodularChain(e8, (I, I), (1, 2))


def test_constant_chain_classes(e8):
    classes = enumerate_chain_classes(e8, (1, 1))
    assert len(classes) == 1
    assert classes[0].stabilizer_order == 696729600
    assert classes[0].orbit_size == 1


def test_chain_stabilizer_divides(e8, e8_chain):
    stab = aut_order(e8_chain)
    assert 696729600 % stab == 0
    assert stab == 2580480


def test_scale_limit_budget(e8):
    from paramodular.errors import ScaleLimit
    with pytest.raises(ScaleLimit):
        short_vectors_exact(e8, 4, budget=50)
