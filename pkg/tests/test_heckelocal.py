from fractions import Fraction as F

import pytest

from paramodular.errors import IncompatibleLocals, InvalidInvariant, NotElementary
from paramodular.exactmat import Mat
from paramodular.heckelocal import (
    LocalDoubleCoset,
    LocalLattice,
    LocalShape,
    classify_pair,
    classify_rel_rational,
    coset_partition,
    enumerate_Tpj,
    enumerate_neighbors,
    factor_Tm,
    global_representative,
    hecke_product,
    matrix_image_lattice,
    monomial_block,
    neighbor_bounds_ok,
    neighbor_count_formula,
    representative_lattice,
    representative_matrix,
    shape_diag,
    target_diag,
    transpose_integrality,
)
from paramodular.heckelocal import _classify_internal, _key, standard_internal


def test_classify_examples():
    sh = LocalShape(2, 1, 1)
    dc = classify_pair(sh, LocalLattice(Mat.identity(4)))
    assert (dc.r_minus, dc.r_plus, dc.mu) == (0, 0, (0, 0))
    p = 2
    L = LocalLattice(Mat([[p, 0, 0, 0], [0, 1, 0, 0],
                          [0, 0, F(1, p), 0], [0, 0, 0, 1]]).transpose())
    dc = classify_pair(sh, L)
    assert (dc.r_minus, dc.r_plus, dc.mu) == (0, 0, (1, 0))
    sh10 = LocalShape(2, 1, 0)
    dc = classify_pair(sh10, LocalLattice(Mat([[2, 0], [0, 1]])))
    assert (dc.r_minus, dc.r_plus, dc.mu) == (1, 0, (1,))
    assert (dc.a_target, dc.b_target) == (0, 1)
    # level divisible by p^2 is rejected
    with pytest.raises(NotElementary):
        classify_pair(sh, LocalLattice(Mat.diagonal([1, 1, 4, 1])))
    # far-away but still p-elementary lattices are fine
    dc4 = classify_pair(sh, LocalLattice(Mat.diagonal([4, 1, F(1, 4), 1])))
    assert dc4.mu == (2, 0)


def test_representative_matrices():
    dc = LocalDoubleCoset(LocalShape(2, 1, 0), 0, 0, (3,))
    assert representative_matrix(dc) == Mat.diagonal([8, F(1, 8)])
    dc = LocalDoubleCoset(LocalShape(2, 1, 1), 1, 1, (1, 0))
    assert monomial_block(dc) == Mat([[0, 2], [1, 0]])
    with pytest.raises(InvalidInvariant):
        LocalDoubleCoset(LocalShape(2, 1, 1), 1, 1, (0, 0))
    with pytest.raises(InvalidInvariant):
        LocalDoubleCoset(LocalShape(2, 2, 0), 0, 0, (2, 1))


def test_representative_soundness_p2():
    for (a, b) in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
        shape = LocalShape(2, a, b)
        for j in range(3):
            for dc in enumerate_Tpj(shape, j):
                rows, k = representative_lattice(dc)
                got = classify_pair(shape, LocalLattice.from_internal(rows, k, 2))
                assert (got.r_minus, got.r_plus, got.mu) == \
                    (dc.r_minus, dc.r_plus, dc.mu)
                D = representative_matrix(dc)
                assert _key(*matrix_image_lattice(dc, D)) == _key(rows, k)


def test_transpose_integrality_and_reshuffle():
    B = Mat.diagonal([1, 3])
    assert transpose_integrality(B, Mat.diagonal([1, 3]), Mat.identity(2))
    for p in (2, 3):
        shape = LocalShape(p, 1, 1)
        for j in range(3):
            for dc in enumerate_Tpj(shape, j):
                Bm = monomial_block(dc)
                T, Tp = target_diag(dc), shape_diag(shape)
                assert transpose_integrality(Bm, T, Tp)
                r, a = dc.r_minus, shape.a
                mu = dc.mu
                new_mu = tuple([mu[a + i] + 1 for i in range(r)]
                               + list(mu[r:a])
                               + [mu[i] - 1 for i in range(r)]
                               + list(mu[a + r:]))
                M = T.inverse() @ Bm.transpose() @ Tp
                assert M == monomial_block(LocalDoubleCoset(shape, r, r, new_mu))


def test_enumerate_Tpj_counts():
    assert len(enumerate_Tpj(LocalShape(2, 1, 0), 0)) == 1
    assert len(enumerate_Tpj(LocalShape(2, 1, 0), 1)) == 1
    tuples = enumerate_Tpj(LocalShape(2, 1, 1), 1)
    assert len(tuples) == 3
    assert {(t.r_minus, t.mu) for t in tuples} == \
        {(0, (1, 0)), (0, (0, 1)), (1, (1, 0))}


def test_neighbor_formula_values():
    assert neighbor_count_formula(2, 1, 0) == 6
    assert neighbor_count_formula(2, 1, 1) == 66
    assert neighbor_count_formula(3, 0, 1) == 12


def test_neighbor_enumeration_small():
    for (p, a, b) in [(2, 1, 0), (2, 0, 1), (3, 1, 0)]:
        got = enumerate_neighbors(LocalShape(p, a, b))
        assert len(got) == neighbor_count_formula(p, a, b)
        keys = set()
        for L in got:
            keys.add(_key(*L.to_internal(p)))
        assert len(keys) == len(got)


def test_bounds():
    assert neighbor_bounds_ok(5, 2, 1)
    assert neighbor_bounds_ok(3, 0, 2)
    assert neighbor_bounds_ok(2, 1, 0)
    # the stated power-of-two bound is violated at mixed shapes: the count
    # 66 at (1,1) exceeds 2**6; kept as a documented failure in acceptance
    assert not neighbor_bounds_ok(2, 1, 1)


def test_partition_p2():
    shape = LocalShape(2, 1, 1)
    parts = coset_partition(shape, 1)
    assert {(_d.r_minus, _d.mu): len(v) for _d, v in parts.items()} == {
        (0, (1, 0)): 24, (0, (0, 1)): 24, (1, (1, 0)): 18}
    assert sum(len(v) for v in parts.values()) == 66


def test_products():
    shape = LocalShape(2, 1, 0)
    prod = hecke_product(shape, 1, 1)
    flat = {(dc.weight, dc.mu): m for dc, m in prod.items()}
    # affine rank-one pattern: q(q+1) identity, (q-1) middle, one top
    assert flat == {(0, (0,)): 6, (1, (1,)): 1, (2, (2,)): 1}
    prod0 = hecke_product(LocalShape(2, 1, 1), 0, 1)
    assert all(m == 1 and dc.weight == 1 for dc, m in prod0.items())
    assert len(prod0) == 3


def test_global_representative():
    T = Mat.diagonal([1, 2])
    assert global_representative(T, T, {}) == Mat.identity(2)
    dc = LocalDoubleCoset(LocalShape(2, 1, 1), 0, 0, (1, 0))
    B = global_representative(T, T, {2: dc})
    assert B.det() == 2 and B.is_integral()
    assert transpose_integrality(B, T, T)
    T6 = Mat.diagonal([1, 6])
    dc3 = LocalDoubleCoset(LocalShape(3, 1, 1), 1, 1, (1, 0))
    B = global_representative(T6, T6, {2: dc, 3: dc3})
    assert B.det() == 6 and transpose_integrality(B, T6, T6)
    # classes recovered at each prime
    n = 2
    h = Mat.from_blocks([[B, Mat.zeros(n, n)],
                         [Mat.zeros(n, n), B.inverse().transpose()]])
    J = Mat.from_blocks([[Mat.zeros(n, n), Mat.identity(n)],
                         [Mat.identity(n).scale(-1), Mat.zeros(n, n)]])
    E = Mat.diagonal([1, 1, 1, 6])
    mov = E @ h.transpose()
    for p, want in ((2, dc), (3, dc3)):
        got = classify_rel_rational(J, E, mov, p)
        assert (got.r_minus, got.r_plus, got.mu) == \
            (want.r_minus, want.r_plus, want.mu)
    with pytest.raises(IncompatibleLocals):
        global_representative(Mat.diagonal([1]), Mat.diagonal([2]), {})


def test_factor_Tm():
    T = Mat.diagonal([1, 6])
    assert factor_Tm(T, 1) == []
    assert factor_Tm(T, 12) == [(2, 2), (3, 1)]
    assert factor_Tm(T, 7) == [(7, 1)]


def test_classify_orbit_invariance():
    # invariant tuples do not change along products of group generators
    import random
    from paramodular.garrett import sp_generators_symplectic
    rng = random.Random(8)
    shape = LocalShape(2, 1, 1)
    gens = sp_generators_symplectic([1, 2])
    gens += [g.inverse() for g in gens]
    base = standard_internal(shape)
    for dc in enumerate_Tpj(shape, 1):
        rows, k = representative_lattice(dc)
        E = Mat.diagonal([1, 1, 1, 2])
        mov0 = Mat([[F(x, 2**k) for x in row] for row in rows]) @ E
        for _ in range(8):
            g = Mat.identity(4)
            for _w in range(6):
                g = g @ rng.choice(gens)
            mov = mov0 @ g.transpose()
            got = classify_rel_rational(
                Mat.from_blocks([[Mat.zeros(2, 2), Mat.identity(2)],
                                 [Mat.identity(2).scale(-1), Mat.zeros(2, 2)]]),
                E, mov, 2)
            assert (got.r_minus, got.r_plus, got.mu) == \
                (dc.r_minus, dc.r_plus, dc.mu)


def test_left_cosets_match_neighbors():
    from paramodular.heckelocal import left_cosets
    shape = LocalShape(2, 1, 0)
    # all weight-one classes together give exactly the neighbors
    allkeys = set()
    total = 0
    for d in enumerate_Tpj(shape, 1):
        ls = left_cosets(d)
        total += len(ls)
        for L in ls:
            allkeys.add(_key(*L.to_internal(2)))
    nb = {(_key(*L.to_internal(2))) for L in enumerate_neighbors(shape)}
    assert allkeys == nb and total == len(nb) == 6
    # the identity class consists of the standard lattice alone
    dc0 = LocalDoubleCoset(shape, 0, 0, (0,))
    only = left_cosets(dc0)
    assert len(only) == 1
    assert _key(*only[0].to_internal(2)) == _key(*standard_internal(shape))


def test_scale_limit():
    from paramodular.errors import ScaleLimit
    with pytest.raises(ScaleLimit):
        enumerate_neighbors(LocalShape(3, 1, 1), budget=10)
