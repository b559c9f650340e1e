"""Double cosets of a big symplectic group under a product of two lattice
isometry groups and the stabilizer of a maximal isotropic subspace.

The orbit of a maximal totally isotropic submodule X of an orthogonal sum of
two alternating lattices is classified by the d-invariants of the radicals
of its two projections, the common corank r, and the Hecke class of the
induced isomorphism between the quotients.  Representatives are lower
unipotent block matrices built from cusp matrices S_1, S_2 and a Hecke block
B of size r.

Coordinates: the combined space carries the symplectic basis
(e_1..e_m, e'_1..e'_n, v_1..v_m, v'_1..v'_n), where v_i = f_i / d_i; the
combined lattice therefore has basis matrix diag(1, T1 (+) T2) in these
coordinates.  Row-vector conventions follow altlat.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .altlat import (
    AltLattice,
    IsotropicSubmodule,
    adapt_to_isotropic,
    admissible_d_values,
    cusp_matrix_S,
    d_invariant,
    level_and_det,
    standard_lattice,
)
from .errors import (
    InadmissibleD,
    IntegralityViolation,
    NotContainedInRadical,
    NotInHalfSpace,
    NotIsotropic,
    NotMaximal,
    NotStabilizing,
)
from .exactmat import (
    Mat,
    hnf_rows,
    is_symplectic,
    lattice_intersection,
    left_kernel,
    rational_inverse,
    smith_normal_form,
    solve_right,
)
from .heckelocal import classify_rel_rational


def _pf(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@dataclass(frozen=True)
class GarrettTriple:
    m: int
    n: int
    d: int
    d_prime: int
    r: int
    N1: int
    N2: int
    D1: int
    D2: int

    def __post_init__(self):
        if not (0 <= self.r <= min(self.m, self.n)):
            raise InadmissibleD("r out of range")
        u1, u2 = self.m - self.r, self.n - self.r
        if self.d not in admissible_d_values(self.m, u1, self.N1, self.D1):
            raise InadmissibleD(f"d={self.d} not admissible")
        if self.d_prime not in admissible_d_values(self.n, u2, self.N2, self.D2):
            raise InadmissibleD(f"d'={self.d_prime} not admissible")

    @property
    def u1(self) -> int:
        return self.m - self.r

    @property
    def u2(self) -> int:
        return self.n - self.r


def admissible_triples(m, n, N1, N2, D1, D2) -> list[GarrettTriple]:
    """All (d, d', r) allowed for the given ranks, levels and determinants."""
    out = []
    for r in range(min(m, n) + 1):
        for d in admissible_d_values(m, m - r, N1, D1):
            for dp in admissible_d_values(n, n - r, N2, D2):
                out.append(GarrettTriple(m, n, d, dp, r, N1, N2, D1, D2))
    return out


# ---------------------------------------------------------------------------
# The combined lattice and its two factors.
# ---------------------------------------------------------------------------


class CombinedLattice:
    """Orthogonal sum of two standard alternating lattices."""

    def __init__(self, T1, T2):
        self.T1 = tuple(T1)
        self.T2 = tuple(T2)
        self.m = len(self.T1)
        self.n = len(self.T2)
        self.L1 = standard_lattice(self.T1)
        self.L2 = standard_lattice(self.T2)
        self.L = standard_lattice(self.T1 + self.T2)
        s = self.m + self.n
        # column positions of the factor coordinates inside the sum
        self.cols1 = list(range(self.m)) + list(range(s, s + self.m))
        self.cols2 = list(range(self.m, s)) + list(range(s + self.m, 2 * s))
        self.N1, self.D1 = level_and_det(self.L1)
        self.N2, self.D2 = level_and_det(self.L2)
        # basis matrix in symplectic coordinates (e..e', v..v')
        self.E = Mat.diagonal([1] * s + list(self.T1) + list(self.T2))
        self.J = Mat.from_blocks([
            [Mat.zeros(s, s), Mat.identity(s)],
            [Mat.identity(s).scale(-1), Mat.zeros(s, s)],
        ])

    def x0_rows(self) -> Mat:
        """The span of all e-vectors, in lattice coordinates."""
        s = self.m + self.n
        return Mat([[1 if j == i else 0 for j in range(2 * s)] for i in range(s)])

    def project(self, rows: Mat, factor: int) -> Mat:
        cols = self.cols1 if factor == 1 else self.cols2
        picked = [[row[c] for c in cols] for row in rows.rows]
        return Mat(hnf_rows(picked))

    def embed(self, rows: Mat, factor: int) -> Mat:
        cols = self.cols1 if factor == 1 else self.cols2
        s2 = 2 * (self.m + self.n)
        out = []
        for row in rows.rows:
            v = [0] * s2
            for c, x in zip(cols, row):
                v[c] = x
            out.append(v)
        return Mat(out)


@dataclass
class IsotropicPair:
    """Projections of a maximal isotropic submodule, with the induced map."""

    X: Mat
    X1: Mat
    X2: Mat
    rad1: Mat
    rad2: Mat
    r: int
    phi: Mat            # matrix of the induced map on the standard frame
    T: Mat              # divisor frame of the first complement (size r)
    T_prime: Mat        # divisor frame of the second complement
    frame1: Mat | None = None   # rows c_1..c_r, g_1..g_r in factor-1 coords
    frame2: Mat | None = None


def _radical(rows: Mat, gram: Mat) -> Mat:
    if rows.nrows == 0:
        return rows
    pair = rows @ gram @ rows.transpose()
    K = left_kernel(pair)
    if K.nrows == 0:
        return Mat.zeros(0, rows.ncols)
    return Mat(hnf_rows([list(r) for r in (K @ rows).rows]))


def split_radical(L: AltLattice, X: Mat, Z: IsotropicSubmodule) -> tuple[Mat, Mat]:
    """Split X as Z orthogonal-sum X' where Z sits inside the radical of X."""
    if Z.rank == 0:
        return Z.generators, X
    pair = Z.generators @ L.gram @ X.transpose()
    if not pair.is_zero():
        raise NotContainedInRadical("Z does not pair to zero with X")
    inter = lattice_intersection(Z.generators, X)
    if inter != Mat(hnf_rows([list(r) for r in Z.generators.rows])):
        raise NotContainedInRadical("Z is not contained in X")
    _pairs, comp = adapt_to_isotropic(L, Z)
    Xp = lattice_intersection(X, comp.basis)
    # X = Z + X' with trivial intersection
    merged = Mat(hnf_rows([list(r) for r in Z.generators.rows]
                          + [list(r) for r in Xp.rows]))
    assert merged == X, "radical split failed to recover X"
    return Z.generators, Xp


def project_isotropic(comb: CombinedLattice, X: IsotropicSubmodule) -> IsotropicPair:
    """Projections, radicals, and the induced quotient isomorphism."""
    s = comb.m + comb.n
    Xrows = X.generators
    if X.rank != s:
        raise NotMaximal(f"X has rank {X.rank}, expected {s}")
    if not (Xrows @ comb.L.gram @ Xrows.transpose()).is_zero():
        raise NotIsotropic("X is not totally isotropic")

    X1 = comb.project(Xrows, 1)
    X2 = comb.project(Xrows, 2)
    rad1 = _radical(X1, comb.L1.gram)
    rad2 = _radical(X2, comb.L2.gram)
    # intersections with the factors agree with the radicals
    Z1 = lattice_intersection(Xrows, comb.embed(Mat.identity(2 * comb.m), 1))
    Z2 = lattice_intersection(Xrows, comb.embed(Mat.identity(2 * comb.n), 2))
    Z1f = comb.project(Z1, 1) if Z1.nrows else Mat.zeros(0, 2 * comb.m)
    Z2f = comb.project(Z2, 2) if Z2.nrows else Mat.zeros(0, 2 * comb.n)
    assert Z1f == rad1 and Z2f == rad2, "factor intersections differ from radicals"
    r2 = X1.nrows - rad1.nrows
    if r2 % 2 or (X2.nrows - rad2.nrows) != r2:
        raise NotMaximal("quotient ranks are inconsistent")
    r = r2 // 2
    if rad1.nrows != comb.m - r or rad2.nrows != comb.n - r:
        raise NotMaximal("radical ranks are inconsistent")

    if r == 0:
        return IsotropicPair(Xrows, X1, X2, rad1, rad2, 0,
                             Mat.zeros(0, 0), Mat.zeros(0, 0), Mat.zeros(0, 0))

    Zsub1 = IsotropicSubmodule.from_rows(comb.L1, [list(x) for x in rad1.rows]) \
        if rad1.nrows else IsotropicSubmodule(Mat.zeros(0, 2 * comb.m), 0)
    Zsub2 = IsotropicSubmodule.from_rows(comb.L2, [list(x) for x in rad2.rows]) \
        if rad2.nrows else IsotropicSubmodule(Mat.zeros(0, 2 * comb.n), 0)
    if rad1.nrows:
        _p1, comp1 = adapt_to_isotropic(comb.L1, Zsub1)
    else:
        comp1 = AltLattice(comb.L1.gram, basis=Mat.identity(2 * comb.m))
    if rad2.nrows:
        _p2, comp2 = adapt_to_isotropic(comb.L2, Zsub2)
    else:
        comp2 = AltLattice(comb.L2.gram, basis=Mat.identity(2 * comb.n))

    # X' = X meet (comp1 perp comp2); its projections have full rank 2r
    comp_comb = Mat([list(r_) for r_ in comb.embed(comp1.basis, 1).rows]
                    + [list(r_) for r_ in comb.embed(comp2.basis, 2).rows])
    Xp = lattice_intersection(Xrows, comp_comb)
    P1 = comb.project(Xp, 1)
    P2 = comb.project(Xp, 2)
    assert P1.nrows == 2 * r and P2.nrows == 2 * r

    # induced map phi on the rescaled standard frames of the complements
    pb1 = comp1.para_basis()
    pb2 = comp2.para_basis()
    base1 = pb1.transform @ comp1.basis       # rows c_1..c_r, g_1..g_r in L1 coords
    base2 = pb2.transform @ comp2.basis
    tau1 = pb1.divisors
    tau2 = pb2.divisors
    T = Mat.diagonal(list(tau1))
    Tp = Mat.diagonal(list(tau2))

    # phi(v) = pi_2 of the unique element of QX' projecting to v in factor 1
    Xp1 = Mat([[row[c] for c in comb.cols1] for row in Xp.rows])
    Xp2 = Mat([[row[c] for c in comb.cols2] for row in Xp.rows])

    def phi_of(v):
        lam = solve_right(Xp1.transpose(), v)
        assert lam is not None
        return tuple(sum(lam[k] * Xp2[k, j] for k in range(Xp2.nrows))
                     for j in range(2 * comb.n))

    # frame vectors of W: sigma1 sends c_j to x_j and g_j / tau_j to y_j;
    # sigma2 sends g'_j to x_j and c'_j to tau'_j y_j
    base2_inv = rational_inverse(base2.transpose())

    def sigma2_coords(w):
        c = base2_inv.apply_to(w)
        x = [c[r + i] for i in range(r)]
        y = [c[i] * tau2[i] for i in range(r)]
        return x + y

    cols = []
    for j in range(r):
        cols.append(sigma2_coords(phi_of(base1.rows[j])))
    for j in range(r):
        w = phi_of(base1.rows[r + j])
        cols.append([Fraction(x, tau1[j]) for x in sigma2_coords(w)])
    F = Mat(cols).transpose()
    Jr = Mat.from_blocks([[Mat.zeros(r, r), Mat.identity(r)],
                          [Mat.identity(r).scale(-1), Mat.zeros(r, r)]])
    assert is_symplectic(F, Jr), "induced map is not symplectic on the frame"
    return IsotropicPair(Xrows, X1, X2, rad1, rad2, r, F, T, Tp, base1, base2)


def _frame_phi(pair: IsotropicPair):
    """The induced map as a function on the first factor, through the frames.

    The first projection splits as (complement part) + (radical part); the
    map kills the radical and sends complement vectors through the stored
    frame matrix.  Returns a function producing rational factor-2 rows.
    """
    r = pair.r
    tau1 = [pair.T[i, i] for i in range(r)]
    tau2 = [pair.T_prime[i, i] for i in range(r)]
    split = Mat([list(x) for x in pair.frame1.rows]
                + [list(x) for x in pair.rad1.rows]).transpose()

    def phi(u):
        coeff = solve_right(split, u)
        assert coeff is not None
        alpha = coeff[:2 * r]
        # frame coordinates of the image: x-part then y-part
        wx = [alpha[i] for i in range(r)]
        wy = [alpha[r + i] * tau1[i] for i in range(r)]
        img = pair.phi.apply_to(tuple(wx + wy))
        # back through the second frame: x_i -> g'_i, y_i -> c'_i / tau'_i
        out = [Fraction(0)] * pair.frame2.ncols
        for i in range(r):
            for j in range(pair.frame2.ncols):
                out[j] += img[i] * pair.frame2[r + i, j]
                out[j] += Fraction(img[r + i], tau2[i]) * pair.frame2[i, j]
        return tuple(out)

    return phi


def rebuild_from_pair(comb: CombinedLattice, pair: IsotropicPair) -> Mat:
    """Converse construction: the graph of the induced map over the radicals."""
    X1, X2 = pair.X1, pair.X2
    k1, k2 = X1.nrows, X2.nrows
    if pair.r == 0:
        rows = [list(x) for x in comb.embed(X1, 1).rows] \
             + [list(x) for x in comb.embed(X2, 2).rows]
        return Mat(hnf_rows(rows))
    phi = _frame_phi(pair)
    # graph condition: complement component of w equals phi(u); since the
    # second projection splits off its radical, compare after subtracting
    # radical parts, i.e. phi(u) - w must lie in the span of rad2
    delta = [list(phi(X1.rows[i])) for i in range(k1)]
    eps = [[-x for x in X2.rows[i]] for i in range(k2)]
    radspan = [list(x) for x in pair.rad2.rows]
    stacked = Mat(delta + eps + radspan)
    den = 1
    for row in stacked.rows:
        for x in row:
            if isinstance(x, Fraction):
                den = den * x.denominator // __import__("math").gcd(den, x.denominator)
    K = left_kernel(Mat([[x * den for x in row] for row in stacked.rows]))
    rows = []
    for coeff in K.rows:
        u = [sum(coeff[i] * X1[i, j] for i in range(k1)) for j in range(2 * comb.m)]
        w = [sum(coeff[k1 + i] * X2[i, j] for i in range(k2)) for j in range(2 * comb.n)]
        full = [0] * (2 * (comb.m + comb.n))
        for c, x in zip(comb.cols1, u):
            full[c] = x
        for c, x in zip(comb.cols2, w):
            full[c] += x
        rows.append(full)
    out = Mat(hnf_rows(rows))
    return out


# ---------------------------------------------------------------------------
# Representatives.
# ---------------------------------------------------------------------------


@dataclass
class GarrettRep:
    triple: GarrettTriple
    S1: Mat
    S2: Mat
    B: Mat
    T: Mat
    T_prime: Mat
    C: Mat
    full: Mat


def split_divisors(divisors, r: int, d: int) -> list[int]:
    """Reorder the divisor multiset so the last entries multiply to d and
    both segments keep their divisibility chains."""
    m = len(divisors)
    primes = set()
    for t in divisors:
        primes.update(_pf(t))
    tilde = [1] * m
    for p in sorted(primes):
        lp = sum(1 for t in divisors if t % p == 0)
        sp = 0
        dd = d
        while dd % p == 0:
            dd //= p
            sp += 1
        assert sp <= lp
        head = lp - sp
        for i in range(r - head, r):
            tilde[i] *= p
        for i in range(m - sp, m):
            tilde[i] *= p
    prod_all = 1
    for t in divisors:
        prod_all *= t
    prod_tilde = 1
    for t in tilde:
        prod_tilde *= t
    tail = 1
    for t in tilde[r:]:
        tail *= t
    assert prod_tilde == prod_all and tail == d
    return tilde


def garrett_representative(comb: CombinedLattice, triple: GarrettTriple,
                           B: Mat | None = None) -> GarrettRep:
    """The lower-unipotent coset representative attached to a triple and a
    Hecke block.  B defaults to the identity of size r."""
    m, n, r = triple.m, triple.n, triple.r
    d, dp = triple.d, triple.d_prime
    if (m, n) != (comb.m, comb.n):
        raise InadmissibleD("triple does not match the lattices")
    tilde1 = split_divisors(list(comb.T1), r, d)
    tilde2 = split_divisors(list(comb.T2), r, dp)
    T = Mat.diagonal(tilde1[:r])
    Tp = Mat.diagonal(tilde2[:r])
    if B is None:
        B = Mat.identity(r)
    if r == 0:
        B = Mat([])
    if r:
        if not B.is_integral():
            raise IntegralityViolation("B must be integral")
        M = T.inverse() @ B.transpose() @ Tp
        if not M.is_integral():
            raise IntegralityViolation("transpose integrality fails for B")
    S1 = cusp_matrix_S(comb.L1, triple.u1, d)
    S2 = cusp_matrix_S(comb.L2, triple.u2, dp)
    s = m + n
    mid = [[0] * s for _ in range(s)]
    if r:
        BtTp = B.transpose() @ Tp
        TpB = Tp @ B
        for i in range(r):
            for j in range(r):
                mid[i][m + j] = BtTp[i, j]
                mid[m + i][j] = TpB[i, j]
    Smat = Mat.from_blocks([[S1, Mat.zeros(m, n)], [Mat.zeros(n, m), S2]])
    Sinv = rational_inverse(Smat)
    C = Sinv.transpose() @ Mat(mid) @ Sinv
    assert C == C.transpose(), "representative block is not symmetric"
    full = Mat.from_blocks([[Mat.identity(s), Mat.zeros(s, s)],
                            [C, Mat.identity(s)]])
    if not is_symplectic(full, comb.J):
        raise IntegralityViolation("representative is not symplectic")
    act = comb.E @ full.transpose() @ rational_inverse(comb.E)
    if not act.is_integral():
        raise IntegralityViolation("representative does not preserve the lattice")
    return GarrettRep(triple, S1, S2, B, T, Tp, C, full)


def orbit_invariants(comb: CombinedLattice, g: Mat):
    """(d, d', r, local Hecke classes) of the coset of g.

    g is symplectic in the combined symplectic coordinates and must map the
    combined lattice onto itself.
    """
    if not is_symplectic(g, comb.J):
        raise NotStabilizing("g is not symplectic")
    act = comb.E @ g.transpose() @ rational_inverse(comb.E)
    if not act.is_integral():
        raise NotStabilizing("g does not preserve the combined lattice")
    Ximg = comb.x0_rows() @ act
    X = IsotropicSubmodule.from_rows(comb.L, [list(r) for r in Ximg.rows])
    pair = project_isotropic(comb, X)
    d = d_invariant(comb.L1, IsotropicSubmodule.from_rows(
        comb.L1, [list(r) for r in pair.rad1.rows])) if pair.rad1.nrows else 1
    dp = d_invariant(comb.L2, IsotropicSubmodule.from_rows(
        comb.L2, [list(r) for r in pair.rad2.rows])) if pair.rad2.nrows else 1
    classes = {}
    if pair.r:
        r = pair.r
        Jr = Mat.from_blocks([[Mat.zeros(r, r), Mat.identity(r)],
                              [Mat.identity(r).scale(-1), Mat.zeros(r, r)]])
        baseTp = Mat.diagonal([1] * r + [pair.T_prime[i, i] for i in range(r)])
        movT = Mat.diagonal([1] * r + [pair.T[i, i] for i in range(r)])
        mov = movT @ pair.phi.transpose()
        primes = set()
        for i in range(r):
            primes.update(_pf(pair.T[i, i]))
            primes.update(_pf(pair.T_prime[i, i]))
        # primes where the moved frame lattice differs from the base
        rel = mov @ rational_inverse(baseTp)
        for row in rel.rows:
            for x in row:
                if isinstance(x, Fraction):
                    primes.update(_pf(x.denominator))
        dd = rel.det()
        num = dd.numerator if isinstance(dd, Fraction) else dd
        primes.update(_pf(abs(num)))
        for p in sorted(primes):
            cls = classify_rel_rational(Jr, baseTp, mov, p)
            if cls.weight or cls.r_minus or cls.r_plus:
                classes[p] = cls
    return d, dp, pair.r, classes


# ---------------------------------------------------------------------------
# Numeric kernel identity.
# ---------------------------------------------------------------------------


def _np(M: Mat):
    return np.array([[float(x) for x in row] for row in M.rows], dtype=float)


def kernel_identity_check(rep: GarrettRep, z, w, tol: float = 1e-10) -> bool:
    """Compare the automorphy factor of the representative at iota(z, w)
    against the closed determinant of size r."""
    m, n, r = rep.triple.m, rep.triple.n, rep.triple.r
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    for M, size in ((z, m), (w, n)):
        if M.shape != (size, size) or not np.allclose(M, M.T, atol=1e-12):
            raise NotInHalfSpace("arguments must be symmetric of matching size")
        ev = np.linalg.eigvalsh(M.imag)
        if ev.min() < 0.5:
            raise NotInHalfSpace("imaginary part must have eigenvalues >= 1/2")
    s = m + n
    C = _np(rep.C)
    iota = np.zeros((s, s), dtype=complex)
    iota[:m, :m] = z
    iota[m:, m:] = w
    lhs = np.linalg.det(C @ iota + np.eye(s))
    if r == 0:
        return abs(lhs - 1.0) < tol
    S1i = np.linalg.inv(_np(rep.S1))
    S2i = np.linalg.inv(_np(rep.S2))
    zS = (S1i @ z @ S1i.T)[:r, :r]
    wS = (S2i @ w @ S2i.T)[:r, :r]
    Bn = _np(rep.B)
    Tpn = _np(rep.T_prime)
    rhs = np.linalg.det(np.eye(r) - Bn.T @ Tpn @ wS @ Tpn @ Bn @ zS)
    return abs(lhs - rhs) < tol


# ---------------------------------------------------------------------------
# Group elements for orbit tests.
# ---------------------------------------------------------------------------


def sp_generators_symplectic(T) -> list[Mat]:
    """Generators of the paramodular group on rescaled symplectic coordinates."""
    from .altlat import sp_generator_matrices
    m = len(T)
    E = Mat.diagonal([1] * m + list(T))
    Einv = rational_inverse(E)
    return [E @ g @ Einv for g in sp_generator_matrices(T)]


def embed_factor_pair(comb: CombinedLattice, g1: Mat, g2: Mat) -> Mat:
    """The element (g1, g2) of the product group inside the combined group."""
    m, n = comb.m, comb.n
    s = m + n
    rows = [[0] * (2 * s) for _ in range(2 * s)]
    pos1 = list(range(m)) + list(range(s, s + m))
    pos2 = list(range(m, s)) + list(range(s + m, 2 * s))
    for I, i in enumerate(pos1):
        for J, j in enumerate(pos1):
            rows[i][j] = g1[I, J]
    for I, i in enumerate(pos2):
        for J, j in enumerate(pos2):
            rows[i][j] = g2[I, J]
    return Mat(rows)
