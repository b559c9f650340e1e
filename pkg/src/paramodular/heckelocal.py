"""Local Hecke theory at a prime p for paramodular groups.

The standard lattice of shape (a, b) has a unimodular and b p-modular
hyperbolic planes.  Lattices commensurable with it are classified against it
by their elementary divisors in the lattice and in its dual; the invariant
tuple (r_minus, r_plus, mu) indexes the double cosets, with block-monomial
representative matrices.  Enumeration of neighbors and left cosets is by
brute force over sublattice/superlattice pairs at desk scale.

Internal representation: a lattice is (rows, k) meaning the row span of
p**(-k) * rows in the coordinates of the standard lattice basis
(e_1..e_n, f_1..f_n), where <e_i, f_i> = 1 for i <= a and p for i > a.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct

from .approx import sl_lift
from .errors import (
    DimensionMismatch,
    IncompatibleLocals,
    InvalidInvariant,
    NotElementary,
    NotIsometric,
    ScaleLimit,
)
from .exactmat import Mat, hnf_rows, smith_divisors

# ---------------------------------------------------------------------------
# Shapes, invariant tuples, lattices.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalShape:
    p: int
    a: int
    b: int

    def __post_init__(self):
        if self.p < 2 or self.a < 0 or self.b < 0 or self.a + self.b < 1:
            raise InvalidInvariant("bad shape")

    @property
    def n(self) -> int:
        return self.a + self.b

    def gram_rows(self) -> list[list[int]]:
        """Gram of the standard lattice on its own basis."""
        n, p = self.n, self.p
        g = [[0] * (2 * n) for _ in range(2 * n)]
        for i in range(n):
            t = 1 if i < self.a else p
            g[i][n + i] = t
            g[n + i][i] = -t
        return g


@dataclass(frozen=True)
class LocalDoubleCoset:
    shape: LocalShape
    r_minus: int
    r_plus: int
    mu: tuple[int, ...]

    def __post_init__(self):
        a, b, n = self.shape.a, self.shape.b, self.shape.n
        rm, rp, mu = self.r_minus, self.r_plus, self.mu
        if len(mu) != n:
            raise InvalidInvariant("mu must have one entry per plane")
        if not (0 <= rm <= a and 0 <= rp <= b):
            raise InvalidInvariant("r_minus/r_plus out of range")
        segs = [mu[:rm], mu[rm:a], mu[a:a + rp], mu[a + rp:]]
        if any(x < 1 for x in segs[0]) or any(x < 0 for x in mu):
            raise InvalidInvariant("first segment needs mu >= 1")
        for seg in segs:
            if any(seg[i] > seg[i + 1] for i in range(len(seg) - 1)):
                raise InvalidInvariant("segments must be weakly increasing")

    @property
    def a_target(self) -> int:
        return self.shape.a - self.r_minus + self.r_plus

    @property
    def b_target(self) -> int:
        return self.shape.b - self.r_plus + self.r_minus

    @property
    def weight(self) -> int:
        return sum(self.mu)


@dataclass(frozen=True)
class LocalLattice:
    """Public form: columns are generators in standard-lattice coordinates."""

    basis: Mat

    def to_internal(self, p: int) -> tuple[list[list[int]], int]:
        cols = self.basis.transpose()
        k = 0
        for row in cols.rows:
            for x in row:
                if isinstance(x, Fraction):
                    d = x.denominator
                    e = 0
                    while d % p == 0:
                        d //= p
                        e += 1
                    if d != 1:
                        raise NotElementary("denominators must be p-powers")
                    k = max(k, e)
        rows = [[int(x * p**k) for x in row] for row in cols.rows]
        return _normalize(rows, k, p)

    @classmethod
    def from_internal(cls, rows: list[list[int]], k: int, p: int) -> "LocalLattice":
        q = Fraction(1, p**k)
        return cls(Mat([[x * q for x in row] for row in rows]).transpose())


def _normalize(rows, k, p):
    rows = hnf_rows(rows)
    while k > 0 and all(x % p == 0 for r in rows for x in r):
        rows = [[x // p for x in r] for r in rows]
        k -= 1
    return rows, k


def _key(rows, k):
    return (k, tuple(tuple(r) for r in rows))


def _adjugate(rows):
    n = len(rows)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[rows[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            adj[j][i] = (-1) ** (i + j) * _det_int(minor)
    return adj


def _det_int(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    tot = 0
    for j in range(n):
        if rows[0][j]:
            minor = [r[:j] + r[j + 1:] for r in rows[1:]]
            tot += (-1) ** j * rows[0][j] * _det_int(minor)
    return tot


def _matmul_int(A, B):
    Bt = list(zip(*B))
    return [[sum(x * y for x, y in zip(row, col)) for col in Bt] for row in A]


def _vp(x: int, p: int) -> int:
    if x == 0:
        raise ValueError("vp(0)")
    e = 0
    while x % p == 0:
        x //= p
        e += 1
    return e


# ---------------------------------------------------------------------------
# Classification of a pair (base lattice, moving lattice).
# ---------------------------------------------------------------------------


def _exponents(coord_rows, extra_scale: int, p: int, strict=True) -> list[int]:
    """v_p of the elementary divisors of an integer coordinate matrix,
    shifted by extra_scale; in strict mode divisors must be pure p-powers."""
    divs = smith_divisors([list(r) for r in coord_rows])
    if len(divs) != len(coord_rows):
        raise NotIsometric("coordinate matrix is singular")
    out = []
    for d in divs:
        e = _vp(d, p)
        if strict and d != p**e:
            raise NotElementary("lattice is not p-commensurable")
        out.append(e + extra_scale)
    return out


def _recover(a: int, b: int, expA: list[int], expB: list[int]):
    """Solve for the slot data (alphaU, betaU, alphaP, betaP) per scale.

    expA are the exponents of the moving lattice in the base lattice, expB in
    its dual.  Returns (r_minus, r_plus, mu) with mu in slot order.
    """
    n = a + b
    from collections import Counter
    A = Counter(expA)
    B = Counter(expB)
    vmax = max([abs(v) for v in expA + expB], default=0) + 1
    aU = {v: 0 for v in range(vmax + 3)}
    bU = dict(aU)
    aP = dict(aU)
    bP = dict(aU)
    for v in range(vmax, 0, -1):
        aP[v] = A[-(v + 1)] - aU[v + 2] - bU[v + 1] - bP[v + 1]
        bP[v] = B[v + 1] - aU[v + 1] - bU[v + 1] - aP[v]
        bU[v] = B[-v] - aU[v + 1] - aP[v] - bP[v + 1]
        aU[v] = A[v] - bU[v] - aP[v] - bP[v]
        if min(aP[v], bP[v], bU[v], aU[v]) < 0:
            raise NotIsometric("inconsistent elementary divisors")
    aP[0] = A[-1] - aU[2] - bU[1] - bP[1]
    t = B[1] - aU[1] - bU[1] - aP[0]
    if t < 0 or t % 2:
        raise NotIsometric("inconsistent elementary divisors")
    bP[0] = t // 2
    t = B[0] - aU[1] - aP[0] - bP[1]
    if t < 0 or t % 2:
        raise NotIsometric("inconsistent elementary divisors")
    bU[0] = t // 2
    aU[0] = 0
    if aP[0] < 0:
        raise NotIsometric("inconsistent elementary divisors")
    # consistency of the zero level and the shape
    if A[0] != 2 * bU[0] + aP[0] + 2 * bP[0] + aU[1]:
        raise NotIsometric("inconsistent elementary divisors")
    listU1 = sorted(v for v in range(1, vmax + 1) for _ in range(aU[v]))
    listUU = sorted(v for v in range(0, vmax + 1) for _ in range(bU[v]))
    listPU = sorted(v for v in range(0, vmax + 1) for _ in range(aP[v]))
    listPP = sorted(v for v in range(0, vmax + 1) for _ in range(bP[v]))
    if len(listU1) + len(listUU) != a or len(listPU) + len(listPP) != b:
        raise NotIsometric("shape mismatch")
    mu = tuple(listU1 + listUU + listPU + listPP)
    return len(listU1), len(listPU), mu


def classify_pair(shape: LocalShape, L) -> LocalDoubleCoset:
    """Invariant tuple of L against the standard lattice of the shape."""
    rows, k = L.to_internal(shape.p) if isinstance(L, LocalLattice) else L
    gram = shape.gram_rows()
    p = shape.p
    H = _matmul_int(_matmul_int(rows, gram), list(map(list, zip(*rows))))
    sc = p ** (2 * k)
    if any(x % sc for row in H for x in row):
        raise NotElementary("lattice is not integral")
    H = [[x // sc for x in row] for row in H]
    for d in smith_divisors([r[:] for r in H]):
        if d not in (1, p):
            raise NotElementary("lattice has level divisible by p^2")
    return _classify_internal(p, gram,
                              [[1 if i == j else 0 for j in range(2 * shape.n)]
                               for i in range(2 * shape.n)], 0, rows, k,
                              (shape.a, shape.b))


def _classify_internal(p, gram_base_amb, base_rows, base_k, mov_rows, mov_k,
                       shape_ab=None, strict=True):
    """Classify the moving lattice against an arbitrary base lattice.

    gram_base_amb is the ambient Gram (standard-lattice coordinates); both
    lattices are (rows, k) in those coordinates.  With strict=False only the
    p-parts matter, so globally defined lattices can be classified locally.
    """
    n2 = len(base_rows)
    n = n2 // 2
    H = _matmul_int(_matmul_int(base_rows, gram_base_amb), list(map(list, zip(*base_rows))))
    sc = p ** (2 * base_k)
    if any(x % sc for row in H for x in row):
        raise NotElementary("base lattice is not integral")
    H = [[x // sc for x in row] for row in H]
    detH = _det_int(H)
    e2b = _vp(abs(detH), p)
    if (strict and abs(detH) != p**e2b) or e2b % 2:
        raise NotElementary("base lattice determinant is not an even p-power")
    b = e2b // 2
    a = n - b
    if shape_ab is not None and (a, b) != shape_ab:
        raise NotIsometric("base lattice does not match the shape")

    adjR = _adjugate(base_rows)
    detR = _det_int(base_rows)
    vdet = _vp(abs(detR), p)
    if strict and abs(detR) != p**vdet:
        raise NotElementary("base lattice is not p-commensurable")
    sgn = 1 if detR > 0 else -1
    # coordinates of the moving lattice in the base: mov @ base^{-1}
    X = _matmul_int(mov_rows, adjR)
    if sgn < 0:
        X = [[-x for x in row] for row in X]
    expA = _exponents(X, base_k - mov_k - vdet, p, strict)
    # dual of the base: p^{-(base_k + 2b)} * rowspan(adj(H) @ base_rows)
    dual_rows = _matmul_int(_adjugate(H), base_rows)
    adjD = _adjugate(dual_rows)
    detD = _det_int(dual_rows)
    vdetD = _vp(abs(detD), p)
    if strict and abs(detD) != p**vdetD:
        raise NotElementary("dual coordinates are not p-powers")
    Xd = _matmul_int(mov_rows, adjD)
    if detD < 0:
        Xd = [[-x for x in row] for row in Xd]
    expB = _exponents(Xd, (base_k + 2 * b) - mov_k - vdetD, p, strict)
    rm, rp, mu = _recover(a, b, expA, expB)
    return LocalDoubleCoset(LocalShape(p, a, b), rm, rp, mu)


def _scale_to_int(M: Mat, p: int) -> tuple[list[list[int]], int]:
    """Clear denominators of a rational row matrix; the returned scale k is
    the p-part of the factor used, so the result represents the same
    p-local lattice as M."""
    den = 1
    for row in M.rows:
        for x in row:
            if isinstance(x, Fraction):
                den = den * x.denominator // __import__("math").gcd(den, x.denominator)
    rows = [[int(x * den) for x in row] for row in M.rows]
    return rows, _vp(den, p) if den > 1 else 0


def classify_rel_rational(gram_amb: Mat, base: Mat, mov: Mat, p: int,
                          shape_ab=None) -> LocalDoubleCoset:
    """p-local class of the lattice spanned by the rows of mov against the
    lattice spanned by the rows of base; gram_amb is the ambient Gram."""
    base_rows, kb = _scale_to_int(base, p)
    mov_rows, km = _scale_to_int(mov, p)
    return _classify_internal(p, [list(r) for r in gram_amb.rows],
                              base_rows, kb, mov_rows, km, shape_ab, strict=False)


# ---------------------------------------------------------------------------
# Representatives.
# ---------------------------------------------------------------------------


def monomial_block(dc: LocalDoubleCoset) -> Mat:
    """The block B of the representative diag(B, tB^{-1}), on standard
    symplectic coordinates; row i carries p**mu_i in the column matching the
    slot bookkeeping of the invariant tuple."""
    a, b, n, p = dc.shape.a, dc.shape.b, dc.shape.n, dc.shape.p
    rm, rp, mu = dc.r_minus, dc.r_plus, dc.mu
    at = dc.a_target
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        if i < rm:
            j = at + i
        elif i < a:
            j = rp + (i - rm)
        elif i < a + rp:
            j = i - a
        else:
            j = i
        rows[i][j] = p ** mu[i]
    return Mat(rows)


def representative_matrix(dc: LocalDoubleCoset) -> Mat:
    B = monomial_block(dc)
    n = B.nrows
    Binvt = B.inverse().transpose()
    Z = Mat.zeros(n, n)
    return Mat.from_blocks([[B, Z], [Z, Binvt]])


def representative_lattice(dc: LocalDoubleCoset) -> tuple[list[list[int]], int]:
    """The orbit-representative lattice, internal form, base-lattice coords."""
    a, n, p = dc.shape.a, dc.shape.n, dc.shape.p
    rm, rp, mu = dc.r_minus, dc.r_plus, dc.mu
    k = max([mu[i] for i in range(rm, a)] + [mu[i] - 1 for i in range(rm)]
            + [mu[i] + 1 for i in range(a, a + rp)] + [mu[i] for i in range(a + rp, n)]
            + [0])
    rows = []
    for i in range(n):
        e = [0] * (2 * n)
        f = [0] * (2 * n)
        if i < rm:
            ee, ff = mu[i], -mu[i] + 1
        elif i < a:
            ee, ff = mu[i], -mu[i]
        elif i < a + rp:
            ee, ff = mu[i], -mu[i] - 1
        else:
            ee, ff = mu[i], -mu[i]
        e[i] = p ** (ee + k)
        f[n + i] = p ** (ff + k)
        rows.append(e)
        rows.append(f)
    return _normalize(rows, k, p)


def matrix_image_lattice(dc: LocalDoubleCoset, D: Mat) -> tuple[list[list[int]], int]:
    """Image of the target standard lattice under a symplectic matrix D,
    converted to base-lattice coordinates (internal form).

    D acts on column vectors in standard symplectic coordinates; the target
    standard lattice has the shape (a_target, b_target) of dc.
    """
    p = dc.shape.p
    n = dc.shape.n
    scal_t = [1] * dc.a_target + [p] * dc.b_target
    scal_s = [1] * dc.shape.a + [p] * dc.shape.b
    Et = Mat.diagonal([1] * n + scal_t)
    Es_inv = Mat.diagonal([1] * n + [Fraction(1, s) for s in scal_s])
    img = Et @ D.transpose() @ Es_inv
    k = 0
    for row in img.rows:
        for x in row:
            if isinstance(x, Fraction):
                d = x.denominator
                e = 0
                while d % p == 0:
                    d //= p
                    e += 1
                if d != 1:
                    raise NotElementary("image has a non-p denominator")
                k = max(k, e)
    rows = [[int(x * p**k) for x in row] for row in img.rows]
    return _normalize(rows, k, p)


def transpose_integrality(B: Mat, T: Mat, Tp: Mat) -> bool:
    """Whether T^{-1} tB T' is integral (T the target scales, T' the source)."""
    if B.nrows != T.nrows or B.ncols != Tp.nrows:
        raise DimensionMismatch("size mismatch")
    M = T.inverse() @ B.transpose() @ Tp
    return M.is_integral()


def shape_diag(shape: LocalShape) -> Mat:
    return Mat.diagonal([1] * shape.a + [shape.p] * shape.b)


def target_diag(dc: LocalDoubleCoset) -> Mat:
    return Mat.diagonal([1] * dc.a_target + [dc.shape.p] * dc.b_target)


# ---------------------------------------------------------------------------
# Enumeration of invariant tuples with equal source and target shapes.
# ---------------------------------------------------------------------------


def _weakly_increasing(length, total, minval):
    if length == 0:
        if total == 0:
            yield ()
        return
    def rec(remaining, length, lo):
        if length == 1:
            if remaining >= lo:
                yield (remaining,)
            return
        for first in range(lo, remaining + 1):
            for rest in rec(remaining - first, length - 1, first):
                yield (first,) + rest
    yield from rec(total, length, minval)


def enumerate_Tpj(shape: LocalShape, j: int) -> list[LocalDoubleCoset]:
    """All invariant tuples with equal shapes and total exponent j."""
    a, b = shape.a, shape.b
    out = []
    for r in range(min(a, b) + 1):
        lens = (r, a - r, r, b - r)
        mins = (1, 0, 0, 0)
        for split in _compositions(j, 4):
            for segs in iproduct(*[_weakly_increasing(lens[t], split[t], mins[t])
                                   for t in range(4)]):
                mu = segs[0] + segs[1] + segs[2] + segs[3]
                out.append(LocalDoubleCoset(shape, r, r, mu))
    out.sort(key=lambda d: (d.r_minus, d.mu))
    return out


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# ---------------------------------------------------------------------------
# Neighbors and coset enumeration.
# ---------------------------------------------------------------------------


def neighbor_count_formula(p: int, n1: int, n2: int) -> int:
    """Closed count of index-p neighbors for n1 unimodular and n2 p-modular
    hyperbolic planes."""
    q1 = p ** (2 * n1) - 1
    q2 = p ** (2 * n2) - 1
    num = p * q1 * q2 * 1 + p * (p - 1) * (p ** (2 * n1)) * q2 + p * (p - 1) * (p ** (2 * n2)) * q1
    val = num // ((p - 1) ** 2)
    assert num % ((p - 1) ** 2) == 0
    return val


def neighbor_bounds_ok(p: int, n1: int, n2: int) -> bool:
    """The stated upper bounds on the neighbor count."""
    n = n1 + n2
    N = neighbor_count_formula(p, n1, n2)
    if p == 2:
        return N < 2 ** (2 * n + 2)
    if p == 3:
        return 4 * N < 5 * 3 ** (2 * n + 1)
    return N < p ** (2 * n + 1)


def _projective_vectors(dim, p):
    """One representative per line of F_p^dim, first nonzero entry 1."""
    for lead in range(dim):
        for tail in iproduct(range(p), repeat=dim - lead - 1):
            yield (0,) * lead + (1,) + tail


def _pairing_int(rows, gram):
    return _matmul_int(_matmul_int(rows, gram), list(map(list, zip(*rows))))


def _is_elementary(rows, k, p, gram, b_expected):
    """Integral with level dividing p, at the given expected p-modular count."""
    H = _pairing_int(rows, gram)
    sc = p ** (2 * k)
    if any(x % sc for row in H for x in row):
        return False
    if b_expected == len(rows) // 2:
        # all planes p-modular: every pairing divisible by p
        sc *= p
        if any(x % sc for row in H for x in row):
            return False
        return True
    if b_expected <= 1 or len(rows) <= 2:
        return True
    H = [[x // sc for x in row] for row in H]
    divs = smith_divisors(H)
    return all(d in (1, p) for d in divs)


def neighbors_of(rows, k, p, gram, b_shape, budget=10**7):
    """All lattices meeting the given one in index p on both sides."""
    n2 = len(rows)
    cand_count = ((p**n2 - 1) // (p - 1)) ** 2
    if cand_count > min(p ** (2 * n2), budget):
        raise ScaleLimit(f"{cand_count} candidates exceed the budget")
    out = {}
    for phi in _projective_vectors(n2, p):
        piv = next(i for i in range(n2) if phi[i])
        inv = pow(phi[piv], -1, p)
        sub = []
        for i in range(n2):
            if i == piv:
                continue
            c = (phi[i] * inv) % p
            sub.append([rows[i][t] - c * rows[piv][t] for t in range(n2)])
        sub.append([p * x for x in rows[piv]])
        # index-p superlattices of sub, excluding the original lattice
        for cvec in _projective_vectors(n2, p):
            piv2 = next(i for i in range(n2) if cvec[i])
            w = [sum(cvec[i] * sub[i][t] for i in range(n2)) for t in range(n2)]
            cand = [r[:] for i, r in enumerate(sub) if i != piv2]
            cand = [[p * x for x in r] for r in cand]
            cand.append(w)
            ck = k + 1
            cand, ck = _normalize(cand, ck, p)
            key = _key(cand, ck)
            if key in out:
                continue
            if (cand, ck) == (rows, k) or key == _key(rows, k):
                continue
            if not _is_elementary(cand, ck, p, gram, b_shape):
                continue
            out[key] = (cand, ck)
    return out


def standard_internal(shape: LocalShape):
    n2 = 2 * shape.n
    return [[1 if i == j else 0 for j in range(n2)] for i in range(n2)], 0


def enumerate_neighbors(shape: LocalShape, budget=10**7) -> list[LocalLattice]:
    rows, k = standard_internal(shape)
    found = neighbors_of(rows, k, shape.p, shape.gram_rows(), shape.b, budget)
    return [LocalLattice.from_internal(r, kk, shape.p)
            for (r, kk) in (found[key] for key in sorted(found))]


_BALL_CACHE: dict = {}


def ball(shape: LocalShape, j: int, budget=10**7):
    """Lattices within j neighbor steps, with their index exponent.

    Returns dict key -> (rows, k, index_exponent) where the exponent e means
    the intersection with the standard lattice has index p**e on both sides.
    Results are cached per (shape, j); entries are never mutated by callers.
    """
    ck = (shape, j, budget)
    if ck in _BALL_CACHE:
        return _BALL_CACHE[ck]
    p = shape.p
    gram = shape.gram_rows()
    rows0, k0 = standard_internal(shape)
    seen = {_key(rows0, k0): (rows0, k0)}
    frontier = [(rows0, k0)]
    for _ in range(j):
        nxt = []
        for rows, k in frontier:
            for key, (r, kk) in neighbors_of(rows, k, p, gram, shape.b, budget).items():
                if key not in seen:
                    seen[key] = (r, kk)
                    nxt.append((r, kk))
        frontier = nxt
    out = {}
    for key, (r, kk) in seen.items():
        out[key] = (r, kk, _index_exponent(r, kk, p))
    _BALL_CACHE[ck] = out
    return out


def _index_exponent(rows, k, p):
    divs = smith_divisors([list(r) for r in rows])
    return sum(max(_vp(d, p) - k, 0) for d in divs)


def left_cosets(dc: LocalDoubleCoset, budget=10**7) -> list[LocalLattice]:
    """All lattices in the orbit of the representative of dc."""
    if dc.a_target != dc.shape.a or dc.b_target != dc.shape.b:
        raise InvalidInvariant("left cosets require equal source and target shapes")
    j = dc.weight
    shape = dc.shape
    out = []
    allb = ball(shape, j, budget)
    for key in sorted(allb):
        rows, k, e = allb[key]
        if e != j:
            continue
        got = _classify_internal(shape.p, shape.gram_rows(),
                                 *standard_internal(shape), rows, k,
                                 (shape.a, shape.b))
        if (got.r_minus, got.r_plus, got.mu) == (dc.r_minus, dc.r_plus, dc.mu):
            out.append(LocalLattice.from_internal(rows, k, shape.p))
    return out


def coset_partition(shape: LocalShape, j: int, budget=10**7):
    """Partition of all index-p**j lattices by invariant tuple."""
    gram = shape.gram_rows()
    base = standard_internal(shape)
    parts: dict[LocalDoubleCoset, list] = {}
    allb = ball(shape, j, budget)
    for key in sorted(allb):
        rows, k, e = allb[key]
        if e != j:
            continue
        dc = _classify_internal(shape.p, gram, *base, rows, k, (shape.a, shape.b))
        parts.setdefault(dc, []).append((rows, k))
    return parts


def hecke_product(shape: LocalShape, i: int, j: int, budget=10**7):
    """Structure constants of T(p^i) T(p^j) as {double coset: multiplicity}.

    The multiplicity of a target class is the number of intermediate
    lattices M at index exponent i from the standard lattice such that a
    fixed representative of the class sits at exponent j from M.
    """
    p = shape.p
    gram = shape.gram_rows()
    base_rows, base_k = standard_internal(shape)
    mids = [(rows, k) for (rows, k, e) in ball(shape, i, budget).values() if e == i]
    out: dict[LocalDoubleCoset, int] = {}
    # a product lattice can sit at any index exponent up to i + j
    targets = [dc for e in range(i + j + 1) for dc in enumerate_Tpj(shape, e)]
    for dc in targets:
        L0_rows, L0_k = representative_lattice(dc)
        mult = 0
        for rows, k in mids:
            try:
                got = _classify_internal(p, gram, rows, k, L0_rows, L0_k)
            except (NotElementary, NotIsometric):
                continue
            if got.weight == j and got.r_minus == got.r_plus and \
               (got.shape.a, got.shape.b) == (shape.a, shape.b) and \
               got.a_target == shape.a:
                mult += 1
        if mult:
            out[dc] = mult
    return out


# ---------------------------------------------------------------------------
# Global assembly.
# ---------------------------------------------------------------------------


def factor_Tm(T: Mat, m: int) -> list[tuple[int, int]]:
    """Prime factorization of m, the recipe for assembling T(m)."""
    out = []
    d = 2
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            out.append((d, e))
        d += 1
    if m > 1:
        out.append((m, 1))
    return out


def _shape_of_diag(T: Mat, p: int) -> tuple[int, int]:
    n = T.nrows
    a = sum(1 for i in range(n) if T[i, i] % p)
    return a, n - a


def global_representative(T: Mat, Tp: Mat, locals_: dict[int, LocalDoubleCoset]) -> Mat:
    """Integer block B of a global double-coset representative.

    T and Tp are square-free elementary-divisor diagonal matrices; Tp is the
    side whose standard lattice the local tuples classify against.  The
    result B has det a positive integer, satisfies the transpose
    integrality condition against (T, Tp), and matches each local monomial
    pattern modulo a high power of its prime.
    """
    n = T.nrows
    if Tp.nrows != n:
        raise IncompatibleLocals("sizes of T and T' differ")
    primes = set()
    for i in range(n):
        for q, _ in factor_Tm(T, T[i, i]):
            primes.add(q)
        for q, _ in factor_Tm(Tp, Tp[i, i]):
            primes.add(q)
    primes |= set(locals_)
    for p in sorted(primes):
        src = _shape_of_diag(Tp, p)
        tgt = _shape_of_diag(T, p)
        if p in locals_:
            dc = locals_[p]
            if dc.shape.p != p:
                raise IncompatibleLocals("local prime mismatch")
            if (dc.shape.a, dc.shape.b) != src:
                raise IncompatibleLocals(f"local shape at {p} does not match T'")
            if (dc.a_target, dc.b_target) != tgt:
                raise IncompatibleLocals(f"local target at {p} does not match T")
        elif src != tgt:
            raise IncompatibleLocals(f"missing local datum at {p} where T, T' differ")
    work = {p: locals_[p] for p in locals_ if locals_[p].weight or
            (locals_[p].r_minus or locals_[p].r_plus) or
            _shape_of_diag(T, p) != _shape_of_diag(Tp, p)}
    for p in sorted(primes - set(work)):
        if _shape_of_diag(T, p) != _shape_of_diag(Tp, p):
            sh = LocalShape(p, *_shape_of_diag(Tp, p))
            raise IncompatibleLocals(f"missing local datum at {p}")
    if not work:
        return Mat.identity(n)

    m_total = 1
    for p, dc in work.items():
        m_total *= p ** dc.weight
    # entry exponents per prime and per row
    exps: dict[int, list[int]] = {}
    cols: dict[int, list[int]] = {}
    for p, dc in work.items():
        Bp = monomial_block(dc)
        exps[p] = []
        cols[p] = []
        for i in range(n):
            jcol = next(j for j in range(n) if Bp[i, j])
            exps[p].append(_vp(Bp[i, jcol], p))
            cols[p].append(jcol)
    den = [1] * n
    for q in work:
        for i in range(n):
            den[i] *= q ** exps[q][i]
    targets = {}
    for p, dc in work.items():
        jp = dc.weight
        kp = 2 * (jp + max(dc.mu, default=0)) + 3
        mod = p ** kp
        rows = [[0] * n for _ in range(n)]
        for i in range(n):
            # local pattern scaled by m/p^j on row 0 to align determinants,
            # then by 1/den_i to land in SL_n(Z_p); both factors are p-units
            num_unit = (m_total // p**jp) if i == 0 else 1
            den_unit = den[i] // p ** exps[p][i]
            rows[i][cols[p][i]] = num_unit * pow(den_unit, -1, mod) % mod
        detU = Mat(rows).det() % mod
        if detU == mod - 1:
            rows[0][cols[p][0]] = (-rows[0][cols[p][0]]) % mod
        elif detU != 1:
            raise IncompatibleLocals("local determinant alignment failed")
        targets[mod] = Mat(rows)
    A = sl_lift(targets, n)
    B = Mat.diagonal(den) @ A
    # fix the sign flips used for the determinant: flipping row 0 of a local
    # pattern is a unit operation inside the local group, so B is still a
    # representative; verify the integrality contract
    if not B.is_integral():
        raise IncompatibleLocals("lift failed to be integral")
    if not transpose_integrality(B, T, Tp):
        raise IncompatibleLocals("transpose integrality failed")
    return B


def _perm_sign_cols(cols):
    sign = 1
    for i in range(len(cols)):
        for j in range(i + 1, len(cols)):
            if cols[i] > cols[j]:
                sign = -sign
    return sign
