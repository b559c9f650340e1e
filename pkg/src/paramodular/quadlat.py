"""Positive definite even lattices: short vectors, isometries, automorphism
orders, modular sublattices, and chains of nested modular lattices.

Grams are stored as the even matrix of the doubled form, so Q(x) is half the
matrix value and all entries stay integral.  Short-vector enumeration has an
exact pure-Python reference path and a chunked numpy path for bulk work; both
filter candidates with exact integer arithmetic, the floating point part only
produces a superset.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd, sqrt

import numpy as np

from .errors import (
    NotEven,
    NotPositiveDefinite,
    ScaleLimit,
)
from .exactmat import Mat, hnf_rows, rational_inverse, solve_right


class QuadLattice:
    """Even positive definite lattice, given by the doubled Gram matrix."""

    def __init__(self, gram: Mat):
        if not gram.is_square() or not gram.is_integral():
            raise NotPositiveDefinite("Gram must be square and integral")
        n = gram.nrows
        for i in range(n):
            if gram[i, i] % 2:
                raise NotEven("diagonal of the doubled Gram must be even")
            for j in range(i):
                if gram[i, j] != gram[j, i]:
                    raise NotPositiveDefinite("Gram must be symmetric")
        # positive definiteness via leading principal minors
        for k in range(1, n + 1):
            if gram.submatrix(0, k, 0, k).det() <= 0:
                raise NotPositiveDefinite("form is not positive definite")
        self.gram = gram
        self.rank = n

    def __repr__(self):
        return f"QuadLattice(rank={self.rank}, disc={self.disc()})"

    def q(self, x) -> int:
        g = self.gram
        n = self.rank
        tot = 0
        for i in range(n):
            if x[i]:
                tot += x[i] * sum(g[i, j] * x[j] for j in range(n))
        assert tot % 2 == 0
        return tot // 2

    def bilinear(self, x, y) -> int:
        g = self.gram
        n = self.rank
        return sum(x[i] * sum(g[i, j] * y[j] for j in range(n))
                   for i in range(n) if x[i])

    def disc(self) -> int:
        return self.gram.det()

    def level(self) -> int:
        """Smallest N with N * Q(dual) integral."""
        inv = rational_inverse(self.gram)
        N = 1
        for row in inv.rows:
            for x in row:
                if isinstance(x, Fraction):
                    N = N * x.denominator // gcd(N, x.denominator)
        scaled = inv.scale(N)
        if any(scaled[i, i] % 2 for i in range(self.rank)):
            N *= 2
        return N

    def dual_basis(self) -> Mat:
        """Rows are a basis of the dual lattice in the coordinates of this one."""
        return rational_inverse(self.gram)

    def min_positive(self) -> int:
        """Minimum of Q on nonzero vectors."""
        b = 1
        while True:
            counts = shell_counts(self, b)
            for q in range(1, b + 1):
                if counts.get(q):
                    return q
            b *= 2


def invariants(L: QuadLattice):
    return L.level(), L.disc(), L.dual_basis()


def e8_lattice() -> QuadLattice:
    """Root lattice of rank 8 with doubled Gram the standard Cartan matrix."""
    c = [[0] * 8 for _ in range(8)]
    bonds = [(0, 2), (1, 3), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7)]
    for i in range(8):
        c[i][i] = 2
    for i, j in bonds:
        c[i][j] = c[j][i] = -1
    return QuadLattice(Mat(c))


# ---------------------------------------------------------------------------
# Short vector enumeration.
# ---------------------------------------------------------------------------


def _cholesky_fraction(gram: Mat):
    """Exact decomposition Q(x) = sum_i d_i (x_i + sum_{j>i} u_ij x_j)^2."""
    n = gram.nrows
    A = [[Fraction(gram[i, j], 2) for j in range(n)] for i in range(n)]
    U = [[Fraction(0)] * n for _ in range(n)]
    D = [Fraction(0)] * n
    for i in range(n):
        D[i] = A[i][i]
        if D[i] <= 0:
            raise NotPositiveDefinite("Cholesky pivot is not positive")
        for j in range(i + 1, n):
            U[i][j] = A[i][j] / D[i]
        for k in range(i + 1, n):
            for l in range(i + 1, n):
                A[k][l] -= D[i] * U[i][k] * U[i][l]
    return D, U


def short_vectors_exact(L: QuadLattice, bound: int, budget: int = 2 * 10**6):
    """All x with Q(x) <= bound, exact recursion, as {q: [tuples]}.

    Reference enumerator with Fraction arithmetic throughout; the float
    square root only seeds the interval, which is then adjusted exactly.
    """
    n = L.rank
    D, U = _cholesky_fraction(L.gram)
    out: dict[int, list[tuple[int, ...]]] = {}
    x = [0] * n
    seen = [0]

    def rec(i, remaining):
        if i < 0:
            q = L.q(x)
            out.setdefault(q, []).append(tuple(x))
            return
        center = sum(U[i][j] * x[j] for j in range(i + 1, n))
        rad2 = remaining / D[i]
        lo, hi = _int_interval(center, rad2)
        for v in range(lo, hi + 1):
            seen[0] += 1
            if seen[0] > budget:
                raise ScaleLimit("short vector budget exceeded")
            x[i] = v
            rec(i - 1, remaining - D[i] * (v + center) ** 2)
        x[i] = 0

    rec(n - 1, Fraction(bound))
    return out


def _int_interval(center: Fraction, rad2: Fraction) -> tuple[int, int]:
    """Exact integer solutions v of (v + center)^2 <= rad2, as [lo, hi]."""
    if rad2 < 0:
        return 1, 0
    s = sqrt(float(rad2)) + 1e-9
    c = -float(center)
    lo = floor(c - s) - 1
    hi = ceil(c + s) + 1
    while (lo + center) ** 2 <= rad2:
        lo -= 1
    while lo <= hi and (lo + center) ** 2 > rad2:
        lo += 1
    while (hi + center) ** 2 <= rad2:
        hi += 1
    while hi >= lo and (hi + center) ** 2 > rad2:
        hi -= 1
    return lo, hi


def fincke_pohst_chunks(gram: Mat, bound, chunk: int = 1 << 19,
                        budget: int = 500 * 10**6):
    """Yield int64 coordinate arrays covering all Q(x) <= bound.

    Floating point bounds include a slack margin, so the union is a superset;
    callers must filter with exact arithmetic.
    """
    n = gram.nrows
    G = np.array([[int(x) for x in row] for row in gram.rows], dtype=np.int64)
    A = G.astype(float) / 2.0
    D = np.zeros(n)
    U = np.eye(n)
    W = A.copy()
    for i in range(n):
        D[i] = W[i, i]
        if D[i] <= 0:
            raise NotPositiveDefinite("float Cholesky failed")
        U[i, i + 1:] = W[i, i + 1:] / D[i]
        W[i + 1:, i + 1:] -= D[i] * np.outer(U[i, i + 1:], U[i, i + 1:])
    eps = 1e-6 + 1e-9 * float(bound)
    B = float(bound) + eps
    total_seen = 0

    # states hold coordinates x_{n-1},...,x_{i+1} column-wise
    stack = [(np.zeros((1, 0), dtype=np.int64), np.zeros(1), n - 1)]
    while stack:
        X, partial, i = stack.pop()
        u = U[i, i + 1:][::-1]
        c = X @ u if X.shape[1] else np.zeros(len(X))
        s = np.sqrt(np.maximum(B - partial, 0.0) / D[i])
        lo = np.ceil(-c - s - 1e-9).astype(np.int64)
        hi = np.floor(-c + s + 1e-9).astype(np.int64)
        counts = np.maximum(hi - lo + 1, 0)
        total = int(counts.sum())
        if total == 0:
            continue
        total_seen += total
        if total_seen > budget:
            raise ScaleLimit("enumeration budget exceeded")
        idx = np.repeat(np.arange(len(X)), counts)
        offs = np.concatenate(([0], np.cumsum(counts)[:-1]))
        ranks = np.arange(total) - np.repeat(offs, counts)
        xs = lo[idx] + ranks
        Xn = np.concatenate([X[idx], xs[:, None]], axis=1)
        pn = partial[idx] + D[i] * (xs + c[idx]) ** 2
        if i == 0:
            yield Xn[:, ::-1]
            continue
        if len(Xn) > chunk:
            pieces = int(np.ceil(len(Xn) / chunk))
            for t in range(pieces):
                sl = slice(t * chunk, (t + 1) * chunk)
                stack.append((Xn[sl], pn[sl], i - 1))
        else:
            stack.append((Xn, pn, i - 1))


def shell_counts(L: QuadLattice, bound: int, budget: int = 500 * 10**6) -> dict[int, int]:
    """Exact counts {q: #vectors with Q = q} for q <= bound."""
    G = np.array([[int(x) for x in row] for row in L.gram.rows], dtype=np.int64)
    counts = np.zeros(bound + 1, dtype=np.int64)
    for X in fincke_pohst_chunks(L.gram, bound, budget=budget):
        qv = np.einsum("ij,jk,ik->i", X, G, X, optimize=True) // 2
        qv = qv[qv <= bound]
        counts += np.bincount(qv, minlength=bound + 1)
    return {q: int(counts[q]) for q in range(bound + 1) if counts[q]}


def short_vectors(L: QuadLattice, bound: int, budget: int = 500 * 10**6):
    """All x with Q(x) <= bound via the chunked enumerator, as {q: [tuples]}."""
    G = np.array([[int(x) for x in row] for row in L.gram.rows], dtype=np.int64)
    out: dict[int, list[tuple[int, ...]]] = {}
    for X in fincke_pohst_chunks(L.gram, bound, budget=budget):
        qv = np.einsum("ij,jk,ik->i", X, G, X, optimize=True) // 2
        keep = qv <= bound
        for row, q in zip(X[keep], qv[keep]):
            out.setdefault(int(q), []).append(tuple(int(v) for v in row))
    return out


# ---------------------------------------------------------------------------
# Isometries and automorphisms (backtracking over short vectors).
# ---------------------------------------------------------------------------


class _Backtracker:
    """Search for linear maps carrying one Gram to another over shells."""

    def __init__(self, gram_target: Mat, gram_source: Mat, budget: int = 10**7):
        # columns of a solution g are target-coordinates of the images of
        # the source basis:  t(g) . gram_target . g = gram_source
        self.Gt = gram_target
        self.Gs = gram_source
        self.n = gram_source.nrows
        self.budget = budget
        norms = sorted({gram_source[i, i] // 2 for i in range(self.n)})
        bound = max(norms)
        Lt = QuadLattice(gram_target)
        shells = short_vectors(Lt, bound)
        self.cands = {q: shells.get(q, []) for q in norms}
        self.nodes = 0
        self._gt = np.array([[int(x) for x in row] for row in gram_target.rows],
                            dtype=np.int64)

    def extend(self, fixed: list, constraints=None):
        """Complete fixed images to a full isometry; None if impossible.

        constraints, when given, is a list of (coeff_row, lattice_hnf) pairs:
        once all coordinates appearing in coeff_row are assigned, the image
        of the combination must reduce to zero against the lattice rows.
        """
        n = self.n
        gt = self._gt

        def ok_partial(depth, images):
            if constraints is None:
                return True
            for coeff, hnf in constraints:
                support = [t for t in range(n) if coeff[t]]
                if support and max(support) == depth:
                    vec = np.zeros(n, dtype=np.int64)
                    for t in support:
                        vec += coeff[t] * images[t]
                    if not _in_lattice(vec, hnf):
                        return False
            return True

        images = [np.array(v, dtype=np.int64) for v in fixed]
        rows_cache = [gt @ v for v in images]
        for depth in range(len(images)):
            if not ok_partial(depth, images):
                return None

        def rec(depth):
            self.nodes += 1
            if self.nodes > self.budget:
                raise ScaleLimit("isometry search budget exceeded")
            if depth == n:
                return True
            want_norm = self.Gs[depth, depth] // 2
            for cand in self.cands[want_norm]:
                v = np.array(cand, dtype=np.int64)
                good = True
                for j in range(depth):
                    if int(rows_cache[j] @ v) != self.Gs[j, depth]:
                        good = False
                        break
                if not good:
                    continue
                images.append(v)
                rows_cache.append(gt @ v)
                if ok_partial(depth, images) and rec(depth + 1):
                    return True
                images.pop()
                rows_cache.pop()
            return False

        if rec(len(images)):
            return Mat([[int(images[j][i]) for j in range(n)] for i in range(n)])
        return None


def _in_lattice(vec, hnf_rows_list) -> bool:
    v = list(int(x) for x in vec)
    for row in hnf_rows_list:
        piv = next((t for t, x in enumerate(row) if x), None)
        if piv is None:
            continue
        if v[piv] % row[piv]:
            return False
        q = v[piv] // row[piv]
        if q:
            for t in range(piv, len(v)):
                v[t] -= q * row[t]
    return not any(v)


def isometry_test(L: QuadLattice, K: QuadLattice, budget: int = 10**7) -> Mat | None:
    """An exact matrix g with t(g) gram_K g = gram_L, or None.

    Fast rejection first on rank, determinant, level, and shell counts.
    """
    if L.rank != K.rank:
        return None
    if L.disc() != K.disc() or L.level() != K.level():
        return None
    bound = max(max(L.gram[i, i] for i in range(L.rank)),
                max(K.gram[i, i] for i in range(K.rank))) // 2
    if shell_counts(L, bound) != shell_counts(K, bound):
        return None
    bt = _Backtracker(K.gram, L.gram, budget)
    g = bt.extend([])
    if g is None:
        return None
    assert g.transpose() @ K.gram @ g == L.gram
    return g


def aut_order_and_gens(L: QuadLattice, sublattices: list[Mat] = (),
                       budget: int = 10**7) -> tuple[int, list[Mat]]:
    """Order and generators of the isometries preserving every sublattice.

    Stabilizer chain over the standard basis: the order is the product over
    levels of the number of extendable images of each basis vector.
    """
    n = L.rank
    constraints = []
    for S in sublattices:
        hnf = hnf_rows([list(r) for r in S.rows])
        # constraint rows with short prefixes prune early: echelonize against
        # the reversed coordinate order so each row is supported on a prefix
        rev = hnf_rows([list(r)[::-1] for r in S.rows])
        for row in rev:
            constraints.append((list(row)[::-1], hnf))
    bt = _Backtracker(L.gram, L.gram, budget)
    order = 1
    gens: list[Mat] = []
    fixed: list[tuple[int, ...]] = []
    for depth in range(n):
        e = tuple(1 if t == depth else 0 for t in range(n))
        count = 0
        norm = L.gram[depth, depth] // 2
        for cand in bt.cands[norm]:
            ok = True
            for j in range(depth):
                if L.bilinear(fixed[j], cand) != L.gram[j, depth]:
                    ok = False
                    break
            if not ok:
                continue
            g = bt.extend([list(f) for f in fixed] + [list(cand)],
                          constraints or None)
            if g is not None:
                count += 1
                if cand != e:
                    gens.append(g)
        assert count >= 1
        order *= count
        fixed.append(e)
    return order, gens


def aut_order(obj, budget: int = 10**7) -> int:
    """Order of the simultaneous stabilizer of a chain (or a single lattice)."""
    if isinstance(obj, QuadLattice):
        return aut_order_and_gens(obj, (), budget)[0]
    subs = [c for c in obj.coords[1:]]
    return aut_order_and_gens(obj.L1, subs, budget)[0]


# ---------------------------------------------------------------------------
# Chains of modular sublattices.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParamodularChain:
    """Nested lattices, the j-th one t_j-modular, in coordinates of the first."""

    L1: QuadLattice
    coords: tuple[Mat, ...]
    T: tuple[int, ...]

    def __post_init__(self):
        assert len(self.coords) == len(self.T)
        assert self.T[0] == 1 and self.coords[0] == Mat.identity(self.L1.rank)
        for a, b in zip(self.T, self.T[1:]):
            assert b % a == 0
        for j, C in enumerate(self.coords):
            g = self.member_gram(j)
            t = self.T[j]
            # t-modular and t-even
            assert all(g[i, i] % (2 * t) == 0 for i in range(g.nrows))
            dual = rational_inverse(g).scale(t)
            assert dual.is_integral()
        for j in range(len(self.coords) - 1):
            inside = lattice_contains(self.coords[j], self.coords[j + 1])
            assert inside, "chain containment fails"

    def member_gram(self, j: int) -> Mat:
        C = self.coords[j]
        return C @ self.L1.gram @ C.transpose()

    def member(self, j: int) -> QuadLattice:
        return QuadLattice(self.member_gram(j))


def lattice_contains(A: Mat, B: Mat) -> bool:
    """Row lattice of B inside the row lattice of A."""
    for row in B.rows:
        sol = solve_right(A.transpose(), row)
        if sol is None or not all(isinstance(x, int) for x in sol):
            return False
    return True


def constant_chain(L: QuadLattice, n: int) -> ParamodularChain:
    I = Mat.identity(L.rank)
    return ParamodularChain(L, tuple([I] * n), tuple([1] * n))


def pmodular_coords(L: QuadLattice, p: int, scale: int = 1,
                    budget: int = 10**6) -> list[Mat]:
    """Coordinate rows of the sublattices K with L >= K >= pL that are
    (p*scale)-modular, where L is scale-modular with p not dividing scale.

    These are the preimages of the maximal totally singular subspaces of the
    reduction mod p of Q / scale.
    """
    n = L.rank
    assert n % 2 == 0
    subspaces = _max_singular_subspaces(L, p, scale, budget)
    out = []
    for basis in subspaces:
        rows = [list(v) for v in basis]
        for i in range(n):
            rows.append([p if t == i else 0 for t in range(n)])
        K = Mat(hnf_rows(rows))
        g = K @ L.gram @ K.transpose()
        t = p * scale
        assert all(x % t == 0 for row in g.rows for x in row)
        assert all(g[i, i] % (2 * t) == 0 for i in range(n))
        scaled = Mat([[x // t for x in row] for row in g.rows])
        assert abs(scaled.det()) == 1
        out.append(K)
    out.sort(key=lambda M: M.rows)
    return out


def pmodular_sublattices(L: QuadLattice, p: int, budget: int = 10**6) -> list[QuadLattice]:
    """The even p-modular sublattices between L and pL, for unimodular L."""
    return [QuadLattice(K @ L.gram @ K.transpose())
            for K in pmodular_coords(L, p, 1, budget)]


def _max_singular_subspaces(L: QuadLattice, p: int, scale: int, budget: int):
    """Maximal totally singular subspaces of (L/pL, Q/scale mod p), as
    tuples of reduced-echelon basis vectors."""
    if p == 2:
        return _max_singular_subspaces_f2(L, scale, budget)
    n = L.rank
    k = n // 2
    g = L.gram

    def qval(v) -> int:
        tot = 0
        for i in range(n):
            if v[i]:
                for j in range(n):
                    if v[j]:
                        tot += v[i] * v[j] * g[i, j]
        assert tot % (2 * scale) == 0
        return (tot // (2 * scale)) % p

    def bval(v, w) -> int:
        tot = 0
        for i in range(n):
            if v[i]:
                for j in range(n):
                    if w[j]:
                        tot += v[i] * g[i, j] * w[j]
        assert tot % scale == 0
        return (tot // scale) % p

    vectors = []
    for num in range(1, p**n):
        v = []
        x = num
        for _ in range(n):
            v.append(x % p)
            x //= p
        # normalize: first nonzero entry 1
        lead = next(i for i in range(n) if v[i])
        if v[lead] != 1:
            continue
        if qval(v) == 0:
            vectors.append(tuple(v))
    level_sets = {(): ()}
    current = {(): []}
    for dim in range(k):
        nxt = {}
        for key, basis in current.items():
            for v in vectors:
                if any(bval(v, w) % p for w in basis):
                    continue
                if _rank_fp(basis + [v], p) != dim + 1:
                    continue
                nb = _rref_fp(basis + [v], p)
                nkey = tuple(map(tuple, nb))
                if nkey not in nxt:
                    nxt[nkey] = nb
                    if len(nxt) > budget:
                        raise ScaleLimit("subspace enumeration budget exceeded")
        current = nxt
    return [tuple(map(tuple, b)) for b in sorted(current.values())]


def _max_singular_subspaces_f2(L: QuadLattice, scale: int, budget: int):
    """Bitmask specialization of the subspace search over F_2."""
    n = L.rank
    k = n // 2
    g = L.gram

    def vec(mask):
        return [(mask >> i) & 1 for i in range(n)]

    qtab = []
    gv = []
    for mask in range(1 << n):
        v = vec(mask)
        tot = sum(v[i] * v[j] * g[i, j] for i in range(n) for j in range(n) if v[i] and v[j])
        assert tot % (2 * scale) == 0
        qtab.append((tot // (2 * scale)) & 1)
        row = 0
        for j in range(n):
            s = sum(v[i] * g[i, j] for i in range(n) if v[i])
            assert s % scale == 0
            row |= ((s // scale) & 1) << j
        gv.append(row)
    singular = [m for m in range(1, 1 << n) if
                qtab[m] == 0]

    def parity(x):
        return bin(x).count("1") & 1

    # states keyed by the full span bitmask set (canonical for a subspace)
    current = {frozenset([0]): ()}
    for dim in range(k):
        nxt = {}
        for span, basis in current.items():
            perp = [w for w in singular if w not in span
                    and all(parity(gv[b] & w) == 0 for b in basis)]
            for w in perp:
                newspan = frozenset(x ^ y for x in span for y in (0, w))
                if newspan not in nxt:
                    nxt[newspan] = basis + (w,)
                    if len(nxt) > budget:
                        raise ScaleLimit("subspace enumeration budget exceeded")
        current = nxt
    out = []
    for span, basis in current.items():
        rows = _rref_fp([vec(b) for b in basis], 2)
        out.append(tuple(map(tuple, rows)))
    return sorted(out)


def _rref_fp(rows, p):
    m = [list(r) for r in rows]
    nr, nc = len(m), len(m[0])
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if m[i][c] % p), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [(x * inv) % p for x in m[r]]
        for i in range(nr):
            if i != r and m[i][c] % p:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        r += 1
    return [row for row in m if any(row)]


def _rank_fp(rows, p):
    return len(_rref_fp(rows, p))


@dataclass(frozen=True)
class ChainClass:
    representative: ParamodularChain
    stabilizer_order: int
    orbit_size: int


def enumerate_chain_classes(L1: QuadLattice, T, budget: int = 10**7) -> list[ChainClass]:
    """Isometry classes of chains with first member L1 and scale list T.

    Only the distinct scales matter; equal consecutive scales repeat the
    member.  The candidates for each refinement step are the modular
    sublattices at the new prime, and classes are orbits under the
    automorphisms of L1, with stabilizer orders computed independently and
    checked against the orbit sizes.
    """
    T = tuple(T)
    assert T and T[0] == 1
    n = L1.rank
    distinct = []
    for t in T:
        if not distinct or t != distinct[-1]:
            distinct.append(t)
    # build candidate tuples of coordinate matrices for the distinct scales
    partials = [(Mat.identity(n),)]
    for prev, cur in zip(distinct, distinct[1:]):
        step = cur // prev
        assert cur % prev == 0 and step > 1
        newparts = []
        for tup in partials:
            mats = [tup[-1]]
            scale_now = prev
            for p, e in _factorint(step):
                assert e == 1, "scales must be squarefree"
                next_mats = []
                for M in mats:
                    ML = QuadLattice(M @ L1.gram @ M.transpose())
                    for K in pmodular_coords(ML, p, scale_now):
                        next_mats.append(K @ M)
                mats = next_mats
                scale_now *= p
            for M in mats:
                newparts.append(tup + (M,))
        partials = newparts
    # expand back to full chains following T
    def expand(tup):
        out = []
        for t in T:
            out.append(tup[distinct.index(t)])
        return tuple(out)

    order1, gens = aut_order_and_gens(L1)
    gens = list({g.rows: g for g in gens}.values())
    seen: dict[tuple, tuple] = {}
    for tup in partials:
        key = tuple(tuple(map(tuple, hnf_rows([list(r) for r in M.rows])))
                    for M in tup[1:])
        if key not in seen:
            seen[key] = tup

    def orbit_partition(gen_subset):
        orbits = []
        unvisited = dict(seen)
        while unvisited:
            key0, tup0 = next(iter(unvisited.items()))
            frontier = [tup0]
            orbit = {key0}
            del unvisited[key0]
            while frontier:
                tup = frontier.pop()
                for g in gen_subset:
                    gt = g.transpose()
                    moved = tuple(Mat(hnf_rows([list(r) for r in (M @ gt).rows]))
                                  for M in tup[1:])
                    mk = tuple(tuple(map(tuple, M.rows)) for M in moved)
                    if mk not in orbit:
                        assert mk in seen, "generator left the candidate set"
                        orbit.add(mk)
                        if mk in unvisited:
                            del unvisited[mk]
                        frontier.append((tup[0],) + moved)
            orbits.append((tup0, len(orbit)))
        return orbits

    # start with a few generators and enlarge until the orbit-stabilizer
    # identity certifies the partition
    step = max(4, len(gens) // 16)
    used = step
    while True:
        orbits = orbit_partition(gens[:used])
        classes = []
        good = True
        for tup, size in orbits:
            chain = ParamodularChain(L1, expand(tup), T)
            stab = aut_order(chain)
            if order1 != stab * size:
                good = False
                break
            classes.append(ChainClass(chain, stab, size))
        if good:
            break
        if used >= len(gens):
            raise AssertionError("orbit-stabilizer identity failed with all generators")
        used = min(len(gens), used * 2)
    classes.sort(key=lambda c: tuple(tuple(map(tuple, M.rows))
                                     for M in c.representative.coords))
    return classes


def _factorint(n: int):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            out.append((d, e))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out
