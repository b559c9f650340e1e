"""Exact integer and rational matrix arithmetic.

Everything downstream (lattice reduction, Hecke enumeration, Garrett
representatives) is built on the routines here.  Entries are Python ints or
``fractions.Fraction``; there is no floating point in this module.

Conventions:

* ``smith_normal_form(A)`` returns ``(U, D, V)`` with ``U @ A @ V == D``,
  ``U, V`` unimodular, ``D`` diagonal with nonnegative entries ``d_i | d_{i+1}``.
* ``hermite_normal_form(A)`` is row style: ``U @ A == H`` with ``U`` unimodular,
  ``H`` in row echelon form, pivots positive, entries above a pivot reduced
  into ``[0, pivot)``, zero rows at the bottom.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DimensionMismatch, SingularMatrix

Scalar = int | Fraction


def _norm(x: Scalar) -> Scalar:
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return x


class Mat:
    """Immutable matrix with exact entries (int or Fraction)."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        self.rows = tuple(tuple(_norm(x) for x in row) for row in rows)
        if self.rows:
            w = len(self.rows[0])
            if any(len(r) != w for r in self.rows):
                raise DimensionMismatch("ragged rows")

    # -- constructors -------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "Mat":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, r: int, c: int) -> "Mat":
        return cls([[0] * c for _ in range(r)])

    @classmethod
    def diagonal(cls, entries) -> "Mat":
        entries = list(entries)
        n = len(entries)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_blocks(cls, blocks) -> "Mat":
        """Assemble from a 2d grid of Mat blocks with compatible shapes."""
        rows = []
        for brow in blocks:
            h = brow[0].nrows
            for i in range(h):
                row = []
                for b in brow:
                    row.extend(b.rows[i])
                rows.append(row)
        return cls(rows)

    # -- basic properties ---------------------------------------------

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def row(self, i):
        return self.rows[i]

    def __eq__(self, other):
        return isinstance(other, Mat) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"Mat({[list(r) for r in self.rows]})"

    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def is_integral(self) -> bool:
        return all(isinstance(x, int) for row in self.rows for x in row)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.rows for x in row)

    # -- arithmetic ----------------------------------------------------

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"{self.nrows}x{self.ncols} @ {other.nrows}x{other.ncols}")
        ot = list(zip(*other.rows)) if other.rows else []
        return Mat([[sum(a * b for a, b in zip(row, col)) for col in ot] for row in self.rows])

    def __add__(self, other: "Mat") -> "Mat":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise DimensionMismatch("shape mismatch in +")
        return Mat([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other: "Mat") -> "Mat":
        return self + other.scale(-1)

    def __neg__(self) -> "Mat":
        return self.scale(-1)

    def scale(self, c: Scalar) -> "Mat":
        return Mat([[c * x for x in row] for row in self.rows])

    def transpose(self) -> "Mat":
        return Mat(list(zip(*self.rows))) if self.rows else Mat([])

    def submatrix(self, r0: int, r1: int, c0: int, c1: int) -> "Mat":
        return Mat([row[c0:c1] for row in self.rows[r0:r1]])

    def apply_to(self, vec):
        """Matrix times column vector, returned as a tuple."""
        if len(vec) != self.ncols:
            raise DimensionMismatch("vector length mismatch")
        return tuple(_norm(sum(a * b for a, b in zip(row, vec))) for row in self.rows)

    def det(self) -> Scalar:
        if not self.is_square():
            raise DimensionMismatch("determinant of non-square matrix")
        if self.is_integral():
            return _det_bareiss([list(r) for r in self.rows])
        return _det_fraction([list(r) for r in self.rows])

    def inverse(self) -> "Mat":
        return rational_inverse(self)

    # -- JSON codec -----------------------------------------------------
    # ints encode as decimal strings, rationals as "a/b".

    def to_json(self):
        def enc(x):
            if isinstance(x, int):
                return str(x)
            return f"{x.numerator}/{x.denominator}"

        return [[enc(x) for x in row] for row in self.rows]

    @classmethod
    def from_json(cls, data) -> "Mat":
        def dec(s):
            if isinstance(s, int):
                return s
            if "/" in s:
                a, b = s.split("/")
                return Fraction(int(a), int(b))
            return int(s)

        return cls([[dec(x) for x in row] for row in data])


def _det_bareiss(m: list[list[int]]) -> int:
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def _det_fraction(m) -> Fraction:
    n = len(m)
    m = [[Fraction(x) for x in row] for row in m]
    det = Fraction(1)
    for k in range(n):
        piv = None
        for i in range(k, n):
            if m[i][k] != 0:
                piv = i
                break
        if piv is None:
            return Fraction(0)
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            det = -det
        det *= m[k][k]
        inv = 1 / m[k][k]
        for i in range(k + 1, n):
            f = m[i][k] * inv
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[k])]
    return det


# ---------------------------------------------------------------------------
# Smith normal form with transforms.
# ---------------------------------------------------------------------------


def smith_normal_form(A: Mat) -> tuple[Mat, Mat, Mat]:
    """Return (U, D, V) with U A V = D in Smith normal form.

    Diagonal entries are nonnegative and satisfy d_i | d_{i+1}.
    """
    if not A.is_integral():
        raise DimensionMismatch("Smith normal form requires integer entries")
    a = [list(r) for r in A.rows]
    nr, nc = A.nrows, A.ncols
    u = [[1 if i == j else 0 for j in range(nr)] for i in range(nr)]
    v = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]
    _snf_inplace(a, u, v)
    return Mat(u), Mat(a), Mat(v)


def _snf_inplace(a, u, v):
    nr = len(a)
    nc = len(a[0]) if a else 0
    t = 0
    while t < min(nr, nc):
        # locate a nonzero pivot of minimal absolute value in the trailing block
        piv = None
        best = None
        for i in range(t, nr):
            ai = a[i]
            for j in range(t, nc):
                x = ai[j]
                if x:
                    if best is None or abs(x) < best:
                        best = abs(x)
                        piv = (i, j)
                        if best == 1:
                            break
            if best == 1:
                break
        if piv is None:
            break
        i, j = piv
        if i != t:
            a[t], a[i] = a[i], a[t]
            u[t], u[i] = u[i], u[t]
        if j != t:
            for row in a:
                row[t], row[j] = row[j], row[t]
            for row in v:
                row[t], row[j] = row[j], row[t]
        # clear row and column t, restarting when a remainder shrinks the pivot
        while True:
            p = a[t][t]
            done = True
            for i in range(t + 1, nr):
                if a[i][t]:
                    q = a[i][t] // p
                    if q:
                        ai, at = a[i], a[t]
                        for k in range(nc):
                            ai[k] -= q * at[k]
                        ui, ut = u[i], u[t]
                        for k in range(len(ui)):
                            ui[k] -= q * ut[k]
                    if a[i][t]:
                        a[t], a[i] = a[i], a[t]
                        u[t], u[i] = u[i], u[t]
                        done = False
                        break
            if not done:
                continue
            for j in range(t + 1, nc):
                if a[t][j]:
                    q = a[t][j] // p
                    if q:
                        for row in a:
                            row[j] -= q * row[t]
                        for row in v:
                            row[j] -= q * row[t]
                    if a[t][j]:
                        for row in a:
                            row[t], row[j] = row[j], row[t]
                        for row in v:
                            row[t], row[j] = row[j], row[t]
                        done = False
                        break
            if done:
                break
        # pivot must divide the whole trailing block
        p = a[t][t]
        bad = None
        for i in range(t + 1, nr):
            ai = a[i]
            for j in range(t + 1, nc):
                if ai[j] % p:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            ab, at = a[bad], a[t]
            for k in range(nc):
                at[k] += ab[k]
            ub, ut = u[bad], u[t]
            for k in range(len(ut)):
                ut[k] += ub[k]
            continue
        t += 1
    # normalize signs
    for k in range(min(nr, nc)):
        if a[k][k] < 0:
            a[k][k] = -a[k][k]
            for row in v:
                row[k] = -row[k]


def smith_divisors(rows: list[list[int]]) -> list[int]:
    """Elementary divisors only, no transforms.  Destroys its argument."""
    a = rows
    nr = len(a)
    nc = len(a[0]) if a else 0
    divs = []
    t = 0
    while t < min(nr, nc):
        piv = None
        best = None
        for i in range(t, nr):
            ai = a[i]
            for j in range(t, nc):
                x = ai[j]
                if x:
                    if best is None or abs(x) < best:
                        best = abs(x)
                        piv = (i, j)
                        if best == 1:
                            break
            if best == 1:
                break
        if piv is None:
            break
        i, j = piv
        if i != t:
            a[t], a[i] = a[i], a[t]
        if j != t:
            for row in a:
                row[t], row[j] = row[j], row[t]
        while True:
            p = a[t][t]
            done = True
            for i in range(t + 1, nr):
                if a[i][t]:
                    q = a[i][t] // p
                    ai, at = a[i], a[t]
                    if q:
                        for k in range(t, nc):
                            ai[k] -= q * at[k]
                    if ai[t]:
                        a[t], a[i] = a[i], a[t]
                        done = False
                        break
            if not done:
                continue
            for j in range(t + 1, nc):
                if a[t][j]:
                    q = a[t][j] // p
                    if q:
                        for row in a:
                            row[j] -= q * row[t]
                    if a[t][j]:
                        for row in a:
                            row[t], row[j] = row[j], row[t]
                        done = False
                        break
            if done:
                break
        p = a[t][t]
        bad = None
        for i in range(t + 1, nr):
            ai = a[i]
            for j in range(t + 1, nc):
                if ai[j] % p:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            at, ab = a[t], a[bad]
            for k in range(t, nc):
                at[k] += ab[k]
            continue
        divs.append(abs(p))
        t += 1
    return divs


# ---------------------------------------------------------------------------
# Hermite normal form (row style).
# ---------------------------------------------------------------------------


def hermite_normal_form(A: Mat) -> tuple[Mat, Mat]:
    """Return (H, U) with U A = H, U unimodular, H the row-style HNF."""
    if not A.is_integral():
        raise DimensionMismatch("Hermite normal form requires integer entries")
    a = [list(r) for r in A.rows]
    u = [[1 if i == j else 0 for j in range(A.nrows)] for i in range(A.nrows)]
    _hnf_inplace(a, u)
    return Mat(a), Mat(u)


def _hnf_inplace(a, u=None):
    nr = len(a)
    nc = len(a[0]) if a else 0
    r = 0
    for c in range(nc):
        if r == nr:
            break
        piv = None
        for i in range(r, nr):
            if a[i][c]:
                piv = i
                break
        if piv is None:
            continue
        # gcd out the column below the pivot row
        for i in range(piv + 1, nr):
            if not a[i][c]:
                continue
            x, y = a[piv][c], a[i][c]
            g, s, t = xgcd(x, y)
            xg, yg = x // g, y // g
            rp, ri = a[piv], a[i]
            for k in range(nc):
                rp[k], ri[k] = s * rp[k] + t * ri[k], -yg * rp[k] + xg * ri[k]
            if u is not None:
                up, ui = u[piv], u[i]
                for k in range(nr):
                    up[k], ui[k] = s * up[k] + t * ui[k], -yg * up[k] + xg * ui[k]
        if piv != r:
            a[r], a[piv] = a[piv], a[r]
            if u is not None:
                u[r], u[piv] = u[piv], u[r]
        if a[r][c] < 0:
            a[r] = [-x for x in a[r]]
            if u is not None:
                u[r] = [-x for x in u[r]]
        p = a[r][c]
        for i in range(r):
            q = a[i][c] // p
            if q:
                ai, ar = a[i], a[r]
                for k in range(nc):
                    ai[k] -= q * ar[k]
                if u is not None:
                    ui, ur = u[i], u[r]
                    for k in range(nr):
                        ui[k] -= q * ur[k]
        r += 1
    return r


def hnf_rows(rows: list[list[int]]) -> list[list[int]]:
    """Row-style HNF of a plain list matrix, zero rows dropped."""
    a = [list(r) for r in rows]
    _hnf_inplace(a)
    return [r for r in a if any(r)]


def hnf_key(rows) -> tuple:
    """Canonical hashable key for the row lattice spanned by ``rows``."""
    return tuple(tuple(r) for r in hnf_rows([list(r) for r in rows]))


# ---------------------------------------------------------------------------
# Rational elimination: inverse and solving.
# ---------------------------------------------------------------------------


def rational_inverse(A: Mat) -> Mat:
    if not A.is_square():
        raise DimensionMismatch("inverse of non-square matrix")
    n = A.nrows
    m = [[Fraction(x) for x in row] + [Fraction(1 if i == j else 0) for j in range(n)]
         for i, row in enumerate(A.rows)]
    for k in range(n):
        piv = None
        for i in range(k, n):
            if m[i][k] != 0:
                piv = i
                break
        if piv is None:
            raise SingularMatrix("matrix is singular")
        m[k], m[piv] = m[piv], m[k]
        inv = 1 / m[k][k]
        m[k] = [x * inv for x in m[k]]
        for i in range(n):
            if i != k and m[i][k]:
                f = m[i][k]
                m[i] = [a - f * b for a, b in zip(m[i], m[k])]
    return Mat([row[n:] for row in m])


def solve_right(A: Mat, b) -> tuple | None:
    """Exact solution x of A x = b, or None if inconsistent."""
    nr, nc = A.nrows, A.ncols
    m = [[Fraction(x) for x in row] + [Fraction(b[i])] for i, row in enumerate(A.rows)]
    pivots = []
    r = 0
    for c in range(nc):
        piv = None
        for i in range(r, nr):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(nr):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * bb for a, bb in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    for i in range(r, nr):
        if m[i][nc] != 0:
            return None
    x = [Fraction(0)] * nc
    for i, c in enumerate(pivots):
        x[c] = m[i][nc]
    return tuple(_norm(v) for v in x)


def is_symplectic(g: Mat, J: Mat) -> bool:
    """Exact check of  t(g) J g = J  for an alternating nonsingular J."""
    if not g.is_square() or not J.is_square():
        raise DimensionMismatch("is_symplectic expects square matrices")
    if g.nrows != J.nrows:
        raise DimensionMismatch("size mismatch between g and J")
    if g.nrows % 2:
        raise DimensionMismatch("symplectic matrices have even size")
    return g.transpose() @ J @ g == J


# ---------------------------------------------------------------------------
# Integer lattice helpers (row lattices).
# ---------------------------------------------------------------------------


def left_kernel(A: Mat) -> Mat:
    """Saturated basis of { v integral : v A = 0 }, as rows."""
    H, U = hermite_normal_form(A)
    ker = [U.rows[i] for i in range(A.nrows) if not any(H.rows[i])]
    return Mat(hnf_rows([list(r) for r in ker])) if ker else Mat.zeros(0, A.nrows)


def saturation(rows: Mat) -> Mat:
    """Saturation of the row lattice: (QQ-span) intersected with ZZ^n."""
    if rows.nrows == 0:
        return rows
    U, D, V = smith_normal_form(rows)
    r = sum(1 for i in range(min(D.nrows, D.ncols)) if D[i, i])
    vinv = rational_inverse(V)
    sat = [vinv.rows[i] for i in range(r)]
    return Mat(hnf_rows([list(x) for x in sat]))


def lattice_intersection(A: Mat, B: Mat) -> Mat:
    """Intersection of the two integer row lattices, as HNF rows."""
    if A.nrows == 0 or B.nrows == 0:
        return Mat.zeros(0, A.ncols)
    # v = (y | z) with y A - z B = 0 gives y A in both lattices
    M = Mat([list(ra) for ra in A.rows] + [[-x for x in rb] for rb in B.rows])
    K = left_kernel(M)
    if K.nrows == 0:
        return Mat.zeros(0, A.ncols)
    ys = Mat([list(row[: A.nrows]) for row in K.rows])
    inter = ys @ A
    return Mat(hnf_rows([list(r) for r in inter.rows]))


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, s, t) with s*a + t*b = g = gcd(a, b), g >= 0."""
    x, nx = 1, 0
    y, ny = 0, 1
    g, ng = a, b
    while ng:
        q = g // ng
        x, nx = nx, x - q * nx
        y, ny = ny, y - q * ny
        g, ng = ng, g - q * ng
    if g < 0:
        g, x, y = -g, -x, -y
    return g, x, y


def crt(residues: list[int], moduli: list[int]) -> int:
    """Solution mod prod(moduli) for pairwise coprime moduli."""
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        g, s, _ = xgcd(m, n)
        if g != 1:
            raise ValueError("moduli not coprime")
        x = (x + (r - x) * s * m) % (m * n)
        m *= n
    return x % m
