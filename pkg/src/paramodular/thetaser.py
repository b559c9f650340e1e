"""Theta series of chains of nested even modular lattices.

Fourier keys store the doubled Gram matrix of a tuple of vectors, so all
entries are integers and the term attached to a key H is exp(pi i tr(H Z)).
Exact coefficient maps come from joining per-member shell enumerations;
numeric evaluation carries a certified tail bound derived from the smallest
eigenvalue of Im Z, exact shell counts inside the truncation range, and a
packing-ball bound outside it.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    EmptyGenus,
    NotApplicable,
    NotInHalfSpace,
    NotSupported,
    ScaleLimit,
    TailTooLarge,
)
from .exactmat import Mat, rational_inverse
from .quadlat import (
    ParamodularChain,
    QuadLattice,
    fincke_pohst_chunks,
    shell_counts,
)


def divisor_sigma3(n: int) -> int:
    tot = 0
    d = 1
    while d * d <= n:
        if n % d == 0:
            tot += d**3
            if d != n // d:
                tot += (n // d) ** 3
        d += 1
    return tot


# ---------------------------------------------------------------------------
# Exact Fourier coefficients.
# ---------------------------------------------------------------------------


def gram_key(H: Mat) -> tuple:
    return tuple(tuple(int(x) for x in row) for row in H.rows)


@dataclass
class ThetaExpansion:
    """Exact counts of vector tuples by doubled Gram, up to a trace bound.

    trace_bound limits the total Q-value of a tuple; shells, minima, and
    ranks of the members are kept for tail certification during evaluation.
    """

    T: tuple[int, ...]
    trace_bound: int
    coefficients: dict[tuple, int]
    shells: list[dict[int, int]]
    minima: list[int]
    ranks: list[int]

    @property
    def degree(self) -> int:
        return len(self.T)


def _member_data(chain: ParamodularChain):
    G1 = np.array([[int(x) for x in row] for row in chain.L1.gram.rows],
                  dtype=np.int64)
    mats = []
    for C in chain.coords:
        mats.append(np.array([[int(x) for x in row] for row in C.rows],
                             dtype=np.int64))
    return G1, mats


def theta_coefficients(chain: ParamodularChain, trace_bound: int,
                       budget: int = 200 * 10**6) -> ThetaExpansion:
    """Exact tuple counts for every doubled Gram with total Q below the bound."""
    n = len(chain.T)
    G1, mats = _member_data(chain)
    members = [chain.member(j) for j in range(n)]
    shells = [shell_counts(members[j], trace_bound, budget) for j in range(n)]
    minima = [min((q for q in s if q > 0), default=1) for s in shells]
    ranks = [chain.L1.rank] * n
    if n == 1:
        coeffs = {((2 * q,),): c for q, c in shells[0].items()}
        return ThetaExpansion(chain.T, trace_bound, coeffs, shells, minima, ranks)
    if n == 2:
        coeffs = _pair_coefficients(chain, G1, mats, trace_bound, budget)
        return ThetaExpansion(chain.T, trace_bound, coeffs, shells, minima, ranks)
    coeffs = _tuple_coefficients(chain, G1, mats, trace_bound, budget)
    return ThetaExpansion(chain.T, trace_bound, coeffs, shells, minima, ranks)


def theta_coefficients_tuple(L1, coords, bound: int,
                             budget: int = 200 * 10**6) -> dict[tuple, int]:
    """Tuple counts for an arbitrary tuple of sublattices of L1.

    Unlike chains, tuples need no containment or modularity; permuting a
    chain produces such a tuple and its keys are the conjugated originals.
    """
    n = len(coords)
    G1 = np.array([[int(x) for x in row] for row in L1.gram.rows], dtype=np.int64)
    mats = [np.array([[int(x) for x in row] for row in C.rows], dtype=np.int64)
            for C in coords]

    class _Fake:
        pass

    fake = _Fake()
    fake.L1 = L1
    fake.coords = tuple(coords)
    fake.T = tuple([1] * n)
    fake.member_gram = lambda j: coords[j] @ L1.gram @ coords[j].transpose()
    if n == 2:
        return _pair_coefficients(fake, G1, mats, bound, budget)
    return _tuple_coefficients(fake, G1, mats, bound, budget)


def _collect_vectors(gram: Mat, bound: int, budget: int):
    """Coordinates and exact Q-values, grouped by shell."""
    G = np.array([[int(x) for x in row] for row in gram.rows], dtype=np.int64)
    groups: dict[int, list] = {}
    for X in fincke_pohst_chunks(gram, bound, budget=budget):
        qv = np.einsum("ij,jk,ik->i", X, G, X, optimize=True) // 2
        keep = qv <= bound
        X, qv = X[keep], qv[keep]
        for q in np.unique(qv):
            groups.setdefault(int(q), []).append(X[qv == q])
    return {q: np.concatenate(parts) for q, parts in groups.items()}


def _pair_coefficients(chain, G1, mats, bound, budget):
    g1 = chain.member_gram(0)
    g2 = chain.member_gram(1)
    sh1 = _collect_vectors(g1, bound, budget)
    sh2 = _collect_vectors(g2, bound, budget)
    W = mats[0] @ G1 @ mats[1].T        # pairing of member coordinates
    off = 2 * bound + 1
    counts: dict[tuple, int] = {}
    for q1, X1 in sh1.items():
        for q2, X2 in sh2.items():
            if q1 + q2 > bound:
                continue
            cross_all = np.zeros(2 * off + 1, dtype=np.int64)
            block = max(1, (1 << 23) // max(1, len(X2)))
            Y2 = (W @ X2.T)
            for t in range(0, len(X1), block):
                piece = X1[t:t + block] @ Y2
                cross_all += np.bincount((piece + off).ravel(),
                                         minlength=2 * off + 1)
            for b12, c in enumerate(cross_all):
                if c:
                    H = ((2 * q1, b12 - off), (b12 - off, 2 * q2))
                    counts[H] = counts.get(H, 0) + int(c)
    return counts


def _tuple_coefficients(chain, G1, mats, bound, budget):
    n = len(chain.T)
    shells = []
    for j in range(n):
        shells.append(_collect_vectors(chain.member_gram(j), bound, budget))
    pair = [[mats[i] @ G1 @ mats[j].T for j in range(n)] for i in range(n)]
    counts: dict[tuple, int] = {}
    work = [0]

    def rec(j, chosen, used):
        if j == n:
            H = tuple(tuple(row) for row in _gram_of(chosen, pair))
            counts[H] = counts.get(H, 0) + 1
            return
        for q, X in shells[j].items():
            if used + q > bound:
                continue
            for v in X:
                work[0] += 1
                if work[0] > budget:
                    raise ScaleLimit("tuple join budget exceeded")
                rec(j + 1, chosen + [(j, v, q)], used + q)

    rec(0, [], 0)
    return counts


def _gram_of(chosen, pair):
    n = len(chosen)
    H = [[0] * n for _ in range(n)]
    for a in range(n):
        ja, va, qa = chosen[a]
        H[a][a] = 2 * qa
        for b in range(a + 1, n):
            jb, vb, _ = chosen[b]
            val = int(va @ pair[ja][jb] @ vb)
            H[a][b] = H[b][a] = val
    return H


# ---------------------------------------------------------------------------
# Numeric evaluation with certified tails.
# ---------------------------------------------------------------------------


def _packing_count(q: float, minimum: int, rank: int) -> float:
    """Upper bound on the number of lattice vectors with Q <= q."""
    if q < 0:
        return 0.0
    return (2.0 * math.sqrt(q / minimum) + 1.0) ** rank


def _packing_tail(minimum: int, rank: int, bound: int, rate: float) -> float:
    """Certified bound on sum_{q > bound} r(q) exp(-rate q) via ball packing."""
    tail = 0.0
    q = bound + 1
    while True:
        term = _packing_count(q, minimum, rank) * math.exp(-rate * q)
        tail += term
        nxt = _packing_count(q + 1, minimum, rank) * math.exp(-rate * (q + 1))
        if term == 0.0 or (nxt < 0.5 * term and term < 1e-32 * max(tail, 1.0)):
            tail += 2.0 * nxt
            break
        q += 1
        if q > bound + 10000:
            return math.inf
    return tail


def _series_sum(shell: dict[int, int], rate: float) -> float:
    return sum(c * math.exp(-rate * q) for q, c in shell.items())


def theta_eval(exp_: ThetaExpansion, Z, tail_tol: float = 1e-10,
               with_tail: bool = False):
    """Evaluate the truncated series and certify the truncation error.

    Returns the complex value, or (value, certified_tail) when asked."""
    n = exp_.degree
    Z = np.asarray(Z, dtype=complex)
    if Z.shape != (n, n) or not np.allclose(Z, Z.T, atol=1e-12):
        raise NotInHalfSpace("Z must be symmetric of the right size")
    Y = Z.imag
    evs = np.linalg.eigvalsh(Y)
    if evs.min() <= 0:
        raise NotInHalfSpace("Im Z must be positive definite")
    y0 = float(evs.min())
    rate = 2 * math.pi * y0
    # tail over tuples with total Q above the bound, by the packing bound
    tail = 0.0
    t = exp_.trace_bound + 1
    while True:
        cnt = 1.0
        for mn, dim in zip(exp_.minima, exp_.ranks):
            cnt *= _packing_count(t, mn, dim)
        term = cnt * math.exp(-rate * t)
        tail += term
        cnt2 = 1.0
        for mn, dim in zip(exp_.minima, exp_.ranks):
            cnt2 *= _packing_count(t + 1, mn, dim)
        nxt = cnt2 * math.exp(-rate * (t + 1))
        if term == 0.0 or (nxt < 0.5 * term and term < 1e-32):
            tail += 2.0 * nxt
            break
        t += 1
        if t > exp_.trace_bound + 20000:
            tail = math.inf
            break
    if tail > tail_tol:
        raise TailTooLarge(f"certified tail {tail:.3e} exceeds {tail_tol}")
    total = 0j
    for H, c in exp_.coefficients.items():
        tr = sum(H[i][j] * Z[j, i] for i in range(n) for j in range(n))
        total += c * cmath.exp(1j * math.pi * tr)
    return (total, tail) if with_tail else total


# ---------------------------------------------------------------------------
# Degree-1 helpers and the inversion check.
# ---------------------------------------------------------------------------


def theta1_value(L: QuadLattice, z: complex, tail_tol: float = 1e-12,
                 budget: int = 200 * 10**6) -> complex:
    """Degree-1 theta value with certified truncation."""
    y = z.imag
    if y <= 0:
        raise NotInHalfSpace("z must have positive imaginary part")
    rate = 2 * math.pi * y
    mn = L.min_positive()
    B = 1
    while True:
        t = _packing_tail(mn, L.rank, B, rate)
        if t < tail_tol:
            break
        B += max(1, B // 2)
        if B > 10**6:
            raise TailTooLarge("cannot certify the tail at this point")
    counts = shell_counts(L, B, budget)
    val = sum(c * cmath.exp(2j * math.pi * q * z) for q, c in counts.items())
    return val


def _sqrt_branch(val: complex) -> complex:
    """Square root continuous on the half space, positive on i R_+."""
    return cmath.sqrt(val)


def inversion_check(L: QuadLattice, z: complex, tol: float = 1e-8) -> bool:
    """Transformation under z -> -1/z for a single even lattice.

    Compares the dual-lattice series at -1/z against sqrt(z/i)^m sqrt(disc)
    times the series at z.  The dual series is evaluated through the level
    rescaling, which has integral even Gram.
    """
    if z.imag <= 0:
        raise NotInHalfSpace("z must be in the upper half plane")
    N = L.level()
    dual_scaled = QuadLattice(rational_inverse(L.gram).scale(N))
    w = -1 / z
    lhs = theta1_value(dual_scaled, w / N)
    disc = L.disc()
    root = _sqrt_branch(z / 1j)
    rhs = root ** L.rank * math.sqrt(disc) * theta1_value(L, z)
    return abs(lhs - rhs) <= tol * max(1.0, abs(rhs))


# ---------------------------------------------------------------------------
# Genus averaging and the degree-1 comparison series.
# ---------------------------------------------------------------------------


@dataclass
class GenusTheta:
    classes: list[tuple[ThetaExpansion, int]]   # (expansion, stabilizer order)
    total_weight: Fraction
    averaged: dict[tuple, Fraction]


def genus_theta(class_data, trace_bound: int) -> GenusTheta:
    """Weighted average of class expansions; weights are 1/|O(chain)|."""
    if not class_data:
        raise EmptyGenus("no classes given")
    pairs = []
    total = Fraction(0)
    for cls in class_data:
        exp_ = theta_coefficients(cls.representative, trace_bound)
        pairs.append((exp_, cls.stabilizer_order))
        total += Fraction(1, cls.stabilizer_order)
    averaged: dict[tuple, Fraction] = {}
    for exp_, order in pairs:
        for H, c in exp_.coefficients.items():
            averaged[H] = averaged.get(H, Fraction(0)) + Fraction(c, order)
    for H in averaged:
        averaged[H] /= total
    return GenusTheta(pairs, total, averaged)


def eisenstein_compare_deg1(gt: GenusTheta, k: int, terms: int) -> dict:
    """Coefficientwise comparison against 1 + c sum sigma_{k-1}(l) q^l.

    Applies to weight-k degree-1 level-1 data with k = 4; the normalization c
    is fixed by the first nonzero coefficient.
    """
    if k % 4 or not gt.classes or gt.classes[0][0].degree != 1:
        raise NotApplicable("only degree-1 level-1 weight 0 mod 4 data")
    series: dict[int, Fraction] = {}
    for H, c in gt.averaged.items():
        q = H[0][0] // 2
        series[q] = c
    if series.get(0) != 1:
        raise NotApplicable("constant term must be 1")
    ell1 = series.get(1)
    if not ell1:
        raise NotApplicable("first coefficient vanishes; cannot normalize")
    c0 = ell1 / divisor_sigma3(1) if k == 4 else None
    if c0 is None:
        raise NotApplicable("only k = 4 comparison series implemented")
    mismatches = {}
    for ell in range(1, terms + 1):
        want = c0 * divisor_sigma3(ell)
        got = series.get(ell, Fraction(0))
        if got != want:
            mismatches[ell] = (got, want)
    return {"normalization": c0, "terms": terms, "mismatches": mismatches}


# ---------------------------------------------------------------------------
# Paramodularity: translation generators exactly, the flip numerically.
# ---------------------------------------------------------------------------


class CZ:
    """Complex numbers with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    def __add__(self, o):
        return CZ(self.re + o.re, self.im + o.im)

    def __sub__(self, o):
        return CZ(self.re - o.re, self.im - o.im)

    def __mul__(self, o):
        return CZ(self.re * o.re - self.im * o.im,
                  self.re * o.im + self.im * o.re)

    def __neg__(self):
        return CZ(-self.re, -self.im)

    def inv(self):
        d = self.re * self.re + self.im * self.im
        return CZ(self.re / d, -self.im / d)

    def __truediv__(self, o):
        return self * o.inv()

    def to_complex(self) -> complex:
        return complex(self.re, self.im)

    def __repr__(self):
        return f"CZ({self.re}, {self.im})"


def _cz_matrix_inverse2(M):
    a, b, c, d = M[0][0], M[0][1], M[1][0], M[1][1]
    det = a * d - b * c
    inv = det.inv()
    return [[d * inv, -b * inv], [-c * inv, a * inv]]


def flip_image(T: tuple[int, int], Z):
    """Exact image of Z under the paramodular flip, Z -> -(T Z T)^{-1}."""
    t1, t2 = T
    W = [[Z[0][0] * CZ(t1 * t1), Z[0][1] * CZ(t1 * t2)],
         [Z[1][0] * CZ(t1 * t2), Z[1][1] * CZ(t2 * t2)]]
    Winv = _cz_matrix_inverse2(W)
    return [[-Winv[0][0], -Winv[0][1]], [-Winv[1][0], -Winv[1][1]]]


def default_flip_points(T: tuple[int, int]):
    """Sample points whose flip images keep a diagonal imaginary part and a
    small-denominator rational off-diagonal entry, so both sides admit a
    certified box truncation.  Specific to T = (1, 2)."""
    if tuple(T) != (1, 2):
        raise NotSupported("built-in sample points cover level (1, 2) only")
    data = [
        (Fraction(0), Fraction(1, 2), Fraction(1, 2)),
        (Fraction(0), Fraction(1, 2), Fraction(-1, 2)),
        (Fraction(3, 10), Fraction(2, 5), Fraction(1, 2)),
        (Fraction(-3, 10), Fraction(2, 5), Fraction(1, 2)),
        (Fraction(3, 10), Fraction(2, 5), Fraction(-1, 2)),
    ]
    points = []
    for x, y, s in data:
        Z = [[CZ(x, y), CZ(s, 0)], [CZ(s, 0), CZ(-x, y)]]
        points.append(Z)
    return points


def _bound_for_tail(minimum: int, rank: int, rate: float, tol: float) -> int:
    B = max(2, minimum)
    while _packing_tail(minimum, rank, B, rate) > tol:
        B += max(1, B // 4)
        if B > 10**6:
            raise TailTooLarge("no certifiable truncation bound")
    return B


def chain2_eval(chain: ParamodularChain, Z, tail_tol: float = 1e-10,
                budget: int = 500 * 10**6):
    """Certified theta value of a two-member chain at an exact point.

    Z is a 2x2 matrix of CZ entries with exactly diagonal imaginary part and
    rational off-diagonal entry.  Returns (value, certified_tail).  The inner
    sum over the second member is folded into residue buckets modulo the
    denominator of the off-diagonal entry, so the double sum costs one pass
    over each member.
    """
    if len(chain.T) != 2:
        raise NotSupported("the bucketed evaluator is specific to two members")
    z11, z12, z22 = Z[0][0], Z[0][1], Z[1][1]
    if Z[1][0].re != z12.re or Z[1][0].im != z12.im:
        raise NotInHalfSpace("Z must be symmetric")
    if z12.im != 0:
        raise NotSupported("off-diagonal entry must be real at sample points")
    y1, y2 = z11.im, z22.im
    if y1 <= 0 or y2 <= 0:
        raise NotInHalfSpace("Im Z must be positive definite")
    mrank = chain.L1.rank
    M = z12.re.denominator
    a = z12.re.numerator % M
    if M**mrank > 1 << 26:
        raise NotSupported("off-diagonal denominator too large to bucket")

    G1, mats = _member_data(chain)
    g1 = chain.member_gram(0)
    g2 = chain.member_gram(1)
    L1m = QuadLattice(g1)
    L2m = QuadLattice(g2)
    mn1, mn2 = L1m.min_positive(), L2m.min_positive()
    rate1 = 2 * math.pi * float(y1)
    rate2 = 2 * math.pi * float(y2)
    W = mats[1] @ G1 @ mats[0].T        # b(member2 basis, member1 basis)
    g2np = np.array([[int(x) for x in row] for row in g2.rows], dtype=np.int64)
    g1np = np.array([[int(x) for x in row] for row in g1.rows], dtype=np.int64)
    nbuck = M**mrank
    powers = np.array([M**i for i in range(mrank)], dtype=np.int64)
    z11c = z11.to_complex()
    z22c = z22.to_complex()

    B1 = _bound_for_tail(mn1, mrank, rate1, tail_tol / 4)
    B2 = _bound_for_tail(mn2, mrank, rate2, tail_tol / 4)
    for _attempt in range(4):
        tail1 = _packing_tail(mn1, mrank, B1, rate1)
        tail2 = _packing_tail(mn2, mrank, B2, rate2)

        # pass over the second member: bucket complex weights by residue class
        Are = np.zeros(nbuck)
        Aim = np.zeros(nbuck)
        S2 = 0.0
        for X in fincke_pohst_chunks(g2, B2, budget=budget):
            qv = np.einsum("ij,jk,ik->i", X, g2np, X, optimize=True) // 2
            keep = qv <= B2
            X, qv = X[keep], qv[keep]
            ph = np.exp(2j * math.pi * qv * z22c)
            idx = (np.mod(X, M) @ powers)
            Are += np.bincount(idx, weights=ph.real, minlength=nbuck)
            Aim += np.bincount(idx, weights=ph.imag, minlength=nbuck)
            S2 += float(np.exp(-rate2 * qv).sum())
        A = (Are + 1j * Aim).reshape((M,) * mrank)
        # discrete transform along every axis, kernel exp(2 pi i a w c / M)
        if M > 1:
            kern = np.exp(2j * math.pi * a
                          * np.outer(np.arange(M), np.arange(M)) / M)
            for axis in range(mrank):
                A = np.tensordot(kern, np.moveaxis(A, axis, 0), axes=(1, 0))
                A = np.moveaxis(A, 0, axis)
        G = A.reshape(-1)

        # pass over the first member
        Wt = W.T % M if M > 1 else W.T
        total = 0j
        S1 = 0.0
        for X in fincke_pohst_chunks(g1, B1, budget=budget):
            qv = np.einsum("ij,jk,ik->i", X, g1np, X, optimize=True) // 2
            keep = qv <= B1
            X, qv = X[keep], qv[keep]
            ph = np.exp(2j * math.pi * qv * z11c)
            if M > 1:
                idx = (np.mod(X @ Wt, M) @ powers)
                total += np.dot(ph, G[idx])
            else:
                total += ph.sum() * G[0]
            S1 += float(np.exp(-rate1 * qv).sum())
        certified = tail1 * (S2 + tail2) + (S1 + tail1) * tail2
        if certified <= tail_tol:
            return total, certified
        # tighten both truncation bounds against the computed full sums
        grow = math.log(4 * certified / tail_tol)
        B1 += int(grow / rate1) + 1
        B2 += int(grow / rate2) + 1
    raise TailTooLarge(f"certified tail {certified:.3e} exceeds {tail_tol}")


def translation_invariance_report(exp_: ThetaExpansion) -> dict:
    """Exact coefficient-level invariance under the translation generators.

    The diagonal generator at slot i needs t_i to divide every Q(x_i); the
    off-diagonal generator at (i, j), i < j, needs t_i to divide b(x_i, x_j).
    Both checks run over every stored key.
    """
    n = exp_.degree
    bad_diag = {i: 0 for i in range(n)}
    bad_cross = {(i, j): 0 for i in range(n) for j in range(i + 1, n)}
    for H in exp_.coefficients:
        for i in range(n):
            if (H[i][i] // 2) % exp_.T[i]:
                bad_diag[i] += 1
            for j in range(i + 1, n):
                if H[i][j] % exp_.T[i]:
                    bad_cross[(i, j)] += 1
    return {
        "diagonal_violations": bad_diag,
        "cross_violations": bad_cross,
        "exact": not any(bad_diag.values()) and not any(bad_cross.values()),
    }


def paramodularity_check(chain: ParamodularChain, tol: float = 1e-8,
                         tail_tol: float = 1e-10, points=None,
                         coefficient_bound: int = 6) -> dict:
    """Generator-by-generator modularity report for a two-member chain.

    Translations are checked exactly on the coefficients; the flip is checked
    numerically at sample points engineered so both sides admit certified
    truncation.  The weight is half the rank, which must be divisible by 8.
    """
    if len(chain.T) != 2:
        raise NotSupported("the check is implemented for two-member chains")
    if chain.L1.rank % 8:
        raise NotSupported("rank must be divisible by 8 for trivial character")
    k = chain.L1.rank // 2
    exp_ = theta_coefficients(chain, coefficient_bound)
    report = {"translations": translation_invariance_report(exp_)}
    pts = points if points is not None else default_flip_points(chain.T)
    T = chain.T
    flips = []
    for Z in pts:
        Wm = flip_image((T[0], T[1]), Z)
        lhs, taill = chain2_eval(chain, Wm, tail_tol)
        rhs, tailr = chain2_eval(chain, Z, tail_tol)
        # det(T Z) ** -k times the flipped value
        z = np.array([[Z[0][0].to_complex(), Z[0][1].to_complex()],
                      [Z[1][0].to_complex(), Z[1][1].to_complex()]])
        detTZ = np.linalg.det(np.diag([T[0], T[1]]) @ z)
        defect = abs(lhs * detTZ ** (-k) - rhs)
        flips.append({
            "Z": [[str(Z[i][j]) for j in range(2)] for i in range(2)],
            "defect": defect,
            "tails": (taill, tailr),
            "ok": bool(defect < tol and taill < tail_tol and tailr < tail_tol),
        })
    report["flip"] = flips
    report["ok"] = report["translations"]["exact"] and all(f["ok"] for f in flips)
    return report
