"""Orders in cubic étale algebras over Q.

* dw_coefficients: a_n = #{orders O in A : [O_A : O]^2 = n}, from the Euler product
  f_A(s) = zeta(4s) zeta(6s - 1) zeta_A(2s) / zeta_A(4s). In t = p^{-2s} the local
  factor is prod_P (1 + t^{f_P}) / ((1 - t^2)(1 - p t^3)).
* brute_subrings: the same counts from Hermite normal forms of sublattices of a
  multiplication table.
* resolvent_series_check: cubic rings whose algebra has discriminant disc F against
  (h3(F) / 2) zeta(2s) zeta(6s - 1) sum over squarefree ideals with class in 3 Cl_F.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import cubicforms as cf
from .arith import factorize, is_fundamental, kronecker, primes_up_to
from .quadfield import QuadraticForm, class_group, compose, power, principal_form, reduced_forms
from .quadfield import reduce as reduce_form

__all__ = [
    "CubicAlgebra",
    "DirichletCoefficients",
    "MultTable",
    "splitting_type",
    "dw_coefficients",
    "brute_subrings",
    "form_mult_table",
    "split_mult_table",
    "ResolventReport",
    "resolvent_series_check",
]

# splitting types as tuples of (residue degree, ramification index), sorted
SplitType = tuple[tuple[int, int], ...]


# ---------------------------------------------------------------------------
# algebras


@dataclass(frozen=True)
class CubicAlgebra:
    """Q^3, F x Q for a quadratic field F, or a cubic field given by a maximal form."""

    kind: str
    form: cf.BinaryCubicForm | None = None
    quad_disc: int | None = None
    _splitting: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.kind == "split":
            return
        if self.kind == "quadratic":
            if self.quad_disc is None or not is_fundamental(self.quad_disc):
                raise ValueError("quadratic kind needs a fundamental discriminant")
            return
        if self.kind == "cubic":
            if self.form is None:
                raise ValueError("cubic kind needs a form")
            f = cf.BinaryCubicForm(*self.form)
            if not cf.is_irreducible(f) or not cf.is_maximal(f):
                raise ValueError("cubic kind needs an irreducible maximal form")
            object.__setattr__(self, "form", f)
            return
        raise ValueError("kind must be 'split', 'quadratic' or 'cubic'")

    @classmethod
    def split(cls) -> "CubicAlgebra":
        return cls("split")

    @classmethod
    def quadratic_times_q(cls, d: int) -> "CubicAlgebra":
        return cls("quadratic", quad_disc=int(d))

    @classmethod
    def cubic_field(cls, d: int, index: int = 0) -> "CubicAlgebra":
        """The index-th cubic field of discriminant d (in canonical form order)."""
        sign = "+" if d > 0 else "-"
        t = cf.ring_table(abs(d), sign)
        rows = t[(t[:, cf.DISC] == d) & (t[:, cf.MAXIMAL] == 1) & (t[:, cf.IRREDUCIBLE] == 1)]
        if not 0 <= index < len(rows):
            raise ValueError(f"no cubic field number {index} of discriminant {d} ({len(rows)} exist)")
        return cls("cubic", form=cf.BinaryCubicForm(*(int(v) for v in rows[index, :4])))

    @property
    def disc(self) -> int:
        if self.kind == "split":
            return 1
        if self.kind == "quadratic":
            return self.quad_disc
        return self.form.disc

    @property
    def aut_order(self) -> int:
        """|Aut(A)|: 6 for Q^3, 2 for F x Q, 3 for cyclic fields, 1 for S3 fields."""
        if self.kind == "split":
            return 6
        if self.kind == "quadratic":
            return 2
        return 3 if self.disc > 0 and math.isqrt(self.disc) ** 2 == self.disc else 1

    def mult_table(self) -> "MultTable":
        if self.kind == "split":
            return split_mult_table()
        if self.kind == "quadratic":
            # F x Q is the ring of y (x^2 + b x y + c y^2), with b^2 - 4c = d
            d = self.quad_disc
            b = d % 2
            return form_mult_table(cf.BinaryCubicForm(0, 1, b, (b - d) // 4))
        return form_mult_table(self.form)


def _roots_mod_p(f: cf.BinaryCubicForm, p: int) -> int:
    """Number of distinct roots of f in P^1(F_p)."""
    n = sum(1 for x in range(p) if f(x, 1) % p == 0)
    return n + (1 if f.a % p == 0 else 0)


def splitting_type(A: CubicAlgebra, p: int) -> SplitType:
    """How p factors in the maximal order of A, as sorted (f, e) pairs."""
    if p < 2 or factorize(p) != {p: 1}:
        raise ValueError(f"{p} is not prime")
    if p in A._splitting:
        return A._splitting[p]
    if A.kind == "split":
        st = ((1, 1),) * 3
    elif A.kind == "quadratic":
        k = kronecker(A.quad_disc, p)
        quad = {1: ((1, 1), (1, 1)), -1: ((2, 1),), 0: ((1, 2),)}[k]
        st = tuple(sorted(quad + ((1, 1),)))
    else:
        f = A.form
        n = _roots_mod_p(f, p)
        if f.disc % p:
            st = {3: ((1, 1),) * 3, 1: ((1, 1), (2, 1)), 0: ((3, 1),)}[n]
        else:
            # a maximal ring factors like its form mod p: a double root or a triple root
            st = {2: ((1, 1), (1, 2)), 1: ((1, 3),)}[n]
    A._splitting[p] = st
    return st


@dataclass(frozen=True)
class DirichletCoefficients:
    coefficients: tuple[int, ...]  # a_1 .. a_N

    def __post_init__(self):
        if self.coefficients and self.coefficients[0] != 1:
            raise ValueError("a_1 must be 1")
        for n, a in enumerate(self.coefficients, start=1):
            if a < 0 or (a and math.isqrt(n) ** 2 != n):
                raise ValueError(f"a_{n} = {a} is not allowed")

    @property
    def N(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.N:
            raise IndexError(n)
        return self.coefficients[n - 1]


def _poly_mul(a: list[int], b: list[int], k: int) -> list[int]:
    out = [0] * (k + 1)
    for i, x in enumerate(a[: k + 1]):
        if x:
            for j, y in enumerate(b[: k + 1 - i]):
                out[i + j] += x * y
    return out


def local_coefficients(A: CubicAlgebra, p: int, k: int) -> list[int]:
    """c_0..c_k with sum c_j t^j = prod_P (1 + t^{f_P}) / ((1 - t^2)(1 - p t^3))."""
    series = [1] + [0] * k
    for f_P, _ in splitting_type(A, p):
        factor = [0] * (k + 1)
        factor[0] = 1
        if f_P <= k:
            factor[f_P] += 1
        series = _poly_mul(series, factor, k)
    geo2 = [1 if j % 2 == 0 else 0 for j in range(k + 1)]
    geo3 = [p ** (j // 3) if j % 3 == 0 else 0 for j in range(k + 1)]
    return _poly_mul(_poly_mul(series, geo2, k), geo3, k)


def dw_coefficients(A: CubicAlgebra, N: int) -> DirichletCoefficients:
    """a_1..a_N of f_A(s); a_n vanishes unless n = m^2 and then counts orders of index m."""
    if N < 1:
        raise ValueError("N must be positive")
    M = math.isqrt(N)
    local = {}
    for p in primes_up_to(M):
        p = int(p)
        kmax = int(math.log(M, p)) + 1
        local[p] = local_coefficients(A, p, kmax)
    coeffs = [0] * N
    for m in range(1, M + 1):
        a = 1
        for p, e in factorize(m).items():
            a *= local[p][e]
        coeffs[m * m - 1] = a
    return DirichletCoefficients(tuple(coeffs))


# ---------------------------------------------------------------------------
# multiplication tables and the subring oracle


@dataclass(frozen=True)
class MultTable:
    """Structure constants c[i][j][k] of a rank-3 ring with basis e_0 = 1, e_1, e_2."""

    c: tuple

    def __post_init__(self):
        t = np.array(self.c, dtype=np.int64)
        if t.shape != (3, 3, 3):
            raise ValueError("table must be 3x3x3")
        eye = np.eye(3, dtype=np.int64)
        if not (np.array_equal(t[0], eye) and np.array_equal(t[:, 0], eye)):
            raise ValueError("e_0 must be the identity")
        if not np.array_equal(t, t.transpose(1, 0, 2)):
            raise ValueError("table is not commutative")
        # (e_i e_j) e_l = e_i (e_j e_l)
        left = np.einsum("ijk,klm->ijlm", t, t)
        right = np.einsum("jlk,ikm->ijlm", t, t)
        if not np.array_equal(left, right):
            raise ValueError("table is not associative")

    def mul(self, x, y) -> tuple[int, ...]:
        t = self.c
        return tuple(
            sum(x[i] * y[j] * t[i][j][k] for i in range(3) for j in range(3) if x[i] and y[j]) for k in range(3)
        )

    def trace(self, x) -> int:
        # trace of multiplication by x
        return sum(self.mul(x, tuple(int(i == j) for i in range(3)))[j] for j in range(3))

    def disc(self) -> int:
        basis = [tuple(int(i == j) for i in range(3)) for j in range(3)]
        m = [[self.trace(self.mul(u, v)) for v in basis] for u in basis]
        return round(np.linalg.det(np.array(m, dtype=float)))


def form_mult_table(f) -> MultTable:
    """Ring of the form (a, b, c, d) on the basis 1, w, t:
    wt = -ad, w^2 = -ac - b w + a t, t^2 = -bd - d w + c t."""
    a, b, c, d = (int(v) for v in f)
    one = (1, 0, 0)
    tab = [[None] * 3 for _ in range(3)]
    tab[0][0] = one
    tab[0][1] = tab[1][0] = (0, 1, 0)
    tab[0][2] = tab[2][0] = (0, 0, 1)
    tab[1][1] = (-a * c, -b, a)
    tab[1][2] = tab[2][1] = (-a * d, 0, 0)
    tab[2][2] = (-b * d, -d, c)
    return MultTable(tuple(tuple(tuple(x) for x in row) for row in tab))


def split_mult_table() -> MultTable:
    """Z^3 on the basis 1, e_2, e_3 with e_2, e_3 orthogonal idempotents."""
    tab = [
        [(1, 0, 0), (0, 1, 0), (0, 0, 1)],
        [(0, 1, 0), (0, 1, 0), (0, 0, 0)],
        [(0, 0, 1), (0, 0, 0), (0, 0, 1)],
    ]
    return MultTable(tuple(tuple(row) for row in tab))


def _hnf_lattices(m: int):
    """Upper triangular HNF bases (rows) of the index-m sublattices of Z^3."""
    for d0 in range(1, m + 1):
        if m % d0:
            continue
        for d1 in range(1, m // d0 + 1):
            if (m // d0) % d1:
                continue
            d2 = m // (d0 * d1)
            for b01 in range(d1):
                for b02 in range(d2):
                    for b12 in range(d2):
                        yield ((d0, b01, b02), (0, d1, b12), (0, 0, d2))


def _in_lattice(H, v) -> bool:
    v = list(v)
    for i in range(3):
        if v[i] % H[i][i]:
            return False
        q = v[i] // H[i][i]
        for j in range(i, 3):
            v[j] -= q * H[i][j]
    return True


def brute_subrings(table: MultTable, m: int) -> int:
    """Number of index-m sublattices containing 1 and closed under multiplication."""
    if not 1 <= m <= 6:
        raise ValueError("index must be in 1..6")
    count = 0
    for H in _hnf_lattices(m):
        if not _in_lattice(H, (1, 0, 0)):
            continue
        if all(_in_lattice(H, table.mul(u, v)) for u, v in itertools.combinations_with_replacement(H, 2)):
            count += 1
    return count


# ---------------------------------------------------------------------------
# the resolvent series


@dataclass(frozen=True)
class ResolventReport:
    disc: int
    h3: int
    lhs: tuple[Fraction, ...]  # coefficient of |disc F|^{-s} n^{-2s}, n = 1..depth
    rhs: tuple[Fraction, ...]
    lhs_algebra_weight: tuple[Fraction, ...]  # the same count weighted by 1/|Aut(A)|

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs


def _prime_ideal_classes(d: int, p: int) -> list[QuadraticForm | None]:
    """Classes (reduced forms) of the degree-one primes above p; None for the ideal
    (p) when p is inert, whose class is trivial."""
    k = kronecker(d, p)
    if k == -1:
        return [None]
    out = []
    for b in range(0, 2 * p):
        if (b * b - d) % (4 * p) == 0:
            f = QuadraticForm(p, b, (b * b - d) // (4 * p))
            # b and -b give the two conjugate primes of a split p
            out.append(reduce_form(f) if d < 0 else f)
    return out


def _squarefree_ideal_counts(d: int, N: int, in_subgroup) -> list[int]:
    """s[m] = #{squarefree ideals of norm m with class in 3 Cl_F}, m = 0..N."""
    # prime ideals with norm <= N: (norm, class)
    primes = []
    for p in primes_up_to(N):
        p = int(p)
        k = kronecker(d, p)
        if k == -1:
            if p * p <= N:
                primes.append((p * p, None))
            continue
        for cls in _prime_ideal_classes(d, p):
            primes.append((p, cls))
    s = [0] * (N + 1)
    # products of distinct prime ideals
    def walk(i, norm, cls):
        if in_subgroup(cls):
            s[norm] += 1
        for j in range(i, len(primes)):
            q, c = primes[j]
            if norm * q > N:
                continue
            walk(j + 1, norm * q, _mul_class(d, cls, c))

    walk(0, 1, None)
    return s


def _mul_class(d: int, x, y):
    if x is None:
        return y
    if y is None:
        return x
    if d > 0:
        return None  # real fields: only used when every class is a cube
    return compose(x, y)


def resolvent_series_check(d: int, depth: int = 2) -> ResolventReport:
    """Both sides of the resolvent generating series for F = Q(sqrt d), coefficients
    of |d|^{-s} n^{-2s} for n = 1..depth."""
    if not is_fundamental(d):
        raise ValueError(f"{d} is not a fundamental discriminant")
    if abs(d) > 200 or not 1 <= depth <= 3:
        raise ValueError("needs |disc F| <= 200 and depth <= 3")
    F = class_group(d)
    # the class subgroup 3 Cl_F
    if d < 0:
        forms = reduced_forms(d)
        cubes = {power(f, 3) for f in forms}
        one = principal_form(d)
        in_subgroup = lambda c: (one if c is None else c) in cubes  # noqa: E731
    else:
        if F.h % 3 == 0:
            raise NotImplementedError("real fields with 3 | h need real ideal classes")
        in_subgroup = lambda c: True  # noqa: E731  cubing is onto when 3 does not divide h
    s = _squarefree_ideal_counts(d, depth, in_subgroup)
    # zeta(2s) zeta(6s-1) in powers n^{-2s}: coefficient sum_{k^3 | n} k
    z = [0] * (depth + 1)
    for n in range(1, depth + 1):
        z[n] = sum(k for k in range(1, n + 1) if n % (k ** 3) == 0)
    rhs = []
    for n in range(1, depth + 1):
        c = sum(z[n // m] * s[m] for m in range(1, n + 1) if n % m == 0)
        rhs.append(Fraction(F.h3, 2) * c)
    # left side: rings of discriminant d n^2 whose algebra has discriminant d
    sign = "+" if d > 0 else "-"
    t = cf.ring_table(abs(d) * depth * depth, sign)
    lhs = [Fraction(0)] * depth
    lhs_alg = [Fraction(0)] * depth
    for row in t:
        D = int(row[cf.DISC])
        if D % d:
            continue
        q = D // d
        n = math.isqrt(q)
        if n * n != q or n > depth:
            continue
        f = cf.BinaryCubicForm(*(int(v) for v in row[:4]))
        if cf.maximal_overform(f).disc != d:
            continue
        lhs[n - 1] += Fraction(1, int(row[cf.AUT]))
        lhs_alg[n - 1] += Fraction(1, 1 if row[cf.IRREDUCIBLE] else 2)
    return ResolventReport(d, F.h3, tuple(lhs), tuple(rhs), tuple(lhs_alg))
