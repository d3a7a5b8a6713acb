"""Binary cubic forms, cubic rings and cubic field counts.

GL2(Z)-classes of integral binary cubic forms correspond to isomorphism classes of
cubic rings (Delone-Faddeev); maximal irreducible classes are cubic fields. Every
class is enumerated once through a canonical reduced representative; the reduction
conventions are documented in :mod:`torsion3._cubic_kernels`.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Literal

import mpmath
import numpy as np

from . import _cubic_kernels as K
from .arith import factorize, fundamental_mask, is_fundamental, smallest_prime_factor_table
from .cache import cached_arrays
from .lfunc import CertifiedReal

__all__ = [
    "BinaryCubicForm",
    "CubicRingClass",
    "GAMMA",
    "disc",
    "reduce",
    "enumerate",
    "ring_table",
    "is_maximal",
    "is_irreducible",
    "maximal_overform",
    "count_fields",
    "FieldCount",
    "fields_per_disc",
    "h3_via_fields",
    "h3_table",
    "weighted_ring_count",
    "shintani_residue",
    "ShintaniResidue",
    "ZETA_ONE_THIRD",
]

Sign = Literal["+", "-"]

# columns of a ring table
A, B, C, D, DISC, AUT, MAXIMAL, IRREDUCIBLE = range(8)


def _substitute_quadratic(q, m):
    P, Q, R = q
    p, qq, r, s = m
    return (
        P * p * p + Q * p * qq + R * qq * qq,
        2 * P * p * r + Q * (p * s + qq * r) + 2 * R * qq * s,
        P * r * r + Q * r * s + R * s * s,
    )


def _build_gamma() -> np.ndarray:
    """Matrices with entries in {-1, 0, 1} fixing x^2+y^2 or x^2 +- xy + y^2.

    Every pair of reduced forms in one GL2(Z)-class differs by one of these, so the
    canonical representative and the stabilizer are determined inside this set.
    """
    corners = [(1, 0, 1), (1, 1, 1), (1, -1, 1)]
    mats = set()
    for m in itertools.product((-1, 0, 1), repeat=4):
        if abs(m[0] * m[3] - m[1] * m[2]) != 1:
            continue
        mt = (m[0], m[2], m[1], m[3])
        if any(_substitute_quadratic(q, m) == q or _substitute_quadratic(q, mt) == q for q in corners):
            mats.add(m)
    return np.array(sorted(mats), dtype=np.int64)


GAMMA = _build_gamma()


@dataclass(frozen=True, order=True)
class BinaryCubicForm:
    """The form a x^3 + b x^2 y + c x y^2 + d y^3."""

    a: int
    b: int
    c: int
    d: int

    @property
    def disc(self) -> int:
        return disc(self)

    def __iter__(self):
        return iter((self.a, self.b, self.c, self.d))

    def __call__(self, x: int, y: int) -> int:
        return self.a * x ** 3 + self.b * x * x * y + self.c * x * y * y + self.d * y ** 3

    def act(self, m) -> "BinaryCubicForm":
        """det(m)^-1 f(p x + r y, q x + s y) for m = (p, q, r, s)."""
        p, q, r, s = (int(v) for v in np.asarray(m).ravel())
        det = p * s - q * r
        if det not in (1, -1):
            raise ValueError("matrix is not in GL2(Z)")
        a, b, c, d = self
        A_ = a * p ** 3 + b * p * p * q + c * p * q * q + d * q ** 3
        D_ = a * r ** 3 + b * r * r * s + c * r * s * s + d * s ** 3
        B_ = 3 * a * p * p * r + b * (p * p * s + 2 * p * q * r) + c * (q * q * r + 2 * p * q * s) + 3 * d * q * q * s
        C_ = 3 * a * p * r * r + b * (r * r * q + 2 * p * r * s) + c * (p * s * s + 2 * q * r * s) + 3 * d * q * s * s
        return BinaryCubicForm(det * A_, det * B_, det * C_, det * D_)

    def hessian(self) -> tuple[int, int, int]:
        a, b, c, d = self
        return (b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d)

    def is_reduced(self) -> bool:
        return bool(K.is_reduced(self.a, self.b, self.c, self.d, self.disc))

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c},{self.d})"


@dataclass(frozen=True)
class CubicRingClass:
    form: BinaryCubicForm
    aut_order: int
    maximal: bool
    irreducible: bool

    @property
    def disc(self) -> int:
        return self.form.disc

    def as_record(self) -> dict:
        a, b, c, d = self.form
        return {"a": a, "b": b, "c": c, "d": d, "disc": self.disc, "aut": self.aut_order,
                "maximal": self.maximal, "irreducible": self.irreducible}


def disc(f) -> int:
    a, b, c, d = (int(v) for v in f)
    return 18 * a * b * c * d + b * b * c * c - 4 * a * c ** 3 - 4 * b ** 3 * d - 27 * a * a * d * d


# ---------------------------------------------------------------------------
# reduction of a single form

_T = lambda k: (1, 0, k, 1)  # noqa: E731  f(x + k y, y)
_S = (0, 1, -1, 0)  # f(-y, x)
_FLIP = (1, 0, 0, -1)  # -f(x, -y)


def _covariant_quadratic(f: BinaryCubicForm) -> tuple[float, float, float]:
    """A positive definite quadratic form q with q_{g.f} proportional to q_f o g."""
    dsc = f.disc
    if dsc > 0:
        return tuple(float(v) for v in f.hessian())
    a, b, c, d = f
    if a == 0:
        # f = y (b x^2 + c x y + d y^2); the quadratic factor is definite
        q = (float(b), float(c), float(d))
    else:
        roots = np.roots([a, b, c, d])
        t = float(roots[np.argmin(np.abs(roots.imag))].real)
        # f(x, 1) / (a (x - t)) = x^2 + u x + v
        u = (b + a * t) / a
        v = (c + b * t + a * t * t) / a
        q = (1.0, u, v)
    if q[0] < 0:
        q = tuple(-x for x in q)
    return q


def _reduce_quadratic_steps(f: BinaryCubicForm) -> BinaryCubicForm:
    for _ in range(10_000):
        P, Q, R = _covariant_quadratic(f)
        if abs(Q) > P * (1 + 1e-12):
            k = math.floor((P - Q) / (2 * P))
            g = f.act(_T(k))
            if g == f:
                break
            f = g
            continue
        if P > R * (1 + 1e-12):
            f = f.act(_S)
            continue
        break
    P, Q, R = _covariant_quadratic(f)
    if Q < 0:
        f = f.act(_FLIP)
    return f


def _canonical_in_orbit(f: BinaryCubicForm) -> BinaryCubicForm | None:
    dsc = f.disc
    best = None
    arr = np.array([tuple(f)], dtype=np.int64)
    for img in K.apply_all(arr, GAMMA)[0]:
        g = tuple(int(v) for v in img)
        if K.is_reduced(*g, dsc) and (best is None or g > best):
            best = g
    return None if best is None else BinaryCubicForm(*best)


_LOCAL_MOVES = [(1, 0, 0, 1), _T(1), _T(-1), _S, _FLIP, (0, 1, 1, 0)]


def reduce(f) -> BinaryCubicForm:
    """Canonical reduced representative of the GL2(Z)-class of f (disc != 0)."""
    f = BinaryCubicForm(*(int(v) for v in f))
    if f.disc == 0:
        raise ValueError("degenerate form (zero discriminant)")
    g = _reduce_quadratic_steps(f)
    # floating-point ties on the boundary: search a few neighbours exactly
    frontier = [g]
    seen = {g}
    for _ in range(4):
        for h in frontier:
            canon = _canonical_in_orbit(h)
            if canon is not None:
                return canon
        nxt = []
        for h in frontier:
            for m in _LOCAL_MOVES:
                k = h.act(m)
                if k not in seen:
                    seen.add(k)
                    nxt.append(k)
        frontier = nxt
    raise ArithmeticError(f"reduction failed for {f}")


def is_reduced(f) -> bool:
    f = BinaryCubicForm(*f)
    return f.is_reduced()


def stabilizer_order(f) -> int:
    """|{g in GL2(Z) : g.f = f}| for a reduced form f."""
    f = BinaryCubicForm(*f)
    if not f.is_reduced():
        f = reduce(f)
    ok, aut = K.canonical_and_aut(f.a, f.b, f.c, f.d, f.disc, GAMMA)
    if not ok:
        f = reduce(f)
        ok, aut = K.canonical_and_aut(f.a, f.b, f.c, f.d, f.disc, GAMMA)
    return int(aut)


# ---------------------------------------------------------------------------
# local properties


def is_maximal(f) -> bool:
    """Is the cubic ring R(f) maximal at every prime p with p^2 | disc(f)."""
    a, b, c, d = (int(v) for v in f)
    dsc = disc((a, b, c, d))
    if dsc == 0:
        raise ValueError("degenerate form (zero discriminant)")
    return all(K.maximal_at(a, b, c, d, p) for p, e in factorize(dsc).items() if e >= 2)


def is_irreducible(f) -> bool:
    a, b, c, d = (int(v) for v in f)
    return bool(K.is_irreducible(a, b, c, d))


def _multiple_root_lift(f: BinaryCubicForm, p: int):
    """A coprime lift (x, y) of a multiple root of f mod p with f(x, y) = 0 mod p^2."""
    a, b, c, d = f
    for k in range(p + 1):
        x, y = (1, 0) if k == p else (k, 1)
        if f(x, y) % p:
            continue
        fx = 3 * a * x * x + 2 * b * x * y + c * y * y
        fy = b * x * x + 2 * c * x * y + 3 * d * y * y
        if fx % p or fy % p:
            continue
        if f(x, y) % (p * p) == 0:
            return x, y
    return None


def maximal_overform(f) -> BinaryCubicForm:
    """Form of the maximal order containing R(f) (same algebra, disc divided by index^2)."""
    f = BinaryCubicForm(*(int(v) for v in f))
    if f.disc == 0:
        raise ValueError("degenerate form (zero discriminant)")
    changed = True
    while changed:
        changed = False
        for p, e in factorize(f.disc).items():
            if e < 2:
                continue
            if all(v % p == 0 for v in f):
                f = BinaryCubicForm(*(v // p for v in f))
                changed = True
                break
            lift = _multiple_root_lift(f, p)
            if lift is None:
                continue
            x, y = lift
            # complete (x, y) to a matrix of determinant 1 so that the root moves to (1:0)
            g, r, s = _bezout_completion(x, y)
            h = f.act((x, y, r, s))
            assert h.a % (p * p) == 0 and h.b % p == 0
            f = BinaryCubicForm(h.a // (p * p), h.b // p, h.c, h.d * p)
            changed = True
            break
    return f


def _bezout_completion(x: int, y: int) -> tuple[int, int, int]:
    """(1, r, s) with x s - y r = 1 for coprime x, y."""
    old_r, r = x, y
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    # old_s x + old_t y = old_r = +-1
    sgn = old_r
    # want x s' - y r' = 1: s' = old_s * sgn, r' = -old_t * sgn
    return 1, -old_t * sgn, old_s * sgn


# ---------------------------------------------------------------------------
# enumeration


def _a_range(bound: int, sign: Sign) -> int:
    if sign == "+":
        return int((2.0 / 3.0) ** 1.5 * bound ** 0.25) + 1
    return int((16.0 * bound / 27.0) ** 0.25) + 1


def _check_sign(sign: str) -> Sign:
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    return sign  # type: ignore[return-value]


def _enumerate_chunk(args):
    lo, hi, a_lo, a_hi, sign, with_max, widen = args
    spf = smallest_prime_factor_table(hi) if with_max and hi <= 5 * 10 ** 7 else np.zeros(1, np.int32)
    fn = K.enumerate_positive if sign == "+" else K.enumerate_negative
    return fn(lo, hi, a_lo, a_hi, GAMMA, spf, with_max, widen)


def _sort_table(t: np.ndarray) -> np.ndarray:
    order = np.lexsort((t[:, D], t[:, C], t[:, B], t[:, A], np.abs(t[:, DISC])))
    return t[order]


def _build_ring_table(bound: int, sign: Sign, jobs: int = 1, lower: int = 1, widen: int = 1) -> np.ndarray:
    amax = _a_range(bound, sign) * widen
    if jobs <= 1:
        t = _enumerate_chunk((lower, bound, 0, amax, sign, True, widen))
    else:
        # small leading coefficients dominate the work: split them finely
        cuts = sorted({0, 1, 2, 3, 5, 8, amax + 1})
        chunks = [(lower, bound, lo, hi - 1, sign, True, widen) for lo, hi in zip(cuts, cuts[1:]) if lo < hi]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_enumerate_chunk, chunks))
        t = np.concatenate(parts) if parts else np.zeros((0, 8), np.int64)
    return _sort_table(t)


@lru_cache(maxsize=8)
def ring_table(bound: int, sign: Sign, jobs: int = 1) -> np.ndarray:
    """All canonical classes with 0 < sign*disc <= bound as an (n, 8) int64 array.

    Columns: a, b, c, d, disc, aut, maximal, irreducible. Rows sorted by |disc| then
    coefficients. Tables with bound >= 10^5 are memoized on disk.
    """
    sign = _check_sign(sign)
    if bound < 1:
        return np.zeros((0, 8), dtype=np.int64)
    if bound < 10 ** 5:
        return _build_ring_table(bound, sign, jobs)
    name = f"rings-{'pos' if sign == '+' else 'neg'}-{bound}"
    return cached_arrays(name, lambda: {"t": _build_ring_table(bound, sign, jobs)})["t"]


def _row_to_class(row) -> CubicRingClass:
    return CubicRingClass(BinaryCubicForm(*(int(v) for v in row[:4])), int(row[AUT]), bool(row[MAXIMAL]), bool(row[IRREDUCIBLE]))


def enumerate(bound: int, sign: Sign, jobs: int = 1) -> Iterator[CubicRingClass]:  # noqa: A001
    """Every GL2(Z)-class of forms with 0 < sign*disc <= bound, once each."""
    for row in ring_table(bound, sign, jobs):
        yield _row_to_class(row)


def box_oracle(bound: int, sign: Sign, box: int) -> set[tuple[int, int, int, int]]:
    """Canonical classes found by exhaustive search over |coefficients| <= box."""
    sgn = 1 if _check_sign(sign) == "+" else -1
    t = K.box_search(bound, sgn, box, GAMMA)
    return {tuple(int(v) for v in r[:4]) for r in t}


# ---------------------------------------------------------------------------
# field counts and 3-torsion


@dataclass(frozen=True)
class FieldCount:
    total: int
    s3: int
    c3: int


def _field_rows(t: np.ndarray) -> np.ndarray:
    return t[(t[:, MAXIMAL] == 1) & (t[:, IRREDUCIBLE] == 1)]


def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def count_fields(bound: int, sign: Sign, jobs: int = 1, widen: int = 1) -> FieldCount:
    """Cubic fields with 0 < sign*disc <= bound, split into S3 and cyclic ones."""
    sign = _check_sign(sign)
    if bound < 1:
        return FieldCount(0, 0, 0)
    t = ring_table(bound, sign, jobs) if widen == 1 else _build_ring_table(bound, sign, jobs, widen=widen)
    rows = _field_rows(t)
    c3 = sum(1 for v in rows[:, DISC] if _is_square(int(v)))
    return FieldCount(len(rows), len(rows) - c3, c3)


@lru_cache(maxsize=8)
def fields_per_disc(bound: int, sign: Sign) -> np.ndarray:
    """n[D] = number of cubic fields with discriminant sign*D, D <= bound."""
    rows = _field_rows(ring_table(bound, _check_sign(sign)))
    return np.bincount(np.abs(rows[:, DISC]), minlength=bound + 1).astype(np.int64)


def h3_via_fields(d: int) -> int:
    """|Cl(Q(sqrt d))[3]| = 1 + 2 * #{cubic fields of discriminant d}."""
    d = int(d)
    if not is_fundamental(d):
        raise ValueError(f"{d} is not a fundamental discriminant")
    sign: Sign = "+" if d > 0 else "-"
    n = abs(d)
    fn = K.enumerate_positive if sign == "+" else K.enumerate_negative
    t = fn(n, n, 0, _a_range(n, sign), GAMMA, np.zeros(1, np.int32), True, 1)
    return 1 + 2 * int(len(_field_rows(t)))


def h3_table(bound: int, sign: Sign) -> np.ndarray:
    """h3[D] for fundamental sign*D with D <= bound (0 at non-fundamental D)."""
    neg, pos = fundamental_mask(bound)
    mask = pos if _check_sign(sign) == "+" else neg
    n = fields_per_disc(bound, sign)
    return np.where(mask, 1 + 2 * n, 0)


# ---------------------------------------------------------------------------
# ring counts and Shintani residues


def weighted_ring_count_exact(bound: int, sign: Sign, jobs: int = 1) -> Fraction:
    """Sum over classes with 0 < sign*disc <= bound of 1/|Aut|, as an exact rational."""
    if bound < 1:
        return Fraction(0)
    aut = ring_table(bound, _check_sign(sign), jobs)[:, AUT]
    counts = np.bincount(aut, minlength=7)
    if counts[0] or counts[4] or counts[5]:
        raise ArithmeticError("unexpected stabilizer order")
    return sum((Fraction(int(counts[k]), k) for k in (1, 2, 3, 6)), Fraction(0))


def weighted_ring_count(bound: int, sign: Sign, jobs: int = 1) -> CertifiedReal:
    q = weighted_ring_count_exact(bound, sign, jobs)
    return CertifiedReal.from_interval(
        mpmath.mpf(q.numerator) / q.denominator, mpmath.mpf(q.numerator) / q.denominator
    ) if q else CertifiedReal.exact(0)


# zeta(1/3); digits from an Euler-Maclaurin evaluation, radius well above the last digit
ZETA_ONE_THIRD = CertifiedReal("-0.9733602483507827154688868624478965707728", "1e-36")


@dataclass(frozen=True)
class ShintaniResidue:
    """Leading (s = 1) and secondary (s = 5/6) pole data of the cubic-ring zeta function."""

    main: CertifiedReal
    secondary: CertifiedReal

    def predicted_count(self, X: float) -> CertifiedReal:
        """main * X + (6/5) secondary * X^(5/6): the two-pole approximation of the count."""
        X = mpmath.mpf(X)
        return self.main * X + self.secondary * (mpmath.mpf(6) / 5) * X ** (mpmath.mpf(5) / 6)


def shintani_residue(alpha: str) -> ShintaniResidue:
    """Residues at s = 1 and s = 5/6 of the count of cubic rings over Q of signature alpha.

    alpha is "R3" (three real embeddings, positive discriminant) or "RC" (one real,
    one complex pair, negative discriminant).
    """
    iv = mpmath.iv
    if alpha in ("R3", "+", "ℝ³"):
        r = 1
    elif alpha in ("RC", "-", "ℝ×ℂ"):
        r = 0
    else:
        raise ValueError("alpha must be 'R3' or 'RC'")
    r1, r2 = 1, 0  # Q
    zeta2 = iv.pi ** 2 / 6
    res_q = iv.mpf(1)
    frak_a = zeta2 * res_q / 2 ** (r1 + r2 + 1)
    main = frak_a * (1 + iv.mpf(1) / 3 ** (r + r2))
    # B = 3^{r1 + r2/2} zeta(1/3) Res / (6 * 2^{r1+r2} * sqrt|disc Q|) * (Gamma(1/3)^3 / (2 pi))^{[k:Q]}
    z13 = ZETA_ONE_THIRD._iv()
    gamma13 = iv.gamma(iv.mpf(1) / 3)
    frak_b = iv.mpf(3) ** (r1 + iv.mpf(r2) / 2) * z13 * res_q / (6 * 2 ** (r1 + r2)) * (gamma13 ** 3 / (2 * iv.pi))
    secondary = frak_b * iv.mpf(3) ** (-iv.mpf(r) / 2)
    return ShintaniResidue(CertifiedReal._from_iv(main), CertifiedReal._from_iv(secondary))
