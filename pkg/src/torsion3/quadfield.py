"""Class groups of quadratic fields through binary quadratic forms.

Imaginary fields: reduced forms, Gauss composition, and the full group structure.
Real fields: regulator from the continued fraction of the principal cycle and the
class number recovered from the analytic class number formula with a certified
L(1, chi_d); the 3-torsion of real fields is read off from cubic field counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional

import mpmath
import numpy as np

from . import _lkernels
from .arith import factorize, fundamental_mask, is_fundamental
from .cache import cached_arrays
from .lfunc import CertifiedReal

__all__ = [
    "FundamentalDiscriminant",
    "QuadraticForm",
    "QuadFieldData",
    "PrecisionError",
    "fundamental_discriminants",
    "reduce",
    "compose",
    "class_group",
    "three_torsion",
    "reduced_forms",
    "imaginary_class_number_table",
    "real_field_table",
]


class PrecisionError(ArithmeticError):
    """An analytic estimate was not sharp enough to certify an integer."""


class FundamentalDiscriminant(int):
    """An int that is known to be the discriminant of a quadratic field."""

    def __new__(cls, value: int):
        value = int(value)
        if not is_fundamental(value):
            raise ValueError(f"{value} is not a fundamental discriminant")
        return super().__new__(cls, value)


def fundamental_discriminants(bound: int) -> Iterator[FundamentalDiscriminant]:
    """Fundamental discriminants with |d| <= bound, by |d| and then positive first."""
    if bound < 3:
        raise ValueError("bound must be at least 3")
    neg, pos = fundamental_mask(bound)
    for D in range(3, bound + 1):
        if pos[D]:
            yield FundamentalDiscriminant(D)
        if neg[D]:
            yield FundamentalDiscriminant(-D)


def count_fundamental_discriminants(bound: int) -> tuple[int, int]:
    """(number with d < 0, number with d > 0) among |d| <= bound."""
    neg, pos = fundamental_mask(bound)
    return int(neg.sum()), int(pos.sum())


@dataclass(frozen=True, order=True)
class QuadraticForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if self.disc >= 0 or a <= 0:
            return False
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def __iter__(self):
        return iter((self.a, self.b, self.c))

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c})"


def reduce(f: QuadraticForm) -> QuadraticForm:
    """Reduced representative of a positive definite form."""
    a, b, c = f.a, f.b, f.c
    if b * b - 4 * a * c >= 0:
        raise ValueError("reduce expects a negative discriminant")
    if a <= 0:
        raise ValueError("reduce expects a positive definite form (a > 0)")
    while True:
        # translate b into (-a, a]
        if not (-a < b <= a):
            k = (a - b) // (2 * a)
            c = a * k * k + b * k + c
            b = b + 2 * a * k
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return QuadraticForm(a, b, c)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(u, v, g) with u a + v b = g = gcd(a, b) >= 0."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -x0, -y0, -a
    return x0, y0, a


def compose(f: QuadraticForm, g: QuadraticForm) -> QuadraticForm:
    """Gauss composition of two forms of the same discriminant (reduced result)."""
    if f.disc != g.disc:
        raise ValueError("forms of different discriminants")
    (a1, b1, c1), (a2, b2, c2) = tuple(f), tuple(g)
    if a1 > a2:
        (a1, b1, c1), (a2, b2, c2) = (a2, b2, c2), (a1, b1, c1)
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        u, _, d = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        x2, y2, d1 = _xgcd(s, d)
        y2 = -y2
    v1 = a1 // d1
    v2 = a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (b3 * b3 - f.disc) // (4 * a3)
    return reduce(QuadraticForm(a3, b3, c3))


def principal_form(d: int) -> QuadraticForm:
    b = d % 2
    return reduce(QuadraticForm(1, b, (b * b - d) // 4))


def power(f: QuadraticForm, n: int) -> QuadraticForm:
    result = principal_form(f.disc)
    base = f
    while n:
        if n & 1:
            result = compose(result, base)
        n >>= 1
        if n:
            base = compose(base, base)
    return result


def reduced_forms(d: int) -> list[QuadraticForm]:
    """All reduced primitive forms of discriminant d < 0."""
    if d >= 0:
        raise ValueError("reduced_forms expects d < 0")
    out = []
    amax = math.isqrt(-d // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - d) % 2:
                continue
            num = b * b - d
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (a == c and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) != 1:
                continue
            out.append(QuadraticForm(a, b, c))
    return out


@dataclass(frozen=True)
class QuadFieldData:
    """Class group and unit data of F = Q(sqrt disc)."""

    disc: int
    h: int
    cl_invariants: Optional[tuple[int, ...]]
    h3: int
    r1: int
    r2: int
    w: int
    regulator: CertifiedReal = field(repr=False)

    @property
    def is_imaginary(self) -> bool:
        return self.disc < 0


def _units(d: int) -> int:
    return {-3: 6, -4: 4}.get(d, 2)


def _invariants_from_orders(orders: list[int], h: int) -> tuple[int, ...]:
    """Invariant factors d_1 | d_2 | ... of an abelian group from its element orders."""
    factors_by_prime: dict[int, list[int]] = {}
    for p in factorize(h):
        counts = []
        k = 0
        while True:
            pk = p ** k
            n_k = sum(1 for o in orders if _p_part(o, p) <= pk)
            counts.append(n_k)
            if n_k == sum(1 for _ in orders if True) and k > 0 and counts[-1] == counts[-2]:
                break
            k += 1
            if k > 64:
                break
        # counts[k] = |G[p^k]|; number of cyclic factors of order >= p^k is log_p(counts[k]/counts[k-1])
        exps = []
        for k in range(1, len(counts)):
            ratio = counts[k] // counts[k - 1]
            exps.append(round(math.log(ratio, p)) if ratio > 1 else 0)
        # exps[k-1] = #factors with exponent >= k
        cyc = []
        for k in range(len(exps), 0, -1):
            n_exact = exps[k - 1] - (exps[k] if k < len(exps) else 0)
            cyc.extend([p ** k] * n_exact)
        factors_by_prime[p] = sorted(cyc, reverse=True)
    width = max((len(v) for v in factors_by_prime.values()), default=0)
    inv = []
    for i in range(width):
        m = 1
        for v in factors_by_prime.values():
            if i < len(v):
                m *= v[i]
        inv.append(m)
    return tuple(sorted(inv)) if inv else ()


def _p_part(n: int, p: int) -> int:
    r = 1
    while n % p == 0:
        n //= p
        r *= p
    return r


def element_order(f: QuadraticForm, h: int) -> int:
    one = principal_form(f.disc)
    order = h
    for p in factorize(h):
        while order % p == 0 and power(f, order // p) == one:
            order //= p
    return order


@lru_cache(maxsize=4096)
def class_group(d: int) -> QuadFieldData:
    """Class group data of Q(sqrt d).

    For d > 0 the group structure is not computed (cl_invariants is None); h3 comes
    from counting cubic fields of discriminant d.
    """
    d = int(FundamentalDiscriminant(d))
    if d < 0:
        forms = reduced_forms(d)
        h = len(forms)
        orders = [element_order(f, h) for f in forms]
        inv = _invariants_from_orders(orders, h)
        h3 = 3 ** sum(1 for m in inv if m % 3 == 0)
        return QuadFieldData(d, h, inv, h3, 0, 1, _units(d), CertifiedReal.exact(0))
    reg = regulator(d)
    h = real_class_number(d, reg)
    from .cubicforms import h3_via_fields

    h3 = h3_via_fields(d)
    return QuadFieldData(d, h, None, h3, 2, 0, 2, reg)


def regulator(d: int) -> CertifiedReal:
    """log of the fundamental unit of Q(sqrt d), d > 0 fundamental."""
    R, rad = _lkernels.batch_regulators(np.array([d], dtype=np.int64))
    return CertifiedReal(mpmath.mpf(float(R[0])), mpmath.mpf(float(rad[0])))


def real_class_number(d: int, reg: CertifiedReal) -> int:
    L1, _, r1, _ = _lkernels.batch_l_values(np.array([d], dtype=np.int64), 42.0)
    L = CertifiedReal(mpmath.mpf(float(L1[0])), mpmath.mpf(float(r1[0])))
    est = L * CertifiedReal.exact(d).sqrt() / (2 * reg)
    h = int(mpmath.nint(est.midpoint))
    if not (h - 0.5 < est.lower and est.upper < h + 0.5) or h < 1:
        raise PrecisionError(f"cannot certify the class number of Q(sqrt {d}): {est}")
    return h


def three_torsion(d: int) -> int:
    """|Cl(Q(sqrt d))[3]|."""
    d = int(FundamentalDiscriminant(d))
    if d > 0:
        return class_group(d).h3
    forms = reduced_forms(d)
    h = len(forms)
    if h % 3:
        return 1
    one = principal_form(d)
    return sum(1 for f in forms if compose(compose(f, f), f) == one)


# ---------------------------------------------------------------------------
# bulk tables


@lru_cache(maxsize=4)
def imaginary_class_number_table(bound: int) -> np.ndarray:
    """h[D] = class number of Q(sqrt -D) for fundamental -D with D <= bound, else 0."""
    neg, _ = fundamental_mask(bound)
    return _lkernels.imaginary_class_numbers(bound, neg)


@dataclass(frozen=True)
class RealFieldTable:
    disc: np.ndarray
    h: np.ndarray
    regulator: np.ndarray
    regulator_radius: np.ndarray
    l1: np.ndarray
    l1_radius: np.ndarray
    l2: np.ndarray
    l2_radius: np.ndarray


@lru_cache(maxsize=4)
def real_field_table(bound: int) -> RealFieldTable:
    """Class numbers, regulators and L-values of all real quadratic fields with d <= bound."""
    arrays = cached_arrays(f"realfields-{bound}", lambda: _build_real_field_table(bound))
    return RealFieldTable(**arrays)


def _build_real_field_table(bound: int) -> dict[str, np.ndarray]:
    _, pos = fundamental_mask(bound)
    ds = np.flatnonzero(pos).astype(np.int64)
    R, Rrad = _lkernels.batch_regulators(ds)
    L1, L2, r1, r2 = _lkernels.batch_l_values(ds, 42.0)
    est = np.sqrt(ds) * L1 / (2.0 * R)
    # interval of sqrt(d) L1 / (2R): relative perturbations add up
    err = est * (r1 / L1 + Rrad / R + 1e-15)
    h = np.rint(est).astype(np.int64)
    bad = (np.abs(est - h) + err >= 0.5) | (h < 1)
    if bad.any():
        raise PrecisionError(f"class numbers not certified for d = {ds[bad][:5].tolist()}")
    return dict(disc=ds, h=h, regulator=R, regulator_radius=Rrad, l1=L1, l1_radius=r1, l2=L2, l2_radius=r2)
