"""Certified values of quadratic Dirichlet L-functions and Dedekind zeta data.

Every analytic quantity is returned as a :class:`CertifiedReal`, an interval
``[midpoint - radius, midpoint + radius]`` guaranteed to contain the true value.
Arithmetic between certified reals is delegated to ``mpmath.iv`` so radii are
propagated with outward rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

import mpmath
import numpy as np

from . import _lkernels
from .arith import is_fundamental, kronecker

if TYPE_CHECKING:
    from .quadfield import QuadFieldData

__all__ = [
    "CertifiedReal",
    "kronecker",
    "l_at_2",
    "zeta_f_at_2",
    "residue",
    "ideal_count",
    "batch_l_values",
]

_iv = mpmath.iv
_iv.prec = 128
_mp = mpmath.mp


@dataclass(frozen=True)
class CertifiedReal:
    """A real number known to lie in ``[midpoint - radius, midpoint + radius]``."""

    midpoint: mpmath.mpf
    radius: mpmath.mpf

    def __post_init__(self):
        # convert at the working precision so decimal strings keep their digits
        with mpmath.workprec(_iv.prec):
            object.__setattr__(self, "midpoint", mpmath.mpf(self.midpoint))
            radius = mpmath.mpf(self.radius)
        if isinstance(self.radius, str):
            radius = radius * (1 + mpmath.mpf(2) ** (8 - _iv.prec))
        object.__setattr__(self, "radius", radius)
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    # construction -------------------------------------------------------
    @classmethod
    def exact(cls, value) -> "CertifiedReal":
        return cls(mpmath.mpf(value), 0)

    @classmethod
    def from_interval(cls, lo, hi) -> "CertifiedReal":
        with mpmath.workprec(_iv.prec):
            lo, hi = mpmath.mpf(lo), mpmath.mpf(hi)
            if hi < lo:
                raise ValueError("empty interval")
            mid = (lo + hi) / 2
            rad = max(hi - mid, mid - lo)
        # absorb the rounding of mid and rad
        rad = mpmath.mpf(rad) * (1 + mpmath.mpf(2) ** (4 - _iv.prec)) + mpmath.mpf(2) ** (-_iv.prec) * abs(mid)
        return cls(mid, rad)

    @classmethod
    def _from_iv(cls, x) -> "CertifiedReal":
        return cls.from_interval(x.a, x.b)

    # views ----------------------------------------------------------------
    @property
    def lower(self) -> mpmath.mpf:
        return self._iv().a

    @property
    def upper(self) -> mpmath.mpf:
        return self._iv().b

    def _iv(self):
        return _iv.mpf([self.midpoint, self.midpoint]) + _iv.mpf([-self.radius, self.radius])

    @property
    def width(self) -> mpmath.mpf:
        return 2 * self.radius

    def contains(self, x) -> bool:
        v = self._iv()
        return v.a <= x <= v.b

    def intersects(self, other: "CertifiedReal") -> bool:
        return not (self.upper < other.lower or other.upper < self.lower)

    def __float__(self) -> float:
        return float(self.midpoint)

    def __repr__(self) -> str:
        return f"CertifiedReal({mpmath.nstr(self.midpoint, 15)} ± {mpmath.nstr(self.radius, 3)})"

    # arithmetic -------------------------------------------------------------
    @staticmethod
    def _coerce(x):
        if isinstance(x, CertifiedReal):
            return x._iv()
        if isinstance(x, (int, np.integer)):
            return _iv.mpf(int(x))
        # floats and mpf are taken as exact binary values
        return _iv.mpf(mpmath.mpf(x))

    def _bin(self, other, op):
        return CertifiedReal._from_iv(op(self._iv(), CertifiedReal._coerce(other)))

    def __add__(self, o):
        return self._bin(o, lambda x, y: x + y)

    __radd__ = __add__

    def __sub__(self, o):
        return self._bin(o, lambda x, y: x - y)

    def __rsub__(self, o):
        return self._bin(o, lambda x, y: y - x)

    def __mul__(self, o):
        return self._bin(o, lambda x, y: x * y)

    __rmul__ = __mul__

    def __truediv__(self, o):
        y = CertifiedReal._coerce(o)
        if y.a <= 0 <= y.b:
            raise ZeroDivisionError("divisor interval contains zero")
        return CertifiedReal._from_iv(self._iv() / y)

    def __rtruediv__(self, o):
        x = self._iv()
        if x.a <= 0 <= x.b:
            raise ZeroDivisionError("divisor interval contains zero")
        return CertifiedReal._from_iv(CertifiedReal._coerce(o) / x)

    def __neg__(self):
        return CertifiedReal(-self.midpoint, self.radius)

    def sqrt(self) -> "CertifiedReal":
        return CertifiedReal._from_iv(_iv.sqrt(self._iv()))

    def log(self) -> "CertifiedReal":
        return CertifiedReal._from_iv(_iv.log(self._iv()))

    def widen(self, extra) -> "CertifiedReal":
        return CertifiedReal(self.midpoint, self.radius + abs(mpmath.mpf(extra)))


def certified_pi() -> CertifiedReal:
    return CertifiedReal._from_iv(_iv.pi)


def zeta2() -> CertifiedReal:
    return CertifiedReal._from_iv(_iv.pi ** 2 / 6)


def _check_disc(d: int) -> None:
    if not is_fundamental(d):
        raise ValueError(f"{d} is not a fundamental discriminant")


def l_at_2(d: int, tol: float = 1e-10) -> CertifiedReal:
    """L(2, chi_d) by direct character summation.

    The tail beyond N terms is bounded by Abel summation: with B the largest
    partial character sum, |sum_{n>N} chi(n)/n^2| <= 2B/(N+1)^2. B is bounded by
    |d| and, once N covers a full period, replaced by the exact maximum over a period.
    """
    _check_disc(d)
    if tol <= 0:
        raise ValueError("tol must be positive")
    f = abs(d)
    # a full period gives the exact B; otherwise fall back to B <= f
    N = max(16, f)
    while True:
        s, B = _lkernels.partial_sum_l2(d, N)
        if N < f:
            B = f
        tail = 2.0 * B / (N + 1) ** 2
        # per-term rounding plus the compensated-summation bound, times sum |terms| < 1.65
        rounding = (4.0 + N * 2.0 ** -52) * 2.0 ** -52 * 1.7
        if tail + rounding <= tol or N >= 10 ** 9:
            break
        N = int(math.ceil(math.sqrt(2.0 * B / max(tol / 2, 1e-15)))) + 1
        N = max(N, f)
    return CertifiedReal(mpmath.mpf(s), mpmath.mpf(tail) + mpmath.mpf(rounding))


def zeta_f_at_2(d: int, tol: float = 1e-10) -> CertifiedReal:
    """zeta_F(2) = zeta(2) L(2, chi_d) for F = Q(sqrt d)."""
    return zeta2() * l_at_2(d, tol)


def residue(F: "QuadFieldData") -> CertifiedReal:
    """Res_{s=1} zeta_F(s) from the analytic class number formula."""
    d = F.disc
    if d < 0:
        # 2 pi h / (w sqrt|d|)
        return CertifiedReal._from_iv(2 * _iv.pi * F.h / (F.w * _iv.sqrt(_iv.mpf(-d))))
    reg = F.regulator
    return 2 * F.h * reg / CertifiedReal._from_iv(_iv.sqrt(_iv.mpf(d)))


def ideal_count(d: int, X: int) -> int:
    """Number of integral ideals of norm <= X in Q(sqrt d): sum_{e <= X} chi_d(e) floor(X/e)."""
    if X < 1:
        raise ValueError("X must be >= 1")
    _check_disc(d)
    return int(_lkernels.ideal_count_kernel(d, X))


@lru_cache(maxsize=8)
def _batch_cached(ds_bytes: bytes, xcut: float):
    ds = np.frombuffer(ds_bytes, dtype=np.int64)
    return _lkernels.batch_l_values(ds, xcut)


def batch_l_values(ds: np.ndarray, xcut: float = 42.0):
    """L(1, chi_d), L(2, chi_d) for an array of fundamental discriminants, with radii.

    Uses the rapidly convergent incomplete-gamma expansions of the completed
    L-function (exact for real primitive characters); radii account for the
    truncated tail and floating-point rounding. Returns four float arrays
    (L1, L2, rad1, rad2).
    """
    ds = np.ascontiguousarray(ds, dtype=np.int64)
    return _batch_cached(ds.tobytes(), float(xcut))
