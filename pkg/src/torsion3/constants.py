"""Limiting constants for D4 (= C2 wr C2) families of quartic fields over Q.

Each constant is a ratio (or a sum) of series over quadratic fields F with terms

    w(F) = Res_{s=1} zeta_F(s) / (zeta_F(2) |disc F|^2).

Truncating at |disc F| <= X leaves a tail that is bracketed rigorously:

* sum_{|d| > X} w(F) <= sum (2 + log D) / (zeta(4) D^2) over the residue classes
  that contain fundamental discriminants (L(1, chi) <= 2 + log D, zeta_F(2) >= zeta(4));
* sum_{|d| > X} (h3(F) - 1) w(F) uses h3 <= h and the class number bounds
  h <= sqrt(D) (2 + log D) / pi (imaginary), h <= sqrt(D) (2 + log D) / (log D - 2 log 2) (real).

The second bound is pointwise and therefore loose: it dominates the width of the
h3-weighted brackets, while the lower end stays at the truncated value.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from . import wreath
from .arith import fundamental_mask
from .cache import cached_arrays
from .cubicforms import h3_table
from .lfunc import CertifiedReal, batch_l_values, residue, zeta_f_at_2
from .quadfield import QuadFieldData, imaginary_class_number_table, real_field_table

__all__ = [
    "ConstantEstimate",
    "weight",
    "eval_constant",
    "tail_bound",
    "weight_tail_bound",
    "TARGETS",
    "D4_SIGNATURES",
    "field_table",
    "archimedean_factor",
    "to_csv",
    "to_json",
]

ZETA4 = math.pi ** 4 / 90
ZETA2 = math.pi ** 2 / 6
EPS = 2.0 ** -52

# the four D4 group signatures over Q, in cycle notation for <(1234), (24)>
D4_SIGNATURES = ("()", "(24)", "(13)(24)", "(12)(34)")

TARGETS = ("Cm", "CD4", "CD4_printed", "CD4_sigma", "Dm", "DD4", "DD4_sigma")


@dataclass(frozen=True)
class ConstantEstimate:
    target: str
    truncation: int
    lower: float
    upper: float
    tail_bound: float
    estimate: float
    flagged: bool = False

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError("lower > upper")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper

    def intersects(self, lo: float, hi: float) -> bool:
        return not (self.upper < lo or hi < self.lower)


# ---------------------------------------------------------------------------
# single-field weight


def weight(F: QuadFieldData, variant: str = "G") -> CertifiedReal:
    """Res zeta_F / (zeta_F(2) disc^2); the "m" variant carries the extra 2^{-r2(F)}."""
    if variant not in ("G", "m"):
        raise ValueError("variant must be 'G' or 'm'")
    w = residue(F) / (zeta_f_at_2(F.disc) * (F.disc * F.disc))
    if variant == "m":
        w = w / 2 ** F.r2
    return w


def archimedean_factor(r1: int, r2: int) -> Fraction:
    """1 + 2^{r1} / 3^{r1 + r2}."""
    return 1 + Fraction(2 ** r1, 3 ** (r1 + r2))


# ---------------------------------------------------------------------------
# bulk table of all quadratic fields up to X


@dataclass(frozen=True)
class FieldTable:
    disc: np.ndarray
    h: np.ndarray
    h3: np.ndarray
    weight: np.ndarray
    weight_radius: np.ndarray

    def select(self, sign: int) -> "FieldTable":
        m = (self.disc > 0) if sign > 0 else (self.disc < 0)
        return FieldTable(self.disc[m], self.h[m], self.h3[m], self.weight[m], self.weight_radius[m])


def _build_field_table(X: int) -> dict[str, np.ndarray]:
    neg, _ = fundamental_mask(X)
    # imaginary fields
    Dn = np.flatnonzero(neg).astype(np.int64)
    hn = imaginary_class_number_table(X)[Dn]
    wn = np.full(len(Dn), 2.0)
    wn[Dn == 3] = 6.0
    wn[Dn == 4] = 4.0
    _, L2n, _, r2n = batch_l_values(-Dn)
    res_n = 2.0 * math.pi * hn / (wn * np.sqrt(Dn))
    res_rad_n = res_n * 8 * EPS
    h3n = h3_table(X, "-")[Dn]
    # real fields
    rt = real_field_table(X)
    Dp = rt.disc
    res_p = 2.0 * rt.h * rt.regulator / np.sqrt(Dp)
    res_rad_p = res_p * (rt.regulator_radius / rt.regulator + 8 * EPS)
    h3p = h3_table(X, "+")[Dp]
    disc = np.concatenate([-Dn, Dp])
    h = np.concatenate([hn, rt.h])
    h3 = np.concatenate([h3n, h3p])
    res = np.concatenate([res_n, res_p])
    res_rad = np.concatenate([res_rad_n, res_rad_p])
    L2 = np.concatenate([L2n, rt.l2])
    L2_rad = np.concatenate([r2n, rt.l2_radius])
    D = np.abs(disc).astype(np.float64)
    w = res / (ZETA2 * L2 * D * D)
    rel = res_rad / res + L2_rad / L2 + 16 * EPS
    order = np.lexsort((-np.sign(disc), np.abs(disc)))
    return {
        "disc": disc[order],
        "h": h[order],
        "h3": h3[order],
        "weight": w[order],
        "weight_radius": (w * rel)[order],
    }


@lru_cache(maxsize=4)
def field_table(X: int) -> FieldTable:
    """Every quadratic field with |disc| <= X with its class number, h3 and weight."""
    arrays = cached_arrays(f"quadfields-{X}", lambda: _build_field_table(X))
    return FieldTable(**arrays)


# ---------------------------------------------------------------------------
# tail bounds


def weight_tail_bound(X: int) -> float:
    """Upper bound for sum_{|d| > X, fixed sign} w(F).

    Fundamental |d| lie in one class mod 4 and two classes mod 16 per sign; a
    decreasing g summed over one class mod q past X is at most
    g(X + 1) + (1/q) integral_X^inf g.
    """
    if X < 100:
        raise ValueError("X must be at least 100")
    g = lambda t: (2.0 + math.log(t)) / (ZETA4 * t * t)  # noqa: E731
    integral = (3.0 + math.log(X)) / (ZETA4 * X)
    return 3.0 * g(X + 1) + (1.0 / 4 + 2.0 / 16) * integral


def _h3_excess_tail(X: int, sign: int) -> float:
    """Upper bound for sum_{|d| > X, given sign} (h3(F) - 1) w(F)."""
    L = 2.0 + math.log(X)
    # integral_X^inf (2 + log t)^2 t^{-3/2} dt
    integral = 2.0 * (L * L + 4.0 * L + 8.0) / math.sqrt(X)
    first = L * L / X ** 1.5
    if sign < 0:
        c = 1.0 / (math.pi * ZETA4)
    else:
        # h <= sqrt(d) (2 + log d) / (log d - 2 log 2), decreasing factor evaluated at X
        c = 1.0 / ((math.log(X) - 2.0 * math.log(2.0)) * ZETA4)
    return c * (3.0 * first + (1.0 / 4 + 2.0 / 16) * integral)


def tail_bound(X: int) -> float:
    """Bound on sum_{|d| > X} w(F) h3(F) A(F) over both signs, with A(F) <= 2 the
    archimedean factor."""
    if X < 100:
        raise ValueError("X must be at least 100")
    return 2.0 * (2.0 * weight_tail_bound(X) + _h3_excess_tail(X, -1) + _h3_excess_tail(X, 1))


# ---------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class _Series:
    """Terms n_F = a_F h3 w (numerator) and e_F = b_F w (denominator) for one sign."""

    sign: int
    a: Fraction
    b: Fraction


def _signature_data(sigma: str):
    G = wreath.d4()
    sig = wreath.parse_signature(G, sigma)
    u = wreath.u_of_signature(G, sig)
    M = wreath.m_sigma(G, sig)
    r1F, r2F = wreath.base_archimedean(G, sig)
    return u, M, r1F, r2F


def _plan(target: str, sigma: str | None) -> tuple[list[_Series], bool]:
    """Series making up a constant; the flag says whether it is a ratio."""
    real, imag = (2, 0), (0, 1)
    if target in ("Cm", "CD4"):
        # summing C_{D4,Sigma} over signatures keeps the 2^{-r2(F)} of the counting
        # weight, so for m = 2 over Q the two constants coincide
        return [
            _Series(1, archimedean_factor(*real), Fraction(1)),
            _Series(-1, archimedean_factor(*imag) / 2, Fraction(1, 2)),
        ], True
    if target == "CD4_printed":
        # the same ratio with plain weights in both sums
        return [
            _Series(1, archimedean_factor(*real), Fraction(1)),
            _Series(-1, archimedean_factor(*imag), Fraction(1)),
        ], True
    if target == "CD4_sigma":
        u, _, r1F, _ = _signature_data(sigma)
        sign = 1 if r1F > 0 else -1
        return [_Series(sign, 1 + Fraction(1, 3 ** u), Fraction(1))], True
    if target == "Dm":
        return [_Series(1, Fraction(0), Fraction(1)), _Series(-1, Fraction(0), Fraction(1, 2))], False
    if target == "DD4":
        return [_Series(1, Fraction(0), Fraction(4)), _Series(-1, Fraction(0), Fraction(2))], False
    if target == "DD4_sigma":
        u, M, r1F, r2F = _signature_data(sigma)
        sign = 1 if r1F > 0 else -1
        p = Fraction(M, 2 ** r1F)
        return [_Series(sign, Fraction(0), p * 2 ** (2 - r2F))], False
    raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")


def _fsum(x: np.ndarray) -> tuple[float, float]:
    """Sum of nonnegative floats with a bound on the accumulated rounding."""
    s = math.fsum(x.tolist())
    return s, (len(x) + 2) * EPS * abs(s)


def eval_constant(target: str, truncation: int, sigma: str | None = None) -> ConstantEstimate:
    """Bracket a constant by its series truncated at |disc F| <= truncation.

    target: "Cm" (m = 2), "CD4", "CD4_printed", "CD4_sigma", "Dm" (m = 2), "DD4",
    "DD4_sigma"; the *_sigma targets need sigma, one of D4_SIGNATURES. A target
    written as "CD4:(24)" is also accepted.
    """
    if ":" in target:
        target, sigma = target.split(":", 1)
        target += "_sigma"
    if target.endswith("_sigma") and sigma is None:
        raise ValueError(f"{target} needs a signature")
    if truncation < 100:
        raise ValueError("truncation must be at least 100")
    plan, is_ratio = _plan(target, sigma)
    table = field_table(truncation)
    num = den = 0.0
    num_rad = den_rad = 0.0
    tail_num_extra = 0.0  # bound for sum over the tail of a (h3 - 1) w
    tail_den = 0.0  # bound for sum over the tail of b w
    ratios = []
    for s in plan:
        t = table.select(s.sign)
        a, b = float(s.a), float(s.b)
        nsum, nround = _fsum(a * t.h3 * t.weight)
        dsum, dround = _fsum(b * t.weight)
        num += nsum
        den += dsum
        num_rad += nround + float(np.sum(a * t.h3 * t.weight_radius))
        den_rad += dround + float(np.sum(b * t.weight_radius))
        tail_num_extra += a * _h3_excess_tail(truncation, s.sign)
        tail_den += b * weight_tail_bound(truncation)
        if b:
            ratios.append(a / b)
    if not is_ratio:
        lower = den - den_rad
        upper = den + den_rad + tail_den
        return ConstantEstimate(_name(target, sigma), truncation, lower, upper, tail_den, den)
    m, M = min(ratios), max(ratios)
    n_lo, n_hi = num - num_rad, num + num_rad
    d_lo, d_hi = den - den_rad, den + den_rad
    # C = (N + r t + E) / (Dn + t), t in [0, tail_den], r in [m, M], E in [0, tail_num_extra]
    lower = min(n_lo / d_hi, (n_lo + m * tail_den) / (d_hi + tail_den))
    upper = max((n_hi + tail_num_extra) / d_lo, (n_hi + tail_num_extra + M * tail_den) / (d_lo + tail_den))
    flagged = (upper - lower) > 0.02
    return ConstantEstimate(_name(target, sigma), truncation, lower, upper,
                            tail_num_extra + M * tail_den, num / den, flagged)


def _name(target: str, sigma: str | None) -> str:
    return target if sigma is None else f"{target.removesuffix('_sigma')}:{sigma}"


# ---------------------------------------------------------------------------
# emission

FIELDS = ("target", "truncation", "lower", "upper", "tail_bound", "estimate", "flagged")


def to_csv(estimates) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for e in estimates:
        w.writerow([e.target, e.truncation, repr(e.lower), repr(e.upper), repr(e.tail_bound),
                    repr(e.estimate), int(e.flagged)])
    return buf.getvalue()


def to_json(estimates) -> str:
    return json.dumps([asdict(e) for e in estimates], indent=2)
