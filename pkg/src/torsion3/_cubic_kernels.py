"""Compiled inner loops for binary cubic form enumeration.

Conventions (shared with :mod:`torsion3.cubicforms`):

* A matrix g = [[p, q], [r, s]] acts by (g.f)(x, y) = det(g)^-1 f(p x + r y, q x + s y).
  This is a left action of GL2(Z) on forms up to the usual transpose bookkeeping; the
  only properties used are that it preserves the discriminant and that the Hessian
  transforms by the same substitution.
* Positive discriminant: f is reduced when its Hessian (P, Q, R) = (b^2 - 3ac, bc - 9ad,
  c^2 - 3bd) satisfies 0 <= Q <= P <= R.
* Negative discriminant: write f = a (x - t y)(x^2 + u x y + v y^2) with t the real root.
  f is reduced when 0 <= u <= 1 <= v. In integer terms (valid also for a = 0):
  u >= 0  <=>  ad - bc <= 0,
  u <= 1  <=>  ad - bc >= -(a - b)^2 - ac,
  v >= 1  <=>  a^2 - ac + bd - d^2 <= 0.
* Canonical representative of a class: the lexicographically largest reduced form in the
  orbit of the small matrix set GAMMA (all reduced forms of a class are related by it).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def disc4(a, b, c, d):
    return b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d + 18 * a * b * c * d


@njit(cache=True)
def act(a, b, c, d, p, q, r, s):
    """Coefficients of det^-1 * f(p x + r y, q x + s y)."""
    A = a * p * p * p + b * p * p * q + c * p * q * q + d * q * q * q
    D = a * r * r * r + b * r * r * s + c * r * s * s + d * s * s * s
    B = 3 * a * p * p * r + b * (p * p * s + 2 * p * q * r) + c * (q * q * r + 2 * p * q * s) + 3 * d * q * q * s
    C = 3 * a * p * r * r + b * (r * r * q + 2 * p * r * s) + c * (p * s * s + 2 * q * r * s) + 3 * d * q * s * s
    det = p * s - q * r
    if det == -1:
        return -A, -B, -C, -D
    return A, B, C, D


@njit(cache=True)
def is_reduced(a, b, c, d, D):
    if D > 0:
        P = b * b - 3 * a * c
        Q = b * c - 9 * a * d
        R = c * c - 3 * b * d
        return 0 <= Q and Q <= P and P <= R
    t = a * d - b * c
    if t > 0:
        return False
    if t < -((a - b) * (a - b)) - a * c:
        return False
    return a * a - a * c + b * d - d * d <= 0


@njit(cache=True)
def lex_greater(a1, b1, c1, d1, a0, b0, c0, d0):
    if a1 != a0:
        return a1 > a0
    if b1 != b0:
        return b1 > b0
    if c1 != c0:
        return c1 > c0
    return d1 > d0


@njit(cache=True)
def canonical_and_aut(a, b, c, d, D, gamma):
    """(is f the canonical representative, |stabilizer of f|)."""
    aut = 0
    for k in range(gamma.shape[0]):
        A, B, C, E = act(a, b, c, d, gamma[k, 0], gamma[k, 1], gamma[k, 2], gamma[k, 3])
        if A == a and B == b and C == c and E == d:
            aut += 1
        elif is_reduced(A, B, C, E, D) and lex_greater(A, B, C, E, a, b, c, d):
            return False, 0
    return True, aut


@njit(cache=True)
def _eval_mod(a, b, c, d, x, y, m):
    x %= m
    y %= m
    x2 = x * x % m
    y2 = y * y % m
    v = a % m * (x2 * x % m) % m
    v = (v + b % m * (x2 * y % m)) % m
    v = (v + c % m * (x * y2 % m)) % m
    v = (v + d % m * (y2 * y % m)) % m
    return v


@njit(cache=True)
def maximal_at(a, b, c, d, p):
    """Is the cubic ring of f maximal at the prime p."""
    if a % p == 0 and b % p == 0 and c % p == 0 and d % p == 0:
        return False
    pp = p * p
    for k in range(p + 1):
        if k == p:
            x, y = 1, 0
        else:
            x, y = k, 1
        if _eval_mod(a, b, c, d, x, y, p) != 0:
            continue
        # partial derivatives mod p
        fx = (3 * a % p * (x * x % p) + 2 * b % p * (x * y % p) + c % p * (y * y % p)) % p
        fy = (b % p * (x * x % p) + 2 * c % p * (x * y % p) + 3 * d % p * (y * y % p)) % p
        if fx != 0 or fy != 0:
            continue
        if _eval_mod(a, b, c, d, x, y, pp) == 0:
            return False
    return True


@njit(cache=True)
def is_maximal_spf(a, b, c, d, D, spf):
    n = abs(D)
    while n > 1:
        p = spf[n]
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e >= 2 and not maximal_at(a, b, c, d, p):
            return False
    return True


@njit(cache=True)
def is_maximal_trial(a, b, c, d, D):
    n = abs(D)
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            if e >= 2 and not maximal_at(a, b, c, d, p):
                return False
        p += 1
    return True


@njit(cache=True)
def _gcd(x, y):
    x = abs(x)
    y = abs(y)
    while y:
        x, y = y, x % y
    return x


@njit(cache=True)
def is_irreducible(a, b, c, d):
    """No linear factor over Q (a zero leading or trailing coefficient gives one)."""
    if a == 0 or d == 0:
        return False
    ad = abs(d)
    aa = abs(a)
    u = 1
    while u * u <= ad:
        if ad % u == 0:
            for uu in (u, ad // u):
                for v in range(1, aa + 1):
                    if aa % v != 0 or _gcd(uu, v) != 1:
                        continue
                    for sg in (1, -1):
                        x = sg * uu
                        if a * x * x * x + b * x * x * v + c * x * v * v + d * v * v * v == 0:
                            return False
        u += 1
    return True


@njit(cache=True)
def _push(buf, n, a, b, c, d, D, aut, mx, irr):
    if n >= buf.shape[0]:
        new = np.empty((buf.shape[0] * 2, 8), dtype=np.int64)
        new[: buf.shape[0]] = buf
        buf = new
    buf[n, 0] = a
    buf[n, 1] = b
    buf[n, 2] = c
    buf[n, 3] = d
    buf[n, 4] = D
    buf[n, 5] = aut
    buf[n, 6] = mx
    buf[n, 7] = irr
    return buf


@njit(cache=True)
def _consider(buf, n, a, b, c, d, lo, hi, sgn, gamma, spf, with_max):
    D = disc4(a, b, c, d)
    if D * sgn < lo or D * sgn > hi:
        return buf, n
    if not is_reduced(a, b, c, d, D):
        return buf, n
    ok, aut = canonical_and_aut(a, b, c, d, D, gamma)
    if not ok:
        return buf, n
    mx = 0
    if with_max:
        if spf.shape[0] > abs(D):
            mx = 1 if is_maximal_spf(a, b, c, d, D, spf) else 0
        else:
            mx = 1 if is_maximal_trial(a, b, c, d, D) else 0
    irr = 1 if is_irreducible(a, b, c, d) else 0
    buf = _push(buf, n, a, b, c, d, D, aut, mx, irr)
    return buf, n + 1


@njit(cache=True)
def _floor_div(x, y):
    return x // y


@njit(cache=True)
def _ceil_div(x, y):
    return -((-x) // y)


@njit(cache=True)
def _widen(lo, hi, w):
    """Stretch the integer range [lo, hi] about its centre by the factor w >= 1."""
    if w == 1:
        return lo, hi
    half = (hi - lo) // 2 + 1
    mid = lo + half
    return mid - w * half, mid + w * half


@njit(cache=True)
def enumerate_positive(lo, hi, a_lo, a_hi, gamma, spf, with_max, w=1):
    """Canonical forms with lo <= disc <= hi (disc > 0) and leading coefficient in [a_lo, a_hi].

    w > 1 stretches every coefficient range by that factor (self-consistency oracle).
    """
    buf = np.empty((1024, 8), dtype=np.int64)
    n = 0
    X = hi
    x4 = X ** 0.25
    sq = int(math.sqrt(X)) + 1
    for a in range(a_lo, a_hi + 1):
        if a == 0:
            bmax = (int(x4) + 2) * w
            for b in range(1, bmax + 1):
                c0, c1 = _widen(0, b, w)
                for c in range(c0, c1 + 1):
                    dhi = _floor_div(c * c - b * b, 3 * b) + 1
                    dlo = _floor_div(c * c * b * b - X, 4 * b * b * b) - 1
                    dlo, dhi = _widen(dlo, dhi, w)
                    for d in range(dlo, dhi + 1):
                        buf, n = _consider(buf, n, 0, b, c, d, lo, hi, 1, gamma, spf, with_max)
            continue
        bmax = (int(1.5 * a + 3.0 * math.sqrt(2.0) * x4) + 2) * w
        for b in range(-bmax, bmax + 1):
            clo = _floor_div(b * b - sq - 1, 3 * a) - 1
            chi = _floor_div(b * b - 1, 3 * a) + 1
            clo, chi = _widen(clo, chi, w)
            for c in range(clo, chi + 1):
                P = b * b - 3 * a * c
                if w == 1 and (P < 1 or P * P > X):
                    continue
                bc = b * c
                dlo = _floor_div(bc - abs(P), 9 * a) - 1
                dhi = _ceil_div(bc, 9 * a) + 1
                dlo, dhi = _widen(dlo, dhi, w)
                for d in range(dlo, dhi + 1):
                    buf, n = _consider(buf, n, a, b, c, d, lo, hi, 1, gamma, spf, with_max)
    return buf[:n]


@njit(cache=True)
def enumerate_negative(lo, hi, a_lo, a_hi, gamma, spf, with_max, w=1):
    """Canonical forms with lo <= -disc <= hi and leading coefficient in [a_lo, a_hi]."""
    buf = np.empty((1024, 8), dtype=np.int64)
    n = 0
    X = hi
    for a in range(a_lo, a_hi + 1):
        if a == 0:
            bmax = (int((X / 3.0) ** 0.25) + 2) * w
            for b in range(-bmax, bmax + 1):
                if b == 0:
                    continue
                ab = abs(b)
                c0, c1 = _widen(-ab - 1, ab + 1, w)
                for c in range(c0, c1 + 1):
                    dmax = _floor_div(_ceil_div(X, b * b) + c * c, 4 * ab) + 1
                    dmin, dmax = _widen(ab, dmax, w)
                    for dm in range(max(dmin, 1), dmax + 1):
                        for sg in (1, -1):
                            buf, n = _consider(buf, n, 0, b, c, sg * dm, lo, hi, -1, gamma, spf, with_max)
            continue
        S = math.sqrt(X / 3.0) / (a * a)
        rS = math.sqrt(S)
        blo = int(math.floor(-a * rS)) - 1
        bhi = int(math.ceil(a * (rS + 1.5))) + 1
        clo = int(math.floor(a * (0.75 - rS))) - 1
        chi = int(math.ceil(a * (S + 0.75 + rS))) + 1
        blo, bhi = _widen(blo, bhi, w)
        clo, chi = _widen(clo, chi, w)
        for b in range(blo, bhi + 1):
            for c in range(clo, chi + 1):
                bc = b * c
                dlo = _floor_div(bc - (a - b) * (a - b) - a * c, a) - 1
                dhi = _ceil_div(bc, a) + 1
                if dhi < dlo:
                    dlo, dhi = dhi, dlo
                dlo, dhi = _widen(dlo, dhi, w)
                for d in range(dlo, dhi + 1):
                    buf, n = _consider(buf, n, a, b, c, d, lo, hi, -1, gamma, spf, with_max)
    return buf[:n]


@njit(cache=True)
def box_search(X, sgn, M, gamma):
    """Oracle: canonical reduced forms with 0 < sgn*disc <= X inside the box |coeff| <= M."""
    buf = np.empty((1024, 8), dtype=np.int64)
    n = 0
    spf = np.zeros(1, dtype=np.int32)
    for a in range(0, M + 1):
        for b in range(-M, M + 1):
            for c in range(-M, M + 1):
                for d in range(-M, M + 1):
                    buf, n = _consider(buf, n, a, b, c, d, 1, X, sgn, gamma, spf, False)
    return buf[:n]


@njit(cache=True)
def apply_all(forms, mats):
    """Images of each form under each matrix: shape (len(forms), len(mats), 4)."""
    out = np.empty((forms.shape[0], mats.shape[0], 4), dtype=np.int64)
    for i in range(forms.shape[0]):
        for k in range(mats.shape[0]):
            A, B, C, D = act(forms[i, 0], forms[i, 1], forms[i, 2], forms[i, 3],
                             mats[k, 0], mats[k, 1], mats[k, 2], mats[k, 3])
            out[i, k, 0] = A
            out[i, k, 1] = B
            out[i, k, 2] = C
            out[i, k, 3] = D
    return out
