"""Compiled kernels for quadratic characters, L-values and class numbers in bulk."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

EPS = 2.0 ** -52
EULER_GAMMA = 0.57721566490153286061


@njit(cache=True)
def kron(d, n):
    """Kronecker symbol (d/n) for n >= 1."""
    result = 1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v > 0:
        if d % 2 == 0:
            return 0
        r8 = d % 8
        if v % 2 == 1 and (r8 == 3 or r8 == 5):
            result = -result
    a = d % n
    m = n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            r = m % 8
            if r == 3 or r == 5:
                result = -result
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            result = -result
        a %= m
    if m == 1:
        return result
    return 0


@njit(cache=True)
def chi_table(d, n):
    """chi_d(k) for k = 0..n as int8, built multiplicatively from prime values."""
    out = np.zeros(n + 1, dtype=np.int8)
    if n >= 1:
        out[1] = 1
    spf = np.zeros(n + 1, dtype=np.int64)
    for k in range(2, n + 1):
        if spf[k] == 0:
            out[k] = kron(d, k)
            j = k
            while j <= n:
                if spf[j] == 0:
                    spf[j] = k
                j += k
        else:
            p = spf[k]
            out[k] = out[p] * out[k // p]
    return out


@njit(cache=True)
def exp1(x):
    """Exponential integral E1(x) for x > 0."""
    if x <= 1.0:
        s = 0.0
        term = 1.0
        k = 1
        while True:
            term *= -x / k
            add = -term / k
            s += add
            if abs(add) < 1e-17 * abs(s) + 1e-300:
                break
            k += 1
        return -EULER_GAMMA - math.log(x) + s
    # continued fraction, modified Lentz
    b = x + 1.0
    c = 1.0 / 1e-300
    d = 1.0 / b
    h = d
    i = 1
    while i < 500:
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
        i += 1
    return h * math.exp(-x)


@njit(cache=True)
def smoothed_l_values(d, xcut):
    """L(1, chi_d) and L(2, chi_d) by the theta-function (incomplete gamma) expansions.

    Returns (L1, L2, n_terms, abs_sum1, abs_sum2, tail1, tail2).
    The expansions are exact identities for primitive real characters with root
    number one; terms decay like exp(-pi n^2 / f).
    """
    f = abs(d)
    odd = d < 0
    sf = math.sqrt(f)
    pi = math.pi
    N = int(math.sqrt(xcut * f / pi)) + 2
    s1 = 0.0
    s2 = 0.0
    a1 = 0.0
    a2 = 0.0
    sqpi = math.sqrt(pi)
    for n in range(1, N + 1):
        ch = kron(d, n)
        if ch == 0:
            continue
        x = pi * n * n / f
        rx = math.sqrt(x)
        ex = math.exp(-x)
        ec = math.erfc(rx)
        if not odd:
            t1 = ec / n + exp1(x) / sf
            t2 = (pi / f) * (ex / x + 2.0 * ex - 2.0 * sqpi * rx * ec)
        else:
            # L(1): (pi/f) * sum n [e^-x / x + x^-1/2 Gamma(1/2, x)]
            t1 = (pi / f) * n * (ex / x + sqpi * ec / rx)
            g32 = 0.5 * sqpi * ec + rx * ex
            t2 = (pi / f) ** 1.5 / (0.5 * sqpi) * n * (g32 / (x * rx) + exp1(x))
        s1 += ch * t1
        s2 += ch * t2
        a1 += abs(t1)
        a2 += abs(t2)
    # tail: every omitted term is at most C * n * exp(-x_n) * (1 + 1/x_n) with C as
    # below (each of the four expansions checked separately). n exp(-pi n^2/f) is
    # decreasing past sqrt(f / 2 pi) < N, so the sum over n > N is at most the first
    # term plus the integral, (N + 1) e^{-x} + f/(2 pi) e^{-x}.
    xn = pi * (N + 1) * (N + 1) / f
    C = 3.0 * (pi / f) ** 1.5 / sqpi + 2.0 / sf + 2.0 * pi / f + 2.0
    tail = C * (1.0 + 1.0 / xn) * math.exp(-xn) * ((N + 1) + f / (2.0 * pi))
    return s1, s2, N, a1, a2, tail, tail


@njit(cache=True)
def batch_l_values(ds, xcut):
    n = ds.shape[0]
    L1 = np.empty(n)
    L2 = np.empty(n)
    R1 = np.empty(n)
    R2 = np.empty(n)
    for i in range(n):
        s1, s2, N, a1, a2, t1, t2 = smoothed_l_values(ds[i], xcut)
        # rounding: each term carries < 20 eps relative error, summation adds N eps
        L1[i] = s1
        L2[i] = s2
        R1[i] = t1 + (20.0 + N) * EPS * a1
        R2[i] = t2 + (20.0 + N) * EPS * a2
    return L1, L2, R1, R2


@njit(cache=True)
def partial_sum_l2(d, N):
    """Direct partial sum of chi_d(n)/n^2 for n <= N, plus max |partial character sum|."""
    s = 0.0
    comp = 0.0
    S = 0
    B = 0
    for n in range(1, N + 1):
        ch = kron(d, n)
        S += ch
        if abs(S) > B:
            B = abs(S)
        # compensated summation keeps the rounding error independent of N
        y = ch / (float(n) * float(n)) - comp
        t = s + y
        comp = (t - s) - y
        s = t
    return s, B


@njit(cache=True)
def imaginary_class_numbers(X, fund_neg):
    """h(d) for fundamental d = -D, D <= X, by counting reduced forms (|b| <= a <= c)."""
    h = np.zeros(X + 1, dtype=np.int64)
    amax = int(math.sqrt(X / 3.0)) + 1
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            c = a
            while True:
                D = 4 * a * c - b * b
                if D > X:
                    break
                if D > 0 and fund_neg[D]:
                    if not (b < 0 and a == c):
                        h[D] += 1
                c += 1
    return h


@njit(cache=True)
def real_regulator(d):
    """log of the fundamental unit of the maximal order of discriminant d > 0.

    Continued fraction of the reduced irrational (P + sqrt d)/2 with P the largest
    integer < sqrt d of the parity of d; returns (regulator, period length).
    """
    sd = math.sqrt(d)
    r = int(sd)
    while r * r > d:
        r -= 1
    while (r + 1) * (r + 1) <= d:
        r += 1
    P0 = r if (r - d) % 2 == 0 else r - 1
    if P0 * P0 == d:
        P0 -= 2
    Q0 = 2
    P = P0
    Q = Q0
    reg = 0.0
    length = 0
    while True:
        reg += math.log((P + sd) / Q)
        a = (P + r) // Q
        P = a * Q - P
        Q = (d - P * P) // Q
        length += 1
        if P == P0 and Q == Q0:
            break
    return reg, length


@njit(cache=True)
def batch_regulators(ds):
    n = ds.shape[0]
    R = np.empty(n)
    rad = np.empty(n)
    for i in range(n):
        reg, length = real_regulator(ds[i])
        R[i] = reg
        rad[i] = 4.0 * length * EPS * (reg + 1.0)
    return R, rad


@njit(cache=True)
def ideal_count_kernel(d, X):
    chi = chi_table(d, X)
    total = 0
    for e in range(1, X + 1):
        total += chi[e] * (X // e)
    return total
