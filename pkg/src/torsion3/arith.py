"""Small integer-arithmetic helpers shared by the other modules."""

from __future__ import annotations

from functools import lru_cache
from math import gcd, isqrt

import numpy as np


def smallest_prime_factor_table(n: int) -> np.ndarray:
    """Return spf[k] = smallest prime factor of k for 0 <= k <= n (spf[0] = spf[1] = 0)."""
    spf = np.zeros(n + 1, dtype=np.int32)
    if n >= 2:
        spf[2::2] = 2
        for p in range(3, isqrt(n) + 1, 2):
            if spf[p] == 0:
                block = spf[p * p :: 2 * p]
                block[block == 0] = p
        odd = np.arange(3, n + 1, 2)
        unset = odd[spf[3::2] == 0]
        spf[unset] = unset
    return spf


def primes_up_to(n: int) -> np.ndarray:
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    sieve[4::2] = False
    for p in range(3, isqrt(n) + 1, 2):
        if sieve[p]:
            sieve[p * p :: 2 * p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization of |n| (fine for the sizes used here)."""
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())


def is_fundamental(d: int) -> bool:
    """True iff d is the discriminant of a quadratic field."""
    if d in (0, 1):
        return False
    r = d % 4
    if r == 1:
        return is_squarefree(d)
    if r == 0:
        m = d // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def fundamental_part(n: int) -> int:
    """Discriminant of Q(sqrt(n)) for a non-square nonzero integer n."""
    sign = -1 if n < 0 else 1
    core = 1
    for p, e in factorize(n).items():
        if e % 2:
            core *= p
    core *= sign
    if core == 1:
        raise ValueError(f"{n} is a square")
    return core if core % 4 == 1 else 4 * core


def fundamental_mask(bound: int) -> tuple[np.ndarray, np.ndarray]:
    """Boolean masks (neg, pos) with neg[D] true iff -D is fundamental, pos[D] iff D is.

    Indices run over 0..bound.
    """
    sqfree = np.ones(bound + 1, dtype=bool)
    sqfree[0] = False
    for p in primes_up_to(isqrt(bound)):
        sqfree[p * p :: p * p] = False
    D = np.arange(bound + 1)
    q4 = np.zeros(bound + 1, dtype=bool)
    q4[::4] = sqfree[: bound // 4 + 1]  # q4[D] = squarefree(D/4) when 4 | D
    m4 = (D // 4) % 4
    # positive: D = 1 mod 4 squarefree, or D = 4m with m = 2,3 mod 4
    pos = (D % 4 == 1) & sqfree
    pos |= (D % 4 == 0) & q4 & ((m4 == 2) | (m4 == 3))
    pos[1] = False
    # negative d = -D: -D = 1 mod 4 means D = 3 mod 4; d = 4m with m = -D/4 = 2,3 mod 4
    neg = (D % 4 == 3) & sqfree
    mneg = (-(D // 4)) % 4
    neg |= (D % 4 == 0) & q4 & ((mneg == 2) | (mneg == 3))
    return neg, pos


def kronecker(d: int, n: int) -> int:
    """Kronecker symbol (d/n) for arbitrary integers d, n."""
    if n == 0:
        return 1 if d in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if d < 0:
            result = -result
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if d % 2 == 0:
            return 0
        if v % 2 and d % 8 in (3, 5):
            result = -result
    # Jacobi symbol (d/n) for odd positive n
    a = d % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


@lru_cache(maxsize=None)
def divisors(n: int) -> tuple[int, ...]:
    n = abs(n)
    small, large = [], []
    for k in range(1, isqrt(n) + 1):
        if n % k == 0:
            small.append(k)
            if k * k != n:
                large.append(n // k)
    return tuple(small + large[::-1])


def gcd3(a: int, b: int, c: int) -> int:
    return gcd(gcd(a, b), c)
