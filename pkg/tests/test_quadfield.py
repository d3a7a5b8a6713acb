import math

import pytest
from hypothesis import given, settings, strategies as st

from torsion3.arith import is_fundamental
from torsion3.quadfield import (
    FundamentalDiscriminant,
    QuadraticForm,
    class_group,
    compose,
    element_order,
    fundamental_discriminants,
    principal_form,
    reduce,
    reduced_forms,
    three_torsion,
)


def test_fundamental_discriminants_small_bounds():
    assert list(fundamental_discriminants(8)) == [-3, -4, 5, -7, 8, -8]
    assert list(fundamental_discriminants(3)) == [-3]
    with pytest.raises(ValueError):
        list(fundamental_discriminants(2))


def test_fundamental_discriminant_type_rejects():
    for bad in (0, 1, -1, 4, -8 * 4, 12 * 4, 9, -12 * 9):
        with pytest.raises(ValueError):
            FundamentalDiscriminant(bad)
    assert FundamentalDiscriminant(-4) == -4


def _fundamental_by_definition(d):
    def squarefree(n):
        n = abs(n)
        return all(n % (p * p) for p in range(2, math.isqrt(n) + 1))

    if d == 1:
        return False
    if d % 4 == 1:
        return squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and squarefree(m)
    return False


def test_fundamental_mask_matches_definition():
    got = set(fundamental_discriminants(2000))
    want = {d for D in range(3, 2001) for d in (D, -D) if _fundamental_by_definition(d)}
    assert got == want


@pytest.mark.parametrize("f,want", [((1, 0, 1), (1, 0, 1)), ((2, 2, 3), (2, 2, 3)), ((1, 5, 7), (1, 1, 1))])
def test_reduce_examples(f, want):
    assert tuple(reduce(QuadraticForm(*f))) == want


def test_reduce_rejects_indefinite():
    with pytest.raises(ValueError):
        reduce(QuadraticForm(1, 3, 1))


def _act(f, m):
    a, b, c = f
    p, q, r, s = m
    return QuadraticForm(
        a * p * p + b * p * r + c * r * r,
        2 * a * p * q + b * (p * s + q * r) + 2 * c * r * s,
        a * q * q + b * q * s + c * s * s,
    )


@settings(max_examples=300, deadline=None)
@given(st.sampled_from([-3, -4, -23, -31, -84, -239, -420, -1155]), st.data())
def test_reduce_idempotent_on_translates(d, data):
    forms = reduced_forms(d)
    f = data.draw(st.sampled_from(forms))
    # a random proper unimodular matrix from a word in S and T
    word = data.draw(st.lists(st.integers(-4, 4), min_size=1, max_size=6))
    g = f
    for k in word:
        g = _act(g, (1, k, 0, 1))
        g = _act(g, (0, -1, 1, 0))
    assert g.disc == d
    r = reduce(g)
    assert r.is_reduced() and r.disc == d
    assert reduce(r) == r
    assert r == f  # proper equivalence keeps the class


@pytest.mark.parametrize("d,h,inv,h3", [(-4, 1, (), 1), (-23, 3, (3,), 3), (-31, 3, (3,), 3), (-3299, 27, (3, 9), 9),
                                        (-3896, 36, (3, 12), 9), (-4027, 9, (3, 3), 9)])
def test_imaginary_class_groups(d, h, inv, h3):
    F = class_group(d)
    assert (F.h, F.h3) == (h, h3)
    assert tuple(F.cl_invariants) == inv
    assert (F.r1, F.r2) == (0, 1)
    assert three_torsion(d) == h3


def test_two_rank_matches_genus_theory():
    from torsion3.arith import factorize

    for d in (-3896, -420, -1155, -5460, -84):
        t = len(factorize(-d))
        inv = class_group(d).cl_invariants
        assert sum(1 for m in inv if m % 2 == 0) == t - 1


def test_reduced_forms_disc_minus_23():
    assert sorted(tuple(f) for f in reduced_forms(-23)) == [(1, 1, 6), (2, -1, 3), (2, 1, 3)]
    f = QuadraticForm(2, 1, 3)
    assert compose(compose(f, f), f) == principal_form(-23)


def test_units_and_signature():
    assert class_group(-4).w == 4 and class_group(-3).w == 6 and class_group(-7).w == 2
    F = class_group(5)
    assert (F.r1, F.r2, F.w, F.h, F.cl_invariants) == (2, 0, 2, 1, None)
    assert F.regulator.contains(math.log((1 + math.sqrt(5)) / 2))


@pytest.mark.parametrize("d,h", [(8, 1), (12, 1), (40, 2), (60, 2), (316, 3), (229, 3)])
def test_real_class_numbers(d, h):
    assert class_group(d).h == h


def test_real_class_number_oracle_by_forms():
    """Count reduced indefinite forms cycles for small d and compare (brute oracle)."""

    def narrow_cycles(d):
        # reduced indefinite forms: 0 < b < sqrt d, sqrt d - b < 2|a| < sqrt d + b
        s = math.sqrt(d)
        red = set()
        for b in range(1, math.isqrt(d) + 1):
            if (b * b - d) % 4:
                continue
            ac = (b * b - d) // 4
            for a in range(-abs(ac), abs(ac) + 1):
                if a == 0 or ac % a:
                    continue
                c = ac // a
                if 0 < b < s and s - b < 2 * abs(a) < s + b:
                    red.add((a, b, c))

        def rho(f):
            a, b, c = f
            # b' = -b mod 2c, sqrt d - 2|c| < b' < sqrt d
            cc = abs(c)
            bb = -b
            while not (s - 2 * cc < bb < s):
                bb += 2 * cc
            return (c, bb, (bb * bb - d) // (4 * c))

        seen, n = set(), 0
        for f in sorted(red):
            if f in seen:
                continue
            n += 1
            g = f
            while g not in seen:
                seen.add(g)
                g = rho(g)
        return n

    for d in [d for d in range(5, 400) if is_fundamental(d)]:
        h_plus = narrow_cycles(d)
        h = class_group(d).h
        # h+ = h or 2h depending on the norm of the fundamental unit
        assert h_plus in (h, 2 * h), d


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 5000).map(lambda D: -D).filter(is_fundamental))
def test_group_axioms_and_bounds(d):
    forms = reduced_forms(d)
    F = class_group(d)
    one = principal_form(d)
    assert F.h == len(forms) == math.prod(F.cl_invariants)
    assert F.h3 == 3 ** sum(1 for m in F.cl_invariants if m % 3 == 0)
    assert F.h3 <= F.h <= math.sqrt(abs(d)) * (2 + math.log(abs(d))) / math.pi
    fs = set(forms)
    for f in forms[:8]:
        assert compose(f, one) == f
        assert F.h % element_order(f, F.h) == 0
        for g in forms[:8]:
            assert compose(f, g) in fs
            assert compose(f, g) == compose(g, f)
