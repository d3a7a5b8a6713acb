"""Permutation 2-groups with a transposition, i.e. wreath products C2 wr H.

Permutations are tuples p of images on {0, ..., n-1} (p[i] is the image of i) and
compose right to left: (p * q)[i] = p[q[i]]. Text in and out uses 1-based cycle
notation, e.g. "(1234)(56)", with "()" for the identity.

For G = C2 wr H on {0, 1} x B_H the point (i, b) is stored as 2b + i, so the
blocks are {2b, 2b + 1}.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Sequence

__all__ = [
    "Perm",
    "PermGroupData",
    "GroupSignature",
    "PredictionReport",
    "UnsupportedGroupError",
    "parse_cycles",
    "cycle_notation",
    "generate",
    "symmetric",
    "cyclic",
    "trivial",
    "d4",
    "wreath_c2",
    "has_transposition",
    "transposition_blocks",
    "recover_H",
    "is_perm_isomorphic",
    "normalizer_order",
    "aut_perm_order",
    "aut_ratio",
    "conjugacy_classes",
    "involution_classes",
    "parse_signature",
    "u_of_signature",
    "m_sigma",
    "base_archimedean",
    "signatures_over",
    "cm_relative_prediction",
    "cm_full_prediction",
    "predict",
    "transitive_subgroups",
]

MAX_DEGREE = 16
BRUTE_FORCE_DEGREE = 8

Perm = tuple[int, ...]


class UnsupportedGroupError(ValueError):
    """The requested prediction needs a decomposition this module does not compute."""


# ---------------------------------------------------------------------------
# permutations


def compose(p: Perm, q: Perm) -> Perm:
    return tuple(p[i] for i in q)


def inverse(p: Perm) -> Perm:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def identity(n: int) -> Perm:
    return tuple(range(n))


def order(p: Perm) -> int:
    k, q, e = 1, p, identity(len(p))
    while q != e:
        q = compose(p, q)
        k += 1
    return k


def cycles(p: Perm) -> list[tuple[int, ...]]:
    seen = [False] * len(p)
    out = []
    for i in range(len(p)):
        if seen[i]:
            continue
        c = [i]
        seen[i] = True
        j = p[i]
        while j != i:
            c.append(j)
            seen[j] = True
            j = p[j]
        if len(c) > 1:
            out.append(tuple(c))
    return out


def cycle_notation(p: Perm) -> str:
    cs = cycles(p)
    if not cs:
        return "()"
    sep = "," if len(p) > 9 else ""
    return "".join("(" + sep.join(str(i + 1) for i in c) + ")" for c in cs)


_CYCLE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, degree: int) -> Perm:
    """Parse 1-based cycle notation; digits run together only below degree 10."""
    text = text.replace(" ", "")
    if _CYCLE.sub("", text):
        raise ValueError(f"not cycle notation: {text!r}")
    img = list(range(degree))
    for body in _CYCLE.findall(text):
        if not body:
            continue
        pts = [int(x) for x in body.split(",")] if "," in body else [int(ch) for ch in body]
        if len(set(pts)) != len(pts) or not all(1 <= x <= degree for x in pts):
            raise ValueError(f"bad cycle ({body}) for degree {degree}")
        cyc = [x - 1 for x in pts]
        # cycles compose right to left
        step = {a: b for a, b in zip(cyc, cyc[1:] + cyc[:1])}
        img = [step.get(img[i], img[i]) for i in range(degree)]
    return tuple(img)


# ---------------------------------------------------------------------------
# groups


@dataclass(frozen=True)
class PermGroupData:
    degree: int
    elements: tuple[Perm, ...]
    generators: tuple[Perm, ...] = field(default=())

    def __post_init__(self):
        if not 1 <= self.degree <= MAX_DEGREE:
            raise ValueError(f"degree must be in 1..{MAX_DEGREE}")

    @property
    def order(self) -> int:
        return len(self.elements)

    @cached_property
    def element_set(self) -> frozenset:
        return frozenset(self.elements)

    def __contains__(self, p) -> bool:
        return p in self.element_set

    def is_transitive(self) -> bool:
        orbit = {0}
        frontier = [0]
        gens = self.generators or self.elements
        while frontier:
            i = frontier.pop()
            for g in gens:
                j = g[i]
                if j not in orbit:
                    orbit.add(j)
                    frontier.append(j)
        return len(orbit) == self.degree

    def describe(self) -> str:
        gens = ", ".join(cycle_notation(g) for g in self.generators) or "()"
        return f"<{gens}> of degree {self.degree}, order {self.order}"


def generate(degree: int, gens: Iterable) -> PermGroupData:
    """Closure of generators given as tuples or cycle-notation strings."""
    if not 1 <= degree <= MAX_DEGREE:
        raise ValueError(f"degree must be in 1..{MAX_DEGREE}")
    gs = tuple(parse_cycles(g, degree) if isinstance(g, str) else tuple(g) for g in gens)
    for g in gs:
        if sorted(g) != list(range(degree)):
            raise ValueError(f"{g} is not a permutation of degree {degree}")
    e = identity(degree)
    elems = {e}
    frontier = [e]
    while frontier:
        x = frontier.pop()
        for g in gs:
            y = compose(g, x)
            if y not in elems:
                elems.add(y)
                frontier.append(y)
    return PermGroupData(degree, tuple(sorted(elems)), gs)


def trivial(degree: int = 1) -> PermGroupData:
    return generate(degree, [])


def cyclic(n: int) -> PermGroupData:
    return generate(n, [tuple((i + 1) % n for i in range(n))])


def symmetric(n: int) -> PermGroupData:
    if n == 1:
        return trivial(1)
    return generate(n, ["(12)", tuple((i + 1) % n for i in range(n))])


def d4() -> PermGroupData:
    """D4 = <(1234), (24)> in S4, with blocks {1, 3} and {2, 4}."""
    return generate(4, ["(1234)", "(24)"])


def wreath_c2(H: PermGroupData) -> PermGroupData:
    """C2 wr H acting on {0, 1} x B_H, the point (i, b) stored as 2b + i."""
    if not H.is_transitive():
        raise ValueError("H must be transitive")
    d = H.degree
    if 2 * d > MAX_DEGREE:
        raise ValueError(f"C2 wr H would have degree {2 * d} > {MAX_DEGREE}")
    swap = tuple(1 - i if i < 2 else i for i in range(2 * d))
    lifts = [tuple(2 * h[p // 2] + p % 2 for p in range(2 * d)) for h in (H.generators or H.elements)]
    G = generate(2 * d, [swap] + lifts)
    assert G.order == 2 ** d * H.order
    return G


# ---------------------------------------------------------------------------
# block structure


def transposition_blocks(G: PermGroupData) -> list[tuple[int, int]]:
    """Pairs {a, b} with the transposition (a b) in G."""
    out = []
    for g in G.elements:
        cs = cycles(g)
        if len(cs) == 1 and len(cs[0]) == 2:
            out.append(tuple(sorted(cs[0])))
    return sorted(out)


def has_transposition(G: PermGroupData) -> bool:
    return bool(transposition_blocks(G))


def _blocks(G: PermGroupData) -> list[tuple[int, int]]:
    blocks = transposition_blocks(G)
    if not blocks:
        raise ValueError("group has no transposition")
    pts = [p for b in blocks for p in b]
    if len(pts) != len(set(pts)) or len(pts) != G.degree:
        raise ValueError("transpositions do not partition the points into pairs")
    return blocks


def _block_action(G: PermGroupData, g: Perm, blocks) -> Perm:
    where = {p: k for k, b in enumerate(blocks) for p in b}
    img = []
    for b in blocks:
        targets = {where[g[p]] for p in b}
        if len(targets) != 1:
            raise ValueError("G does not preserve the transposition blocks")
        img.append(targets.pop())
    return tuple(img)


def recover_H(G: PermGroupData) -> PermGroupData:
    """The permutation group induced on the blocks swapped by transpositions."""
    blocks = _blocks(G)
    gens = G.generators or G.elements
    return generate(len(blocks), [_block_action(G, g, blocks) for g in gens])


# ---------------------------------------------------------------------------
# isomorphism and normalizers (brute force at small degree)


def _conjugate(pi: Perm, g: Perm) -> Perm:
    return compose(compose(pi, g), inverse(pi))


def normalizer_order(G: PermGroupData) -> int:
    """|N_{S_n}(G)| by running over S_n; only for n <= 8."""
    n = G.degree
    if n > BRUTE_FORCE_DEGREE:
        raise ValueError(f"brute-force normalizer limited to degree {BRUTE_FORCE_DEGREE}")
    gens = G.generators or G.elements
    S = G.element_set
    return sum(1 for pi in itertools.permutations(range(n)) if all(_conjugate(pi, g) in S for g in gens))


def is_perm_isomorphic(G: PermGroupData, H: PermGroupData) -> bool:
    if G.degree != H.degree or G.order != H.order:
        return False
    if G.degree > BRUTE_FORCE_DEGREE:
        raise ValueError(f"brute-force isomorphism limited to degree {BRUTE_FORCE_DEGREE}")
    gens = G.generators or G.elements
    S = H.element_set
    return any(all(_conjugate(pi, g) in S for g in gens) for pi in itertools.permutations(range(G.degree)))


def aut_perm_order(G: PermGroupData) -> int:
    """|Aut_perm(G)| = |N_{S_n}(G)|; above degree 8 only for wreath products, via
    |Aut_perm(C2 wr H)| = 2^{deg H} |Aut_perm(H)|."""
    if G.degree <= BRUTE_FORCE_DEGREE:
        return normalizer_order(G)
    H = recover_H(G)
    return 2 ** H.degree * aut_perm_order(H)


def aut_ratio(H: PermGroupData) -> int:
    """|Aut_perm(C2 wr H)| / |Aut_perm(H)|."""
    G = wreath_c2(H)
    if G.degree <= BRUTE_FORCE_DEGREE:
        num, den = normalizer_order(G), normalizer_order(H)
        if num % den:
            raise ArithmeticError("normalizer orders not divisible")
        return num // den
    return 2 ** H.degree


# ---------------------------------------------------------------------------
# conjugacy classes and signatures


def conjugacy_classes(G: PermGroupData) -> dict[Perm, frozenset]:
    """Classes keyed by their lexicographically smallest element."""
    todo = set(G.elements)
    out = {}
    gens = G.generators or G.elements
    while todo:
        x = min(todo)
        cls = {x}
        frontier = [x]
        while frontier:
            y = frontier.pop()
            for g in gens:
                z = _conjugate(g, y)
                if z not in cls:
                    cls.add(z)
                    frontier.append(z)
        todo -= cls
        out[min(cls)] = frozenset(cls)
    return dict(sorted(out.items()))


def involution_classes(G: PermGroupData) -> list[Perm]:
    """Labels of the classes of elements of order 1 or 2."""
    e = identity(G.degree)
    return [lab for lab in conjugacy_classes(G) if compose(lab, lab) == e]


@dataclass(frozen=True)
class GroupSignature:
    """One conjugacy class label per real place of the base field, plus its number
    of complex places."""

    classes: tuple[Perm, ...]
    complex_places: int = 0

    def __str__(self) -> str:
        s = ";".join(cycle_notation(c) for c in self.classes)
        if self.complex_places:
            s += f" (+{self.complex_places} complex)"
        return s


def _label_of(G: PermGroupData, g: Perm) -> Perm:
    for lab, cls in conjugacy_classes(G).items():
        if g in cls:
            return lab
    raise ValueError(f"{cycle_notation(g)} is not in G")


def parse_signature(G: PermGroupData, text: str | Sequence, complex_places: int = 0) -> GroupSignature:
    """Signature from cycle notation, one class per real place separated by ';'."""
    parts = text.split(";") if isinstance(text, str) else list(text)
    labels = []
    e = identity(G.degree)
    for part in parts:
        g = parse_cycles(part, G.degree) if isinstance(part, str) else tuple(part)
        if g not in G:
            raise ValueError(f"{cycle_notation(g)} is not in G")
        if compose(g, g) != e:
            raise ValueError(f"{cycle_notation(g)} is not an involution")
        labels.append(_label_of(G, g))
    if complex_places < 0:
        raise ValueError("complex_places must be nonnegative")
    return GroupSignature(tuple(labels), complex_places)


def _place_data(G: PermGroupData, sigma: Perm):
    """(fixed blocks trivial under sigma, fixed blocks swapped, 2-cycles of sigma on blocks)."""
    blocks = _blocks(G)
    bar = _block_action(G, sigma, blocks)
    split = ram = 0
    for k, b in enumerate(blocks):
        if bar[k] == k:
            if sigma[b[0]] == b[0]:
                split += 1
            else:
                ram += 1
    two_cycles = sum(1 for c in cycles(bar) if len(c) == 2)
    return split, ram, two_cycles, blocks, bar


def u_of_signature(G: PermGroupData, sig: GroupSignature) -> int:
    """Relative unit rank of K/F: the infinite places of F split in K."""
    d = len(_blocks(G))
    u = d * sig.complex_places
    for s in sig.classes:
        split, _, two_cycles, _, _ = _place_data(G, s)
        u += split + two_cycles
    return u


def base_archimedean(G: PermGroupData, sig: GroupSignature) -> tuple[int, int]:
    """(r1(F), r2(F)) for the index-2 subfield F of a G-extension with signature sig."""
    d = len(_blocks(G))
    r1 = r2 = 0
    for s in sig.classes:
        split, ram, two_cycles, _, _ = _place_data(G, s)
        r1 += split + ram
        r2 += two_cycles
    return r1, r2 + d * sig.complex_places


def m_sigma(G: PermGroupData, sig: GroupSignature) -> int:
    """Product over real places of #{u in C2^(fixed blocks) : u sigma ~ sigma}."""
    classes = conjugacy_classes(G)
    total = 1
    for s in sig.classes:
        _, _, _, blocks, bar = _place_data(G, s)
        fixed = [b for k, b in enumerate(blocks) if bar[k] == k]
        cls = classes[s]
        count = 0
        for bits in itertools.product((0, 1), repeat=len(fixed)):
            u = list(range(G.degree))
            for bit, (a, b) in zip(bits, fixed):
                if bit:
                    u[a], u[b] = b, a
            if compose(tuple(u), s) in cls:
                count += 1
        total *= count
    return total


def signatures_over(G: PermGroupData, base: Sequence[Perm], complex_places: int = 0) -> list[GroupSignature]:
    """All signatures of G whose image in H is the given tuple of H-classes (by element)."""
    H = recover_H(G)
    blocks = _blocks(G)
    h_classes = conjugacy_classes(H)
    targets = []
    for hb in base:
        hcls = next(c for c in h_classes.values() if tuple(hb) in c)
        targets.append(hcls)
    per_place = []
    for hcls in targets:
        per_place.append([lab for lab in involution_classes(G) if _block_action(G, lab, blocks) in hcls])
    return [GroupSignature(tuple(c), complex_places) for c in itertools.product(*per_place)]


# ---------------------------------------------------------------------------
# Cohen-Martinet predictions


def cm_relative_prediction(u: int) -> Fraction:
    """Predicted average of h3(K/F) for relative unit rank u."""
    if u < 0:
        raise ValueError("u must be nonnegative")
    return 1 + Fraction(1, 3 ** u)


def _rank_mod3(rows: list[list[int]]) -> int:
    rows = [[x % 3 for x in r] for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rows[rank][c]  # 1 or 2, its own inverse mod 3
        rows[rank] = [(x * inv) % 3 for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(x - f * y) % 3 for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def _fixed_dim(basis: list[list[int]], act) -> int:
    """dim over F3 of the vectors in span(basis) fixed by the linear map act."""
    # fixed vectors: coefficient vectors c with sum c_i (act(b_i) - b_i) = 0
    diffs = [[(y - x) % 3 for x, y in zip(b, act(b))] for b in basis]
    return len(basis) - _rank_mod3(diffs)


def _permute(p: Perm, v: list[int]) -> list[int]:
    out = [0] * len(v)
    for i, x in enumerate(v):
        out[p[i]] = x
    return out


def _orbit_span_is_full(H: PermGroupData, v: list[int], dim: int) -> bool:
    span = [v]
    frontier = [v]
    seen = {tuple(v)}
    while frontier:
        x = frontier.pop()
        for g in H.generators or H.elements:
            y = _permute(g, x)
            if tuple(y) not in seen:
                seen.add(tuple(y))
                span.append(y)
                frontier.append(y)
    return _rank_mod3(span) == dim


def w_prime_irreducible(H: PermGroupData) -> bool:
    """Whether the sum-zero part of the permutation module F3^{B_H} is irreducible."""
    d = H.degree
    if d == 1:
        return True
    basis = [[1 if j == i else (2 if j == d - 1 else 0) for j in range(d)] for i in range(d - 1)]
    for coeffs in itertools.product(range(3), repeat=d - 1):
        if not any(coeffs):
            continue
        v = [sum(c * b[j] for c, b in zip(coeffs, basis)) % 3 for j in range(d)]
        if not _orbit_span_is_full(H, v, d - 1):
            return False
    return True


def cm_full_prediction(G: PermGroupData, sig: GroupSignature) -> Fraction:
    """Predicted average of h3(K) for G = C2 wr H, when W' is irreducible."""
    H = recover_H(G)
    if H.order % 3 == 0:
        raise UnsupportedGroupError("unsupported; 3 divides |H| so W' need not split off")
    if not w_prime_irreducible(H):
        raise UnsupportedGroupError("unsupported; general Brauer decomposition out of scope")
    blocks = _blocks(G)
    n, d = G.degree, len(blocks)
    # V: vectors on the points antisymmetric on every block; W': sum-zero vectors on blocks
    v_basis = []
    for a, b in blocks:
        v = [0] * n
        v[a], v[b] = 1, 2
        v_basis.append(v)
    w_basis = [[1 if j == i else (2 if j == d - 1 else 0) for j in range(d)] for i in range(d - 1)]
    logV = d * sig.complex_places
    logW = (d - 1) * sig.complex_places
    for s in sig.classes:
        bar = _block_action(G, s, blocks)
        logV += _fixed_dim(v_basis, lambda v, s=s: _permute(s, v))
        logW += _fixed_dim(w_basis, lambda w, bar=bar: _permute(bar, w)) if w_basis else 0
    return (1 + Fraction(1, 3 ** logV)) * (1 + Fraction(1, 3 ** logW))


@dataclass(frozen=True)
class PredictionReport:
    signature: str
    u_rel: int
    m_sigma: int
    cm_relative: Fraction
    cm_full: Fraction | None

    def __post_init__(self):
        if self.cm_relative != cm_relative_prediction(self.u_rel):
            raise ValueError("cm_relative must equal 1 + 3^-u_rel")


def predict(G: PermGroupData, sig: GroupSignature) -> PredictionReport:
    u = u_of_signature(G, sig)
    try:
        full = cm_full_prediction(G, sig)
    except UnsupportedGroupError:
        full = None
    return PredictionReport(str(sig), u, m_sigma(G, sig), cm_relative_prediction(u), full)


# ---------------------------------------------------------------------------
# small catalogues


def transitive_subgroups(n: int) -> list[PermGroupData]:
    """Transitive subgroups of S_n up to equality (not conjugacy), n <= 4.

    Every subgroup of S_4 is generated by two elements, so pairs suffice.
    """
    if n > 4:
        raise ValueError("only n <= 4")
    S = symmetric(n)
    seen = {}
    for g, h in itertools.combinations_with_replacement(S.elements, 2):
        G = generate(n, [g, h])
        if G.is_transitive() and G.element_set not in seen:
            seen[G.element_set] = G
    return sorted(seen.values(), key=lambda G: (G.order, G.elements))


def group_exponent(G: PermGroupData) -> int:
    return reduce(math.lcm, (order(g) for g in G.elements), 1)
