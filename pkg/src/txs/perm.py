"""Signed slot permutations, finite permutation groups, and coset transversals.

A signed permutation is a pair ``(images, sign)`` where ``images`` is a tuple
permutation of ``range(n)`` and ``sign`` is +1 or -1.  Permutations act on
index lists in gather form: ``apply(p, seq)[i] == seq[p[i]]``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import GroupCapError

Perm = tuple[int, ...]
SignedPerm = tuple[Perm, int]

GROUP_ORDER_CAP = 10_000_000
ELEMENT_LIST_THRESHOLD = 200_000


def identity(n: int) -> Perm:
    return tuple(range(n))


def apply_perm(p: Perm, seq):
    """Rearrange seq so that position i receives seq[p[i]]."""
    return tuple(seq[p[i]] for i in range(len(p)))


def chain(p: Perm, q: Perm) -> Perm:
    """Permutation equal to applying p first, then q."""
    return tuple(p[q[i]] for i in range(len(p)))


def invert(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def transposition(n: int, i: int, j: int) -> Perm:
    images = list(range(n))
    images[i], images[j] = images[j], images[i]
    return tuple(images)


def perm_parity(p: Perm) -> int:
    """Sign of a permutation (+1 even, -1 odd)."""
    seen = [False] * len(p)
    sign = 1
    for i in range(len(p)):
        if seen[i]:
            continue
        j = p[i]
        length = 1
        seen[i] = True
        while j != i:
            seen[j] = True
            j = p[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def smul(a: SignedPerm, b: SignedPerm) -> SignedPerm:
    """Signed product: apply a first, then b."""
    return chain(a[0], b[0]), a[1] * b[1]


def closure(generators, n: int, cap: int = GROUP_ORDER_CAP) -> list[SignedPerm]:
    """All signed permutations generated by ``generators`` (BFS closure)."""
    ident = (identity(n), 1)
    elems = {ident}
    frontier = [ident]
    gens = [(tuple(g), s) for g, s in generators]
    while frontier:
        nxt = []
        for e in frontier:
            for g in gens:
                prod = smul(e, g)
                if prod not in elems:
                    elems.add(prod)
                    nxt.append(prod)
                    if len(elems) > cap:
                        raise GroupCapError(
                            f"group closure exceeded cap of {cap} elements"
                        )
        frontier = nxt
    return sorted(elems)


@dataclass(frozen=True)
class SymmetrySpec:
    """Generating set of signed slot permutations for one tensor head."""

    rank: int
    generators: tuple[SignedPerm, ...]

    @staticmethod
    def trivial(rank: int) -> "SymmetrySpec":
        return SymmetrySpec(rank, ())

    @staticmethod
    def fully(rank: int, sign: int) -> "SymmetrySpec":
        gens = tuple(
            (transposition(rank, i, i + 1), sign) for i in range(rank - 1)
        )
        return SymmetrySpec(rank, gens)

    @staticmethod
    def symmetric(rank: int) -> "SymmetrySpec":
        return SymmetrySpec.fully(rank, 1)

    @staticmethod
    def antisymmetric(rank: int) -> "SymmetrySpec":
        return SymmetrySpec.fully(rank, -1)

    @staticmethod
    def riemann() -> "SymmetrySpec":
        gens = (
            (transposition(4, 0, 1), -1),
            (transposition(4, 2, 3), -1),
            ((2, 3, 0, 1), 1),
        )
        return SymmetrySpec(4, gens)

    @staticmethod
    def block_symmetric(rank: int, blocks) -> "SymmetrySpec":
        """Exchange symmetry of equal-length slot blocks (no sign)."""
        gens = []
        for b1, b2 in blocks:
            images = list(range(rank))
            for i, j in zip(b1, b2):
                images[i], images[j] = images[j], images[i]
            gens.append((tuple(images), 1))
        return SymmetrySpec(rank, tuple(gens))

    def embedded(self, offset: int, total: int) -> tuple[SignedPerm, ...]:
        """Generators lifted to act on slots [offset, offset+rank) of a larger list."""
        out = []
        for images, sign in self.generators:
            big = list(range(total))
            for i, j in enumerate(images):
                big[offset + i] = offset + j
            out.append((tuple(big), sign))
        return tuple(out)


@lru_cache(maxsize=4096)
def spec_elements(spec: SymmetrySpec) -> tuple[SignedPerm, ...]:
    """Full signed element list of the group generated by a spec."""
    return tuple(closure(spec.generators, spec.rank))


def group_elements(spec: SymmetrySpec, cap: int = GROUP_ORDER_CAP):
    """Group handle for a spec: explicit list when small, SGS handle when large.

    Both variants expose ``order()`` and ``__contains__``.
    """
    try:
        elems = closure(spec.generators, spec.rank, cap=min(cap, ELEMENT_LIST_THRESHOLD))
        return ElementList(elems)
    except GroupCapError:
        handle = SchreierSims.from_signed(spec.generators, spec.rank)
        if handle.order() > cap:
            raise GroupCapError(
                f"group order {handle.order()} exceeds cap {cap}"
            )
        return handle


class ElementList:
    """Explicit element list with membership and order queries."""

    def __init__(self, elements):
        self.elements = list(elements)
        self._set = set(self.elements)

    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, elem: SignedPerm) -> bool:
        return elem in self._set

    def __iter__(self):
        return iter(self.elements)


class SchreierSims:
    """Stabilizer chain over points 0..n-1 (Schreier tower, no sifting).

    Each level stores a base point, the generators of that level's group, and
    a transversal of the point's orbit.  The next level's generators are the
    Schreier generators, so orders multiply exactly.  Signed groups are
    embedded as unsigned groups on n+2 points, where the two extra points are
    swapped exactly by the negative elements.
    """

    GEN_CAP = 100_000

    def __init__(self, gens: list[Perm], n: int, signed_n: int | None = None):
        self.n = n
        self.signed_n = signed_n
        self.levels: list[tuple[int, dict[int, Perm]]] = []
        ident = identity(n)
        current = sorted({tuple(g) for g in gens} - {ident})
        while current:
            b = next(
                i for i in range(n) if any(g[i] != i for g in current)
            )
            trans = {b: ident}
            frontier = [b]
            while frontier:
                nxt = []
                for point in frontier:
                    rep = trans[point]
                    for g in current:
                        image = invert(g)[point]
                        if image not in trans:
                            trans[image] = chain(rep, g)
                            nxt.append(image)
                frontier = nxt
            self.levels.append((b, trans))
            stab = set()
            for point, rep in trans.items():
                for g in current:
                    prod = chain(rep, g)
                    image = invert(prod)[b]
                    schreier = chain(prod, invert(trans[image]))
                    if schreier != ident:
                        stab.add(schreier)
                        if len(stab) > self.GEN_CAP:
                            raise GroupCapError("Schreier generator blow-up")
            current = sorted(stab)

    @staticmethod
    def from_signed(generators, rank: int) -> "SchreierSims":
        n = rank + 2
        gens = []
        for images, sign in generators:
            big = list(images) + [rank, rank + 1]
            if sign < 0:
                big[rank], big[rank + 1] = big[rank + 1], big[rank]
            gens.append(tuple(big))
        return SchreierSims(gens, n, signed_n=rank)

    def order(self) -> int:
        total = 1
        for _, trans in self.levels:
            total *= len(trans)
        return total

    def contains_unsigned(self, g: Perm) -> bool:
        ident = identity(self.n)
        for b, trans in self.levels:
            image = invert(g)[b]
            if image not in trans:
                return False
            g = chain(g, invert(trans[image]))
        return g == ident

    def __contains__(self, elem) -> bool:
        if self.signed_n is None:
            return self.contains_unsigned(tuple(elem))
        images, sign = elem
        rank = self.signed_n
        big = list(images) + [rank, rank + 1]
        if sign < 0:
            big[rank], big[rank + 1] = big[rank + 1], big[rank]
        return self.contains_unsigned(tuple(big))


def unsigned_elements(spec: SymmetrySpec) -> list[Perm]:
    """Underlying unsigned permutations of a spec's group, deduplicated."""
    return sorted({images for images, _ in spec_elements(spec)})


def right_transversal(spec: SymmetrySpec, n: int | None = None) -> list[SignedPerm]:
    """One representative per right coset H\\S_n, lexicographically minimal.

    H is the unsigned image of the group generated by ``spec``.  Desk-scale
    only: intended for n <= 8.
    """
    if n is None:
        n = spec.rank
    if n != spec.rank:
        raise ValueError("slot count must match the spec rank")
    h_elems = unsigned_elements(spec)
    reps = []
    for sigma in itertools.permutations(range(n)):
        if all(chain(sigma, h) >= sigma for h in h_elems):
            reps.append((sigma, 1))
    return reps
