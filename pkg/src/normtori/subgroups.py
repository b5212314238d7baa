"""Conjugacy classes of subgroups.

Classes are found by adjoining one element at a time: every nontrivial
subgroup V equals <U, x> for a maximal subgroup U of V and any x in V \\ U, so
starting from the trivial subgroup and adjoining elements to one
representative per class reaches every class.  Each new subgroup is compared
against all known conjugates by its element bitmask.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .groups import (CapExceeded, FiniteGroup, GroupHomomorphism, closure, normalizer,
                     orbit_signature, subgroup_from_elements, trivial_subgroup)

DEFAULT_MAX_SUBGROUP_ORDER = 1000


@dataclass
class SubgroupClass:
    rep: FiniteGroup
    size: int
    conjugate_bits: list[int] = field(repr=False)

    @property
    def order(self) -> int:
        return self.rep.order


class SubgroupClassList:
    """Deterministically ordered conjugacy classes of subgroups of a group."""

    def __init__(self, group: FiniteGroup, classes: list[SubgroupClass]):
        self.group = group
        self.classes = classes
        self._lookup = {}
        for i, c in enumerate(classes):
            for b in c.conjugate_bits:
                self._lookup[b] = i

    def __len__(self) -> int:
        return len(self.classes)

    def __iter__(self):
        return iter(self.classes)

    def __getitem__(self, i) -> SubgroupClass:
        return self.classes[i]

    def reps(self) -> list[FiniteGroup]:
        return [c.rep for c in self.classes]

    def index_of(self, U: FiniteGroup) -> int:
        """Position of the class containing U."""
        return self._lookup[U.bits]

    def is_subconjugate(self, i: int, j: int) -> bool:
        """Is the representative of class i contained in a conjugate of class j's?"""
        a = self.classes[i].rep.bits
        return any(a & b == a for b in self.classes[j].conjugate_bits)


def _class_sort_key(G: FiniteGroup, U: FiniteGroup, conj_elements: list[np.ndarray]):
    sig = orbit_signature(U) if U.is_permutation else ()
    least = min(tuple(int(v) for v in np.sort(e)) for e in conj_elements)
    return (U.order, sig, least)


def _conjugates(G: FiniteGroup, U: FiniteGroup):
    """Distinct conjugates of U as (bits, sorted elements), over a transversal of N(U)."""
    T = G.table
    N = normalizer(G, U)
    seen: dict[int, np.ndarray] = {}
    covered = np.zeros(T.n, dtype=bool)
    for x in G.elements:
        x = int(x)
        if covered[x]:
            continue
        covered[T.mul[N.elements, x]] = True
        elems = np.sort(T.conj(U.elements, x))
        m = np.zeros(T.n, dtype=bool)
        m[elems] = True
        seen[int.from_bytes(np.packbits(m).tobytes(), "big")] = elems
    return N, seen


def subgroup_classes(G: FiniteGroup, max_order: int = DEFAULT_MAX_SUBGROUP_ORDER) -> SubgroupClassList:
    if G.order > max_order:
        raise CapExceeded(f"subgroup classes need |G| <= {max_order}, got {G.order}")
    T = G.table
    found: list[tuple[FiniteGroup, FiniteGroup, dict]] = []
    lookup: dict[int, int] = {}

    def register(U: FiniteGroup) -> None:
        if U.bits in lookup:
            return
        N, conj = _conjugates(G, U)
        idx = len(found)
        found.append((U, N, conj))
        for b in conj:
            lookup[b] = idx

    register(trivial_subgroup(G))
    i = 0
    while i < len(found):
        U, N, _ = found[i]
        i += 1
        done = U.mask.copy()
        for x in G.elements:
            x = int(x)
            if done[x]:
                continue
            coset = T.mul[U.elements, x]
            for n in N.elements:
                done[T.conj(coset, int(n))] = True
            V = FiniteGroup(T, closure(T, [x], U), list(U.gens) + [x])
            register(V)

    classes = []
    for U, N, conj in found:
        key = _class_sort_key(G, U, list(conj.values()))
        # representative = the conjugate with the least sorted element tuple
        least = min(conj.values(), key=lambda e: tuple(int(v) for v in e))
        rep = subgroup_from_elements(T, least)
        classes.append((key, SubgroupClass(rep, G.order // N.order, list(conj.keys()))))
    classes.sort(key=lambda kc: kc[0])
    return SubgroupClassList(G, [c for _, c in classes])


def minimal_classes(classes: SubgroupClassList, indices) -> list[int]:
    """Indices among ``indices`` whose representative properly contains no conjugate of another."""
    idx = sorted(set(indices))
    out = []
    for i in idx:
        if not any(j != i and classes.is_subconjugate(j, i) for j in idx):
            out.append(i)
    return out


def class_image(classes: SubgroupClassList, phi: GroupHomomorphism, i: int) -> int:
    """Class index of phi(rep_i) for an automorphism phi."""
    img = phi.image(classes[i].rep)
    return classes.index_of(img)


def is_invariant_under_aut(classes: SubgroupClassList, indices, auts: list[GroupHomomorphism]) -> bool:
    """True iff every automorphism maps the set of classes into itself."""
    s = set(indices)
    return all(class_image(classes, phi, i) in s for phi in auts for i in s)


def all_subgroups(G: FiniteGroup, max_order: int = 200) -> list[FiniteGroup]:
    """Every subgroup, by brute-force closure over subsets of generators.

    Used as an independent oracle for small groups.
    """
    if G.order > max_order:
        raise CapExceeded(f"exhaustive subgroup enumeration needs |G| <= {max_order}")
    T = G.table
    seen = {trivial_subgroup(G).bits: trivial_subgroup(G)}
    frontier = list(seen.values())
    while frontier:
        nxt = []
        for U in frontier:
            for x in G.elements:
                x = int(x)
                if x in U:
                    continue
                V = subgroup_from_elements(T, closure(T, [x], U))
                if V.bits not in seen:
                    seen[V.bits] = V
                    nxt.append(V)
        frontier = nxt
    return list(seen.values())
