"""First obstruction to the Hasse norm principle for a tower L/K/k.

G = Gal(L/k), H = Gal(L/K).  Everything lives in H^ab, written in the
invariant-factor coordinates of ``abelianization_map(H)``.  The first
obstruction is ker(psi1) modulo the images of the local kernels ker(psi2^v),
pushed into H^ab through the inclusions H_w <= H.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .abexact import FinAb, kernel_basis, lattice_quotient, row_lattice_basis, solve_in_lattice
from .groups import (FiniteGroup, GroupHomomorphism, abelianization_map, derived_subgroup,
                     double_coset_reps, intersect, normalizer, right_coset_reps,
                     subgroup_from_elements, sylow_subgroup)
from .subgroups import SubgroupClassList, _conjugates, minimal_classes, subgroup_classes


class AbelianSubgroup:
    """Subgroup of Z/d_1 x ... x Z/d_k generated by coordinate rows."""

    def __init__(self, invariants, gens):
        self.invariants = tuple(int(d) for d in invariants)
        k = len(self.invariants)
        if k == 0:
            self._gens = np.zeros((0, 0), dtype=np.int64)
            return
        g = np.asarray(gens, dtype=np.int64).reshape(-1, k)
        self._gens = g % np.array(self.invariants, dtype=np.int64)

    @cached_property
    def lattice(self) -> np.ndarray:
        """Preimage of the subgroup in Z^k (contains diag(invariants))."""
        k = len(self.invariants)
        D = np.diag(np.array(self.invariants, dtype=np.int64)).reshape(k, k)
        return row_lattice_basis(np.concatenate([self._gens, D]), n=k)

    @cached_property
    def generators(self) -> list[list[int]]:
        """Canonical generators: the reduced HNF rows of the lattice, mod the invariants."""
        out = []
        for row in self.lattice:
            r = [int(a) % d for a, d in zip(row, self.invariants)]
            if any(r):
                out.append(r)
        return out

    @property
    def signature(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(r) for r in self.generators)

    @cached_property
    def structure(self) -> FinAb:
        k = len(self.invariants)
        if k == 0:
            return FinAb()
        return lattice_quotient(self.lattice, np.diag(np.array(self.invariants, dtype=np.int64)))

    @property
    def order(self) -> int:
        return self.structure.order

    def __le__(self, other: "AbelianSubgroup") -> bool:
        if self.invariants != other.invariants:
            raise ValueError("different ambient groups")
        if not self.generators:
            return True
        try:
            solve_in_lattice(other.lattice, np.array(self.generators, dtype=np.int64))
        except ValueError:
            return False
        return True

    def __eq__(self, other) -> bool:
        return (isinstance(other, AbelianSubgroup) and self.invariants == other.invariants
                and self.signature == other.signature)

    def __hash__(self) -> int:
        return hash((self.invariants, self.signature))

    def __repr__(self) -> str:
        return f"AbelianSubgroup({list(self.invariants)}, {self.generators})"

    def join(self, *others: "AbelianSubgroup") -> "AbelianSubgroup":
        rows = [self._gens] + [o._gens for o in others]
        return AbelianSubgroup(self.invariants, np.concatenate(rows))

    def quotient(self, sub: "AbelianSubgroup") -> FinAb:
        if not sub <= self:
            raise ValueError("not a subgroup")
        if not self.invariants:
            return FinAb()
        return lattice_quotient(self.lattice, sub.lattice)


@dataclass
class DecompositionScenario:
    """Places of K above a place v with decomposition group Gv.

    The places correspond to double cosets H x Gv; the local group at the
    place for x is H ∩ x Gv x^-1.
    """
    group: FiniteGroup
    H: FiniteGroup
    Gv: FiniteGroup
    double_coset_reps: list[int]
    double_coset_sizes: list[int]
    local_groups: list[FiniteGroup]


def decomposition_scenario(G: FiniteGroup, H: FiniteGroup, Gv: FiniteGroup) -> DecompositionScenario:
    if not Gv.is_subgroup_of(G):
        raise ValueError("Gv is not a subgroup of G")
    if not H.is_subgroup_of(G):
        raise ValueError("H is not a subgroup of G")
    T = G.table
    reps, sizes, locals_ = [], [], []
    for x, size in double_coset_reps(G, H, Gv):
        # h in x Gv x^-1  <=>  x^-1 h x in Gv
        elems = H.elements[Gv.mask[T.conj(H.elements, x)]]
        reps.append(x)
        sizes.append(size)
        locals_.append(subgroup_from_elements(T, elems))
    return DecompositionScenario(G, H, Gv, reps, sizes, locals_)


@dataclass
class ObstructionReport:
    ambient: FinAb
    ker_psi1: AbelianSubgroup
    image: AbelianSubgroup
    quotient: FinAb

    @property
    def ker_structure(self) -> FinAb:
        return self.ker_psi1.structure


def _hab(H: FiniteGroup):
    ab = abelianization_map(H)
    return ab, ab.invariants


def ker_psi1(G: FiniteGroup, H: FiniteGroup) -> AbelianSubgroup:
    """(H ∩ [G,G]) / [H,H] inside H^ab."""
    if not H.is_subgroup_of(G):
        raise ValueError("H is not a subgroup of G")
    ab, inv = _hab(H)
    K = intersect(H, derived_subgroup(G))
    return AbelianSubgroup(inv, [ab.coord(k) for k in K.gens])


def phi_unramified(G: FiniteGroup, H: FiniteGroup) -> AbelianSubgroup:
    """Image in H^ab of the subgroup generated by [h, x], h ∈ H ∩ x H x^-1."""
    ab, inv = _hab(H)
    T = G.table
    k = len(inv)
    rows = set()
    for x in right_coset_reps(G, H):
        hs = H.elements[H.mask[T.conj(H.elements, x)]]
        xi = int(T.inv[x])
        comm = T.mul[T.mul[T.mul[T.inv[hs], xi], hs], x]
        for r in ab.coords[H.local_index[comm]]:
            if r.any():
                rows.add(tuple(int(a) for a in r))
    return AbelianSubgroup(inv, sorted(rows))


def psi2_kernel_image(G: FiniteGroup, H: FiniteGroup, Gv: FiniteGroup,
                      scenario: DecompositionScenario | None = None) -> AbelianSubgroup:
    """phi1(ker psi2^v) for one place v with decomposition group Gv."""
    sc = scenario or decomposition_scenario(G, H, Gv)
    ab, inv = _hab(H)
    abv = abelianization_map(Gv)
    inv_v = abv.invariants
    T = G.table
    src_rows, img_rows = [], []
    for x, Hw in zip(sc.double_coset_reps, sc.local_groups):
        abw = abelianization_map(Hw)
        for b in abw.basis_elements():
            src_rows.append(ab.coord(b))
            img_rows.append(abv.coord(int(T.conj(np.array([b]), x)[0])))
    k = len(inv)
    if not src_rows or k == 0:
        return AbelianSubgroup(inv, [])
    S = np.array(src_rows, dtype=np.int64).reshape(-1, k)
    n = S.shape[0]
    if inv_v:
        Img = np.array(img_rows, dtype=np.int64).reshape(n, len(inv_v))
        K = kernel_basis(np.concatenate([Img, np.diag(np.array(inv_v, dtype=np.int64))]))
        coeffs = K[:, :n]
    else:
        coeffs = np.eye(n, dtype=np.int64)
    rows = np.array(coeffs.astype(object).dot(S.astype(object)), dtype=np.int64)
    return AbelianSubgroup(inv, rows.reshape(-1, k))


def obs1(G: FiniteGroup, H: FiniteGroup, scenarios=(), include_unramified: bool = True) -> ObstructionReport:
    """Ker psi1 / phi1(Ker psi2) over the given decomposition groups."""
    ker = ker_psi1(G, H)
    parts = [phi_unramified(G, H)] if include_unramified else []
    parts += [psi2_kernel_image(G, H, Gv) for Gv in scenarios]
    image = AbelianSubgroup(ker.invariants, np.zeros((0, len(ker.invariants)), dtype=np.int64))
    if parts:
        image = image.join(*parts)
    if not image <= ker:
        raise AssertionError("local image escapes ker psi1")
    return ObstructionReport(FinAb(ker.invariants), ker, image, ker.quotient(image))


def sylow_pair(G: FiniteGroup, H: FiniteGroup, p: int) -> tuple[FiniteGroup, FiniteGroup]:
    """(P, P ∩ H) with P a Sylow p-subgroup of G such that P ∩ H is Sylow in H.

    A vanishing obstruction for the pair only shows that the p-part of the
    obstruction for (G, H) vanishes; the converse is not claimed.
    """
    P = sylow_subgroup(G, p)
    if H.order % p:
        return P, subgroup_from_elements(G.table, [0])
    SH = sylow_subgroup(H, p)
    T = G.table
    for x in right_coset_reps(G, normalizer(G, P)):
        elems = np.sort(T.conj(P.elements, x))
        m = np.zeros(T.n, dtype=bool)
        m[elems] = True
        if m[SH.elements].all():
            Q = subgroup_from_elements(T, elems)
            return Q, intersect(Q, H)
    raise AssertionError("no Sylow subgroup of G contains the chosen Sylow subgroup of H")


# ------------------------------------------------------------ classification

@dataclass
class ClassVerdict:
    index: int
    order: int
    orbit_reps: int
    killed: frozenset            # signatures of the killed subgroups, one per orbit
    kills_all: bool


@dataclass
class VerdictTable:
    ker: AbelianSubgroup
    unramified: AbelianSubgroup
    classes: SubgroupClassList
    verdicts: list[ClassVerdict] = field(default_factory=list)

    def multiset(self) -> Counter:
        return Counter(v.killed for v in self.verdicts)

    def truth_counts(self) -> Counter:
        return Counter(v.kills_all for v in self.verdicts)

    def killing_classes(self) -> list[int]:
        return [v.index for v in self.verdicts if v.kills_all]

    def minimal_killing_classes(self) -> list[int]:
        return minimal_classes(self.classes, self.killing_classes())


def _orbit_reps_under(Gbar: FiniteGroup, P: FiniteGroup, N: FiniteGroup) -> list[np.ndarray]:
    """Conjugates of P in Gbar up to conjugation by N, as sorted element arrays."""
    _, conj = _conjugates(Gbar, P)
    T = Gbar.table
    left = dict(conj)
    reps = []
    while left:
        b = min(left)
        elems = left.pop(b)
        reps.append(elems)
        stack = [elems]
        while stack:
            e = stack.pop()
            for n in N.gens:
                f = np.sort(T.conj(e, n))
                m = np.zeros(T.n, dtype=bool)
                m[f] = True
                key = int.from_bytes(np.packbits(m).tobytes(), "big")
                if key in left:
                    stack.append(left.pop(key))
    return reps


def classify_scenarios(Gbar: FiniteGroup, epi: GroupHomomorphism, Hbar: FiniteGroup,
                       classes: SubgroupClassList | None = None,
                       include_unramified: bool = True) -> VerdictTable:
    """For each class of decomposition groups Gv of G = epi.target, which part of
    Ker psi1 for (Gbar, Hbar) the place kills."""
    G = epi.target
    classes = classes if classes is not None else subgroup_classes(G)
    ker = ker_psi1(Gbar, Hbar)
    inv = ker.invariants
    dnr = phi_unramified(Gbar, Hbar) if include_unramified else AbelianSubgroup(
        inv, np.zeros((0, len(inv)), dtype=np.int64))
    N = normalizer(Gbar, Hbar)
    table = VerdictTable(ker, dnr, classes)
    T = Gbar.table
    for i, c in enumerate(classes):
        P = epi.preimage(c.rep)
        killed = set()
        alls = []
        for elems in _orbit_reps_under(Gbar, P, N):
            Pv = subgroup_from_elements(T, elems)
            k = psi2_kernel_image(Gbar, Hbar, Pv).join(dnr)
            killed.add(k.signature)
            alls.append(k == ker)
        table.verdicts.append(ClassVerdict(i, c.order, len(alls), frozenset(killed), all(alls)))
    return table


def obstruction_via_cover(cover, H: FiniteGroup, scenarios=(),
                          include_unramified: bool = True) -> ObstructionReport:
    """The obstruction for K/k computed as the first obstruction over a Schur cover.

    ``cover`` has ``group`` and ``epi`` onto G; H and every Gv are pulled back
    along ``epi``.
    """
    epi = cover.epi
    return obs1(cover.group, epi.preimage(H), [epi.preimage(Gv) for Gv in scenarios],
                include_unramified)
