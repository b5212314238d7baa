"""The norm one torus pipeline for a transitive permutation group.

For G transitive on n points and H the stabilizer of the first point, the
character lattice of the norm one torus is J_{G/H}, and the invariant of
interest is H^1(G, F) for a flabby resolution 0 -> J_{G/H} -> P -> F -> 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .abexact import FinAb, cokernel_structure, factorint
from .cohom import DEFAULT_MAX_ORDER, DEFAULT_MAX_RANK, h1, h1_of_flabby_class
from .groups import (FiniteGroup, abelianization_map, is_primitive, is_transitive,
                     stabilizer_of_point, sylow_subgroup)
from .lattice import chevalley_module
from .subgroups import SubgroupClassList


class NotTransitive(ValueError):
    pass


def point_stabilizer(G: FiniteGroup) -> FiniteGroup:
    if not is_transitive(G):
        raise NotTransitive("the group must act transitively")
    return stabilizer_of_point(G, 0)


def h1_norm1(G: FiniteGroup, classes: SubgroupClassList | None = None, strategy: str = "seeded",
             max_order: int = DEFAULT_MAX_ORDER, max_rank: int = DEFAULT_MAX_RANK) -> FinAb:
    """H^1(G, [J_{G/H}]^fl) with H the stabilizer of the first point."""
    H = point_stabilizer(G)
    return h1_of_flabby_class(G, chevalley_module(G, H), strategy=strategy, classes=classes,
                              max_order=max_order, max_rank=max_rank)


@dataclass
class SylowDecision:
    """Outcome of the Sylow test: ``value`` is set when the answer is certified."""
    prime: int
    sylow_order: int
    sylow_transitive: bool
    h1_sylow: FinAb
    value: FinAb | None

    @property
    def deferred(self) -> bool:
        return self.value is None


def sylow_fast_path(G: FiniteGroup, max_order: int = DEFAULT_MAX_ORDER,
                    max_rank: int = DEFAULT_MAX_RANK) -> SylowDecision:
    """Compute the invariant over a Sylow p-subgroup for n = p^d points.

    Because G_p is transitive, the restriction of J_{G/H} to G_p is the
    Chevalley module of G_p, and H^1(G, F) embeds into the product of the
    H^1(G_p, F) over primes p | n.  A vanishing Sylow value therefore
    certifies H^1(G, F) = 0; otherwise the caller must run the full group.
    """
    n = G.degree
    f = factorint(n)
    if len(f) != 1:
        raise ValueError("the degree must be a prime power")
    p = next(iter(f))
    point_stabilizer(G)
    S = sylow_subgroup(G, p) if G.order % p == 0 else G
    trans = is_transitive(S)
    if not trans:
        raise AssertionError("a Sylow subgroup of a transitive group of prime-power degree "
                             "must be transitive")
    hs = h1_norm1(S, max_order=max_order, max_rank=max_rank)
    if S.order == G.order or hs.is_trivial:
        return SylowDecision(p, S.order, trans, hs, hs)
    return SylowDecision(p, S.order, trans, hs, None)


def h1_chevalley(G: FiniteGroup, H: FiniteGroup, method: str = "auto") -> FinAb:
    """H^1(G, J_{G/H}) computed on the lattice."""
    return h1(G, chevalley_module(G, H), method=method)


def h1_chevalley_from_abelianization(G: FiniteGroup, H: FiniteGroup) -> FinAb:
    """The same group from abelianizations: the kernel of Hom(G^ab, Q/Z) -> Hom(H^ab, Q/Z).

    That kernel is dual to G^ab / image(H), so its structure is the cokernel
    of the image of H in G^ab.
    """
    ab = abelianization_map(G)
    inv = ab.invariants
    k = len(inv)
    if k == 0:
        return FinAb()
    rows = [ab.coord(h) for h in H.gens] + [np.eye(k, dtype=np.int64)[i] * inv[i] for i in range(k)]
    return cokernel_structure(np.array(rows, dtype=np.int64), n=k)


def tamagawa_reciprocal(h1_J: FinAb, sha_order: int) -> Fraction:
    """|H^1(G, J_{G/H})| / |Sha(T)|, i.e. the Tamagawa number via Ono's formula."""
    if sha_order <= 0:
        raise ValueError("the order of Sha must be positive")
    return Fraction(h1_J.order, sha_order)


@dataclass
class Norm1Report:
    label: str
    degree: int
    order: int
    transitive: bool
    primitive: bool
    h1_flabby: FinAb
    h1_J: FinAb
    sylow_path_used: bool
    tamagawa: dict = field(default_factory=dict)

    def conclusions(self) -> list[str]:
        out = []
        if self.h1_flabby.is_trivial:
            out.append("H^1(k, Pic) = 0: the Hasse norm principle holds for K/k "
                       "and T has weak approximation")
        else:
            out.append(f"H^1(k, Pic) = {self.h1_flabby}: HNP and weak approximation "
                       "may fail, depending on decomposition groups")
        return out


def norm1_report(G: FiniteGroup, label: str = "", sha_orders=(1,), use_sylow: bool = True,
                 max_order: int = DEFAULT_MAX_ORDER, max_rank: int = DEFAULT_MAX_RANK) -> Norm1Report:
    H = point_stabilizer(G)
    used = False
    value = None
    if use_sylow and len(factorint(G.degree)) == 1:
        dec = sylow_fast_path(G, max_order=max_order, max_rank=max_rank)
        if not dec.deferred:
            value, used = dec.value, True
    if value is None:
        value = h1_norm1(G, max_order=max_order, max_rank=max_rank)
    hJ = h1_chevalley(G, H)
    return Norm1Report(label, G.degree, G.order, True, is_primitive(G), value, hJ, used,
                       {s: tamagawa_reciprocal(hJ, s) for s in sha_orders})
