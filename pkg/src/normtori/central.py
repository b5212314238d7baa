"""Schur multipliers, explicit 2-cocycles, central and stem extensions.

Cocycles are normalized, f(1, .) = f(., 1) = 0.  The unknowns are the values
f(x, s) for x in G and s in a short generating set; every other value
follows from the cocycle identity along a BFS tree,

    f(g, p·s) = f(g, p) + f(g·p, s) - f(p, s),

and the non-tree edges give the linear constraints.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass

import numpy as np

from .abexact import (FinAb, GF2Eliminator, as_matrix, factorint, hnf, kernel_basis,
                      lattice_intersection, lattice_quotient, parity, row_lattice_basis, snf,
                      snf_mod_prime_power, solve_in_lattice)
from .cohom import augmentation_seeds, flabby_resolution, h1_of_flabby_class
from .groups import (CapExceeded, FiniteGroup, GroupHomomorphism, abelianization_map, center,
                     closure, conjugacy_class_reps, derived_subgroup, group_from_table,
                     quotient_with_epi, small_generating_set, subgroup, subgroup_from_elements,
                     trivial_subgroup)
from .lattice import chevalley_module, stacked_differences
from .subgroups import all_subgroups

DEFAULT_MAX_COCYCLE_UNKNOWNS = 100 * 100


def schur_multiplier(G: FiniteGroup, **caps) -> FinAb:
    """M(G) = H^3(G, Z), measured as H^1(G, [J_G]^fl)."""
    if G.order == 1:
        return FinAb()
    T = trivial_subgroup(G)
    seeds = augmentation_seeds(G, T, small_generating_set(G))
    return h1_of_flabby_class(G, chevalley_module(G, T), seeds=seeds, **caps)


# ------------------------------------------------------------ cocycles

@dataclass
class Cocycle2:
    """Normalized 2-cocycle G x G -> Z/m; ``table`` is indexed by local element indices."""
    group: FiniteGroup
    modulus: int
    table: np.ndarray
    order: int = 0              # order of its class in H^2(G, Z/m), when known

    def __call__(self, g: int, h: int) -> int:
        loc = self.group.local_index
        return int(self.table[loc[g], loc[h]])

    def is_normalized(self) -> bool:
        return not self.table[0].any() and not self.table[:, 0].any()

    def satisfies_identity(self, sample: int | None = None, seed: int = 0) -> bool:
        """f(g,h) + f(gh,k) = f(h,k) + f(g,hk), on all triples or a random sample."""
        G = self.group
        loc = G.local_index
        mul = loc[G.table.mul[G.elements[:, None], G.elements[None, :]]]
        f, m, n = self.table, self.modulus, G.order
        if sample is None:
            for g in range(n):
                lhs = (f[g][:, None] + f[mul[g]]) % m
                rhs = (f + f[g][mul]) % m
                if np.any(lhs != rhs):
                    return False
            return True
        rng = np.random.default_rng(seed)
        g, h, k = rng.integers(0, n, size=(3, sample))
        return bool(np.all((f[g, h] + f[mul[g, h], k]) % m == (f[h, k] + f[g, mul[h, k]]) % m))

    def __add__(self, other: "Cocycle2") -> "Cocycle2":
        return Cocycle2(self.group, self.modulus, (self.table + other.table) % self.modulus)


class _CocycleSystem:
    """Linear forms f(g, y) in the unknowns u(x, j) = f(x, s_j), x != 1."""

    def __init__(self, G: FiniteGroup, m: int, max_unknowns: int):
        gens = small_generating_set(G)
        self.G, self.m, self.gens = G, m, gens
        n, d = G.order, len(gens)
        self.nunk = n * d
        if n * n > max_unknowns:
            raise CapExceeded(f"cocycle system has {n * n} values, cap is {max_unknowns}")
        loc = G.local_index
        mul = loc[G.table.mul[G.elements[:, None], G.elements[None, :]]]
        gl = [int(loc[s]) for s in gens]
        self.mul = mul
        self.bits = m == 2
        # BFS tree over the short generating set
        parent = {0: None}
        order = [0]
        edges = []
        q = deque([0])
        while q:
            x = q.popleft()
            for j, s in enumerate(gl):
                y = int(mul[x, s])
                if y not in parent:
                    parent[y] = (x, j)
                    order.append(y)
                    q.append(y)
                else:
                    edges.append((x, j, y))
        self.parent, self.order, self.edges = parent, order, edges
        self.gl = gl


def _solve_bits(sysm: _CocycleSystem):
    """GF(2): forms as Python ints; returns (forms dict y -> list of ints, Z^2 basis ints)."""
    n, d = sysm.G.order, len(sysm.gl)
    mul = sysm.mul
    unit = [[0 if x == 0 else 1 << (x * d + j) for j in range(d)] for x in range(n)]
    F = {0: [0] * n}
    for y in sysm.order[1:]:
        p, j = sysm.parent[y]
        Fp = F[p]
        up = unit[p][j]
        F[y] = [Fp[g] ^ unit[int(mul[g, p])][j] ^ up for g in range(n)]
    E = GF2Eliminator(n * d)
    for j in range(d):
        E.add(1 << j)                       # u(1, j) = 0
    for p, j, y in sysm.edges:
        Fp, Fy, up = F[p], F[y], unit[p][j]
        for g in range(n):
            E.add(Fp[g] ^ unit[int(mul[g, p])][j] ^ up ^ Fy[g])
    return F, E.nullspace()


def _solve_dense(sysm: _CocycleSystem):
    """Z/p^k: forms as integer arrays; returns (forms, Z^2 generators as rows mod m)."""
    n, d, m = sysm.G.order, len(sysm.gl), sysm.m
    N = n * d
    mul = sysm.mul
    idx = np.arange(n)
    F = {0: np.zeros((n, N), dtype=np.int64)}
    for y in sysm.order[1:]:
        p, j = sysm.parent[y]
        A = F[p].copy()
        A[idx, mul[:, p] * d + j] += 1
        A[:, p * d + j] -= 1
        A[0] = 0
        F[y] = A % m
    rows = [np.eye(N, dtype=np.int64)[j] for j in range(d)]
    cons = [np.stack(rows)]
    for p, j, y in sysm.edges:
        A = F[p].copy()
        A[idx, mul[:, p] * d + j] += 1
        A[:, p * d + j] -= 1
        A[0] = 0
        cons.append((A - F[y]) % m)
    C = np.concatenate(cons)
    C = np.unique(C[C.any(axis=1)], axis=0)
    (p, k), = factorint(m).items()
    vals, V, _ = snf_mod_prime_power(C, p, k, transforms=True)
    vals = vals + [k] * (N - len(vals))
    gens = [(V[:, i] * p ** (k - e)) % m for i, e in enumerate(vals) if e > 0]
    return F, np.array(gens, dtype=np.int64).reshape(-1, N)


def _coboundaries(sysm: _CocycleSystem) -> np.ndarray:
    """b = dc for c the indicator of each non-identity element, in unknown coordinates."""
    n, d = sysm.G.order, len(sysm.gl)
    B = np.zeros((n - 1, n * d), dtype=np.int64)
    for e in range(1, n):
        for x in range(1, n):
            for j, s in enumerate(sysm.gl):
                v = (x == e) + (s == e) - (int(sysm.mul[x, s]) == e)
                B[e - 1, x * d + j] = v
    return B % sysm.m


def _cocycle_table(sysm: _CocycleSystem, F, z) -> np.ndarray:
    n = sysm.G.order
    f = np.zeros((n, n), dtype=np.int64)
    if sysm.bits:
        for y, Fy in F.items():
            f[:, y] = [parity(a & z) for a in Fy]
    else:
        for y, Fy in F.items():
            f[:, y] = (Fy @ z) % sysm.m
    return f


def _unimodular_inverse(V: np.ndarray) -> np.ndarray:
    H, U = hnf(V)
    if np.any(H != np.eye(V.shape[0], dtype=H.dtype)):
        raise ArithmeticError("matrix is not unimodular")
    return U


def two_cocycle_basis(G: FiniteGroup, m: int,
                      max_unknowns: int = DEFAULT_MAX_COCYCLE_UNKNOWNS) -> list[Cocycle2]:
    """Cocycles whose classes are independent generators of H^2(G, Z/m).

    ``m`` must be a prime power.  Each cocycle records the order of its class.
    """
    f = factorint(m)
    if len(f) != 1:
        raise ValueError("modulus must be a prime power")
    if G.order == 1:
        return []
    sysm = _CocycleSystem(G, m, max_unknowns)
    B = _coboundaries(sysm)
    out = []
    if sysm.bits:
        F, Z = _solve_bits(sysm)
        E = GF2Eliminator(sysm.nunk)
        for row in B:
            E.add(sum(1 << int(i) for i in np.flatnonzero(row)))
        for z in Z:
            if E.add(z):
                out.append(Cocycle2(G, m, _cocycle_table(sysm, F, z), 2))
        return out
    F, Zg = _solve_dense(sysm)
    N = sysm.nunk
    mI = np.eye(N, dtype=np.int64) * m
    LZ = row_lattice_basis(np.concatenate([Zg, mI]), n=N)
    LB = row_lattice_basis(np.concatenate([B, mI]), n=N)
    C = solve_in_lattice(LZ, LB)
    D = snf(C)
    W = as_matrix(np.array(_unimodular_inverse(D.V), dtype=object).dot(np.array(LZ, dtype=object)))
    for i, di in enumerate(D.diagonal + [0] * (LZ.shape[0] - len(D.diagonal))):
        if di == 0:
            raise AssertionError("H^2 with finite coefficients must be finite")
        if di > 1:
            out.append(Cocycle2(G, m, _cocycle_table(sysm, F, W[i] % m), int(di)))
    return out


def h2_elements(G: FiniteGroup, m: int, basis: list[Cocycle2] | None = None):
    """Every class of H^2(G, Z/m), as a cocycle per class, in a fixed order (zero first)."""
    basis = two_cocycle_basis(G, m) if basis is None else basis
    n = G.order
    for coeffs in itertools.product(*[range(c.order) for c in basis]):
        t = np.zeros((n, n), dtype=np.int64)
        for a, c in zip(coeffs, basis):
            if a:
                t = t + a * c.table
        yield Cocycle2(G, m, t % m)


# ------------------------------------------------------------ extensions

@dataclass
class CentralExtensionGroup:
    """1 -> A -> group -> base -> 1 with A central.

    Elements of a cocycle-built extension are the pairs (g, a) stored at
    index local(g)·|A| + code(a).
    """
    base: FiniteGroup
    kernel: FinAb
    cocycles: list[Cocycle2] | None
    group: FiniteGroup
    epi: GroupHomomorphism
    kernel_subgroup: FiniteGroup

    @property
    def is_stem(self) -> bool:
        A = self.kernel_subgroup
        return bool(derived_subgroup(self.group).mask[A.elements].all()
                    and center(self.group).mask[A.elements].all())

    def preimage(self, U: FiniteGroup) -> FiniteGroup:
        return self.epi.preimage(U)


def central_extension(G: FiniteGroup, A: FinAb, cocycles: list[Cocycle2]) -> CentralExtensionGroup:
    mods = list(A.invariants)
    if len(cocycles) != len(mods) or any(c.modulus != m for c, m in zip(cocycles, mods)):
        raise ValueError("need one cocycle per invariant factor, with matching modulus")
    if any(c.group != G for c in cocycles):
        raise ValueError("cocycle over a different group")
    n = G.order
    a = int(np.prod(mods)) if mods else 1
    loc = G.local_index
    X = G.elements
    gmul = loc[G.table.mul[X[:, None], X[None, :]]]
    w = [int(np.prod(mods[i + 1:])) for i in range(len(mods))]
    codes = np.arange(a)
    comp = [(codes // w[i]) % mods[i] for i in range(len(mods))]
    idx = np.arange(n * a)
    gi, ai = idx // a, idx % a
    mul = gmul[gi[:, None], gi[None, :]].astype(np.int64) * a
    for i, c in enumerate(cocycles):
        ci = comp[i][ai]
        mul += w[i] * ((ci[:, None] + ci[None, :] + c.table[gi[:, None], gi[None, :]]) % mods[i])
    lifts = [int(loc[s]) * a for s in G.gens]
    kgens = [w[i] for i in range(len(mods))]
    Et = group_from_table(mul, lifts + kgens)
    if len(closure(Et.table, lifts)) == n * a:
        gens = lifts
    else:
        gens = lifts + kgens
    E = group_from_table(Et.table.mul, gens)
    epi = GroupHomomorphism(E, G, X[gi])
    K = subgroup_from_elements(E.table, np.arange(a))
    return CentralExtensionGroup(G, FinAb(tuple(mods)), list(cocycles), E, epi, K)


def _stem_search(G: FiniteGroup, mods: list[int], classes: dict[int, list[Cocycle2]], prefix):
    k = len(prefix)
    if k == len(mods):
        return central_extension(G, FinAb(tuple(mods)), prefix)
    for c in classes[mods[k]]:
        if not c.table.any():
            continue
        cand = prefix + [c]
        ext = central_extension(G, FinAb(tuple(mods[:k + 1])), cand)
        if not derived_subgroup(ext.group).mask[ext.kernel_subgroup.elements].all():
            continue
        found = _stem_search(G, mods, classes, cand)
        if found is not None:
            return found
    return None


def schur_cover(G: FiniteGroup, multiplier: FinAb | None = None,
                max_unknowns: int = DEFAULT_MAX_COCYCLE_UNKNOWNS) -> CentralExtensionGroup:
    """A stem extension with kernel M(G), by depth-first search over cocycle classes.

    One cyclic factor is chosen at a time; a prefix is kept only if its
    extension is already stem, which every quotient of a stem extension is.
    """
    M = schur_multiplier(G) if multiplier is None else multiplier
    if M.is_trivial:
        return central_extension(G, FinAb(), [])
    mods = list(M.invariants)
    classes = {}
    for m in sorted(set(mods)):
        if G.order ** 2 > max_unknowns:
            raise CapExceeded(f"cocycle system has {G.order ** 2} values, cap is {max_unknowns}")
        classes[m] = list(h2_elements(G, m, two_cocycle_basis(G, m, max_unknowns)))
    found = _stem_search(G, mods, classes, [])
    if found is None:
        raise AssertionError("no stem extension with kernel M(G) found")
    return found


def _quotient_extension(cover: CentralExtensionGroup, Asub: FiniteGroup) -> CentralExtensionGroup:
    Q, q = quotient_with_epi(cover.group, Asub)
    X = cover.group.elements
    images = np.zeros(Q.table.n, dtype=np.int64)
    images[q.images[X]] = cover.epi.images[X]
    epi = GroupHomomorphism(Q, cover.base, images)
    K = q.image(cover.kernel_subgroup)
    return CentralExtensionGroup(cover.base, abelianization_map(K).structure, None, Q, epi, K)


def stem_extensions(G: FiniteGroup, cover: CentralExtensionGroup | None = None) -> list[CentralExtensionGroup]:
    """cover/A' for every subgroup A' of the cover's kernel, largest quotient first."""
    cover = schur_cover(G) if cover is None else cover
    A = cover.kernel_subgroup
    subs = sorted(all_subgroups(A, max_order=max(A.order, 200)),
                  key=lambda U: (U.order, tuple(int(e) for e in U.elements)))
    return [_quotient_extension(cover, U) for U in subs]


def minimal_stem_extensions(G: FiniteGroup, cover: CentralExtensionGroup | None = None) -> list[CentralExtensionGroup]:
    """Stem extensions whose kernel has prime order."""
    out = []
    for E in stem_extensions(G, cover):
        f = factorint(E.kernel.order)
        if sum(f.values()) == 1:
            out.append(E)
    return out


# ------------------------------------------------------------ H^3 restriction

def default_family(G: FiniteGroup, H: FiniteGroup) -> list[FiniteGroup]:
    """{<H, g> : g over conjugacy class representatives of G}."""
    seen, out = set(), []
    for g in conjugacy_class_reps(G):
        U = subgroup(G, list(H.gens) + [g])
        if U.bits not in seen:
            seen.add(U.bits)
            out.append(U)
    return out


def ker_res_h3(G: FiniteGroup, family=None, H: FiniteGroup | None = None, **caps) -> FinAb:
    """ker(H^3(G, Z) -> ⊕_U H^3(U, Z)) over the subgroups U in ``family``.

    With F the flabby class of J_G, H^1(U, F) = H^3(U, Z) for every U, and
    restriction is literal.  Modulo m = |G|, H^1(U, F) = X_U / Y_U with
    X_U = {x : x(A_u - 1) ≡ 0 mod m} and Y_U = F^U + mF.
    """
    if family is None:
        if H is None:
            raise ValueError("give a family or the subgroup H for the default family")
        family = default_family(G, H)
    if G.order == 1:
        return FinAb()
    T = trivial_subgroup(G)
    seeds = augmentation_seeds(G, T, small_generating_set(G))
    F = flabby_resolution(G, chevalley_module(G, T), seeds=seeds, **caps).F
    r, m = F.rank, G.order
    if r == 0:
        return FinAb()
    mI = np.eye(r, dtype=np.int64) * m

    def Y(U):
        if U.order == 1:
            return np.eye(r, dtype=np.int64)
        D = stacked_differences(F, U)
        return row_lattice_basis(np.concatenate([kernel_basis(D), mI]), n=r)

    D = stacked_differences(F, G, small_generating_set(G))
    K = kernel_basis(np.concatenate([D, np.eye(D.shape[1], dtype=np.int64) * m]))
    X = row_lattice_basis(np.concatenate([K[:, :r], mI]), n=r)
    top = X
    for U in family:
        top = lattice_intersection(top, Y(U))
    return lattice_quotient(top, Y(G))
