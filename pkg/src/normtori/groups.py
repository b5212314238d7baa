"""Finite groups on explicit element tables.

Every group lives inside an ``ElementTable``: the full multiplication table
of some ambient group whose elements are numbered 0..n-1 in BFS order from
the identity (element 0) over the ambient generators.  A ``FiniteGroup`` is a
subset of such a table closed under multiplication, together with an ordered
generating list.  Subgroups, normalizers and intersections therefore share
the ambient numbering and are cheap to compare.

Permutation-backed tables also store the image array of every element;
extension groups built from cocycles are table-only.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from math import prod

import numpy as np

from . import perm as P
from .abexact import FinAb, factorint, hnf, snf


class CapExceeded(RuntimeError):
    """A configured size cap was exceeded."""


DEFAULT_MAX_ORDER = 5000


class ElementTable:
    """Multiplication table of an ambient finite group."""

    def __init__(self, mul: np.ndarray, perms: np.ndarray | None = None,
                 labels: list | None = None):
        self.mul = mul
        self.n = mul.shape[0]
        self.inv = np.argmax(mul == 0, axis=1).astype(mul.dtype)
        self.perms = perms
        self.labels = labels
        self.degree = None if perms is None else perms.shape[1]
        self._index = None

    @cached_property
    def element_orders(self) -> np.ndarray:
        idx = np.arange(self.n)
        cur = idx.copy()
        order = np.zeros(self.n, dtype=np.int64)
        k = 1
        while True:
            done = (cur == 0) & (order == 0)
            order[done] = k
            if (order > 0).all():
                return order
            cur = self.mul[cur, idx]
            k += 1

    def index_of_perm(self, p) -> int:
        if self._index is None:
            self._index = {row.tobytes(): i for i, row in enumerate(self.perms)}
        key = np.asarray(p, dtype=self.perms.dtype).tobytes()
        return self._index[key]

    def perm(self, x: int) -> tuple[int, ...]:
        return tuple(int(v) for v in self.perms[x])

    def conj(self, elems: np.ndarray, x: int) -> np.ndarray:
        """x^-1 · elems · x."""
        return self.mul[self.mul[self.inv[x], elems], x]

    def power(self, x: int, k: int) -> int:
        r = 0
        for _ in range(k):
            r = int(self.mul[r, x])
        return r


class FiniteGroup:
    """A subgroup of an element table, given by its elements and generators."""

    def __init__(self, table: ElementTable, elements, gens, order_hint=None):
        self.table = table
        self.elements = np.asarray(sorted(set(int(e) for e in elements)), dtype=np.int64)
        self.gens = tuple(int(g) for g in gens)
        self.chain = None

    # -- basic data
    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return self.order

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.table.n, dtype=bool)
        m[self.elements] = True
        return m

    @cached_property
    def key(self) -> bytes:
        return np.packbits(self.mask).tobytes()

    @cached_property
    def bits(self) -> int:
        return int.from_bytes(self.key, "big")

    def __contains__(self, x) -> bool:
        return bool(self.mask[int(x)])

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteGroup) and other.table is self.table and other.key == self.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"<FiniteGroup order {self.order} with {len(self.gens)} generators>"

    @property
    def degree(self):
        return self.table.degree

    @property
    def is_permutation(self) -> bool:
        return self.table.perms is not None

    def is_subgroup_of(self, other: "FiniteGroup") -> bool:
        return other.table is self.table and bool(np.all(other.mask[self.elements]))

    def perm_gens(self) -> list[tuple[int, ...]]:
        return [self.table.perm(g) for g in self.gens]

    @cached_property
    def local_index(self) -> np.ndarray:
        """Map ambient element -> position in ``elements`` (-1 if absent)."""
        loc = np.full(self.table.n, -1, dtype=np.int64)
        loc[self.elements] = np.arange(self.order)
        return loc

    # -- Cayley graph data on this group's generators
    @cached_property
    def bfs(self) -> "BFSTree":
        return BFSTree(self)

    def is_abelian(self) -> bool:
        mul = self.table.mul
        g = np.array(self.gens, dtype=np.int64)
        return bool(np.all(mul[g[:, None], g[None, :]] == mul[g[None, :], g[:, None]]))


class BFSTree:
    """BFS spanning tree of the right Cayley graph x -> x·s."""

    def __init__(self, G: FiniteGroup):
        mul = G.table.mul
        n = G.order
        loc = G.local_index
        self.group = G
        self.order: list[int] = [0]          # ambient ids in BFS order
        self.parent = {0: -1}
        self.label = {0: -1}
        seen = {0}
        q = deque([0])
        while q:
            x = q.popleft()
            for j, s in enumerate(G.gens):
                y = int(mul[x, s])
                if y not in seen:
                    seen.add(y)
                    self.parent[y] = x
                    self.label[y] = j
                    self.order.append(y)
                    q.append(y)
        if len(self.order) != n:
            raise ValueError("generators do not generate the group")
        self.tree_edges = {(self.parent[y], self.label[y]) for y in self.order[1:]}

    def word(self, x: int) -> list[int]:
        """Generator indices (0-based) of the tree path from 1 to x."""
        w = []
        while x != 0:
            w.append(self.label[x])
            x = self.parent[x]
        return w[::-1]

    def non_tree_edges(self) -> list[tuple[int, int]]:
        out = []
        for x in self.order:
            for j in range(len(self.group.gens)):
                if (x, j) not in self.tree_edges:
                    out.append((x, j))
        return out


# ------------------------------------------------------------ construction

def _perm_table(gens: list, degree: int, max_order: int):
    ident = tuple(range(degree))
    elems = [ident]
    index = {ident: 0}
    edges = []
    q = deque([0])
    parent = [(-1, -1)]
    while q:
        x = q.popleft()
        px = elems[x]
        for j, g in enumerate(gens):
            y = tuple(g[i] for i in px)
            if y not in index:
                if len(elems) >= max_order:
                    raise CapExceeded(f"group order exceeds cap {max_order}")
                index[y] = len(elems)
                elems.append(y)
                parent.append((x, j))
                q.append(index[y])
    n = len(elems)
    gen_idx = [index[tuple(g)] for g in gens]
    perms = np.array(elems, dtype=np.int16 if degree < 30000 else np.int32).reshape(n, degree)
    # right multiplication by each generator, then fill columns in BFS order
    right = np.empty((n, len(gens)), dtype=np.int32)
    for j, g in enumerate(gens):
        garr = np.asarray(g)
        imgs = garr[perms]
        for x in range(n):
            right[x, j] = index[tuple(imgs[x].tolist())]
    mul = np.empty((n, n), dtype=np.int32)
    mul[:, 0] = np.arange(n)
    for y in range(1, n):
        x, j = parent[y]
        mul[:, y] = right[mul[:, x], j]
    return mul, perms, gen_idx


def group_from_generators(degree: int, gens, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    """Permutation group on ``degree`` points from 0-based image tuples."""
    gens = [tuple(int(x) for x in g) for g in gens]
    for g in gens:
        if len(g) != degree or sorted(g) != list(range(degree)):
            raise ValueError("generator is not a permutation of the given degree")
    chain = P.StabChain(degree, gens)
    order = chain.order()
    if order > max_order:
        raise CapExceeded(f"group order {order} exceeds cap {max_order}")
    mul, perms, gen_idx = _perm_table(gens, degree, max_order)
    assert mul.shape[0] == order, "stabilizer chain and enumeration disagree"
    T = ElementTable(mul, perms)
    G = FiniteGroup(T, range(T.n), gen_idx)
    G.chain = chain
    return G


def group_from_cycles(degree: int, cycles: list[str], **kw) -> FiniteGroup:
    return group_from_generators(degree, [P.parse_cycles(c, degree) for c in cycles], **kw)


def group_from_table(mul: np.ndarray, gens, labels=None) -> FiniteGroup:
    """Table-backed group; the table must have identity 0."""
    T = ElementTable(np.ascontiguousarray(mul, dtype=np.int32), labels=labels)
    return FiniteGroup(T, range(T.n), gens)


def regular_representation(G: FiniteGroup) -> FiniteGroup:
    """Faithful permutation group given by right multiplication on G."""
    loc = G.local_index
    gens = [tuple(int(loc[G.table.mul[x, s]]) for x in G.elements) for s in G.gens]
    return group_from_generators(G.order, gens, max_order=max(G.order, DEFAULT_MAX_ORDER))


# ------------------------------------------------------------ subgroups

def closure(table: ElementTable, gens, start: FiniteGroup | None = None) -> np.ndarray:
    """Elements of the subgroup generated by ``start`` and ``gens``."""
    mul = table.mul
    gens = [int(g) for g in gens]
    if start is not None:
        base = start.elements
        allg = list(start.gens) + gens
    else:
        base = np.array([0], dtype=np.int64)
        allg = gens
    mask = np.zeros(table.n, dtype=bool)
    mask[base] = True
    reps = [0]
    out = [base]
    i = 0
    while i < len(reps):
        r = reps[i]
        i += 1
        for s in allg:
            y = int(mul[r, s])
            if not mask[y]:
                coset = mul[base, y]
                mask[coset] = True
                out.append(coset)
                reps.append(y)
    return np.concatenate(out)


def canonical_generators(table: ElementTable, elements) -> list[int]:
    """Greedy generating set: scan elements in increasing order."""
    elements = sorted(int(e) for e in elements)
    gens: list[int] = []
    cur = FiniteGroup(table, [0], [])
    target = len(elements)
    for e in elements:
        if cur.order == target:
            break
        if e in cur:
            continue
        gens.append(e)
        cur = FiniteGroup(table, closure(table, [e], cur), gens)
    return gens


def small_generating_set(G: FiniteGroup) -> list[int]:
    """A short generating set: one element if cyclic, else a pair if one is found
    with the first element among the highest-order class representatives, else
    the canonical generators."""
    cached = getattr(G, "_small_gens", None)
    if cached is not None:
        return cached
    T = G.table
    orders = T.element_orders
    X = G.elements
    out = None
    if G.order == 1:
        out = []
    else:
        best = X[np.argmax(orders[X])]
        if orders[best] == G.order:
            out = [int(best)]
    if out is None and len(G.gens) > 2:
        reps = sorted(conjugacy_class_reps(G), key=lambda x: (-int(orders[x]), x))[:4]
        for x in reps:
            for y in X:
                y = int(y)
                if len(closure(T, [x, y])) == G.order:
                    out = [x, y]
                    break
            if out:
                break
    if out is None:
        out = list(G.gens)
    G._small_gens = out
    return out


def subgroup(G: FiniteGroup, gens) -> FiniteGroup:
    """Subgroup of G generated by ambient element ids."""
    gens = [int(g) for g in gens]
    for g in gens:
        if g not in G:
            raise ValueError("generator not in group")
    elems = closure(G.table, gens)
    return FiniteGroup(G.table, elems, canonical_generators(G.table, elems))


def subgroup_from_elements(table: ElementTable, elements) -> FiniteGroup:
    return FiniteGroup(table, elements, canonical_generators(table, elements))


def trivial_subgroup(G: FiniteGroup) -> FiniteGroup:
    return FiniteGroup(G.table, [0], [])


def stabilizer_of_point(G: FiniteGroup, i: int) -> FiniteGroup:
    """Stabilizer of the 0-based point i."""
    if not G.is_permutation:
        raise ValueError("point stabilizers need a permutation-backed group")
    if not 0 <= i < G.degree:
        raise ValueError("point out of range")
    perms = G.table.perms
    elems = G.elements[perms[G.elements, i] == i]
    return subgroup_from_elements(G.table, elems)


def orbits(G: FiniteGroup) -> list[list[int]]:
    """Orbits of G on its points (0-based), each sorted, in order of least point."""
    n = G.degree
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for g in G.gens:
        img = G.table.perms[g]
        for a in range(n):
            ra, rb = find(a), find(int(img[a]))
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for a in range(n):
        groups.setdefault(find(a), []).append(a)
    return [groups[k] for k in sorted(groups)]


def orbit_signature(U: FiniteGroup) -> tuple[int, ...]:
    return tuple(sorted(len(o) for o in orbits(U)))


def is_transitive(G: FiniteGroup) -> bool:
    return G.degree is not None and G.degree > 0 and len(orbits(G)) == 1 and (
        G.degree == 1 or G.order > 1)


def is_primitive(G: FiniteGroup) -> bool:
    """Transitive with no nontrivial block system (minimal blocks via union-find)."""
    if not is_transitive(G):
        return False
    n = G.degree
    gens = [G.table.perms[g] for g in G.gens]
    for b in range(1, n):
        parent = list(range(n))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, c):
            ra, rc = find(a), find(c)
            if ra == rc:
                return False
            parent[max(ra, rc)] = min(ra, rc)
            return True

        union(0, b)
        queue = [(0, b)]
        while queue:
            a, c = queue.pop()
            for g in gens:
                x, y = int(g[a]), int(g[c])
                if find(x) != find(y):
                    union(x, y)
                    queue.append((x, y))
        if len({find(a) for a in range(n)}) > 1:
            return False
    return True


def conjugate(U: FiniteGroup, x: int) -> FiniteGroup:
    """U^x = x^-1 U x."""
    T = U.table
    elems = T.conj(U.elements, x)
    gens = [int(v) for v in T.conj(np.array(U.gens, dtype=np.int64), x)] if U.gens else []
    return FiniteGroup(T, elems, gens)


def normalizer(G: FiniteGroup, U: FiniteGroup) -> FiniteGroup:
    T = G.table
    X = G.elements
    conj = T.mul[T.mul[T.inv[X][:, None], U.elements[None, :]], X[:, None]]
    ok = U.mask[conj].all(axis=1)
    return subgroup_from_elements(T, X[ok])


def intersect(U: FiniteGroup, V: FiniteGroup) -> FiniteGroup:
    if U.table is not V.table:
        raise ValueError("groups live in different tables")
    return subgroup_from_elements(U.table, U.elements[V.mask[U.elements]])


def commutator(T: ElementTable, a: int, b: int) -> int:
    """[a,b] = a^-1 b^-1 a b."""
    m = T.mul
    return int(m[m[m[T.inv[a], T.inv[b]], a], b])


def normal_closure(G: FiniteGroup, gens) -> FiniteGroup:
    T = G.table
    gens = [int(g) for g in gens if int(g) != 0]
    N = FiniteGroup(T, closure(T, gens), gens)
    while True:
        extra = []
        for g in G.gens:
            for h in N.gens:
                c = int(T.mul[T.mul[T.inv[g], h], g])
                if c not in N and c not in extra:
                    extra.append(c)
        if not extra:
            break
        N = FiniteGroup(T, closure(T, extra, N), list(N.gens) + extra)
    return subgroup_from_elements(T, N.elements)


def derived_subgroup(G: FiniteGroup) -> FiniteGroup:
    T = G.table
    comms = [commutator(T, a, b) for i, a in enumerate(G.gens) for b in G.gens[i + 1:]]
    return normal_closure(G, comms)


def center(G: FiniteGroup) -> FiniteGroup:
    T = G.table
    X = G.elements
    ok = np.ones(len(X), dtype=bool)
    for g in G.gens:
        ok &= T.mul[X, g] == T.mul[g, X]
    return subgroup_from_elements(T, X[ok])


def is_normal(G: FiniteGroup, N: FiniteGroup) -> bool:
    T = G.table
    for g in G.gens:
        if not N.mask[T.conj(N.elements, g)].all():
            return False
    return True


def sylow_subgroup(G: FiniteGroup, p: int) -> FiniteGroup:
    f = factorint(G.order)
    if p not in f:
        raise ValueError(f"{p} does not divide |G| = {G.order}")
    target = p ** f[p]
    T = G.table
    S = trivial_subgroup(G)
    while S.order < target:
        N = normalizer(G, S)
        for x in N.elements:
            x = int(x)
            if x in S:
                continue
            if T.power(x, p) in S:
                S = FiniteGroup(T, closure(T, [x], S), list(S.gens) + [x])
                break
        else:
            raise AssertionError("no p-element in normalizer")
    return subgroup_from_elements(T, S.elements)


def element_order(G: FiniteGroup, x: int) -> int:
    return int(G.table.element_orders[x])


def conjugacy_class_reps(G: FiniteGroup) -> list[int]:
    T = G.table
    seen = np.zeros(T.n, dtype=bool)
    reps = []
    X = G.elements
    for x in X:
        x = int(x)
        if seen[x]:
            continue
        reps.append(x)
        seen[T.mul[T.mul[T.inv[X], x], X]] = True
    return reps


def double_coset_reps(G: FiniteGroup, H: FiniteGroup, K: FiniteGroup) -> list[tuple[int, int]]:
    """Representatives x (least element id) of H\\G/K with double-coset sizes."""
    if not (H.is_subgroup_of(G) and K.is_subgroup_of(G)):
        raise ValueError("subgroup not contained in G")
    T = G.table
    seen = np.zeros(T.n, dtype=bool)
    out = []
    for x in G.elements:
        x = int(x)
        if seen[x]:
            continue
        D = np.unique(T.mul[T.mul[H.elements, x][:, None], K.elements[None, :]])
        seen[D] = True
        out.append((x, len(D)))
    return out


def right_coset_reps(G: FiniteGroup, H: FiniteGroup) -> list[int]:
    """Representatives of the right cosets H·x, in BFS order over G's generators."""
    T = G.table
    seen = np.zeros(T.n, dtype=bool)
    reps = [0]
    seen[H.elements] = True
    i = 0
    while i < len(reps):
        r = reps[i]
        i += 1
        for s in G.gens:
            y = int(T.mul[r, s])
            if not seen[y]:
                seen[T.mul[H.elements, y]] = True
                reps.append(y)
    return reps


# ------------------------------------------------------------ homomorphisms

class GroupHomomorphism:
    """Map between groups given on every element of the source.

    ``images`` is indexed by the source table's element ids.
    """

    def __init__(self, source: FiniteGroup, target: FiniteGroup, images: np.ndarray):
        self.source = source
        self.target = target
        self.images = np.asarray(images, dtype=np.int64)

    def __call__(self, x: int) -> int:
        return int(self.images[x])

    def gen_images(self) -> list[int]:
        return [int(self.images[g]) for g in self.source.gens]

    def is_homomorphism(self) -> bool:
        S, T = self.source.table, self.target.table
        X = self.source.elements
        im = self.images
        for g in self.source.gens:
            if not np.array_equal(im[S.mul[X, g]], T.mul[im[X], im[g]]):
                return False
        return True

    def kernel(self) -> FiniteGroup:
        X = self.source.elements
        return subgroup_from_elements(self.source.table, X[self.images[X] == 0])

    def image(self, U: FiniteGroup | None = None) -> FiniteGroup:
        U = self.source if U is None else U
        return subgroup_from_elements(self.target.table, np.unique(self.images[U.elements]))

    def preimage(self, V: FiniteGroup) -> FiniteGroup:
        X = self.source.elements
        return subgroup_from_elements(self.source.table, X[V.mask[self.images[X]]])


def quotient_with_epi(G: FiniteGroup, N: FiniteGroup) -> tuple[FiniteGroup, GroupHomomorphism]:
    """G/N as a table-backed group and the natural epimorphism."""
    if not N.is_subgroup_of(G) or not is_normal(G, N):
        raise ValueError("N is not a normal subgroup of G")
    T = G.table
    coset = np.full(T.n, -1, dtype=np.int64)
    reps = []
    q = deque([0])
    coset[T.mul[N.elements, 0]] = 0
    reps.append(0)
    while q:
        r = q.popleft()
        for s in G.gens:
            y = int(T.mul[reps[r], s])
            if coset[y] < 0:
                c = len(reps)
                coset[T.mul[N.elements, y]] = c
                reps.append(y)
                q.append(c)
    reps_arr = np.array(reps, dtype=np.int64)
    mul = coset[T.mul[reps_arr[:, None], reps_arr[None, :]]]
    gens = [int(coset[s]) for s in G.gens]
    Q = group_from_table(mul, gens, labels=reps)
    return Q, GroupHomomorphism(G, Q, coset)


# ------------------------------------------------------------ abelianization

@dataclass
class Abelianization:
    """G/[G,G] with coordinates of every element in the invariant-factor basis."""
    group: FiniteGroup
    structure: FinAb
    coords: np.ndarray          # (|G|, k), rows indexed by G.local_index

    @property
    def invariants(self) -> tuple[int, ...]:
        return self.structure.invariants

    def coord(self, x: int) -> np.ndarray:
        return self.coords[self.group.local_index[x]]

    def basis_elements(self) -> list[int]:
        """Elements whose coordinates are the standard basis vectors."""
        k = len(self.invariants)
        out = []
        for i in range(k):
            target = np.zeros(k, dtype=np.int64)
            target[i] = 1
            hits = np.flatnonzero((self.coords == target).all(axis=1))
            out.append(int(self.group.elements[hits[0]]))
        return out


def abelianization_map(G: FiniteGroup) -> Abelianization:
    d = len(G.gens)
    if d == 0:
        return Abelianization(G, FinAb(), np.zeros((1, 0), dtype=np.int64))
    tree = G.bfs
    loc = G.local_index
    cnt = np.zeros((G.order, d), dtype=np.int64)
    for y in tree.order[1:]:
        cnt[loc[y]] = cnt[loc[tree.parent[y]]]
        cnt[loc[y], tree.label[y]] += 1
    rels = []
    mul = G.table.mul
    for x, j in tree.non_tree_edges():
        r = cnt[loc[x]].copy()
        r[j] += 1
        r -= cnt[loc[int(mul[x, G.gens[j]])]]
        rels.append(r)
    R = np.array(rels, dtype=np.int64).reshape(-1, d)
    H, _ = hnf(R)
    H = H[[i for i in range(H.shape[0]) if H[i].any()]]
    D = snf(H if H.shape[0] else np.zeros((0, d), dtype=np.int64))
    diag = D.diagonal
    if len([x for x in diag if x]) != d:
        raise AssertionError("finite group with infinite abelianization")
    idx = [i for i, x in enumerate(diag) if x > 1]
    V = np.array(D.V, dtype=object)
    coords = (cnt.astype(object).dot(V[:, idx]) if idx else np.zeros((G.order, 0), dtype=object))
    mods = [diag[i] for i in idx]
    coords = np.array([[int(c) % m for c, m in zip(row, mods)] for row in coords],
                      dtype=np.int64).reshape(G.order, len(idx))
    return Abelianization(G, FinAb(tuple(mods)), coords)


# ------------------------------------------------------------ automorphisms

def automorphisms(G: FiniteGroup, max_order: int = 200) -> list[GroupHomomorphism]:
    """All automorphisms, by brute force over images of the generators."""
    if G.order > max_order:
        raise CapExceeded(f"automorphism search needs |G| <= {max_order}")
    gens = list(G.gens)
    if len(gens) > 4:
        raise CapExceeded("automorphism search needs at most 4 generators")
    T = G.table
    orders = T.element_orders
    X = G.elements
    tree = G.bfs
    candidates = [[int(x) for x in X if orders[x] == orders[g]] for g in gens]
    out = []
    steps = [(y, tree.parent[y], tree.label[y]) for y in tree.order[1:]]

    def extend(assign):
        if len(assign) == len(gens):
            phi = np.full(T.n, -1, dtype=np.int64)
            phi[0] = 0
            for y, p, j in steps:
                phi[y] = T.mul[phi[p], assign[j]]
            img = phi[X]
            if len(np.unique(img)) != len(X) or not G.mask[img].all():
                return
            for j, g in enumerate(gens):
                if not np.array_equal(phi[T.mul[X, g]], T.mul[img, assign[j]]):
                    return
            out.append(GroupHomomorphism(G, G, phi))
            return
        for c in candidates[len(assign)]:
            extend(assign + [c])

    extend([])
    return out
