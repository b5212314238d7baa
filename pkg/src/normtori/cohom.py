"""Cohomology of G-lattices and flabby resolutions.

Crossed homomorphisms follow the right-action convention
c(gh) = c(g)·A_h + c(h); principal ones are c(g) = m·A_g - m.

Two routes compute H^1(G, M):

* ``presentation``: solve for the generator values of a crossed homomorphism
  under the relators of the Cayley presentation (rolling kernel), then divide
  by the principal ones.
* ``snf``: H^1 is killed by m = |G|, so H^1 = (M/mM)^G / (M^G/mM^G), which is
  the sum of Z/gcd(d_i, m) over the nonzero elementary divisors d_i of the
  stacked matrix [A_s - I].  Only the rank over Q is needed exactly, and it
  comes from the character.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .abexact import (FinAb, as_matrix, cokernel_structure, factorint, identity, is_onto,
                      kernel_basis, kernel_with_section, lattice_quotient, matmul,
                      rank_mod_prime, row_lattice_basis, snf, solve_in_lattice,
                      torsion_from_relations)
from .groups import CapExceeded, FiniteGroup, small_generating_set, subgroup_from_elements
from .lattice import (GLattice, coset_action, dual, fixed_sublattice, norm_image,
                      norm_matrix, permutation_lattice, restrict, stacked_differences)
from .subgroups import SubgroupClassList, subgroup_classes

DEFAULT_MAX_ORDER = 320
DEFAULT_MAX_RANK = 1500
PRESENTATION_ORDER_CAP = 2000


# ------------------------------------------------------------ presentations

@dataclass
class Presentation:
    """Generators 1..d; a word is a list of signed generator numbers."""
    ngens: int
    relators: list[list[int]]


def _invert_word(w: list[int]) -> list[int]:
    return [-a for a in reversed(w)]


def cayley_presentation(G: FiniteGroup, max_order: int = PRESENTATION_ORDER_CAP) -> Presentation:
    """One relator per non-tree edge of the BFS spanning tree of the Cayley graph."""
    if G.order > max_order:
        raise CapExceeded(f"Cayley presentation needs |G| <= {max_order}")
    tree = G.bfs
    mul = G.table.mul
    rels = []
    for x, j in tree.non_tree_edges():
        y = int(mul[x, G.gens[j]])
        wx = [a + 1 for a in tree.word(x)]
        wy = [a + 1 for a in tree.word(y)]
        rels.append(wx + [j + 1] + _invert_word(wy))
    return Presentation(len(G.gens), rels)


def evaluate_word(G: FiniteGroup, w: list[int]) -> int:
    T = G.table
    x = 0
    for a in w:
        s = G.gens[abs(a) - 1]
        x = int(T.mul[x, s if a > 0 else T.inv[s]])
    return x


# ------------------------------------------------------------ H^1

def _h1_presentation(M: GLattice) -> FinAb:
    G = M.group
    d, r = len(G.gens), M.rank
    n = d * r
    if n == 0:
        return FinAb()
    tree = G.bfs
    mul = G.table.mul
    # c(x) = u·T[x] with u the stacked generator values
    T = {0: np.zeros((n, r), dtype=np.int64)}
    E = []
    for j in range(d):
        e = np.zeros((n, r), dtype=np.int64)
        e[j * r:(j + 1) * r] = identity(r)
        E.append(e)
    for y in tree.order[1:]:
        x, j = tree.parent[y], tree.label[y]
        T[y] = as_matrix(matmul(T[x], M.gen_mats[j]) + E[j])
    K = identity(n)
    for x, j in tree.non_tree_edges():
        y = int(mul[x, G.gens[j]])
        C = as_matrix(matmul(T[x], M.gen_mats[j]) + E[j] - T[y])
        KC = matmul(K, C)
        if not np.any(KC != 0):
            continue
        K = row_lattice_basis(matmul(kernel_basis(KC), K), n=n)
    B = stacked_differences(M, G)
    coords = solve_in_lattice(K, B) if K.shape[0] else np.zeros((r, 0), dtype=np.int64)
    return cokernel_structure(coords, n=K.shape[0])


def _h1_snf(M: GLattice, G: FiniteGroup | None = None) -> FinAb:
    G = M.group if G is None else G
    if not G.gens or M.rank == 0:
        return FinAb()
    # (M/mM)^G only depends on a generating set, so use a short one
    gens = small_generating_set(G)
    if any(M.matrix_fn is None and M.perm_images is None and g not in G.gens for g in gens):
        gens = G.gens
    D = stacked_differences(M, G, gens)
    return torsion_from_relations(D, G.order, M.rank - M.fixed_rank(G))


def h1(G: FiniteGroup, M: GLattice, method: str = "auto",
       max_order: int = DEFAULT_MAX_ORDER, max_rank: int = DEFAULT_MAX_RANK) -> FinAb:
    """H^1(G, M) as invariant factors.  G may be a subgroup of M's group."""
    if G.order > max_order:
        raise CapExceeded(f"H^1 needs |G| <= {max_order}, got {G.order}")
    if M.rank > max_rank:
        raise CapExceeded(f"H^1 needs rank <= {max_rank}, got {M.rank}")
    if G != M.group:
        M = restrict(M, G)
    if method == "auto":
        small = G.order * len(G.gens) * M.rank * M.rank <= 2_000_000
        method = "presentation" if small else "snf"
    if method == "presentation":
        return _h1_presentation(M)
    if method == "snf":
        return _h1_snf(M)
    raise ValueError(f"unknown H^1 method {method!r}")


# ------------------------------------------------------------ Tate groups

def tate_h_minus1(U: FiniteGroup, M: GLattice) -> FinAb:
    """ker(N_U) / <m·(A_u - 1)>."""
    if U != M.group:
        M = restrict(M, U)
    if M.rank == 0:
        return FinAb()
    ker = kernel_basis(norm_matrix(M, U))
    if ker.shape[0] == 0:
        return FinAb()
    # (u - 1)M is the row space of A_u - I, so stack vertically
    I = identity(M.rank)
    rel = (np.concatenate([M.matrix(u) - I for u in U.gens], axis=0) if U.gens
           else np.zeros((0, M.rank), dtype=np.int64))
    if rel.shape[0] == 0 or not np.any(rel != 0):
        return FinAb((), ker.shape[0])
    return lattice_quotient(ker, rel)


def tate_h0(U: FiniteGroup, M: GLattice) -> FinAb:
    """M^U / N_U(M)."""
    if U != M.group:
        M = restrict(M, U)
    if M.rank == 0:
        return FinAb()
    fixed = fixed_sublattice(M, U)
    if fixed.shape[0] == 0:
        return FinAb()
    img = norm_image(M, U)
    if img.shape[0] == 0:
        return FinAb((), fixed.shape[0])
    return lattice_quotient(fixed, img)


def _classes(G, classes):
    return subgroup_classes(G) if classes is None else classes


def is_flabby(G: FiniteGroup, M: GLattice, classes: SubgroupClassList | None = None) -> bool:
    return all(tate_h_minus1(U, M).is_trivial for U in _classes(G, classes).reps())


def is_coflabby(G: FiniteGroup, M: GLattice, classes: SubgroupClassList | None = None) -> bool:
    return all(h1(U, M, max_order=G.order).is_trivial for U in _classes(G, classes).reps())


# ------------------------------------------------------------ flabby resolutions

@dataclass
class Summand:
    """A coset lattice Z[U\\G] whose distinguished coset maps to ``vector``."""
    subgroup: FiniteGroup
    vector: np.ndarray
    images: np.ndarray = field(repr=False)      # coset permutation of every element


@dataclass
class FlabbyResolution:
    """0 -> M -> P -> F -> 0 with P a permutation lattice and F flabby.

    ``embedding`` (rank M x rank P) and ``projection`` (rank P x rank F) act
    on row vectors.  They are the duals of rho: P° -> M° and of the inclusion
    of K = ker rho with basis ``kernel`` (rows, in P coordinates).
    """
    M: GLattice
    P: GLattice
    F: GLattice
    embedding: np.ndarray
    projection: np.ndarray
    summands: list[Summand]
    rho: np.ndarray
    kernel: np.ndarray
    section: np.ndarray

    @property
    def K(self) -> GLattice:
        return dual(self.F)

    def summand_orders(self) -> list[int]:
        return [s.subgroup.order for s in self.summands]

    def verify_exact(self) -> bool:
        """Injective, saturated, image = kernel, surjective."""
        r, p, k = self.M.rank, self.P.rank, self.F.rank
        if r + k != p:
            return False
        if np.any(matmul(self.embedding, self.projection) != 0):
            return False
        # rho surjective <=> embedding = rho^T has saturated full-rank image
        if r and not cokernel_structure(self.rho, n=r).is_trivial:
            return False
        if k and np.any(matmul(self.kernel, self.section) != identity(k)):
            return False
        return True

    def verify_equivariant(self) -> bool:
        for j, g in enumerate(self.M.group.gens):
            if np.any(matmul(self.M.gen_mats[j], self.embedding)
                      != matmul(self.embedding, self.P.gen_mats[j])):
                return False
            if np.any(matmul(self.P.gen_mats[j], self.projection)
                      != matmul(self.projection, self.F.gen_mats[j])):
                return False
        return True


def _orbit_labels(images: np.ndarray, U: FiniteGroup) -> np.ndarray:
    """Label every point of a permutation action by the least point of its U-orbit."""
    lab = np.arange(images.shape[1])
    while True:
        new = lab.copy()
        for u in U.gens:
            np.minimum.at(new, images[u], lab)
            new = np.minimum(new, new[images[u]])
        if np.array_equal(new, lab):
            return lab
        lab = new


def _summand_rows(Md: GLattice, U: FiniteGroup, v: np.ndarray) -> np.ndarray:
    reps, _ = coset_action(Md.group, U)
    if Md.rank == 0:
        return np.zeros((len(reps), 0), dtype=np.int64)
    return np.stack([matmul(v[None, :], Md.matrix(x))[0] for x in reps])


def _orbit_sums(images: np.ndarray, rows: np.ndarray, U: FiniteGroup) -> np.ndarray:
    lab = _orbit_labels(images, U)
    keys = np.unique(lab)
    out = np.zeros((len(keys), rows.shape[1]), dtype=object)
    pos = np.searchsorted(keys, lab)
    for i, k in enumerate(pos):
        out[k] = out[k] + rows[i]
    return as_matrix(out)


class _Level:
    """Image of (P°)^U in (M°)^U, kept as an HNF basis.

    With ``modular`` set (allowed once P° -> M° is onto, so that the
    cokernel at this level is |U|-torsion) the shortfall is measured by ranks
    modulo the primes dividing |U|; otherwise by the exact rank deficit and the
    index of the image in its saturation.
    """

    def __init__(self, Md: GLattice, U: FiniteGroup, modular: bool):
        self.Md = Md
        self.U = U
        self.target = Md.fixed_rank(U)
        self.primes = sorted(factorint(U.order))
        self.modular = modular
        self.rows = np.zeros((0, Md.rank), dtype=np.int64)
        self.basis = self.rows

    def with_rows(self, rows: np.ndarray) -> np.ndarray:
        if rows.shape[0] == 0:
            return self.basis
        both = np.concatenate([self.basis, as_matrix(rows)])
        if self.modular:
            return both
        return row_lattice_basis(both, n=self.Md.rank)

    def contribution(self, S: "Summand", rows: np.ndarray) -> np.ndarray:
        return _orbit_sums(S.images, rows, self.U)

    def badness(self, basis: np.ndarray | None = None):
        b = self.basis if basis is None else basis
        if self.modular:
            if b.shape[0] == 0:
                return self.target * len(self.primes)
            return sum(self.target - rank_mod_prime(b, p) for p in self.primes)
        if b.shape[0] == 0:
            return (self.target, 1)
        idx = 1
        for d in snf(b).diagonal:
            idx *= int(d)
        return (self.target - b.shape[0], idx)

    def complete(self) -> bool:
        return self.badness() in (0, (0, 1))

    def adopt(self, basis: np.ndarray) -> None:
        self.basis = basis


def _subgroups_containing(classes: SubgroupClassList, U: FiniteGroup):
    """Conjugates of class representatives that contain U, largest first (lazy)."""
    T = classes.group.table
    ub = U.bits
    for c in sorted(classes, key=lambda c: -c.order):
        if c.order % U.order:
            continue
        for b in c.conjugate_bits:
            if b & ub == ub:
                mask = np.unpackbits(np.frombuffer(b.to_bytes((T.n + 7) // 8, "big"), dtype=np.uint8))
                yield subgroup_from_elements(T, np.flatnonzero(mask[:T.n]))


_BIG_PRIME = 2147483647

STRATEGIES = ("seeded", "greedy", "all")


def flabby_resolution(G: FiniteGroup, M: GLattice, strategy: str = "seeded", seeds=None,
                      classes: SubgroupClassList | None = None,
                      max_order: int = DEFAULT_MAX_ORDER,
                      max_rank: int = DEFAULT_MAX_RANK) -> FlabbyResolution:
    """Flabby resolution of M built on the dual side.

    A permutation lattice P° maps onto M° so that (P°)^U -> (M°)^U is onto
    for every subgroup class U.  Then K = ker(P° -> M°) has H^1(U, K) = 0 for
    all U, and dualizing gives 0 -> M -> P -> F -> 0 with F = K° flabby.

    Levels U are processed from large to small.  When a level falls short:

    * ``greedy`` tries summands Z[G/V] for subgroups V containing U,
      cheapest (largest V) first, with V-fixed basis vectors, and keeps the
      first that strictly improves the level; V = U always succeeds.
    * ``all`` adds Z[G/U] for every basis vector of (M°)^U.
    * ``seeded`` first adds free summands Z[G] on ``seeds`` (or, if none are
      given, on basis vectors of M° chosen greedily) until P° -> M° is onto.
      Free summands cover the norm image N_U(M°) at every level, so only the
      Ĥ^0(U, M°) gaps remain, and those are filled as in ``greedy``.
    """
    if G.order > max_order:
        raise CapExceeded(f"flabby resolution needs |G| <= {max_order}, got {G.order}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if M.group != G:
        raise ValueError("lattice is not over G")
    classes = _classes(G, classes)
    Md = dual(M)
    r = M.rank
    summands: list[Summand] = []
    rows_of: list[np.ndarray] = []
    size = [0]
    fixed_cache: dict[bytes, np.ndarray] = {}
    trivial = classes[0].rep

    def fixed(V):
        if V.key not in fixed_cache:
            fixed_cache[V.key] = fixed_sublattice(Md, V)
        return fixed_cache[V.key]

    def make(V, v):
        _, images = coset_action(G, V)
        v = as_matrix(np.asarray(v)[None, :])[0]
        return Summand(V, v, images), _summand_rows(Md, V, v)

    def accept(S, rows):
        size[0] += S.images.shape[1]
        if size[0] - r > max_rank:
            raise CapExceeded(f"flabby rank would exceed {max_rank}")
        summands.append(S)
        rows_of.append(rows)

    onto = False
    if strategy == "seeded" and r:
        if seeds is not None:
            for v in seeds:
                accept(*make(trivial, v))
        else:
            image = np.zeros((0, r), dtype=np.int64)
            primes = [_BIG_PRIME] + sorted(factorint(G.order))

            def short(b):
                return sum(r - rank_mod_prime(b, p) for p in primes) if b.shape[0] else r * len(primes)

            for i in range(r):
                if short(image) == 0:
                    break
                v = np.zeros(r, dtype=np.int64)
                v[i] = 1
                S, rows = make(trivial, v)
                trial = row_lattice_basis(np.concatenate([image, rows]), n=r) \
                    if image.shape[0] + rows.shape[0] > 4 * r else np.concatenate([image, rows])
                if short(trial) < short(image):
                    accept(S, rows)
                    image = trial
        rho = np.concatenate(rows_of) if rows_of else np.zeros((0, r), dtype=np.int64)
        if not is_onto(rho):
            for i in range(r):
                v = np.zeros(r, dtype=np.int64)
                v[i] = 1
                accept(*make(trivial, v))
                if is_onto(np.concatenate(rows_of)):
                    break
        onto = True

    for c in sorted(classes, key=lambda c: -c.order):
        U = c.rep
        level = _Level(Md, U, modular=onto and U.order > 1)
        if level.target == 0:
            continue
        if summands:
            level.adopt(level.with_rows(np.concatenate(
                [level.contribution(S, rows) for S, rows in zip(summands, rows_of)])))
        if level.complete():
            continue
        if fixed(U).shape[0] != level.target:
            raise AssertionError("fixed rank disagrees with the character")
        if strategy == "all":
            for v in fixed(U):
                S, rows = make(U, v)
                accept(S, rows)
                level.adopt(level.with_rows(level.contribution(S, rows)))
        else:
            candidates = ((V, v) for V in _subgroups_containing(classes, U) for v in fixed(V))
            while not level.complete():
                for V, v in candidates:
                    S, rows = make(V, v)
                    trial = level.with_rows(level.contribution(S, rows))
                    if level.badness(trial) < level.badness():
                        accept(S, rows)
                        level.adopt(trial)
                        break
                else:
                    break
        if not level.complete():
            raise AssertionError("fixed vectors failed to generate the fixed sublattice")

    return _assemble(G, M, summands, rows_of)


def _assemble(G, M, summands, rows_of) -> FlabbyResolution:
    T = G.table
    r = M.rank
    p = sum(S.images.shape[1] for S in summands)
    perm = np.zeros((T.n, p), dtype=np.int64)
    o = 0
    for S in summands:
        n = S.images.shape[1]
        perm[G.elements, o:o + n] = S.images[G.elements] + o
        o += n
    P = permutation_lattice(G, perm, name="P")
    rho = as_matrix(np.concatenate(rows_of)) if summands else np.zeros((0, r), dtype=np.int64)
    B, R = kernel_with_section(rho)
    k = B.shape[0]
    # R is often a coordinate selection; then B·Pi_x·R is a column selection
    sel = None
    if k and np.all((R == 0) | (R == 1)) and np.all(R.sum(axis=0) == 1):
        sel = np.argmax(R, axis=0)

    def k_matrix(x):
        # K = ker rho inside P°: C_x = B·Pi_x·R; permuting columns of B realizes Pi_x
        Bx = np.zeros_like(B)
        Bx[:, perm[x]] = B
        if sel is not None:
            return Bx[:, sel]
        return as_matrix(matmul(Bx, R))

    def f_matrix(x):
        return k_matrix(int(T.inv[x])).T.copy()

    chi = np.zeros(T.n, dtype=np.int64)
    chi[G.elements] = P.character[G.elements] - M.character[G.elements]
    F = GLattice(G, k, [f_matrix(g) for g in G.gens], character=chi,
                 matrix_fn=f_matrix, name="F")
    return FlabbyResolution(M, P, F, embedding=rho.T.copy(), projection=B.T.copy(),
                            summands=summands, rho=rho, kernel=B, section=R)


def check_flabby(res: FlabbyResolution, classes: SubgroupClassList) -> bool:
    """Ĥ^-1(U, F) = H^1(U, K)^dual vanishes for every class representative."""
    K = res.K
    for U in classes.reps():
        if U.order == 1 or K.rank == 0:
            continue
        if not _h1_snf(restrict(K, U)).is_trivial:
            return False
    return True


def h1_of_flabby_class(G: FiniteGroup, M: GLattice, strategy: str = "seeded", seeds=None,
                       classes: SubgroupClassList | None = None, verify: bool = False,
                       max_order: int = DEFAULT_MAX_ORDER,
                       max_rank: int = DEFAULT_MAX_RANK) -> FinAb:
    classes = _classes(G, classes)
    res = flabby_resolution(G, M, strategy=strategy, seeds=seeds, classes=classes,
                            max_order=max_order, max_rank=max_rank)
    if verify and not check_flabby(res, classes):
        raise AssertionError("constructed F is not flabby")
    return h1(G, res.F, method="snf", max_order=max_order, max_rank=max_rank)


def augmentation_seeds(G: FiniteGroup, H: FiniteGroup, gens=None) -> list[np.ndarray]:
    """Vectors e_{Hs} - e_H of I_{G/H}, one per generator s; they generate it as a G-module."""
    reps, images = coset_action(G, H)
    n = len(reps)
    out = []
    for s in (G.gens if gens is None else gens):
        i = int(images[s][0])
        if i == 0:
            continue
        v = np.zeros(n - 1, dtype=np.int64)
        v[i - 1] = 1
        out.append(v)
    return out
