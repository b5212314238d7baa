"""G-lattices: Z-free modules with a right action m -> m·A_g.

Matrices satisfy A_{gh} = A_g·A_h.  Coset lattices are built on right
cosets Hx with Hx·g = Hxg, so every construction is a right action and no
transposes are needed except in the dual, where g acts by (A_{g^-1})^T.

A lattice may carry its rational character (trace of every element).  It is
exact, cheap for permutation-type constructions, and gives ranks of
fixed sublattices as averages of traces.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np

from .abexact import as_matrix, identity, kernel_basis, matmul, row_lattice_basis
from .groups import FiniteGroup, right_coset_reps


class GLattice:
    """A free Z-module of rank ``rank`` with an action of ``group``.

    ``gen_mats[j]`` is the matrix of ``group.gens[j]``.  Permutation lattices
    also keep ``perm_images`` (ambient element id -> image of each basis
    index), which makes element matrices and characters cheap.  Lattices
    cut out of a permutation lattice pass ``matrix_fn`` for the same reason.
    """

    def __init__(self, group: FiniteGroup, rank: int, gen_mats, *, perm_images=None,
                 character=None, matrix_fn=None, name: str = ""):
        self.group = group
        self.rank = int(rank)
        self.gen_mats = [as_matrix(A) if np.asarray(A).size else
                         np.zeros((self.rank, self.rank), dtype=np.int64) for A in gen_mats]
        if len(self.gen_mats) != len(group.gens):
            raise ValueError("need one matrix per group generator")
        for A in self.gen_mats:
            if A.shape != (self.rank, self.rank):
                raise ValueError("action matrix has the wrong shape")
        self.perm_images = perm_images
        self.matrix_fn = matrix_fn
        self._character = character
        self.name = name
        self._mats: dict[int, np.ndarray] = {}

    def __repr__(self) -> str:
        return f"<GLattice {self.name or ''} rank {self.rank} over group of order {self.group.order}>"

    @property
    def is_permutation(self) -> bool:
        return self.perm_images is not None

    def matrix(self, x: int) -> np.ndarray:
        """Action matrix of the ambient element x (must lie in the group)."""
        x = int(x)
        if self.perm_images is not None:
            A = np.zeros((self.rank, self.rank), dtype=np.int64)
            A[np.arange(self.rank), self.perm_images[x]] = 1
            return A
        if x == 0:
            return identity(self.rank)
        if self.matrix_fn is not None:
            return self.matrix_fn(x)
        got = self._mats.get(x)
        if got is not None:
            return got
        tree = self.group.bfs
        if x not in tree.parent:
            raise ValueError("element not in the lattice's group")
        path = []
        y = x
        while y != 0 and y not in self._mats:
            path.append(y)
            y = tree.parent[y]
        A = identity(self.rank) if y == 0 else self._mats[y]
        for z in reversed(path):
            A = matmul(A, self.gen_mats[tree.label[z]])
            self._mats[z] = A
        return A

    @cached_property
    def character(self) -> np.ndarray:
        """Trace of every element, indexed by ambient element id (0 elsewhere)."""
        if self._character is not None:
            return np.asarray(self._character, dtype=np.int64)
        chi = np.zeros(self.group.table.n, dtype=np.int64)
        for x in self.group.elements:
            x = int(x)
            if self.perm_images is not None:
                chi[x] = int(np.count_nonzero(self.perm_images[x] == np.arange(self.rank)))
            else:
                chi[x] = int(np.trace(self.matrix(x)))
        return chi

    def fixed_rank(self, U: FiniteGroup) -> int:
        """Rank of the U-fixed sublattice (average trace over U)."""
        s = int(self.character[U.elements].sum())
        if s % U.order:
            raise AssertionError("character average is not an integer")
        return s // U.order

    def verify_action(self) -> bool:
        """Relators of the Cayley presentation act trivially (A_x·A_s = A_{xs})."""
        mul = self.group.table.mul
        tree = self.group.bfs
        for x, j in tree.non_tree_edges():
            s = self.group.gens[j]
            if self.perm_images is not None:
                lhs = self.perm_images[s][self.perm_images[x]]
                if not np.array_equal(lhs, self.perm_images[int(mul[x, s])]):
                    return False
            elif not np.array_equal(matmul(self.matrix(x), self.gen_mats[j]),
                                    self.matrix(int(mul[x, s]))):
                return False
        # A_1 = I and multiplicativity force every A_g to be invertible
        return True


# ------------------------------------------------------------ constructions

def permutation_lattice(G: FiniteGroup, perm_images: np.ndarray, name: str = "") -> GLattice:
    rank = perm_images.shape[1]
    mats = []
    for g in G.gens:
        A = np.zeros((rank, rank), dtype=np.int64)
        A[np.arange(rank), perm_images[g]] = 1
        mats.append(A)
    return GLattice(G, rank, mats, perm_images=perm_images, name=name)


def coset_action(G: FiniteGroup, H: FiniteGroup) -> tuple[list[int], np.ndarray]:
    """Right coset reps of H in G and the permutation of cosets by every element.

    Returns (reps, images) with images[g, i] = index of the coset H·reps[i]·g.
    """
    if not H.is_subgroup_of(G):
        raise ValueError("H is not a subgroup of G")
    T = G.table
    reps = right_coset_reps(G, H)
    label = np.full(T.n, -1, dtype=np.int64)
    for i, r in enumerate(reps):
        label[T.mul[H.elements, r]] = i
    reps_arr = np.array(reps, dtype=np.int64)
    images = np.zeros((T.n, len(reps)), dtype=np.int64)
    X = G.elements
    images[X] = label[T.mul[reps_arr[None, :], X[:, None]]]
    return reps, images


def coset_lattice(G: FiniteGroup, H: FiniteGroup) -> GLattice:
    """The permutation lattice Z[H\\G] with basis the right cosets (BFS order)."""
    _, images = coset_action(G, H)
    return permutation_lattice(G, images, name=f"Z[G/H] |H|={H.order}")


def augmentation_kernel(G: FiniteGroup, H: FiniteGroup) -> GLattice:
    """I = ker(Z[H\\G] -> Z) with basis e_i - e_0, i = 1..n-1."""
    _, images = coset_action(G, H)
    n = images.shape[1]
    mats = []
    for g in G.gens:
        A = np.zeros((n - 1, n - 1), dtype=np.int64)
        pi = images[g]
        for i in range(1, n):
            if pi[i]:
                A[i - 1, pi[i] - 1] += 1
            if pi[0]:
                A[i - 1, pi[0] - 1] -= 1
        mats.append(A)
    chi = np.zeros(G.table.n, dtype=np.int64)
    chi[G.elements] = (images[G.elements] == np.arange(n)).sum(axis=1) - 1
    return GLattice(G, n - 1, mats, character=chi, name="I_{G/H}")


def dual(M: GLattice) -> GLattice:
    """Hom(M, Z): g acts by the transpose of the matrix of g^-1."""
    T = M.group.table
    if M.perm_images is not None:
        # permutation matrices are orthogonal, so the dual is the same lattice
        return GLattice(M.group, M.rank, [A.copy() for A in M.gen_mats],
                        perm_images=M.perm_images, character=M._character, name=f"({M.name})°")
    mats = [M.matrix(int(T.inv[g])).T.copy() for g in M.group.gens]
    fn = None
    if M.matrix_fn is not None:
        def fn(x, inner=M.matrix_fn):
            return inner(int(T.inv[x])).T.copy()
    return GLattice(M.group, M.rank, mats, character=M._character, matrix_fn=fn,
                    name=f"({M.name})°")


def chevalley_module(G: FiniteGroup, H: FiniteGroup) -> GLattice:
    """J_{G/H}: the dual of the augmentation kernel of Z[H\\G]."""
    J = dual(augmentation_kernel(G, H))
    J.name = "J_{G/H}"
    return J


def trivial_lattice(G: FiniteGroup, rank: int = 1) -> GLattice:
    chi = np.zeros(G.table.n, dtype=np.int64)
    chi[G.elements] = rank
    return GLattice(G, rank, [identity(rank) for _ in G.gens], character=chi, name="Z")


def restrict(M: GLattice, U: FiniteGroup) -> GLattice:
    """Restriction to U <= G, using U's canonical generators."""
    if not U.is_subgroup_of(M.group):
        raise ValueError("U is not a subgroup of the lattice's group")
    mats = [M.matrix(u) for u in U.gens]
    chi = None
    if M._character is not None:
        chi = np.zeros_like(M.character)
        chi[U.elements] = M.character[U.elements]
    return GLattice(U, M.rank, mats, perm_images=M.perm_images, character=chi,
                    matrix_fn=M.matrix_fn, name=f"{M.name}|U")


def direct_sum(*lattices: GLattice) -> GLattice:
    G = lattices[0].group
    if any(L.group != G for L in lattices):
        raise ValueError("lattices over different groups")
    rank = sum(L.rank for L in lattices)
    mats = []
    for j in range(len(G.gens)):
        A = np.zeros((rank, rank), dtype=object)
        o = 0
        for L in lattices:
            A[o:o + L.rank, o:o + L.rank] = L.gen_mats[j]
            o += L.rank
        mats.append(as_matrix(A) if rank else np.zeros((0, 0), dtype=np.int64))
    perm = None
    if all(L.perm_images is not None for L in lattices):
        parts, o = [], 0
        for L in lattices:
            parts.append(L.perm_images + o)
            o += L.rank
        perm = np.concatenate(parts, axis=1)
    chi = None
    if all(L._character is not None or L.perm_images is not None for L in lattices):
        chi = sum(L.character for L in lattices)
    return GLattice(G, rank, mats, perm_images=perm, character=chi, name="⊕")


# ------------------------------------------------------------ fixed points and norms

def stacked_differences(M: GLattice, U: FiniteGroup, gens=None) -> np.ndarray:
    """[A_u - I for u in gens] side by side (rank x rank·#gens); gens default to U.gens."""
    gens = U.gens if gens is None else gens
    if not gens:
        return np.zeros((M.rank, 0), dtype=np.int64)
    I = identity(M.rank)
    return np.concatenate([M.matrix(u) - I for u in gens], axis=1)


def fixed_sublattice(M: GLattice, U: FiniteGroup) -> np.ndarray:
    """Basis (rows) of M^U, saturated."""
    if not U.gens:
        return identity(M.rank)
    return kernel_basis(stacked_differences(M, U))


def norm_matrix(M: GLattice, U: FiniteGroup) -> np.ndarray:
    N = np.zeros((M.rank, M.rank), dtype=object)
    for u in U.elements:
        N = N + M.matrix(int(u)).astype(object)
    return as_matrix(N)


def norm_image(M: GLattice, U: FiniteGroup) -> np.ndarray:
    """Basis of N_U(M) = {m·N_U}."""
    return row_lattice_basis(norm_matrix(M, U), n=M.rank)
