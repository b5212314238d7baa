"""Exact integer and modular linear algebra.

Matrices are numpy arrays.  Exact routines run on int64 while entries stay
small and switch to Python integers (dtype=object) as soon as a bound is
crossed, so results are always exact.  Row-vector convention throughout:
the row space of A is {x·A}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd, prod

import numpy as np

_SAFE = 1 << 30


def as_matrix(A, cols: int | None = None) -> np.ndarray:
    """Coerce A to a 2-d integer array (int64 if it fits, else object)."""
    if isinstance(A, np.ndarray) and A.ndim == 2:
        M = A
    else:
        rows = [list(r) for r in A]
        if not rows:
            return np.zeros((0, cols or 0), dtype=np.int64)
        M = np.array(rows, dtype=object)
    if M.dtype == object:
        if M.size == 0 or max(abs(int(x)) for x in M.flat) < _SAFE:
            return M.astype(np.int64)
        return M
    return M.astype(np.int64, copy=False)


def _widen(*arrays):
    return tuple(a.astype(object) for a in arrays)


def _too_big(*arrays) -> bool:
    """True when int64 arrays must be widened (mixed dtypes count as too big)."""
    kinds = {a.dtype == object for a in arrays}
    if len(kinds) > 1:
        return True
    for a in arrays:
        if a.dtype != object and a.size and int(np.abs(a).max()) >= _SAFE:
            return True
    return False


def identity(n: int, dtype=np.int64) -> np.ndarray:
    return np.eye(n, dtype=dtype)


def matmul(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Exact product; promotes to Python integers when int64 could overflow."""
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    if A.dtype != object and B.dtype != object and A.size and B.size:
        a = int(np.abs(A).max())
        b = int(np.abs(B).max())
        if a * b * A.shape[1] < (1 << 62):
            return A @ B
    C = A.astype(object) @ B.astype(object)
    return as_matrix(C) if C.size else C.astype(np.int64)


# ---------------------------------------------------------------- HNF / SNF

def hnf(A) -> tuple[np.ndarray, np.ndarray]:
    """Row Hermite normal form: returns (H, U) with U·A = H and det U = ±1.

    Pivots are positive, entries above a pivot lie in [0, pivot), zero rows
    come last.
    """
    A = as_matrix(A)
    m, n = A.shape
    H = A.copy()
    U = identity(m)
    r = 0
    for c in range(n):
        if r == m:
            break
        if _too_big(H, U):
            H, U = _widen(H, U)
        found = False
        while True:
            col = H[r:, c]
            nz = np.flatnonzero(col)
            if len(nz) == 0:
                break
            found = True
            i = r + nz[int(np.argmin(np.abs(col[nz])))]
            if i != r:
                H[[r, i]] = H[[i, r]]
                U[[r, i]] = U[[i, r]]
            if len(nz) == 1:
                break
            piv = H[r, c]
            q = H[r + 1:, c] // piv
            if q.any():
                H[r + 1:] -= q[:, None] * H[r]
                U[r + 1:] -= q[:, None] * U[r]
            if _too_big(H, U):
                H, U = _widen(H, U)
        if not found:
            continue
        if H[r, c] < 0:
            H[r] = -H[r]
            U[r] = -U[r]
        piv = H[r, c]
        q = H[:r, c] // piv
        if r and q.any():
            H[:r] -= q[:, None] * H[r]
            U[:r] -= q[:, None] * U[r]
        r += 1
    return H, U


@dataclass
class SmithDecomposition:
    S: np.ndarray
    U: np.ndarray
    V: np.ndarray

    @property
    def diagonal(self) -> list[int]:
        k = min(self.S.shape)
        return [int(self.S[i, i]) for i in range(k)]


def snf(A) -> SmithDecomposition:
    """Smith normal form with transforms: U·A·V = S."""
    A = as_matrix(A)
    m, n = A.shape
    S = A.copy()
    U = identity(m)
    V = identity(n)
    for t in range(min(m, n)):
        if _too_big(S, U, V):
            S, U, V = _widen(S, U, V)
        sub = S[t:, t:]
        nz = np.argwhere(sub != 0)
        if len(nz) == 0:
            break
        vals = np.abs(sub[nz[:, 0], nz[:, 1]])
        i, j = nz[int(np.argmin(vals))] + t
        _swap_rows(S, U, t, i)
        _swap_cols(S, V, t, j)
        while True:
            if _too_big(S, U, V):
                S, U, V = _widen(S, U, V)
            piv = S[t, t]
            q = S[t + 1:, t] // piv
            if q.any():
                S[t + 1:] -= q[:, None] * S[t]
                U[t + 1:] -= q[:, None] * U[t]
            q = S[t, t + 1:] // piv
            if q.any():
                S[:, t + 1:] -= S[:, t][:, None] * q[None, :]
                V[:, t + 1:] -= V[:, t][:, None] * q[None, :]
            col = S[t + 1:, t]
            row = S[t, t + 1:]
            if col.any() or row.any():
                cand = [(abs(x), 0, k) for k, x in enumerate(col) if x]
                cand += [(abs(x), 1, k) for k, x in enumerate(row) if x]
                _, kind, k = min(cand)
                if kind == 0:
                    _swap_rows(S, U, t, t + 1 + k)
                else:
                    _swap_cols(S, V, t, t + 1 + k)
                continue
            rest = S[t + 1:, t + 1:]
            bad = np.argwhere(rest % piv != 0) if rest.size else []
            if len(bad):
                k = int(bad[0][0]) + t + 1
                S[t] += S[k]
                U[t] += U[k]
                continue
            break
        if S[t, t] < 0:
            S[t] = -S[t]
            U[t] = -U[t]
    return SmithDecomposition(S, U, V)


def _swap_rows(S, U, a, b):
    if a != b:
        S[[a, b]] = S[[b, a]]
        U[[a, b]] = U[[b, a]]


def _swap_cols(S, V, a, b):
    if a != b:
        S[:, [a, b]] = S[:, [b, a]]
        V[:, [a, b]] = V[:, [b, a]]


def kernel_basis(A) -> np.ndarray:
    """Saturated Z-basis (as rows) of the left kernel {x : x·A = 0}."""
    A = as_matrix(A)
    H, U = hnf(A)
    zero = [i for i in range(H.shape[0]) if not H[i].any()]
    return U[zero] if zero else np.zeros((0, A.shape[0]), dtype=np.int64)


def rank(A) -> int:
    H, _ = hnf(A)
    return sum(1 for i in range(H.shape[0]) if H[i].any())


# ---------------------------------------------------------------- FinAb

@dataclass(frozen=True)
class FinAb:
    """Finitely generated abelian group: invariant factors plus free rank.

    ``witness`` optionally maps ambient generators (rows) to coordinates
    modulo the invariant factors; it does not take part in equality.
    """
    invariants: tuple[int, ...] = ()
    free_rank: int = 0
    witness: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        inv = tuple(int(d) for d in self.invariants)
        if any(d < 2 for d in inv):
            raise ValueError(f"invariant factors must be >= 2: {inv}")
        if any(b % a for a, b in zip(inv, inv[1:])):
            raise ValueError(f"invariant factors must form a divisor chain: {inv}")
        object.__setattr__(self, "invariants", inv)

    @classmethod
    def from_orders(cls, orders, free_rank: int = 0) -> "FinAb":
        """Normalize an arbitrary cyclic decomposition into invariant factors."""
        orders = [int(o) for o in orders if int(o) != 1]
        if any(o == 0 for o in orders):
            free_rank += sum(1 for o in orders if o == 0)
            orders = [o for o in orders if o]
        return cls(tuple(invariant_factors(orders)), free_rank)

    @property
    def order(self) -> int:
        if self.free_rank:
            raise ValueError("infinite group has no finite order")
        return prod(self.invariants)

    @property
    def is_trivial(self) -> bool:
        return not self.invariants and not self.free_rank

    def __str__(self) -> str:
        s = "[" + ", ".join(map(str, self.invariants)) + "]"
        return s + (f" + Z^{self.free_rank}" if self.free_rank else "")

    def as_list(self) -> list[int]:
        return list(self.invariants)


def invariant_factors(orders) -> list[int]:
    """Invariant factors of a direct sum of cyclic groups Z/o."""
    by_prime: dict[int, list[int]] = {}
    for o in orders:
        for p, e in factorint(o).items():
            by_prime.setdefault(p, []).append(p ** e)
    if not by_prime:
        return []
    length = max(len(v) for v in by_prime.values())
    out = [1] * length
    for v in by_prime.values():
        v.sort()
        for i, q in enumerate(v):
            out[length - len(v) + i] *= q
    return [d for d in out if d > 1]


def factorint(n: int) -> dict[int, int]:
    n = abs(int(n))
    f: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            f[p] = f.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        f[n] = f.get(n, 0) + 1
    return f


def cokernel_structure(A, n: int | None = None) -> FinAb:
    """Structure of Z^n / rowspace(A); the witness maps e_i to coordinates."""
    A = as_matrix(A, cols=n)
    if n is None:
        n = A.shape[1]
    if A.shape[0] == 0:
        return FinAb((), n, witness=np.zeros((n, 0), dtype=np.int64))
    D = snf(A)
    diag = D.diagonal
    r = sum(1 for d in diag if d)
    tors = [i for i, d in enumerate(diag) if d > 1]
    W = D.V[:, tors] if tors else np.zeros((n, 0), dtype=np.int64)
    for k, i in enumerate(tors):
        W[:, k] %= diag[i]
    return FinAb(tuple(diag[i] for i in tors), n - r, witness=W)


# ---------------------------------------------------------------- lattices

def row_lattice_basis(A, n: int | None = None) -> np.ndarray:
    """HNF basis (nonzero rows) of the row lattice of A."""
    A = as_matrix(A, cols=n)
    if A.shape[0] == 0:
        return A.reshape(0, A.shape[1] if n is None else n)
    H, _ = hnf(A)
    keep = [i for i in range(H.shape[0]) if H[i].any()]
    return H[keep]


def solve_in_lattice(B, X) -> np.ndarray:
    """Integer coordinates C with C·B = X, for B with independent rows.

    Raises ValueError if some row of X is not in the row lattice of B.
    """
    B = as_matrix(B)
    k, n = B.shape
    X = as_matrix(X, cols=n)
    if X.shape[0] == 0:
        return np.zeros((0, k), dtype=np.int64)
    H, U = hnf(B)
    R = X.astype(object).copy()
    C = np.zeros((X.shape[0], k), dtype=object)
    for i in range(k):
        nz = np.flatnonzero(H[i])
        if len(nz) == 0:
            raise ValueError("basis rows are dependent")
        c = int(nz[0])
        q = R[:, c] // int(H[i, c])
        C[:, i] = q
        R = R - q[:, None] * H[i].astype(object)[None, :]
    if np.any(R != 0):
        raise ValueError("vector not in lattice")
    return as_matrix(C.dot(U.astype(object)))


def lattice_index(big, small) -> int:
    """[big : small] for row lattices small ⊆ big of equal rank (0 if rank drops)."""
    big = row_lattice_basis(big)
    C = solve_in_lattice(big, small)
    if C.shape[0] == 0:
        return 1 if big.shape[0] == 0 else 0
    D = snf(C).diagonal
    if len(D) < big.shape[0] or any(d == 0 for d in D):
        return 0
    return prod(int(d) for d in D)


def lattice_intersection(A, B) -> np.ndarray:
    """Basis of rowspace(A) ∩ rowspace(B)."""
    A = row_lattice_basis(A)
    B = row_lattice_basis(B, n=A.shape[1])
    if A.shape[0] == 0 or B.shape[0] == 0:
        return np.zeros((0, A.shape[1]), dtype=np.int64)
    K = kernel_basis(np.concatenate([A, -B]))
    if K.shape[0] == 0:
        return np.zeros((0, A.shape[1]), dtype=np.int64)
    return row_lattice_basis(matmul(K[:, :A.shape[0]], A))


def lattice_quotient(big, small) -> FinAb:
    """Structure of rowspace(big)/rowspace(small); requires small ⊆ big."""
    big = row_lattice_basis(big)
    C = solve_in_lattice(big, small) if np.asarray(small).size else None
    if C is None:
        return FinAb((), big.shape[0])
    return cokernel_structure(C, n=big.shape[0])


# ---------------------------------------------------------------- modular

def _valuation(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def snf_mod_prime_power(A, p: int, k: int, transforms: bool = False):
    """Smith form of A over Z/p^k.

    Returns the list of diagonal valuations (length min(rows, cols); value k
    means the entry vanishes mod p^k).  With ``transforms`` also returns
    (V, Vinv) modulo p^k, the column transform and its inverse, such that
    rowspace(A)·V is spanned by diag(p^e_i) modulo p^k.
    """
    q = p ** k
    M = np.array(as_matrix(A) % q, dtype=np.int64)
    m, n = M.shape
    if transforms:
        V = np.eye(n, dtype=np.int64)
        Vi = np.eye(n, dtype=np.int64)
    vals: list[int] = []
    t = 0
    for e in range(k):
        pe = p ** e
        pe1 = pe * p
        while t < min(m, n):
            sub = M[t:, t:]
            hits = np.argwhere(sub % pe1 != 0)
            if len(hits) == 0:
                break
            i, j = int(hits[0][0]) + t, int(hits[0][1]) + t
            if i != t:
                M[[t, i]] = M[[i, t]]
            if j != t:
                M[:, [t, j]] = M[:, [j, t]]
                if transforms:
                    V[:, [t, j]] = V[:, [j, t]]
                    Vi[[t, j]] = Vi[[j, t]]
            u = int(M[t, t]) // pe
            inv = pow(u, -1, q)
            M[t] = (M[t] * inv) % q
            f = M[t + 1:, t] // pe
            if f.any():
                M[t + 1:, t:] = (M[t + 1:, t:] - np.outer(f, M[t, t:])) % q
            g = M[t, t + 1:] // pe
            if transforms and g.any():
                V[:, t + 1:] = (V[:, t + 1:] - np.outer(V[:, t], g)) % q
                Vi[t] = (Vi[t] + g @ Vi[t + 1:]) % q
            M[t, t + 1:] = 0
            vals.append(e)
            t += 1
    vals += [k] * (min(m, n) - t)
    if transforms:
        return vals, V, Vi
    return vals


def torsion_from_relations(A, m: int, rank_over_q: int) -> FinAb:
    """⊕ Z/gcd(d_i, m) over the nonzero elementary divisors d_i of A.

    ``rank_over_q`` is the rank of A over Q (the number of nonzero d_i); the
    elimination itself is done modulo the prime powers dividing m.
    """
    A = as_matrix(A)
    size = min(A.shape)
    zeros = size - rank_over_q
    orders: list[int] = []
    for p, v in factorint(m).items():
        vals = snf_mod_prime_power(A, p, v)
        full = sum(1 for e in vals if e >= v) - zeros
        if full < 0:
            raise ArithmeticError("rank hint exceeds modular rank")
        orders += [p ** e for e in vals if 0 < e < v]
        orders += [p ** v] * full
    return FinAb.from_orders(orders)


def nullspace_mod_prime(A, p: int) -> np.ndarray:
    """Basis (rows) of {x : x·A ≡ 0 mod p} over GF(p)."""
    A = np.array(as_matrix(A) % p, dtype=np.int64)
    m, n = A.shape
    M = np.concatenate([A, np.eye(m, dtype=np.int64)], axis=1)
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(M[r:, c])
        if len(nz) == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            M[[r, i]] = M[[i, r]]
        M[r] = (M[r] * pow(int(M[r, c]), -1, p)) % p
        f = M[:, c].copy()
        f[r] = 0
        if f.any():
            M = (M - np.outer(f, M[r])) % p
        r += 1
    return M[r:, n:]


# ---------------------------------------------------------------- GF(2)

class GF2Eliminator:
    """Incremental Gaussian elimination over GF(2) with bit-packed rows.

    Rows are Python integers (bit j = coefficient of unknown j).  Pivot on
    the lowest set bit, which makes the reduced basis deterministic.
    """

    def __init__(self, nbits: int):
        self.nbits = nbits
        self.pivots: dict[int, int] = {}

    def reduce(self, row: int) -> int:
        pivots = self.pivots
        while row:
            low = row & -row
            b = low.bit_length() - 1
            prow = pivots.get(b)
            if prow is None:
                return row
            row ^= prow
        return 0

    def add(self, row: int) -> bool:
        row = self.reduce(row)
        if not row:
            return False
        for b, v in self.pivots.items():
            if (row >> b) & 1:
                row ^= v
        b = (row & -row).bit_length() - 1
        for k, v in self.pivots.items():
            if (v >> b) & 1:
                self.pivots[k] = v ^ row
        self.pivots[b] = row
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def nullspace(self) -> list[int]:
        """Basis of {x : <row, x> = 0 for every added row}."""
        free = [j for j in range(self.nbits) if j not in self.pivots]
        basis = []
        for f in free:
            x = 1 << f
            for b, row in self.pivots.items():
                if (row >> f) & 1:
                    x |= 1 << b
            basis.append(x)
        return basis


def parity(x: int) -> int:
    return bin(x).count("1") & 1


def kernel_with_section(A) -> tuple[np.ndarray, np.ndarray]:
    """Saturated left-kernel basis B of A together with R such that B·R = I.

    Column operations do not change the left kernel, so A is reduced by
    column operations around unit pivots until n rows form a permutation
    matrix; the remaining rows then give the kernel directly and R selects
    their coordinates.  Falls back to HNF/SNF when unit pivots run out.
    """
    A = as_matrix(A).copy()
    m, n = A.shape
    pivots: list[tuple[int, int]] = []
    used = np.zeros(m, dtype=bool)
    open_cols = np.ones(n, dtype=bool)
    while open_cols.any():
        sub = A[:, open_cols]
        hit = np.argwhere((np.abs(sub) == 1) & ~used[:, None])
        if len(hit) == 0:
            break
        i = int(hit[0][0])
        c = int(np.flatnonzero(open_cols)[hit[0][1]])
        if A[i, c] < 0:
            A[:, c] = -A[:, c]
        f = A[i].copy()
        f[c] = 0
        nz = np.flatnonzero(f)
        if len(nz):
            A[:, nz] -= A[:, c][:, None] * f[nz][None, :]
        if _too_big(A):
            A = A.astype(object)
        used[i] = True
        open_cols[c] = False
        pivots.append((i, c))
    if open_cols.any():
        B = kernel_basis(A)
        if B.shape[0] == 0:
            return B, np.zeros((m, 0), dtype=np.int64)
        D = snf(B)
        k = B.shape[0]
        if any(d != 1 for d in D.diagonal[:k]):
            raise AssertionError("kernel basis is not saturated")
        return B, as_matrix(matmul(D.V[:, :k], D.U))
    rest = np.flatnonzero(~used)
    k = len(rest)
    B = np.zeros((k, m), dtype=A.dtype)
    B[np.arange(k), rest] = 1
    for i, c in pivots:
        B[:, i] = -A[rest, c]
    R = np.zeros((m, k), dtype=np.int64)
    R[rest, np.arange(k)] = 1
    return as_matrix(B), R


def rank_mod_prime(A, p: int) -> int:
    """Rank of A over GF(p) (p < 2^31)."""
    M = np.array(as_matrix(A) % p, dtype=np.int64)
    m, n = M.shape
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(M[r:, c])
        if len(nz) == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            M[[r, i]] = M[[i, r]]
        M[r] = (M[r] * pow(int(M[r, c]), -1, p)) % p
        f = M[r + 1:, c]
        rows = np.flatnonzero(f)
        if len(rows):
            M[r + 1 + rows] = (M[r + 1 + rows] - np.outer(f[rows], M[r])) % p
        r += 1
    return r


def is_onto(A) -> bool:
    """Does the row lattice of A equal Z^n?"""
    A = as_matrix(A)
    m, n = A.shape
    if n == 0:
        return True
    if m < n:
        return False
    # unit pivots certify surjectivity without coefficient growth
    W = A.copy()
    open_cols = np.ones(n, dtype=bool)
    used = np.zeros(m, dtype=bool)
    while open_cols.any():
        sub = W[:, open_cols]
        hit = np.argwhere((np.abs(sub) == 1) & ~used[:, None])
        if len(hit) == 0:
            break
        i = int(hit[0][0])
        c = int(np.flatnonzero(open_cols)[hit[0][1]])
        f = W[i] * W[i, c]
        f[c] = 0
        nz = np.flatnonzero(f)
        if len(nz):
            W[:, nz] -= W[:, c][:, None] * f[nz][None, :]
        if _too_big(W):
            W = W.astype(object)
        used[i] = True
        open_cols[c] = False
    if not open_cols.any():
        return True
    return cokernel_structure(A, n=n).is_trivial
