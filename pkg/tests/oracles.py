"""Independent reference computations used only by the tests.

None of these call the library's Smith/Hermite forms, modular eliminations
or cohomology code.  They work from group tables and action matrices alone.
"""
from __future__ import annotations

import itertools
from math import prod

import numpy as np


def factor(n):
    f, p = {}, 2
    while p * p <= n:
        while n % p == 0:
            f[p] = f.get(p, 0) + 1
            n //= p
        p += 1
    if n > 1:
        f[n] = f.get(n, 0) + 1
    return f


def _rank_mod_p(rows, p):
    """Rank of an integer matrix over GF(p), plain Gaussian elimination."""
    M = [list(int(x) % p for x in r) for r in rows]
    rank, cols = 0, len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = pow(M[rank][c], -1, p)
        M[rank] = [(x * inv) % p for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c]:
                f = M[i][c]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


def invariants_from_torsion_counts(counts_by_prime):
    """counts_by_prime[p] = [|A[p]|, |A[p^2]|, ...] -> invariant factors of A."""
    primary = []
    for p, counts in counts_by_prime.items():
        prev = 1
        ks = []
        for c in counts:
            ks.append(round(np.log(c // prev) / np.log(p)) if c > prev else 0)
            prev = c
        # ks[j] = number of cyclic factors of order >= p^(j+1)
        for j, k in enumerate(ks):
            nxt = ks[j + 1] if j + 1 < len(ks) else 0
            primary += [p ** (j + 1)] * (k - nxt)
    # combine primary parts into invariant factors
    by_p = {}
    for q in primary:
        p = min(factor(q))
        by_p.setdefault(p, []).append(q)
    length = max((len(v) for v in by_p.values()), default=0)
    out = [1] * length
    for p, qs in by_p.items():
        qs = sorted(qs)
        for i, q in enumerate(qs):
            out[length - len(qs) + i] *= q
    return [d for d in out if d > 1]


def h1_bruteforce(G, matrices):
    """Invariant factors of H^1(G, M) by counting fixed points of M/dM.

    For each prime power d = p^j dividing |G|,
    |H^1(G, M)[d]| = |(M/dM)^G| / d^(rank M^G); the torsion counts determine
    the group.  ``matrices`` maps each generator of G to its action matrix.
    """
    r = matrices[0].shape[0] if matrices else 0
    chi = _fixed_rank(G, matrices)
    counts = {}
    for p, e in factor(G.order).items():
        counts[p] = []
        for j in range(1, e + 1):
            d = p ** j
            fixed = _count_fixed(matrices, d, r)
            counts[p].append(fixed // d ** chi)
    return invariants_from_torsion_counts(counts)


def _count_fixed(matrices, d, r):
    if r == 0:
        return 1
    vecs = np.array(list(itertools.product(range(d), repeat=r)), dtype=np.int64)
    ok = np.ones(len(vecs), dtype=bool)
    for A in matrices:
        ok &= ((vecs @ A - vecs) % d == 0).all(axis=1)
    return int(ok.sum())


def _fixed_rank(G, matrices):
    """Rank of M^G: dimension of the common kernel of A - I over Q (exact, via fractions)."""
    from fractions import Fraction
    r = matrices[0].shape[0] if matrices else 0
    if r == 0:
        return 0
    rows = [[Fraction(int(x)) for x in col] for A in matrices for col in (A - np.eye(r, dtype=np.int64)).T]
    # rank over Q of the stacked (A - I)^T
    M = rows
    rank = 0
    for c in range(r):
        piv = next((i for i in range(rank, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(len(M)):
            if i != rank and M[i][c] != 0:
                f = M[i][c] / M[rank][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
    return r - rank


def element_matrices(G, M):
    """Action matrix of every element, by BFS products of generator matrices (oracle side)."""
    T = G.table
    mats = {0: np.eye(M.rank, dtype=np.int64)}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for j, s in enumerate(G.gens):
                y = int(T.mul[x, s])
                if y not in mats:
                    mats[y] = mats[x] @ M.gen_mats[j]
                    nxt.append(y)
        frontier = nxt
    return mats


def hom_count_to_cyclic(G, p):
    """Number of homomorphisms G -> Z/p, by trying all generator images."""
    T = G.table
    gens = list(G.gens)
    count = 0
    for imgs in itertools.product(range(p), repeat=len(gens)):
        val = {0: 0}
        frontier = [0]
        good = True
        while frontier and good:
            nxt = []
            for x in frontier:
                for s, a in zip(gens, imgs):
                    y = int(T.mul[x, s])
                    v = (val[x] + a) % p
                    if y in val:
                        if val[y] != v:
                            good = False
                            break
                    else:
                        val[y] = v
                        nxt.append(y)
                if not good:
                    break
            frontier = nxt
        count += good
    return count


def h2_dim_mod_p(G, p):
    """dim H^2(G, F_p) from the full system on all pairs and all triples."""
    X = [int(x) for x in G.elements]
    n = len(X)
    loc = {x: i for i, x in enumerate(X)}
    T = G.table
    mul = [[loc[int(T.mul[a, b])] for b in X] for a in X]
    idx = lambda g, h: g * n + h
    rows = []
    for g in range(n):
        for h in range(n):
            for k in range(n):
                r = [0] * (n * n)
                r[idx(g, h)] += 1
                r[idx(mul[g][h], k)] += 1
                r[idx(h, k)] -= 1
                r[idx(g, mul[h][k])] -= 1
                if any(x % p for x in r):
                    rows.append(r)
    z2 = n * n - _rank_mod_p(rows, p)
    # coboundaries dc(g,h) = c(g) + c(h) - c(gh)
    cob = []
    for e in range(n):
        r = [0] * (n * n)
        for g in range(n):
            for h in range(n):
                r[idx(g, h)] = (g == e) + (h == e) - (mul[g][h] == e)
        cob.append(r)
    b2 = _rank_mod_p(cob, p)
    return z2 - b2


def count_h2_bruteforce(G, m):
    """(|Z^2|, |B^2|) for normalized cocycles G x G -> Z/m, by enumerating every
    function on non-identity pairs."""
    X = [int(x) for x in G.elements]
    n = len(X)
    loc = {x: i for i, x in enumerate(X)}
    T = G.table
    mul = [[loc[int(T.mul[a, b])] for b in X] for a in X]
    pairs = [(g, h) for g in range(1, n) for h in range(1, n)]
    z = 0
    for vals in itertools.product(range(m), repeat=len(pairs)):
        f = [[0] * n for _ in range(n)]
        for (g, h), v in zip(pairs, vals):
            f[g][h] = v
        if all((f[g][h] + f[mul[g][h]][k] - f[h][k] - f[g][mul[h][k]]) % m == 0
               for g in range(n) for h in range(n) for k in range(n)):
            z += 1
    # normalized coboundaries: c with c(1) = 0, kernel = Hom(G, Z/m)
    b = m ** (n - 1) // hom_count_to_cyclic(G, m)
    return z, b


def conjugacy_classes_of_subgroups(G, subgroups):
    """Partition a list of subgroups into conjugacy classes by direct conjugation."""
    T = G.table
    keys = {frozenset(int(e) for e in U.elements): U for U in subgroups}
    seen, classes = set(), []
    for k in sorted(keys, key=lambda s: (len(s), sorted(s))):
        if k in seen:
            continue
        cls = set()
        for x in G.elements:
            x = int(x)
            c = frozenset(int(T.mul[T.mul[T.inv[x], e], x]) for e in k)
            cls.add(c)
        seen |= cls
        classes.append(cls)
    return classes


def double_cosets_bruteforce(G, H, K):
    T = G.table
    out = set()
    for x in G.elements:
        x = int(x)
        out.add(frozenset(int(T.mul[T.mul[h, x], k]) for h in H.elements for k in K.elements))
    return out


def abelian_invariants_bruteforce(G):
    """G^ab from counting homomorphisms to Z/p^j for every p^j dividing |G|."""
    counts = {}
    for p, e in factor(G.order).items():
        counts[p] = [hom_count_to_cyclic(G, p ** j) for j in range(1, e + 1)]
    return invariants_from_torsion_counts(counts)


def order_of(values):
    return prod(values) if values else 1


def _close(mul, elems):
    S = set(elems) | {0}
    frontier = list(S)
    while frontier:
        nxt = []
        for a in frontier:
            for b in list(S):
                for c in (mul[a][b], mul[b][a]):
                    if c not in S:
                        S.add(c)
                        nxt.append(c)
        frontier = nxt
    return frozenset(S)


def all_subgroups_bruteforce(G):
    """Every subgroup as a frozenset of element ids, by closing up one element at a time."""
    X = [int(x) for x in G.elements]
    T = G.table
    mul = {a: {b: int(T.mul[a, b]) for b in X} for a in X}
    seen = {frozenset({0})}
    frontier = list(seen)
    while frontier:
        nxt = []
        for U in frontier:
            for x in X:
                if x not in U:
                    V = _close(mul, U | {x})
                    if V not in seen:
                        seen.add(V)
                        nxt.append(V)
        frontier = nxt
    return seen


def subgroup_class_count_bruteforce(G):
    T = G.table
    subs = all_subgroups_bruteforce(G)
    left = set(subs)
    count = 0
    while left:
        U = left.pop()
        count += 1
        for x in G.elements:
            x = int(x)
            left.discard(frozenset(int(T.mul[T.mul[T.inv[x], e], x]) for e in U))
    return count


def det(M):
    """Exact integer determinant by fraction-free (Bareiss) elimination."""
    A = [[int(x) for x in row] for row in M]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            p = next((i for i in range(k + 1, n) if A[i][k]), None)
            if p is None:
                return 0
            A[k], A[p] = A[p], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1] if n else 1
