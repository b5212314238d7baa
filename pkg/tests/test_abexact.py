import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from normtori import abexact as ax
from oracles import _rank_mod_p, det, factor, invariants_from_torsion_counts

small = st.integers(-5, 5)


def matrices(max_dim=8):
    return st.integers(1, max_dim).flatmap(
        lambda m: st.integers(1, max_dim).flatmap(
            lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=m, max_size=m)))


def is_unimodular(U):
    return abs(det(U)) == 1


def test_hnf_examples():
    H, U = ax.hnf([[1, 0], [0, 1]])
    assert H.tolist() == [[1, 0], [0, 1]] and U.tolist() == [[1, 0], [0, 1]]
    H, U = ax.hnf([[2, 4], [1, 3]])
    # hand reduction gives rows (1,3),(0,2); entries above a pivot are then
    # reduced into [0, pivot), so the stored form is (1,1),(0,2)
    assert H.tolist() == [[1, 1], [0, 2]]
    assert ax.lattice_index(H, [[1, 3], [0, 2]]) == 1
    assert (U @ np.array([[2, 4], [1, 3]])).tolist() == H.tolist()
    H, U = ax.hnf([[0, 0], [0, 0]])
    assert H.tolist() == [[0, 0], [0, 0]] and U.tolist() == [[1, 0], [0, 1]]


def test_snf_examples():
    assert ax.snf([[6, 0], [0, 4]]).diagonal == [2, 12]
    assert ax.snf([[1, 0], [0, 1]]).diagonal == [1, 1]
    assert ax.snf([[0]]).diagonal == [0]


def test_kernel_examples():
    K = ax.kernel_basis([[1], [1]])
    assert K.shape[0] == 1 and sorted(K[0].tolist()) == [-1, 1]
    assert ax.kernel_basis([[1, 0], [0, 1]]).shape[0] == 0
    assert ax.kernel_basis([[2, 4]]).shape[0] == 0


def test_cokernel_examples():
    assert ax.cokernel_structure(2 * np.eye(3, dtype=int)).as_list() == [2, 2, 2]
    assert ax.cokernel_structure([[2, 0], [0, 1]]).as_list() == [2]
    assert ax.cokernel_structure(2 * np.eye(6, dtype=int)).as_list() == [2] * 6
    free = ax.cokernel_structure([[2, 0]])
    assert free.as_list() == [2] and free.free_rank == 1


@given(matrices())
def test_hnf_properties(A):
    A = np.array(A, dtype=np.int64)
    H, U = ax.hnf(A)
    assert (ax.matmul(U, A) == H).all()
    assert is_unimodular(U)
    lead = -1
    for row in H:
        nz = np.flatnonzero(row)
        if len(nz) == 0:
            continue
        assert nz[0] > lead and row[nz[0]] > 0
        lead = nz[0]


@given(matrices())
def test_snf_properties(A):
    A = np.array(A, dtype=np.int64)
    D = ax.snf(A)
    assert (ax.matmul(ax.matmul(D.U, A), D.V) == D.S).all()
    assert is_unimodular(D.U) and is_unimodular(D.V)
    S = D.S.copy()
    d = D.diagonal
    for i in range(len(d)):
        S[i, i] = 0
    assert not S.any()
    assert all(x >= 0 for x in d)
    for a, b in zip(d, d[1:]):
        assert (b == 0) or (a != 0 and b % a == 0)


def minors_gcd(A, k):
    """gcd of all k x k minors."""
    from math import gcd
    m, n = A.shape
    g = 0
    for rows in itertools.combinations(range(m), k):
        for cols in itertools.combinations(range(n), k):
            g = gcd(g, abs(det(A[np.ix_(rows, cols)])))
    return g


@given(matrices(max_dim=3))
def test_snf_matches_determinantal_divisors(A):
    A = np.array(A, dtype=np.int64)
    d = ax.snf(A).diagonal
    prev = 1
    for k in range(1, min(A.shape) + 1):
        g = minors_gcd(A, k)
        if g == 0:
            assert all(x == 0 for x in d[k - 1:])
            break
        assert d[k - 1] * prev == g
        prev = g


@given(matrices())
def test_kernel_basis_saturated(A):
    A = np.array(A, dtype=np.int64)
    K = ax.kernel_basis(A)
    assert not ax.matmul(K, A).any() if K.shape[0] else True
    assert K.shape[0] == A.shape[0] - ax.rank(A)
    if K.shape[0]:
        assert all(x == 1 for x in ax.snf(K).diagonal)


@given(matrices())
def test_kernel_with_section(A):
    A = np.array(A, dtype=np.int64)
    B, R = ax.kernel_with_section(A)
    assert B.shape[0] == A.shape[0] - ax.rank(A)
    if B.shape[0]:
        assert not ax.matmul(B, A).any()
        assert (ax.matmul(B, R) == np.eye(B.shape[0], dtype=int)).all()


def cokernel_oracle(A):
    """Count {y in (Z/d)^n : A y = 0 mod d} = |Hom(coker A, Z/d)| for prime powers d."""
    m, n = A.shape
    order = abs(det(A))
    counts = {}
    for p, e in factor(order).items():
        counts[p] = []
        for j in range(1, e + 1):
            d = p ** j
            ys = np.array(list(itertools.product(range(d), repeat=n)), dtype=np.int64)
            counts[p].append(int(((A @ ys.T) % d == 0).all(axis=0).sum()))
    return invariants_from_torsion_counts(counts)


@given(st.integers(1, 3).flatmap(
    lambda n: st.lists(st.lists(st.integers(-4, 4), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_cokernel_bruteforce(A):
    A = np.array(A, dtype=np.int64)
    order = abs(det(A))
    if order == 0 or order > 64:
        return
    assert ax.cokernel_structure(A).as_list() == cokernel_oracle(A)


@given(matrices(6), st.sampled_from([(2, 1), (2, 3), (3, 2), (5, 1)]))
def test_snf_mod_prime_power_matches_snf(A, pk):
    p, k = pk
    A = np.array(A, dtype=np.int64)
    vals = ax.snf_mod_prime_power(A, p, k)
    expect = []
    for d in ax.snf(A).diagonal:
        v = 0
        while d and d % p == 0 and v < k:
            d //= p
            v += 1
        expect.append(k if d == 0 else v)
    assert sorted(vals) == sorted(expect)


@given(matrices(6), st.sampled_from([2, 3, 5]))
def test_modular_rank_and_nullspace(A, p):
    A = np.array(A, dtype=np.int64)
    r = _rank_mod_p(A.tolist(), p)
    assert ax.rank_mod_prime(A, p) == r
    N = ax.nullspace_mod_prime(A, p)
    assert N.shape[0] == A.shape[0] - r
    assert not ((N @ A) % p).any()


@given(st.lists(st.integers(0, 2 ** 12 - 1), max_size=15))
def test_gf2_eliminator(rows):
    E = ax.GF2Eliminator(12)
    for r in rows:
        E.add(r)
    bits = [[(r >> j) & 1 for j in range(12)] for r in rows]
    assert E.rank == (_rank_mod_p(bits, 2) if rows else 0)
    null = E.nullspace()
    assert len(null) == 12 - E.rank
    for x in null:
        assert all(ax.parity(r & x) == 0 for r in rows)


def test_finab_validation():
    assert ax.FinAb.from_orders([2, 3, 4]).as_list() == [2, 12]
    assert ax.FinAb().order == 1
    with pytest.raises(ValueError):
        ax.FinAb((4, 2))
    with pytest.raises(ValueError):
        ax.FinAb((1,))


def test_exact_growth():
    A = np.array([[10 ** 12, 1], [1, 10 ** 12]], dtype=object)
    D = ax.snf(A)
    assert D.diagonal == [1, 10 ** 24 - 1]
