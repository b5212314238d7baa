import numpy as np
import pytest
from hypothesis import given, strategies as st

from normtori.abexact import FinAb
from normtori.cohom import (STRATEGIES, cayley_presentation, check_flabby, evaluate_word,
                            flabby_resolution, h1, h1_of_flabby_class, is_coflabby, is_flabby,
                            tate_h0, tate_h_minus1)
from normtori.groups import (abelianization_map, stabilizer_of_point, sylow_subgroup,
                             trivial_subgroup)
from normtori.lattice import (GLattice, augmentation_kernel, chevalley_module, coset_lattice,
                              direct_sum, dual, restrict, trivial_lattice)
from normtori.subgroups import subgroup_classes

from conftest import group, random_transitive_groups, small_corpus
from oracles import factor, h1_bruteforce

CORPUS = [(l, gf.group()) for l, gf in small_corpus()] + random_transitive_groups()
TINY = [(l, G) for l, G in CORPUS if G.order <= 12]
MID = [(l, G) for l, G in CORPUS if G.order <= 48]


def unimodular(rng, n):
    U = np.eye(n, dtype=np.int64)
    for _ in range(2 * n):
        i, j = rng.choice(n, 2, replace=False) if n > 1 else (0, 0)
        if i != j:
            U[i] += int(rng.integers(-2, 3)) * U[j]
    return U


def inverse_unimodular(U):
    return np.round(np.linalg.inv(U.astype(float))).astype(np.int64)


def twisted(M, seed):
    """The same module in a random basis."""
    rng = np.random.default_rng(seed)
    U = unimodular(rng, M.rank)
    Ui = inverse_unimodular(U)
    assert (U @ Ui == np.eye(M.rank, dtype=np.int64)).all()
    return GLattice(M.group, M.rank, [U @ A @ Ui for A in M.gen_mats])


def tiny_lattices(G):
    H = stabilizer_of_point(G, 0)
    out = [trivial_lattice(G, 1), coset_lattice(G, H), augmentation_kernel(G, H),
           chevalley_module(G, H)]
    if G.order <= 6:
        E = trivial_subgroup(G)
        out.append(chevalley_module(G, E))
    out.append(direct_sum(chevalley_module(G, H), trivial_lattice(G, 1)))
    return [M for M in out if M.rank <= 6]


# ------------------------------------------------------------ presentations

def test_presentation_relator_counts():
    C4 = group("C4")
    P = cayley_presentation(C4)
    assert P.ngens == 1 and len(P.relators) == 1
    assert len(P.relators[0]) == 4 and abs(sum(P.relators[0])) == 4
    G = group("16T178")
    assert len(cayley_presentation(G).relators) == G.order * (len(G.gens) - 1) + 1


@pytest.mark.parametrize("label,G", MID)
def test_relators_evaluate_to_identity(label, G):
    P = cayley_presentation(G)
    assert len(P.relators) == G.order * (P.ngens - 1) + 1
    assert all(evaluate_word(G, w) == 0 for w in P.relators)
    # Hom(G, Z) = 0
    assert h1(G, trivial_lattice(G), method="presentation").is_trivial


# ------------------------------------------------------------ H^1

@pytest.mark.parametrize("label,G", TINY)
def test_h1_matches_bruteforce(label, G):
    for k, M in enumerate(tiny_lattices(G)):
        want = h1_bruteforce(G, M.gen_mats)
        assert h1(G, M, method="presentation").as_list() == want
        assert h1(G, M, method="snf").as_list() == want
        T = twisted(M, k)
        assert h1(G, T, method="presentation").as_list() == want
        assert h1(G, T, method="snf").as_list() == want


@pytest.mark.parametrize("label,G", MID)
def test_h1_permutation_and_regular_j(label, G):
    H = stabilizer_of_point(G, 0)
    assert h1(G, coset_lattice(G, H)).is_trivial
    if G.order <= 24:
        E = trivial_subgroup(G)
        assert h1(G, chevalley_module(G, E)).invariants == abelianization_map(G).invariants


def test_c3_regular_j():
    G = group("C3")
    J = chevalley_module(G, trivial_subgroup(G))
    assert J.rank == 2 and h1(G, J).as_list() == [3]


# ------------------------------------------------------------ Tate groups and flabbiness

def test_sign_lattice_tate():
    G = group("C2")
    S = GLattice(G, 1, [-np.eye(1, dtype=np.int64)])
    assert tate_h_minus1(G, S).as_list() == [2]
    assert not is_flabby(G, S)


def test_trivial_h0():
    for label in ("C4", "S3", "A4"):
        G = group(label)
        assert tate_h0(G, trivial_lattice(G)).as_list() == [G.order]


@pytest.mark.parametrize("label,G", [(l, G) for l, G in MID if G.order <= 24])
def test_permutation_lattices_flabby_and_coflabby(label, G):
    P = coset_lattice(G, stabilizer_of_point(G, 0))
    assert is_flabby(G, P) and is_coflabby(G, P)
    for c in subgroup_classes(G):
        assert tate_h_minus1(c.rep, P).is_trivial


# ------------------------------------------------------------ flabby resolutions

@pytest.mark.parametrize("label,G", MID)
def test_resolution_is_exact_and_flabby(label, G):
    H = stabilizer_of_point(G, 0)
    n = G.order // H.order
    J = chevalley_module(G, H)
    cl = subgroup_classes(G)
    res = flabby_resolution(G, J, classes=cl)
    assert res.verify_exact() and res.verify_equivariant()
    assert res.P.is_permutation
    assert check_flabby(res, cl)
    if res.F.rank <= 60:
        assert is_flabby(G, res.F, cl)
    v = h1(G, res.F, method="snf")
    # n kills H^1(G, F)
    assert all(n % d == 0 for d in v.invariants)


@pytest.mark.parametrize("label,G", MID)
def test_strategy_invariance(label, G):
    J = chevalley_module(G, stabilizer_of_point(G, 0))
    cl = subgroup_classes(G)
    values = {s: h1_of_flabby_class(G, J, strategy=s, classes=cl) for s in STRATEGIES}
    assert len(set(values.values())) == 1, values


@pytest.mark.parametrize("label,G", [(l, G) for l, G in MID if G.order <= 24])
def test_sylow_embedding(label, G):
    J = chevalley_module(G, stabilizer_of_point(G, 0))
    cl = subgroup_classes(G)
    res = flabby_resolution(G, J, classes=cl)
    whole = h1(G, res.F, method="snf")
    for p in factor(G.order):
        S = sylow_subgroup(G, p)
        local = h1(S, restrict(res.F, S), method="snf").order
        part = 1
        for d in whole.invariants:
            while d % p == 0:
                part *= p
                d //= p
        assert local % part == 0


def test_permutation_input_has_trivial_flabby_h1():
    G = group("S4")
    P = coset_lattice(G, stabilizer_of_point(G, 0))
    assert h1_of_flabby_class(G, P).is_trivial


def test_degree_two_torus():
    G = group("C2")
    assert h1_of_flabby_class(G, chevalley_module(G, trivial_subgroup(G))).is_trivial


def test_regular_c2_4():
    G = group("16T3")
    J = chevalley_module(G, stabilizer_of_point(G, 0))
    assert h1_of_flabby_class(G, J).as_list() == [2] * 6


def test_unknown_strategy():
    G = group("C2")
    with pytest.raises(ValueError):
        flabby_resolution(G, trivial_lattice(G), strategy="bogus")


@given(st.sampled_from(TINY), st.integers(0, 1000))
def test_h1_basis_independent(entry, seed):
    G = entry[1]
    J = chevalley_module(G, stabilizer_of_point(G, 0))
    if J.rank == 0:
        return
    assert h1(G, twisted(J, seed)) == h1(G, J)
