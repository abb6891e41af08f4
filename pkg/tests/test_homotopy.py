import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from reflekt.errors import NotLoopfree, NotLoopfreeD, NotLoopfreeSource
from reflekt.fincat import functor_from_generators, identity_functor
from reflekt.fincat.factor import Square, comma_square, hoepi_square
from reflekt.fincat.shapes import (category_R, cube_poset, free_category, interval, localization_p,
                                   parallel_pair, poset_category, terminal)
from reflekt.fincat.core import CatFunctor
from reflekt.homotopy import (CONTRACTIBLE, NOT_CONTRACTIBLE, UNKNOWN, CaseResult,
                              ContractibilityVerdict, SimplicialComplexData, aggregate,
                              boundary_matrix, contractibility, greedy_collapse,
                              is_homotopical_epimorphism, is_homotopy_exact, nerve, pi1_presentation,
                              rational_betti, rational_rank, recheck_witness, reduced_homology,
                              replay_case, replay_collapse, smith_invariants)
from reflekt.quiver import Quiver

from oracles import rank, random_dag


def poset(elements, strict_pairs):
    rel = set(strict_pairs)
    return poset_category([str(e) for e in elements],
                          lambda x, y: x == y or (int(x), int(y)) in rel)


def chain_count(elements, strict_pairs, k):
    """Number of strictly increasing chains with k+1 elements."""
    rel = set(strict_pairs)
    return sum(1 for c in itertools.permutations(elements, k + 1)
               if all((a, b) in rel for a, b in zip(c, c[1:])))


def dense(rows, nrows, ncols):
    out = [[0] * ncols for _ in range(nrows)]
    for i, r in rows.items():
        for j, x in r.items():
            out[i][j] = x
    return out


def oracle_betti(K, p=0):
    """Reduced Betti numbers over Q or F_p from dense boundary ranks."""
    ranks = []
    for k in range(len(K.simplices)):
        rows, nr, nc = boundary_matrix(K, k)
        ranks.append(rank(dense(rows, nr, nc), p) if nr and nc else 0)
    ranks.append(0)
    return [n - ranks[k] - ranks[k + 1] for k, n in enumerate(K.counts())]


CIRCLE = ([0, 1, 2, 3], [(0, 2), (0, 3), (1, 2), (1, 3)])


def dunce_hat():
    # one vertex, one loop edge, one triangle with boundary a a a^-1
    return SimplicialComplexData([[(0,)], [(0, 0)], [(0, 0, 0)]], [[], [(0, 0)], [(0, 0, 0)]])


def rp2_face_poset():
    """Face poset of the 6-vertex triangulation of the projective plane."""
    tris = [(1, 2, 4), (1, 2, 6), (1, 3, 5), (1, 3, 6), (1, 4, 5), (2, 3, 4), (2, 3, 5), (2, 5, 6),
            (3, 4, 6), (4, 5, 6)]
    faces = set()
    for t in tris:
        for r in range(1, 4):
            faces.update(itertools.combinations(sorted(t), r))
    faces = sorted(faces, key=lambda f: (len(f), f))
    names = ["".join(map(str, f)) for f in faces]
    by = dict(zip(names, faces))
    return poset_category(names, lambda x, y: set(by[x]) <= set(by[y]))


# -- nerve -----------------------------------------------------------------------------------

def test_nerve_of_intervals():
    K = nerve(interval(2))
    assert K.counts() == [3, 3, 1]
    assert K.check_identities()
    assert K.euler_characteristic() == 1


@given(st.integers(2, 6), st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_nerve_counts_chains(n, seed):
    rng = random.Random(seed)
    pairs = {(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5}
    pairs = {(i, k) for i, j in pairs for j2, k in pairs if j == j2} | pairs
    while True:   # transitive closure
        more = {(i, k) for i, j in pairs for j2, k in pairs if j == j2} - pairs
        if not more:
            break
        pairs |= more
    K = nerve(poset(range(n), pairs))
    assert K.check_identities()
    assert K.counts() == [chain_count(list(range(n)), pairs, k) for k in range(len(K.counts()))]


def test_nerve_rejects_loops():
    with pytest.raises(NotLoopfree):
        nerve(category_R())


# -- homology ---------------------------------------------------------------------------------

def test_homology_examples():
    H = reduced_homology(nerve(parallel_pair()))
    assert [str(h) for h in H] == ["0", "Z"]
    H = reduced_homology(nerve(poset(*CIRCLE)))
    assert str(H[1]) == "Z" and H[0].is_zero()
    H = reduced_homology(nerve(poset([0, 1], [])))
    assert str(H[0]) == "Z"
    assert all(h.is_zero() for h in reduced_homology(nerve(cube_poset(2))))


def test_projective_plane_torsion():
    K = nerve(rp2_face_poset())
    H = reduced_homology(K)
    assert str(H[1]) == "Z/2" and H[2].is_zero()
    assert oracle_betti(K, 0)[1] == 0
    assert oracle_betti(K, 2)[1] == 1          # Z/2 shows up mod 2
    assert oracle_betti(K, 3)[1] == 0
    v = contractibility(K)
    assert v.kind == NOT_CONTRACTIBLE and v.witness["torsion"] == [2]
    assert recheck_witness(K, v.witness)


def test_smith_invariants():
    assert smith_invariants({0: {0: 2, 1: 4}, 1: {0: 6, 1: 8}}) == [2, 4]
    assert smith_invariants({0: {0: 1}}) == [1]
    assert smith_invariants({}) == []


@given(st.integers(2, 7), st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_snf_rank_equals_rational_rank(n, seed):
    verts, edges = random_dag(random.Random(seed), n)
    K = nerve(free_category(Quiver.build(verts, edges)))
    for k in range(len(K.simplices)):
        rows, nr, nc = boundary_matrix(K, k)
        assert len(smith_invariants(rows)) == rational_rank(rows)
    assert rational_betti(K) == oracle_betti(K)
    assert [h.betti for h in reduced_homology(K)] == oracle_betti(K)


# -- collapse and verdicts ------------------------------------------------------------------------

def test_collapse_certificate_replays():
    K = nerve(cube_poset(2))
    v = contractibility(K)
    assert v.kind == CONTRACTIBLE and replay_collapse(K, v.certificate)
    bad = list(v.certificate)
    bad[0], bad[-1] = bad[-1], bad[0]
    assert not replay_collapse(K, bad)


def test_dunce_hat_stays_unknown():
    K = dunce_hat()
    assert K.check_identities()
    pairs, alive = greedy_collapse(K)
    assert pairs == []
    assert all(h.is_zero() for h in reduced_homology(K))
    v = contractibility(K)
    assert v.kind == UNKNOWN
    assert v.diagnostics["homology"] == "trivial"


def test_empty_and_disconnected():
    empty = SimplicialComplexData([[]], [[]])
    assert contractibility(empty).witness == {"type": "empty"}
    v = contractibility(nerve(poset([0, 1, 2], [])))
    assert v.kind == NOT_CONTRACTIBLE and v.witness["type"] == "disconnected"
    assert v.witness["components"] == 3


def test_pi1_of_circle_nontrivial():
    gens, rels, trivial = pi1_presentation(nerve(parallel_pair()))
    assert len(gens) == 1 and not rels and not trivial


def test_aggregate_precedence():
    c = lambda kind, g: CaseResult(g, ContractibilityVerdict(kind))
    assert aggregate([c(CONTRACTIBLE, "b"), c(UNKNOWN, "a")]).verdict == "unknown"
    assert aggregate([c(UNKNOWN, "a"), c(NOT_CONTRACTIBLE, "b")]).verdict == "false"
    assert aggregate([]).verdict == "true"
    assert [x.gamma for x in aggregate([c(CONTRACTIBLE, "b"), c(CONTRACTIBLE, "a")]).cases] == ["a", "b"]


# -- epimorphisms and squares -------------------------------------------------------------------

def test_p_is_homotopical_epimorphism():
    r = is_homotopical_epimorphism(localization_p(), keep=True)
    assert r.verdict == "true" and len(r.cases) == 10
    assert all(replay_case(c) for c in r.cases)


def test_parallel_pair_projection_fails():
    P = parallel_pair()
    pi = CatFunctor(P, terminal(), [0, 0], [0] * P.n_mor)
    r = is_homotopical_epimorphism(pi, keep=True)
    assert r.verdict == "false"
    (case,) = r.failing
    assert case.verdict.witness["group"] == "Z" and replay_case(case)


def test_identity_of_poset_is_epi():
    assert is_homotopical_epimorphism(identity_functor(poset(*CIRCLE))).verdict == "true"


def test_loopy_source_rejected():
    R = category_R()
    with pytest.raises(NotLoopfreeSource):
        is_homotopical_epimorphism(identity_functor(R))


def test_exact_squares():
    one = terminal()
    assert is_homotopy_exact(hoepi_square(identity_functor(one))).verdict == "true"
    I1, I2 = interval(1), interval(2)
    u = functor_from_generators(I1, I2, {"0": "0", "1": "1"}, {"01": "01"})
    idA = identity_functor(I1)
    ff = Square(idA, idA, u, u, [I2.ident[u.ob[x]] for x in range(2)])
    assert is_homotopy_exact(ff).verdict == "true"
    # u misses 2, so the factorizations of id_2 form the empty category
    r = is_homotopy_exact(hoepi_square(u))
    assert r.verdict == "false"
    assert [c.verdict.witness["type"] for c in r.failing] == ["empty"]
    r = is_homotopy_exact(comma_square(u, "2"), keep=True)
    assert r.verdict == "true" and all(replay_case(c) for c in r.cases)
    r = is_homotopy_exact(comma_square(u, "1"), restrict=[("0", "*", "01")])
    assert len(r.cases) == 1 and r.cases[0].label == "0|*"


def test_square_with_loopy_corner_rejected():
    R = category_R()
    sq = hoepi_square(identity_functor(R))
    with pytest.raises(NotLoopfreeD):
        is_homotopy_exact(sq)
