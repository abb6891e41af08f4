"""The twelve acceptance criteria, each at exact tolerance.

Every test records one PASS/FAIL line (echoed in the terminal summary) and
then asserts.
"""

import random

from conftest import CRITERIA
from reflekt.diagram import biproduct_cube, exactness_check, pipeline_reflect
from reflekt.fincat import CatFunctor, find_isomorphism, identity_functor
from reflekt.fincat.chain import (build_dual_chain, build_reflection_chain, chain_problems,
                                  sigma_iso, sigma_problems)
from reflekt.fincat.factor import factor_category
from reflekt.fincat.shapes import (extend_functor, free_category, interval, localization_p,
                                   parallel_pair, poset_category, product_functor, terminal)
from reflekt.homotopy import (MAX_SIMPLICES, boundary_matrix, is_homotopical_epimorphism, nerve,
                              rational_rank, reduced_homology, replay_case, smith_invariants)
from reflekt.linalg import FieldSpec
from reflekt.linrep import (apr_tilting_check, canonical_map, check_adjunction, find_isomorphism as
                            find_rep_isomorphism, random_rep, reflect_minus, reflect_plus,
                            tilting_summands)
from reflekt.quiver import SOURCE, Quiver, classify_vertex, plan_reorientation, reflect, replay

from oracles import (chain_oracle_counts, hom_dim, labelled_partial_orders, orientation_reachable,
                     oriented_trees, path_counts, random_dag, random_tree_edges)

QQ, F5 = FieldSpec(0), FieldSpec(5)


def record(k, ok, detail):
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA[k] = line
    print(line)
    assert ok, line


# -- shared helpers ---------------------------------------------------------------------------

def random_poset(rng, n, with_max=False):
    rel = {(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4}
    while True:
        more = {(i, k) for i, j in rel for j2, k in rel if j == j2} - rel
        if not more:
            break
        rel |= more
    if with_max:
        rel |= {(i, n - 1) for i in range(n - 1)}
    return poset_category([str(i) for i in range(n)], lambda x, y: x == y or (int(x), int(y)) in rel)


def to_point(A):
    one = terminal()
    return CatFunctor(A, one, [0] * A.n_obj, [0] * A.n_mor, name="pi")


def sources(Q):
    return [v for v in Q.vertices if classify_vertex(Q, v) == SOURCE]


def rep_matrices(M):
    return {k: v.to_lists() for k, v in M.maps.items()}


TREES5 = [Quiver.build(v, e) for v, e in oriented_trees(5)]

CHAIN_QUIVERS = {
    "A2": (Quiver.build(["1", "2"], [("a", "1", "2")]), "1"),
    "A3": (Quiver.build(["1", "2", "3"], [("a", "1", "2"), ("b", "2", "3")]), "1"),
    "star2": (Quiver.build(["0", "1", "2"], [("a", "0", "1"), ("b", "0", "2")]), "0"),
    "star3": (Quiver.build(["0", "1", "2", "3"], [("a", "0", "1"), ("b", "0", "2"), ("c", "0", "3")]),
              "0"),
}


# -- 1 ------------------------------------------------------------------------------------------

def test_criterion_01_p_is_homotopical_epimorphism():
    p = localization_p()
    r = is_homotopical_epimorphism(p, keep=True)
    K = factor_category(p, "1", "1", "a∘c∘b")
    golden = free_category(Quiver.build("ABCDE", [("1", "A", "C"), ("2", "A", "D"), ("3", "B", "E"),
                                                  ("4", "C", "E")]))
    t_ok = find_isomorphism(K, golden) is not None
    replays = all(replay_case(c) for c in r.cases)
    ok = r.verdict == "true" and len(r.cases) == 10 and t_ok and replays
    record(1, ok, f"p: verdict {r.verdict}, {len(r.cases)} cases, t-case {K.n_obj} objects/"
                  f"{K.n_mor} morphisms iso to golden: {t_ok}, replays: {replays}")


# -- 2 ------------------------------------------------------------------------------------------

def test_criterion_02_products():
    p = localization_p()
    pp = is_homotopical_epimorphism(product_functor([p, p]))
    rng = random.Random(2)
    pool = [lambda: p, lambda: identity_functor(interval(1)),
            lambda: identity_functor(random_poset(rng, rng.randint(1, 4))),
            lambda: to_point(random_poset(rng, rng.randint(1, 4), with_max=True))]
    good = 0
    for _ in range(20):
        u, v = rng.choice(pool)(), rng.choice(pool)()
        assert is_homotopical_epimorphism(u).verdict == "true"
        assert is_homotopical_epimorphism(v).verdict == "true"
        if is_homotopical_epimorphism(product_functor([u, v])).verdict == "true":
            good += 1
    ok = pp.verdict == "true" and good == 20
    record(2, ok, f"p x p: {pp.verdict} ({len(pp.cases)} cases); products of certified epis: {good}/20 true")


# -- 3 ------------------------------------------------------------------------------------------

def test_criterion_03_projections():
    P = parallel_pair()
    r = is_homotopical_epimorphism(to_point(P))
    w = r.failing[0].verdict.witness if r.failing else {}
    pp_ok = r.verdict == "false" and w.get("degree") == 1 and w.get("group") == "Z"
    posets = labelled_partial_orders(4)
    good = 0
    for rel in posets:
        top = {(i, 4) for i in range(4)}
        C = poset_category([str(i) for i in range(5)],
                           lambda x, y, rel=rel | top: x == y or (int(x), int(y)) in rel)
        if is_homotopical_epimorphism(to_point(C)).verdict == "true":
            good += 1
    ok = pp_ok and good == len(posets)
    record(3, ok, f"parallel pair: {r.verdict} with H~_{w.get('degree')} = {w.get('group')}; "
                  f"5-element posets with a maximum: {good}/{len(posets)} true")


# -- 4 ------------------------------------------------------------------------------------------

def test_criterion_04_one_point_extensions():
    rng = random.Random(4)
    p = localization_p()
    pid = product_functor([p, identity_functor(interval(1))])
    pool = [lambda: identity_functor(random_poset(rng, rng.randint(1, 6))),
            lambda: to_point(random_poset(rng, rng.randint(1, 6), with_max=True)),
            lambda: p, lambda: pid]
    good = 0
    for _ in range(50):
        u = rng.choice(pool)()
        assert u.source.n_obj <= 6
        assert is_homotopical_epimorphism(u).verdict == "true"
        a = rng.choice(u.source.objects)
        direction = rng.choice(["to_target", "to_source"])
        u2, _, _ = extend_functor(u, a, direction, new="x")
        if is_homotopical_epimorphism(u2).verdict == "true":
            good += 1
    record(4, good == 50, f"one-point extensions of certified epis: {good}/50 true")


# -- 5 ------------------------------------------------------------------------------------------

def test_criterion_05_reflection_functors():
    rng = random.Random(5)
    cases = dim_ok = inv_ok = inv_n = adj_ok = 0
    for Q in TREES5:
        Q2 = None
        for q0 in sources(Q):
            Q2 = reflect(Q, q0)
            nbrs = [a.tgt for a in Q.out_arrows(q0)]
            for F in (QQ, F5):
                for _ in range(20):
                    cases += 1
                    M = random_rep(Q, F, rng, 3)
                    S = reflect_minus(M, q0)
                    c = canonical_map(M, q0)
                    if S.dims[q0] == sum(M.dims[v] for v in nbrs) - c.rank():
                        dim_ok += 1
                    if c.rank() == M.dims[q0]:
                        inv_n += 1
                        if find_rep_isomorphism(reflect_plus(S, q0), M) is not None:
                            inv_ok += 1
                    N = random_rep(Q2, F, rng, 3)
                    if check_adjunction(M, N, q0).ok:
                        adj_ok += 1
    ok = dim_ok == cases and inv_ok == inv_n and adj_ok == cases
    record(5, ok, f"{len(TREES5)} trees, {cases} representations: dim identity {dim_ok}/{cases}, "
                  f"s+s- iso {inv_ok}/{inv_n}, adjunction {adj_ok}/{cases}")


# -- 6 ------------------------------------------------------------------------------------------

def test_criterion_06_apr_tilting():
    total = good = 0
    for Q in TREES5:
        for q0 in sources(Q):
            total += 1
            r = apr_tilting_check(Q, q0, QQ)
            Q2 = reflect(Q, q0)
            paths = path_counts(list(Q2.vertices), [(a.id, a.src, a.tgt) for a in Q2.arrows])
            T = tilting_summands(Q, q0, QQ)
            arrows = [(a.id, a.src, a.tgt) for a in T[q0].quiver.arrows]
            homs = {(u, v): hom_dim(arrows, T[u].dims, rep_matrices(T[u]), T[v].dims,
                                    rep_matrices(T[v])) for u in Q.vertices for v in Q.vertices}
            if r.ok and r.path_matrix == paths and r.hom_matrix == homs == paths:
                good += 1
    record(6, good == total, f"APR tilting over Q: {good}/{total} (tree, source) pairs agree with the "
                             "path-count and hom oracles")


# -- 7 ------------------------------------------------------------------------------------------

def test_criterion_07_reorientation_plans():
    rng = random.Random(7)
    good = 0
    for _ in range(100):
        verts, edges = random_tree_edges(rng, rng.randint(2, 9))
        target = [(e, t, s) if rng.random() < 0.5 else (e, s, t) for e, s, t in edges]
        Q, T = Quiver.build(verts, edges), Quiver.build(verts, target)
        reachable = orientation_reachable({e: (s, t) for e, s, t in edges},
                                          {e: (s, t) for e, s, t in target})
        plan = plan_reorientation(Q, T)
        if reachable and replay(Q, plan) == T:
            good += 1
    record(7, good == 100, f"reorientation plans: {good}/100 replay to the target (BFS oracle: reachable)")


# -- 8 ------------------------------------------------------------------------------------------

def test_criterion_08_sigma():
    results = {}
    for name, (Q, q0) in CHAIN_QUIVERS.items():
        ch = build_reflection_chain(Q, q0)
        dual = build_dual_chain(reflect(Q, q0), q0)
        sigma = sigma_iso(ch, dual)
        bad = sigma_problems(ch, dual, sigma) + chain_problems(ch) + chain_problems(dual)
        results[name] = not bad
    ok = all(results.values())
    record(8, ok, "sigma is an isomorphism fixing the tree and the square: "
                  + ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in results.items()))


# -- 9 ------------------------------------------------------------------------------------------

def test_criterion_09_u5_homotopical_epimorphism():
    summary = []
    ok = True
    for name, (Q, q0) in CHAIN_QUIVERS.items():
        ch = build_reflection_chain(Q, q0)
        r = is_homotopical_epimorphism(ch.functors["u5"], keep=True)
        expected = chain_oracle_counts(Q, q0, ch)["Q2"]
        replays = all(replay_case(c) for c in r.cases)
        loopfree = all(c.category.is_loopfree() for c in r.cases)
        ok &= r.verdict == "true" and replays and loopfree and len(r.cases) == expected
        summary.append(f"{name} {r.verdict}/{len(r.cases)}")
    record(9, ok, "u5: Q1 -> Q2 " + ", ".join(summary) + " (all certificates replay)")


# -- 10 ------------------------------------------------------------------------------------------

def test_criterion_10_pipeline():
    rng = random.Random(10)
    good = 0
    for k in range(100):
        verts, edges = random_tree_edges(rng, rng.randint(2, 5))
        Q = Quiver.build(verts, edges)
        q0 = rng.choice(sources(Q))
        F = QQ if k % 2 == 0 else F5
        M = random_rep(Q, F, rng, 2)
        res = pipeline_reflect(M, q0, compare_classical=True, seed=k)
        phi = res.isomorphism
        if phi is not None and phi.is_intertwining() and all(
                c.rows == c.cols and c.rank() == c.rows for c in phi.components.values()):
            good += 1
    record(10, good == 100, f"pipeline vs classical reflection: {good}/100 isomorphisms exhibited")


# -- 11 ------------------------------------------------------------------------------------------

def test_criterion_11_biproduct_cube():
    rng = random.Random(11)
    out = []
    ok = True
    for n in (1, 2, 3):
        inputs = [rng.randint(0, 3) for _ in range(n)]
        X = biproduct_cube(inputs, QQ)
        rep = exactness_check(X, "biproduct_conditions")
        ok &= rep.ok and rep.details["center_dim"] == sum(inputs)
        out.append(f"n={n} inputs {inputs} center {rep.details['center_dim']}")
    record(11, ok, "biproduct cubes: " + "; ".join(out))


# -- 12 ------------------------------------------------------------------------------------------

def test_criterion_12_homology_self_check():
    rng = random.Random(12)
    euler_ok = rank_ok = compared = 0
    for k in range(50):
        n = rng.randint(1, 7)
        if k % 2 == 0:
            C = random_poset(rng, n)
        else:
            verts, edges = random_dag(rng, n, 0.3)
            C = free_category(Quiver.build(verts, edges))
        K = nerve(C, MAX_SIMPLICES)
        H = reduced_homology(K)
        if all(len(smith_invariants(boundary_matrix(K, i)[0])) == rational_rank(boundary_matrix(K, i)[0])
               for i in range(len(K.simplices))):
            rank_ok += 1
        if all(not h.torsion for h in H):
            compared += 1
            if K.euler_characteristic() == 1 + sum((-1) ** i * h.betti for i, h in enumerate(H)):
                euler_ok += 1
    ok = rank_ok == 50 and euler_ok == compared
    record(12, ok, f"50 loopfree categories: SNF rank = Q-rank {rank_ok}/50, "
                   f"Euler characteristic identity {euler_ok}/{compared} (torsion-free)")
