import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from reflekt.diagram import (VectDiagram, biproduct_cube, chain_for, diagram_from_json,
                             diagram_hom_dim, diagram_to_rep, exactness_check, invert_cube,
                             kan_extend, left_kan, length_two_audit, pipeline_reflect,
                             rep_to_diagram, restrict, right_kan, zero_diagram)
from reflekt.errors import (BaseMismatch, Mismatch, NotFunctorial, NotInvertible, ShapeMismatch)
from reflekt.fincat import CatFunctor, functor_from_generators, identity_functor
from reflekt.fincat.shapes import (category_R, cube_poset, free_category, interval, localization_p,
                                   subcube)
from reflekt.linalg import ExactMatrix, FieldSpec, random_matrix
from reflekt.linrep import find_isomorphism, random_rep, reflect_minus
from reflekt.quiver import Quiver

from oracles import random_dag, rank

QQ, F5 = FieldSpec(0), FieldSpec(5)


def m(F, rows):
    return ExactMatrix.from_rows(F, rows)


# -- independent colimit / limit dimensions --------------------------------------------

def oracle_kan_dims(X, u, left):
    """Pointwise (co)limit dimensions over the full comma categories, built from
    every morphism of the source (no generators, no spanning forests)."""
    A, B, p = u.source, u.target, X.field.p
    out = []
    for b in range(B.n_obj):
        if left:
            objs = [(a, f) for a in range(A.n_obj) for f in B.hom(u.ob[a], b)]
        else:
            objs = [(a, f) for a in range(A.n_obj) for f in B.hom(b, u.ob[a])]
        offs, tot = {}, 0
        for o in objs:
            offs[o] = tot
            tot += X.dims[o[0]]
        rows = []
        for (a, f) in objs:
            for al in A.out_list[a]:
                a2 = A.tgt[al]
                M = X.map(al).to_lists()
                if left:
                    targets = [(a2, f2) for f2 in B.hom(u.ob[a2], b) if B.compose(f2, u.mor[al]) == f]
                    for o2 in targets:
                        for j in range(X.dims[a]):           # x_j in X_a  ~  X(al) x_j in X_a2
                            row = [0] * tot
                            row[offs[(a, f)] + j] += 1
                            for i in range(X.dims[a2]):
                                row[offs[o2] + i] -= M[i][j]
                            rows.append(row)
                else:
                    o2 = (a2, B.compose(u.mor[al], f))
                    for i in range(X.dims[a2]):              # X(al) x_(a,f) = x_(a2,f2)
                        row = [0] * tot
                        for j in range(X.dims[a]):
                            row[offs[(a, f)] + j] += M[i][j]
                        row[offs[o2] + i] -= 1
                        rows.append(row)
        out.append(tot - (rank(rows, p) if rows else 0))
    return out


def random_diagram_on_free(H: Quiver, F, rng, max_dim=2):
    B = free_category(H)
    M = random_rep(H, F, rng, max_dim)
    return B, rep_to_diagram(M, B)


def random_functor_setup(seed):
    """A random DAG H, a source given by a random sub-DAG, and a level functor."""
    rng = random.Random(seed)
    verts, edges = random_dag(rng, rng.randint(2, 5), 0.5)
    H = Quiver.build(verts, edges)
    sub_edges = [e for e in edges if rng.random() < 0.6]
    sub_verts = sorted({v for e in sub_edges for v in e[1:]} | {rng.choice(verts)})
    G = Quiver.build(sub_verts, sub_edges)
    A, B = free_category(G), free_category(H)
    incl = functor_from_generators(A, B, {v: v for v in sub_verts}, {e[0]: e[0] for e in sub_edges})
    return rng, G, H, A, B, incl


def level_functor(B):
    """Collapse a free category on a DAG onto ``[m]`` by longest-path depth."""
    depth = {}
    for x in range(B.n_obj):
        depth[x] = 0
    for _ in range(B.n_obj):
        for mm in range(B.n_mor):
            if not B.is_identity(mm):
                depth[B.tgt[mm]] = max(depth[B.tgt[mm]], depth[B.src[mm]] + 1)
    top = max(depth.values())
    I = interval(top)
    ob = [depth[x] for x in range(B.n_obj)]
    mor = [I.hom(depth[B.src[mm]], depth[B.tgt[mm]])[0] for mm in range(B.n_mor)]
    return CatFunctor(B, I, ob, mor, name="level")


# -- restriction --------------------------------------------------------------------

def test_restrict_identity():
    B, X = random_diagram_on_free(Quiver.build("123", [("a", "1", "2"), ("b", "2", "3")]), QQ,
                                  random.Random(2))
    assert restrict(X, identity_functor(B)) == X


def test_restrict_along_p_inverts_length_two():
    R = category_R()
    X = VectDiagram(R, QQ, {"0": 1, "1": 2, "2": 1},
                    {"a": m(QQ, [[1], [0]]), "b": m(QQ, [[1, 0]]), "c": m(QQ, [[1]])})
    p = localization_p(R)
    Y = restrict(X, p)
    L = Y.map(Y.base.mor("12∘01"))
    assert L.rank() == 1 == L.rows
    with pytest.raises(BaseMismatch):
        restrict(Y, p)


def test_non_functorial_rejected():
    R = category_R()
    with pytest.raises(NotFunctorial):
        VectDiagram(R, QQ, {"0": 1, "1": 1, "2": 1},
                    {"a": m(QQ, [[1]]), "b": m(QQ, [[2]]), "c": m(QQ, [[1]])})
    with pytest.raises(Mismatch):
        VectDiagram(R, QQ, {"0": 1, "1": 1, "2": 1}, {"a": m(QQ, [[1]])})


def test_json_round_trip():
    B, X = random_diagram_on_free(Quiver.build("12", [("a", "1", "2")]), F5, random.Random(4))
    assert diagram_from_json(B, X.to_json()) == X


# -- Kan extensions -----------------------------------------------------------------

def test_kan_examples():
    I0, I1 = interval(0), interval(1)
    u0 = functor_from_generators(I0, I1, {"0": "0"}, {})
    X = VectDiagram(I0, QQ, [1], {})
    L = left_kan(X, u0)
    assert L.dims == [1, 1] and L.map("01").rank() == 1       # k -> k
    R = right_kan(X, u0)
    assert R.dims == [1, 0]                                   # k -> 0
    u1 = functor_from_generators(I0, I1, {"0": "1"}, {})
    assert left_kan(X, u1).dims == [0, 1]
    assert right_kan(X, u1).dims == [1, 1]
    idI = identity_functor(I1)
    Y = VectDiagram(I1, QQ, [1, 1], {"01": m(QQ, [[1]])})
    assert left_kan(Y, idI) .dims == [1, 1]


@given(st.integers(0, 10**6), st.sampled_from(["left", "right"]), st.sampled_from([0, 5]))
@settings(max_examples=40, deadline=None)
def test_kan_dims_match_oracle(seed, side, p):
    rng, G, H, A, B, incl = random_functor_setup(seed)
    F = FieldSpec(p)
    X = rep_to_diagram(random_rep(G, F, rng, 2), A)
    for u in (incl, level_functor(A)):
        res = kan_extend(X, u, side)
        assert res.diagram.dims == oracle_kan_dims(X, u, side == "left")
        assert not res.diagram.audit()


@given(st.integers(0, 10**6), st.sampled_from(["left", "right"]))
@settings(max_examples=30, deadline=None)
def test_forest_and_dense_agree(seed, side):
    rng, G, H, A, B, incl = random_functor_setup(seed)
    X = rep_to_diagram(random_rep(G, QQ, rng, 2), A)
    Yf = kan_extend(X, incl, side, method="forest").diagram
    Yd = kan_extend(X, incl, side, method="dense").diagram
    assert Yf.dims == Yd.dims
    j = identity_functor(B)
    assert find_isomorphism(diagram_to_rep(Yf, j, H), diagram_to_rep(Yd, j, H)) is not None


@given(st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_adjunction_hom_dims(seed):
    rng, G, H, A, B, incl = random_functor_setup(seed)
    X = rep_to_diagram(random_rep(G, QQ, rng, 2), A)
    Y = rep_to_diagram(random_rep(H, QQ, rng, 2), B)
    uY = restrict(Y, incl)
    assert diagram_hom_dim(left_kan(X, incl), Y) == diagram_hom_dim(X, uY)
    assert diagram_hom_dim(uY, X) == diagram_hom_dim(Y, right_kan(X, incl))


def test_fully_faithful_unit_is_iso():
    sq = [(0, 0), (1, 0), (0, 1), (1, 1)]
    A = subcube(sq[:3])
    B = cube_poset(2, (0, 1))
    u = CatFunctor.from_names(A, B, {o: o for o in A.objects}, {x: x for x in A.mor_names})
    X = VectDiagram(A, QQ, {"(0,0)": 1, "(1,0)": 1, "(0,1)": 2},
                    {"(0,0)<(1,0)": m(QQ, [[1]]), "(0,0)<(0,1)": m(QQ, [[1], [1]])})
    for side in ("left", "right"):
        res = kan_extend(X, u, side)
        assert res.comparison_is_iso()
        assert restrict(res.diagram, u).dims == X.dims
    # the left extension fills in the pushout
    assert left_kan(X, u).dim("(1,1)") == 2
    assert exactness_check(left_kan(X, u), "cocartesian_square").ok


# -- exactness --------------------------------------------------------------------------

def square(F, d, maps):
    B = cube_poset(2, (0, 1))
    return VectDiagram(B, F, d, maps)


def test_square_examples():
    one = m(QQ, [[1]])
    X = square(QQ, {"(0,0)": 1, "(1,0)": 1, "(0,1)": 1, "(1,1)": 1},
               {"(0,0)<(1,0)": one, "(0,0)<(0,1)": one, "(1,0)<(1,1)": one, "(0,1)<(1,1)": one,
                "(0,0)<(1,1)": one})
    assert exactness_check(X, "cocartesian_square").ok
    assert exactness_check(X, "cartesian_square").ok
    assert not exactness_check(X, "cofiber_square").ok
    e1 = m(QQ, [[1], [0]])
    Y = square(QQ, {"(0,0)": 1, "(1,0)": 1, "(0,1)": 1, "(1,1)": 2},
               {"(0,0)<(1,0)": one, "(0,0)<(0,1)": one, "(1,0)<(1,1)": e1, "(0,1)<(1,1)": e1,
                "(0,0)<(1,1)": e1})
    r = exactness_check(Y, "cocartesian_square")
    assert not r.ok and r.failures == ["not cocartesian"]
    assert exactness_check(Y, "cartesian_square").ok
    z = ExactMatrix.zeros
    C = square(QQ, {"(0,0)": 1, "(1,0)": 1, "(0,1)": 0, "(1,1)": 0},
               {"(0,0)<(1,0)": one, "(0,0)<(0,1)": z(QQ, 0, 1), "(1,0)<(1,1)": z(QQ, 0, 1),
                "(0,1)<(1,1)": z(QQ, 0, 0), "(0,0)<(1,1)": z(QQ, 0, 1)})
    assert exactness_check(C, "cofiber_square").ok


def test_exactness_shape_errors():
    X = zero_diagram(interval(2), QQ)
    with pytest.raises(ShapeMismatch):
        exactness_check(X, "cocartesian_square")
    with pytest.raises(ValueError):
        exactness_check(zero_diagram(cube_poset(2, (0, 1)), QQ), "bogus")


def column_square(Y, lo, hi):
    """Restrict a diagram on [2] x [1] to the square between columns lo < hi."""
    S = cube_poset(2, (0, 1))
    B = Y.base
    pos = lambda name: B.obj(f"({lo if name[1] == '0' else hi},{name[3]})")
    w = CatFunctor(S, B, [pos(o) for o in S.objects],
                   [B.hom(pos(S.objects[S.src[k]]), pos(S.objects[S.tgt[k]]))[0] for k in range(S.n_mor)])
    return restrict(Y, w)


def test_pasting_cocartesian_squares():
    # left Kan extension from the span (2,0) <- (0,0) -> (0,1) fills a 2x1 strip
    A = subcube([(0, 0), (1, 0), (2, 0), (0, 1)])
    B = subcube(list(itertools.product((0, 1, 2), (0, 1))))
    u = CatFunctor.from_names(A, B, {o: o for o in A.objects}, {x: x for x in A.mor_names})
    rng = random.Random(9)
    f, g = random_matrix(QQ, 2, 1, rng), random_matrix(QQ, 2, 2, rng)
    X = VectDiagram(A, QQ, {"(0,0)": 1, "(1,0)": 2, "(2,0)": 2, "(0,1)": 1},
                    {"(0,0)<(1,0)": f, "(1,0)<(2,0)": g, "(0,0)<(2,0)": g @ f,
                     "(0,0)<(0,1)": m(QQ, [[1]])})
    Y = left_kan(X, u)
    for lo, hi in ((0, 1), (1, 2), (0, 2)):
        assert exactness_check(column_square(Y, lo, hi), "cocartesian_square").ok


# -- biproducts -----------------------------------------------------------------------------

@pytest.mark.parametrize("inputs", [(2,), (1, 2), (1, 1, 2)])
def test_biproduct_cube(inputs):
    X = biproduct_cube(list(inputs), QQ)
    rep = exactness_check(X, "biproduct_conditions")
    assert rep.ok, rep.failures
    assert rep.details["center_dim"] == sum(inputs)
    n = len(inputs)
    for i, d in enumerate(inputs):
        t = tuple(1 if j == i else 2 for j in range(n))
        assert X.dim("(" + ",".join(map(str, t)) + ")") == d


def test_biproduct_zero_inputs():
    X = biproduct_cube([0, 0], F5)
    assert sum(X.dims) == 0 and exactness_check(X, "biproduct_conditions").ok


# -- the pipeline -----------------------------------------------------------------------------

def test_invert_cube_round_trip(star2):
    ch = chain_for(star2, "0")
    M = random_rep(star2, QQ, random.Random(5), 2)
    X = rep_to_diagram(M, ch.stages["Q"])
    for key, side in (("u1", "right"), ("u2", "right"), ("u3", "left"), ("u4", "right")):
        X = kan_extend(X, ch.functors[key], side).diagram
    assert length_two_audit(X, ch) == []
    Y = invert_cube(X, ch)
    assert restrict(Y, ch.functors["u5"]) == X


def test_invert_cube_rejects_singular(A2):
    ch = chain_for(A2, "1")
    Q1 = ch.stages["Q1"]
    X = VectDiagram(Q1, QQ, [1] * Q1.n_obj,
                    {g: ExactMatrix.zeros(QQ, 1, 1) for g in Q1.mor_names
                     if not Q1.is_identity(Q1.mor(g)) and Q1.mor(g) in Q1.gens})
    assert length_two_audit(X, ch)
    with pytest.raises(NotInvertible):
        invert_cube(X, ch)


@pytest.mark.parametrize("seed", range(4))
def test_pipeline_matches_reflection(seed, A3, star2):
    rng = random.Random(seed)
    for Q, q0 in ((A3, "1"), (star2, "0")):
        for F in (QQ, F5):
            M = random_rep(Q, F, rng, 2)
            res = pipeline_reflect(M, q0, compare_classical=True, seed=seed)
            assert res.matches
            assert res.result.dims == reflect_minus(M, q0).dims
            assert all(r.audit == "ok" for r in res.trace)
