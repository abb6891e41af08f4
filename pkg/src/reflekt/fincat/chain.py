"""Gluing chains ``Q -> Q(1) -> Q(2) -> Q(3) -> Q1 -> Q2 -> Q(4) -> Q3`` attached
to a source (or, dually, a sink) of an oriented tree, and the flip isomorphism
between the two end categories.

Cube objects live in ``[2]^n`` coordinates.  For the source chain the
neighbour ``q_i`` sits at ``(2,..,1_i,..,2)``; for the sink chain at the unit
vector ``e_i``.  The object ``b = (1,..,1)`` is reached from (or reaches) the
special vertex through the generator ``c0``; the last two stages add the
square ``q0 -> b, q0 -> z, b -> q0', z -> q0'`` (reversed for the sink chain).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from ..errors import ChainMismatch, InputError, NotASink, NotASource, NotATree
from ..quiver import SINK, SOURCE, Quiver, classify_vertex, is_oriented_tree, reflect
from .core import CatFunctor, FinCat, functor_from_generators
from .present import Presentation, escalating_realize
from .shapes import free_category

STAGES = ("Q", "Q(1)", "Q(2)", "Q(3)", "Q1", "Q2", "Q(4)", "Q3")


def tuple_name(t) -> str:
    return "(" + ",".join(map(str, t)) + ")"


def step_name(k: int, t) -> str:
    """Unit step in coordinate ``k`` (0-based) starting at ``t``."""
    return f"d{k + 1}{tuple_name(t)}"


def inverse_name(k: int, t) -> str:
    """Inverse of the length-two map in coordinate ``k``, starting at ``t`` (``t_k == 2``)."""
    return f"r{k + 1}{tuple_name(t)}"


def _bump(t, k, v):
    return t[:k] + (v,) + t[k + 1:]


def cube_presentation(points, inverted: bool = False, name_of=tuple_name) -> Presentation:
    """Presentation of the full subposet of ``[2]^n`` on ``points`` (unit steps
    and commuting squares), optionally with each length-two map inverted."""
    pts = [tuple(p) for p in points]
    S = set(pts)
    n = len(pts[0]) if pts else 0
    gens, rels = [], []
    for t in pts:
        for k in range(n):
            if t[k] < 2 and _bump(t, k, t[k] + 1) in S:
                gens.append((step_name(k, t), name_of(t), name_of(_bump(t, k, t[k] + 1))))
            if inverted and t[k] == 2 and _bump(t, k, 0) in S:
                gens.append((inverse_name(k, t), name_of(t), name_of(_bump(t, k, 0))))
    gset = {g[0] for g in gens}

    def mv(k, t, up):
        """Generator moving coordinate k from t (up: +1, else 2 -> 0)."""
        return step_name(k, t) if up else inverse_name(k, t)

    def target(k, t, up):
        return _bump(t, k, t[k] + 1) if up else _bump(t, k, 0)

    for t in pts:
        for k, l in itertools.combinations(range(n), 2):
            for uk in (True, False):
                for ul in (True, False):
                    if not uk and not inverted or not ul and not inverted:
                        continue
                    if (uk and t[k] == 2) or (not uk and t[k] != 2):
                        continue
                    if (ul and t[l] == 2) or (not ul and t[l] != 2):
                        continue
                    tk, tl = target(k, t, uk), target(l, t, ul)
                    tkl = target(l, tk, ul)
                    need = [mv(k, t, uk), mv(l, tk, ul), mv(l, t, ul), mv(k, tl, uk)]
                    if all(g in gset for g in need) and tkl in S:
                        rels.append(([need[1], need[0]], [need[3], need[2]]))
        if inverted:
            for k in range(n):
                if t[k] == 0:
                    t1, t2 = _bump(t, k, 1), _bump(t, k, 2)
                    if t1 in S and t2 in S:
                        rels.append(([inverse_name(k, t2), step_name(k, t1), step_name(k, t)], []))
                if t[k] == 2:
                    t0, t1 = _bump(t, k, 0), _bump(t, k, 1)
                    if t0 in S and t1 in S:
                        rels.append(([step_name(k, t1), step_name(k, t0), inverse_name(k, t)], []))
    return Presentation([name_of(t) for t in pts], gens, rels)


def square_category() -> FinCat:
    """The commutative square ``[1] x [1]`` with step generators."""
    return escalating_realize(cube_presentation(list(itertools.product((0, 1), repeat=2))), 4,
                              name="square")


def tree_diameter(Q: Quiver) -> int:
    adj = {v: [] for v in Q.vertices}
    for a in Q.arrows:
        adj[a.src].append(a.tgt)
        adj[a.tgt].append(a.src)

    def far(s):
        dist = {s: 0}
        dq = deque([s])
        while dq:
            x = dq.popleft()
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    dq.append(y)
        v = max(dist, key=dist.get)
        return v, dist[v]

    v, _ = far(Q.vertices[0])
    return far(v)[1]


@dataclass
class ReflectionChain:
    quiver: Quiver
    q0: str
    kind: str                      # SOURCE for the primal chain, SINK for the dual one
    neighbours: list[str]
    stages: dict[str, FinCat] = field(default_factory=dict)
    functors: dict[str, CatFunctor] = field(default_factory=dict)
    cube: FinCat | None = None     # [2]^n
    cube_R: FinCat | None = None   # R^n
    square: FinCat | None = None
    names: dict[str, str] = field(default_factory=dict)

    @property
    def n(self):
        return len(self.neighbours)

    def position(self, i: int):
        n = self.n
        if self.kind == SOURCE:
            return tuple(1 if j == i else 2 for j in range(n))
        return tuple(1 if j == i else 0 for j in range(n))

    def obj_name(self, t) -> str:
        t = tuple(t)
        for i, q in enumerate(self.neighbours):
            if t == self.position(i):
                return q
        return tuple_name(t)

    def cube_morphism(self, C: FinCat, start, end) -> int:
        """The morphism ``start -> end`` in a stage containing the cube (or ``R^n``),
        coordinate by coordinate, using ``2 -> 0`` inverses when going down."""
        cur = tuple(start)
        ms = []
        for k in range(len(cur)):
            a, b = cur[k], end[k]
            if b < a:  # climb to 2, wrap around to 0
                while a < 2:
                    ms.append(C.mor(step_name(k, cur)))
                    cur = _bump(cur, k, a + 1)
                    a += 1
                ms.append(C.mor(inverse_name(k, cur)))
                cur = _bump(cur, k, 0)
                a = 0
            while a < b:
                ms.append(C.mor(step_name(k, cur)))
                cur = _bump(cur, k, a + 1)
                a += 1
        return C.compose_path(ms, C.obj(self.obj_name(start)))

    def summary(self) -> dict:
        return {name: {"objects": C.n_obj, "morphisms": C.n_mor} for name, C in self.stages.items()}


def _star_neighbours(Q: Quiver, q0: str, out: bool):
    arrs = Q.out_arrows(q0) if out else Q.in_arrows(q0)
    arrs = sorted(arrs, key=lambda a: ((a.tgt if out else a.src), a.id))
    return [(a.tgt if out else a.src) for a in arrs], [a.id for a in arrs]


def build_reflection_chain(Q: Quiver, q0: str) -> ReflectionChain:
    if not is_oriented_tree(Q):
        raise NotATree("reflection chains need an oriented tree")
    if classify_vertex(Q, q0) != SOURCE:
        raise NotASource(q0)
    return _build(Q, q0, SOURCE)


def build_dual_chain(Q: Quiver, q0: str) -> ReflectionChain:
    if not is_oriented_tree(Q):
        raise NotATree("reflection chains need an oriented tree")
    if classify_vertex(Q, q0) != SINK:
        raise NotASink(q0)
    return _build(Q, q0, SINK)


def _build(Q: Quiver, q0: str, kind: str) -> ReflectionChain:
    src_side = kind == SOURCE
    nbrs, arrow_ids = _star_neighbours(Q, q0, out=src_side)
    n = len(nbrs)
    ch = ReflectionChain(Q, q0, kind, nbrs)
    z, q0p = "z", f"{q0}'"
    for nm in (z, q0p):
        if nm in Q.vertices:
            raise InputError(f"vertex name {nm!r} is reserved by the chain construction")
    b = (1,) * n
    far = (2,) * n if src_side else (0,) * n          # the cone point of Q(1)
    corners = [tuple((0 if j == k else 2) if src_side else (2 if j == k else 0) for j in range(n))
               for k in range(n)]
    c0 = arrow_ids[0] if n == 1 else "c0"
    ch.names = {"b": ch.obj_name(b), "z": z, "q0'": q0p, "c0": c0, "z0": "z0", "b1": "b1", "z1": "z1"}
    reserved = {c0, "z0", "b1", "z1"} if n > 1 else {"z0", "b1", "z1"}
    clash = reserved & {a.id for a in Q.arrows}
    if clash or any(a.id.startswith(("d", "r")) and "(" in a.id for a in Q.arrows):
        raise InputError(f"arrow ids clash with chain generator names: {sorted(clash)}")

    name_of = ch.obj_name
    base_gens = [(a.id, a.src, a.tgt) for a in Q.arrows]
    reduced = [g for g in base_gens if g[0] not in arrow_ids]
    verts = list(Q.vertices)
    bound = 2 * tree_diameter(Q) + 4

    def realize_stage(P, name):
        return escalating_realize(P, bound, name=name)

    def cube_part(points, inverted=False):
        return cube_presentation(points, inverted, name_of)

    def extra_objects(P: Presentation):
        return verts + [o for o in P.objects if o not in verts]

    # Q(1): cone/cocone on the neighbours
    rels = []
    steps = []
    for i, q in enumerate(nbrs):
        pos = ch.position(i)
        if src_side:
            steps.append((step_name(i, pos), q, name_of(far)))
        else:
            steps.append((step_name(i, far), name_of(far), q))
    for i in range(n - 1):
        if src_side:
            rels.append(([steps[i][0], arrow_ids[i]], [steps[i + 1][0], arrow_ids[i + 1]]))
        else:
            rels.append(([arrow_ids[i], steps[i][0]], [arrow_ids[i + 1], steps[i + 1][0]]))
    P1 = Presentation(verts + [name_of(far)], base_gens + steps, rels)

    inner = list(itertools.product((1, 2) if src_side else (0, 1), repeat=n))
    cube2 = list(itertools.product((0, 1, 2), repeat=n))
    link = (c0, q0, name_of(b)) if src_side else (c0, name_of(b), q0)

    def with_link(P: Presentation, extra_gens=(), extra_rels=()):
        objs = extra_objects(P)
        gens = reduced + [link] + list(P.generators) + list(extra_gens)
        seen, uniq = set(), []
        for g in gens:
            if g[0] not in seen:
                seen.add(g[0])
                uniq.append(g)
        return Presentation(objs, uniq, list(P.relations) + list(extra_rels))

    P2 = with_link(cube_part(inner))
    corner_steps = []
    for k, c in enumerate(corners):
        tgt = ch.position(k)
        if src_side:
            corner_steps.append((step_name(k, c), name_of(c), name_of(tgt)))
        else:
            corner_steps.append((step_name(k, tgt), name_of(tgt), name_of(c)))
    P3 = Presentation(P2.objects + [name_of(c) for c in corners],
                      P2.generators + corner_steps, P2.relations)
    PQ1 = with_link(cube_part(cube2))
    PQ2 = with_link(cube_part(cube2, inverted=True))
    if src_side:
        zgen = ("z0", q0, z)
        sq = [("b1", name_of(b), q0p), ("z1", z, q0p)]
        sq_rel = (["b1", c0], ["z1", "z0"])
    else:
        zgen = ("z0", z, q0)
        sq = [("b1", q0p, name_of(b)), ("z1", q0p, z)]
        sq_rel = ([c0, "b1"], ["z0", "z1"])
    P4 = Presentation(PQ2.objects + [z], PQ2.generators + [zgen], PQ2.relations)
    P5 = Presentation(P4.objects + [q0p], P4.generators + sq, P4.relations + [sq_rel])

    st = ch.stages
    st["Q"] = free_category(Q, name="Q")
    for key, P in (("Q(1)", P1), ("Q(2)", P2), ("Q(3)", P3), ("Q1", PQ1), ("Q2", PQ2),
                   ("Q(4)", P4), ("Q3", P5)):
        st[key] = realize_stage(P, key)

    def same(C):
        return {o: o for o in C.objects}

    def incl(A, B, name):
        return functor_from_generators(A, B, same(A), {A.mor_names[g]: A.mor_names[g] for g in A.gens},
                                       name=name)

    F = ch.functors
    F["u1"] = incl(st["Q"], st["Q(1)"], "u1")
    # u2 rewrites the star arrows through b
    A, B = st["Q(1)"], st["Q(2)"]
    img = {}
    for g in A.gens:
        nm = A.mor_names[g]
        if nm in arrow_ids and n > 1:
            i = arrow_ids.index(nm)
            pos = ch.position(i)
            if src_side:
                img[nm] = B.compose(ch.cube_morphism(B, b, pos), B.mor(c0))
            else:
                img[nm] = B.compose(B.mor(c0), ch.cube_morphism(B, pos, b))
        else:
            img[nm] = nm
    F["u2"] = functor_from_generators(A, B, same(A), img, name="u2")
    F["u3"] = incl(st["Q(2)"], st["Q(3)"], "u3")
    F["u4"] = incl(st["Q(3)"], st["Q1"], "u4")
    F["u5"] = incl(st["Q1"], st["Q2"], "u5")
    F["u6"] = incl(st["Q2"], st["Q(4)"], "u6")
    F["u7"] = incl(st["Q(4)"], st["Q3"], "u7")

    ch.cube = escalating_realize(cube_presentation(cube2), 2 * n + 2, name="[2]^n")
    ch.cube_R = escalating_realize(cube_presentation(cube2, inverted=True), 3 * n + 2, name="R^n")
    ch.square = square_category()
    cube_ob = {tuple_name(t): name_of(t) for t in cube2}
    F["iota1"] = functor_from_generators(ch.cube, st["Q1"], cube_ob,
                                         {ch.cube.mor_names[g]: ch.cube.mor_names[g] for g in ch.cube.gens},
                                         name="iota1")
    F["iota2"] = functor_from_generators(ch.cube_R, st["Q2"], cube_ob,
                                         {ch.cube_R.mor_names[g]: ch.cube_R.mor_names[g]
                                          for g in ch.cube_R.gens}, name="iota2")
    F["q"] = functor_from_generators(ch.cube, ch.cube_R, same(ch.cube),
                                     {ch.cube.mor_names[g]: ch.cube.mor_names[g] for g in ch.cube.gens},
                                     name="q")
    if src_side:
        sq_ob = {"(0,0)": q0, "(1,0)": name_of(b), "(0,1)": z, "(1,1)": q0p}
        sq_gen = {"d1(0,0)": c0, "d2(0,0)": "z0", "d2(1,0)": "b1", "d1(0,1)": "z1"}
    else:
        sq_ob = {"(0,0)": q0p, "(1,0)": name_of(b), "(0,1)": z, "(1,1)": q0}
        sq_gen = {"d1(0,0)": "b1", "d2(0,0)": "z1", "d2(1,0)": c0, "d1(0,1)": "z0"}
    F["iota3"] = functor_from_generators(ch.square, st["Q3"], sq_ob, sq_gen, name="iota3")
    return ch


def chain_problems(ch: ReflectionChain) -> list[str]:
    """Structural checks on a built chain (embeddings, cube compatibility)."""
    bad = []
    for k in ("u1", "u2", "u3", "u4", "u6", "u7"):
        if not ch.functors[k].is_fully_faithful():
            bad.append(f"{k} is not fully faithful")
        if len(set(ch.functors[k].ob)) != len(ch.functors[k].ob):
            bad.append(f"{k} is not injective on objects")
    u5 = ch.functors["u5"]
    if sorted(set(u5.ob)) != list(range(u5.target.n_obj)):
        bad.append("u5 is not surjective on objects")
    lhs = ch.functors["q"].then(ch.functors["iota2"])
    rhs = ch.functors["iota1"].then(u5)
    if lhs.ob != rhs.ob or lhs.mor != rhs.mor:
        bad.append("iota2 o q != u5 o iota1")
    for k in ("iota1", "iota2"):
        if not ch.functors[k].is_fully_faithful():
            bad.append(f"{k} is not fully faithful")
    i3 = ch.functors["iota3"]
    if not i3.is_faithful() or len(set(i3.ob)) != 4:
        bad.append("iota3 is not a faithful embedding of the square")
    return bad


def reflected_embedding(ch: ReflectionChain) -> CatFunctor:
    """The free category on the reflected quiver inside the last stage: ``q0``
    goes to the new object and each reflected star arrow to the composite
    through ``b``."""
    Q2 = reflect(ch.quiver, ch.q0)
    A = free_category(Q2, name="Q'")
    B = ch.stages["Q3"]
    src_side = ch.kind == SOURCE
    q0p = ch.names["q0'"]
    ob = {v: (q0p if v == ch.q0 else v) for v in Q2.vertices}
    _, arrow_ids = _star_neighbours(ch.quiver, ch.q0, out=src_side)
    b = (1,) * ch.n
    img = {}
    for a in Q2.arrows:
        if a.id in arrow_ids:
            pos = ch.position(arrow_ids.index(a.id))
            if src_side:   # q_i -> b -> q0'
                img[a.id] = B.compose(B.mor("b1"), ch.cube_morphism(B, pos, b))
            else:          # q0' -> b -> q_i
                img[a.id] = B.compose(ch.cube_morphism(B, b, pos), B.mor("b1"))
        else:
            img[a.id] = a.id
    return functor_from_generators(A, B, ob, img, name="j")


def sigma_iso(ch: ReflectionChain, dual: ReflectionChain) -> CatFunctor:
    """The flip isomorphism ``Q3 -> Q3'`` (cube coordinates ``x -> 2 - x``)."""
    if ch.kind != SOURCE or dual.kind != SINK or dual.q0 != ch.q0 \
            or dual.quiver != reflect(ch.quiver, ch.q0):
        raise ChainMismatch("sigma needs the chain of (Q, q0) and the dual chain of (reflect(Q, q0), q0)")
    A, B = ch.stages["Q3"], dual.stages["Q3"]
    n = ch.n
    q0, q0p, z = ch.q0, ch.names["q0'"], ch.names["z"]
    ob = {}
    for o in A.objects:
        ob[o] = o
    ob[q0] = q0p
    ob[q0p] = q0
    ob[z] = z
    for t in itertools.product((0, 1, 2), repeat=n):
        ob[ch.obj_name(t)] = dual.obj_name(tuple(2 - x for x in t))
    img = {}
    for g in A.gens:
        nm = A.mor_names[g]
        s = A.objects[A.src[g]]
        e = A.objects[A.tgt[g]]
        if nm == ch.names["c0"]:
            img[nm] = B.mor("b1")
        elif nm == "z0":
            img[nm] = B.mor("z1")
        elif nm == "b1":
            img[nm] = B.mor(dual.names["c0"])
        elif nm == "z1":
            img[nm] = B.mor("z0")
        elif nm.startswith(("d", "r")) and "(" in nm:
            ts, te = _coords_of(ch, s), _coords_of(ch, e)
            img[nm] = dual.cube_morphism(B, tuple(2 - x for x in ts), tuple(2 - x for x in te))
        else:
            img[nm] = B.mor(nm)
    return functor_from_generators(A, B, ob, img, name="sigma")


def _coords_of(ch: ReflectionChain, name: str):
    for i, q in enumerate(ch.neighbours):
        if name == q:
            return ch.position(i)
    return tuple(int(x) for x in name.strip("()").split(","))


def sigma_problems(ch: ReflectionChain, dual: ReflectionChain, sigma: CatFunctor) -> list[str]:
    bad = []
    if not sigma.is_bijective():
        bad.append("sigma is not bijective")
    else:
        inv = sigma.inverse()
        if inv.problems():
            bad.append("sigma inverse is not a functor")
        if not sigma.then(inv).is_identity():
            bad.append("sigma^-1 o sigma is not the identity")
    lhs = ch.functors["iota3"].then(sigma)
    rhs = dual.functors["iota3"]
    if [rhs.target.objects[x] for x in lhs.ob] != [rhs.target.objects[x] for x in rhs.ob] or \
            [rhs.target.mor_names[m] for m in lhs.mor] != [rhs.target.mor_names[m] for m in rhs.mor]:
        bad.append("sigma o iota3 != iota3'")
    A = ch.stages["Q3"]
    for v in ch.quiver.vertices:
        if v != ch.q0 and sigma.ob_name(v) != v:
            bad.append(f"sigma moves the tree vertex {v}")
    _, star = _star_neighbours(ch.quiver, ch.q0, out=True)
    for a in ch.quiver.arrows:
        if a.id not in star and sigma.mor_name(A.mor(a.id)) != a.id:
            bad.append(f"sigma moves the tree arrow {a.id}")
    if sigma.ob_name(ch.names["b"]) != dual.names["b"]:
        bad.append("sigma does not fix b")
    return bad
