"""Standard finite categories and the basic constructions on them."""

from __future__ import annotations

import itertools
from typing import Sequence

from ..errors import InputError, UnknownObject
from ..quiver import Quiver, paths_from, path_end
from .core import CatFunctor, FinCat, functor_from_generators
from .present import SEP, Presentation, realize


def _path_name(obj: str, path: Sequence[str]) -> str:
    return SEP.join(reversed(path)) if path else f"id_{obj}"


def free_category(Q: Quiver, name: str = "") -> FinCat:
    """Paths of an acyclic quiver; composition is concatenation."""
    paths = []
    for v in Q.vertices:
        for p in paths_from(Q, v):
            paths.append((v, p))
    index = {vp: i for i, vp in enumerate(paths)}
    objs = {v: i for i, v in enumerate(Q.vertices)}
    src = [objs[v] for v, _ in paths]
    tgt = [objs[path_end(Q, v, p)] for v, p in paths]
    ident = [index[(v, ())] for v in Q.vertices]
    gens = [index[(a.src, (a.id,))] for a in Q.arrows]
    words = [tuple(index[(Q.arrow(a).src, (a,))] for a in p) for _, p in paths]

    def comp(g, f):
        return index[(paths[f][0], paths[f][1] + paths[g][1])]

    return FinCat(Q.vertices, [_path_name(v, p) for v, p in paths], src, tgt, ident, comp,
                  gens=gens, words=words, name=name)


def poset_category(elements: Sequence[str], leq, name: str = "") -> FinCat:
    """Thin category of a finite poset; ``leq(x, y)`` decides ``x <= y``.

    Morphisms are named ``x<y`` and identities ``id_x``.
    """
    els = [str(e) for e in elements]
    pairs = [(x, y) for x in els for y in els if leq(x, y)]
    for x in els:
        if (x, x) not in pairs:
            raise InputError("relation is not reflexive")
    index = {p: i for i, p in enumerate(pairs)}
    o = {x: i for i, x in enumerate(els)}

    def comp(g, f):
        (x, _), (_, z) = pairs[f], pairs[g]
        if (x, z) not in index:
            raise InputError("relation is not transitive")
        return index[(x, z)]

    names = [f"id_{x}" if x == y else f"{x}<{y}" for x, y in pairs]
    return FinCat(els, names, [o[x] for x, _ in pairs], [o[y] for _, y in pairs],
                  [index[(x, x)] for x in els], comp, name=name)


def interval(n: int) -> FinCat:
    """The ordinal ``[n] = {0 < 1 < ... < n}``, generated by the unit steps."""
    Q = Quiver.build([str(i) for i in range(n + 1)],
                     [(f"{i}{i + 1}", str(i), str(i + 1)) for i in range(n)])
    return free_category(Q, name=f"[{n}]")


def terminal() -> FinCat:
    return FinCat(["*"], ["id_*"], [0], [0], [0], lambda g, f: 0, name="1")


def discrete(names: Sequence[str]) -> FinCat:
    return FinCat(names, [f"id_{x}" for x in names], range(len(names)), range(len(names)),
                  range(len(names)), lambda g, f: g, name="discrete")


def parallel_pair() -> FinCat:
    Q = Quiver.build(["a", "b"], [("f", "a", "b"), ("g", "a", "b")])
    return free_category(Q, name="parallel pair")


def presentation_R() -> Presentation:
    """``[2]`` with the composite ``0 -> 2`` inverted by ``c``."""
    return Presentation(["0", "1", "2"], [("a", "0", "1"), ("b", "1", "2"), ("c", "2", "0")],
                        [(["c", "b", "a"], []), (["b", "a", "c"], [])])


def category_R() -> FinCat:
    return realize(presentation_R(), 4, name="R")


def localization_p(R: FinCat | None = None) -> CatFunctor:
    """The localization functor ``p : [2] -> R``."""
    R = R or category_R()
    return functor_from_generators(interval(2), R, {"0": "0", "1": "1", "2": "2"},
                                   {"01": "a", "12": "b"}, name="p")


# -- products -----------------------------------------------------------------

def _tuple_name(parts) -> str:
    return "(" + ",".join(parts) + ")"


def product_many(cats: Sequence[FinCat], name: str = "") -> FinCat:
    """Finite product; objects and morphisms are named by tuples ``(x,y,...)``."""
    cats = list(cats)
    if not cats:
        return terminal()
    obj_tuples = list(itertools.product(*[range(C.n_obj) for C in cats]))
    mor_tuples = list(itertools.product(*[range(C.n_mor) for C in cats]))
    oidx = {t: i for i, t in enumerate(obj_tuples)}
    midx = {t: i for i, t in enumerate(mor_tuples)}
    src = [oidx[tuple(C.src[m] for C, m in zip(cats, t))] for t in mor_tuples]
    tgt = [oidx[tuple(C.tgt[m] for C, m in zip(cats, t))] for t in mor_tuples]
    ident = [midx[tuple(C.ident[x] for C, x in zip(cats, t))] for t in obj_tuples]

    def comp(g, f):
        return midx[tuple(C.compose(a, b) for C, a, b in zip(cats, mor_tuples[g], mor_tuples[f]))]

    gens, words = _product_generators(cats, mor_tuples, midx)
    return FinCat([_tuple_name(C.objects[x] for C, x in zip(cats, t)) for t in obj_tuples],
                  [_tuple_name(C.mor_names[m] for C, m in zip(cats, t)) for t in mor_tuples],
                  src, tgt, ident, comp, gens=gens, words=words, name=name)


def _product_generators(cats, mor_tuples, midx):
    gens = set()
    words = []
    for t in mor_tuples:
        cur = [C.src[m] for C, m in zip(cats, t)]
        w = []
        for i, (C, m) in enumerate(zip(cats, t)):
            for g in (C.words[m] if C.words is not None else (m,)):
                step = tuple(C2.ident[cur[j]] if j != i else g for j, C2 in enumerate(cats))
                w.append(midx[step])
            cur[i] = C.tgt[m]
        words.append(tuple(w))
        gens.update(w)
    return sorted(gens), words


def product(C: FinCat, D: FinCat) -> FinCat:
    return product_many([C, D], name=f"{C.name}x{D.name}" if C.name and D.name else "")


def product_functor(functors: Sequence[CatFunctor], source: FinCat | None = None,
                    target: FinCat | None = None) -> CatFunctor:
    """``F_1 x ... x F_k`` between the tuple-indexed products."""
    source = source or product_many([F.source for F in functors])
    target = target or product_many([F.target for F in functors])
    so = list(itertools.product(*[range(F.source.n_obj) for F in functors]))
    sm = list(itertools.product(*[range(F.source.n_mor) for F in functors]))
    to = {t: i for i, t in enumerate(itertools.product(*[range(F.target.n_obj) for F in functors]))}
    tm = {t: i for i, t in enumerate(itertools.product(*[range(F.target.n_mor) for F in functors]))}
    ob = [to[tuple(F.ob[x] for F, x in zip(functors, t))] for t in so]
    mor = [tm[tuple(F.mor[m] for F, m in zip(functors, t))] for t in sm]
    return CatFunctor(source, target, ob, mor, name="x".join(F.name or "F" for F in functors))


def cube_poset(n: int, values: Sequence[int] = (0, 1, 2), name: str = "") -> FinCat:
    """Full subposet of ``[2]^n`` on the tuples with entries in ``values``,
    objects named by their coordinate tuples."""
    pts = [t for t in itertools.product(values, repeat=n)]
    return subcube(pts, name=name or f"cube{n}")


def subcube(points, name: str = "") -> FinCat:
    pts = [tuple(p) for p in points]
    names = [_tuple_name(map(str, p)) for p in pts]
    by_name = dict(zip(names, pts))
    return poset_category(names, lambda x, y: all(a <= b for a, b in zip(by_name[x], by_name[y])),
                          name=name)


# -- cones, opposites, extensions -------------------------------------------------

def _fresh(C: FinCat, wanted: str) -> str:
    if C.has_object(wanted):
        raise InputError(f"object name {wanted!r} already used")
    return wanted


def cone(A: FinCat, apex: str = "-inf") -> tuple[FinCat, CatFunctor]:
    """Adjoin an initial object."""
    return _adjoin(A, _fresh(A, apex), initial=True)


def cocone(A: FinCat, apex: str = "+inf") -> tuple[FinCat, CatFunctor]:
    """Adjoin a terminal object."""
    return _adjoin(A, _fresh(A, apex), initial=False)


def _adjoin(A: FinCat, apex: str, initial: bool):
    n, M = A.n_obj, A.n_mor
    names = list(A.mor_names)
    src, tgt = list(A.src), list(A.tgt)
    # morphism M + a connects the apex with object a; M + n is the apex identity
    for a in range(n):
        names.append(f"{apex}>{A.objects[a]}" if initial else f"{A.objects[a]}>{apex}")
        src.append(n if initial else a)
        tgt.append(a if initial else n)
    names.append(f"id_{apex}")
    src.append(n)
    tgt.append(n)
    ida = M + n

    def comp(g, f):
        if g < M and f < M:
            return A.compose(g, f)
        if g == ida:
            return f
        if f == ida:
            return g
        if initial:  # g in A after a cone leg f
            return M + A.tgt[g]
        return M + A.src[f]  # cocone leg g after f in A

    gens = list(A.gens) + list(range(M, M + n))
    words = [w for w in A.words] + [(M + a,) for a in range(n)] + [()]
    C = FinCat(list(A.objects) + [apex], names, src, tgt, list(A.ident) + [ida], comp,
               gens=gens, words=words, name=("cone" if initial else "cocone") + f"({A.name})")
    return C, CatFunctor(A, C, range(n), range(M), name="incl")


def opposite(C: FinCat) -> FinCat:
    return FinCat(C.objects, C.mor_names, C.tgt, C.src, C.ident,
                  lambda g, f: C.compose(f, g), gens=C.gens,
                  words=[tuple(reversed(w)) for w in C.words], name=f"{C.name}^op")


def one_point_extend(A: FinCat, attach, direction: str = "to_target",
                     new: str = "x") -> tuple[FinCat, CatFunctor]:
    """Adjoin one object ``new`` and one arrow ``f`` between it and ``attach``.

    ``to_target``: ``f : new -> attach``; the new morphisms are ``m o f`` for
    ``m`` out of ``attach``.  ``to_source``: ``f : attach -> new`` and the new
    morphisms are ``f o m`` for ``m`` into ``attach``.
    """
    if not A.has_object(str(attach)) and not isinstance(attach, int):
        raise UnknownObject(attach)
    a = A.obj(attach)
    if direction not in ("to_target", "to_source"):
        raise InputError(f"direction must be to_target or to_source, not {direction!r}")
    new = _fresh(A, new)
    n, M = A.n_obj, A.n_mor
    fwd = direction == "to_target"
    legs = A.out_list[a] if fwd else A.in_list[a]
    arrow = "f"
    taken = set(A.mor_names)
    while any(nm == arrow or nm.startswith(arrow + SEP) or nm.endswith(SEP + arrow)
              for nm in taken):
        arrow += "'"
    names = list(A.mor_names) + [f"id_{new}"]
    src, tgt = list(A.src) + [n], list(A.tgt) + [n]
    leg_id = {}
    for m in legs:
        leg_id[m] = len(names)
        if m == A.ident[a]:
            names.append(arrow)
        else:
            names.append(f"{A.mor_names[m]}{SEP}{arrow}" if fwd else f"{arrow}{SEP}{A.mor_names[m]}")
        src.append(n if fwd else A.src[m])
        tgt.append(A.tgt[m] if fwd else n)
    ida = M
    leg_of = {v: k for k, v in leg_id.items()}

    def comp(g, f):
        if g < M and f < M:
            return A.compose(g, f)
        if g == ida:
            return f
        if f == ida:
            return g
        if fwd:  # g in A after the leg f = m o f
            return leg_id[A.compose(g, leg_of[f])]
        return leg_id[A.compose(leg_of[g], f)]  # leg g = f o m after f in A

    f0 = leg_id[A.ident[a]]
    words = list(A.words) + [()]
    for m in legs:
        words.append((f0,) + A.words[m] if fwd else A.words[m] + (f0,))
    C = FinCat(list(A.objects) + [new], names, src, tgt, list(A.ident) + [ida], comp,
               gens=list(A.gens) + [f0], words=words, name=f"{A.name}+{new}")
    C.new_arrow = f0
    return C, CatFunctor(A, C, range(n), range(M), name="j")


def extend_functor(u: CatFunctor, attach, direction: str = "to_target",
                   new: str = "x") -> tuple[CatFunctor, CatFunctor, CatFunctor]:
    """Extend ``u : A -> B`` to the one-point extensions at ``attach`` and
    ``u(attach)``.  Returns ``(u', j_A, j_B)``."""
    A, B = u.source, u.target
    a = A.obj(attach)
    A2, jA = one_point_extend(A, a, direction, new)
    B2, jB = one_point_extend(B, u.ob[a], direction, new)
    ob = {A2.objects[x]: B2.objects[jB.ob[u.ob[x]]] for x in range(A.n_obj)}
    ob[new] = new
    gen_img = {A2.mor_names[g]: B2.mor_names[jB.mor[u.mor[g]]] for g in A.gens}
    gen_img[A2.mor_names[A2.new_arrow]] = B2.mor_names[B2.new_arrow]
    u2 = functor_from_generators(A2, B2, ob, gen_img, name=f"{u.name}+")
    return u2, jA, jB
