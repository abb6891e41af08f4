"""Categories of factorizations and two-sided factorizations, and comma squares."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..errors import BadMorphism, BadSquareData
from .core import CatFunctor, FinCat, identity_functor
from .shapes import terminal


def _build(objs: list[tuple], names: list[str], arrows: list[tuple[int, int, int]],
           compose_base, ident_base, name: str, base_names: Sequence[str]) -> FinCat:
    """Assemble a category whose morphisms are triples (source, base morphism, target)."""
    index = {}
    mnames, src, tgt = [], [], []
    for (i, m, j) in arrows:
        index[(i, m, j)] = len(mnames)
        src.append(i)
        tgt.append(j)
        mnames.append(f"{base_names[m]}:{i}>{j}")
    ident = [index[(i, ident_base(o), i)] for i, o in enumerate(objs)]
    trip = list(index)

    def comp(g, f):
        i, m1, _ = trip[f]
        _, m2, k = trip[g]
        return index[(i, compose_base(m2, m1), k)]

    C = FinCat(names, mnames, src, tgt, ident, comp, name=name)
    C.base_morphisms = [m for (_, m, _) in trip]
    C.triples = objs
    return C


def factor_category(u: CatFunctor, b1, b2, gamma) -> FinCat:
    """Factorizations ``b1 -> u(a) -> b2`` of ``gamma``."""
    B = u.target
    b1, b2, gamma = B.obj(b1), B.obj(b2), B.mor(gamma)
    if B.src[gamma] != b1 or B.tgt[gamma] != b2:
        raise BadMorphism(f"{B.mor_names[gamma]} is not a morphism {B.objects[b1]} -> {B.objects[b2]}")
    return factorization_categories(u, b1, b2, only=gamma)[gamma]


class _PostCache:
    """For ``alpha`` in A and ``b2``: psi -> all psi' with psi' o u(alpha) = psi."""

    def __init__(self, u: CatFunctor):
        self.u = u
        self.cache = {}

    def get(self, alpha: int, b2: int):
        key = (alpha, b2)
        d = self.cache.get(key)
        if d is None:
            u, B = self.u, self.u.target
            ua = u.mor[alpha]
            d = {}
            for psi2 in B.hom(B.tgt[ua], b2):
                d.setdefault(B.compose(psi2, ua), []).append(psi2)
            self.cache[key] = d
        return d


def factorization_categories(u: CatFunctor, b1: int, b2: int, only: int | None = None,
                             cache: _PostCache | None = None) -> dict[int, FinCat]:
    """All factorization categories for morphisms ``b1 -> b2`` at once."""
    A, B = u.source, u.target
    cache = cache or _PostCache(u)
    buckets: dict[int, list[tuple]] = {g: [] for g in B.hom(b1, b2)}
    if only is not None:
        buckets = {only: []}
    for a in range(A.n_obj):
        ua = u.ob[a]
        for phi in B.hom(b1, ua):
            for psi in B.hom(ua, b2):
                g = B.compose(psi, phi)
                if g in buckets:
                    buckets[g].append((a, phi, psi))
    out = {}
    for g, objs in buckets.items():
        idx = {o: i for i, o in enumerate(objs)}
        arrows = []
        for i, (a, phi, psi) in enumerate(objs):
            for alpha in A.out_list[a]:
                a2 = A.tgt[alpha]
                phi2 = B.compose(u.mor[alpha], phi)
                for psi2 in cache.get(alpha, b2).get(psi, ()):
                    arrows.append((i, alpha, idx[(a2, phi2, psi2)]))
        names = [f"({A.objects[a]},{B.mor_names[phi]},{B.mor_names[psi]})" for a, phi, psi in objs]
        out[g] = _build(objs, names, arrows, A.compose, lambda o: A.ident[o[0]],
                        name=f"factorizations of {B.mor_names[g]}", base_names=A.mor_names)
    return out


@dataclass
class Square:
    """A square ``D -p-> A -u-> C``, ``D -q-> B -v-> C`` with ``alpha : u p => v q``
    given by its components (C-morphisms indexed by the objects of D)."""

    p: CatFunctor
    q: CatFunctor
    u: CatFunctor
    v: CatFunctor
    alpha: Sequence[int]

    def __post_init__(self):
        self.alpha = [self.u.target.mor(x) for x in self.alpha]
        bad = self.problems()
        if bad:
            raise BadSquareData("; ".join(bad[:3]))

    @property
    def D(self):
        return self.p.source

    def problems(self) -> list[str]:
        p, q, u, v = self.p, self.q, self.u, self.v
        bad = []
        if p.source is not q.source:
            bad.append("p and q need the same source")
        if p.target is not u.source or q.target is not v.source:
            bad.append("u must start where p ends and v where q ends")
        if u.target is not v.target:
            bad.append("u and v need the same target")
        if bad:
            return bad
        D, C = p.source, u.target
        if len(self.alpha) != D.n_obj:
            return ["alpha needs one component per object of D"]
        for d in range(D.n_obj):
            al = self.alpha[d]
            if C.src[al] != u.ob[p.ob[d]] or C.tgt[al] != v.ob[q.ob[d]]:
                bad.append(f"alpha component at {D.objects[d]} has the wrong endpoints")
        if bad:
            return bad
        for m in range(D.n_mor):
            d, d2 = D.src[m], D.tgt[m]
            lhs = C.compose(v.mor[q.mor[m]], self.alpha[d])
            rhs = C.compose(self.alpha[d2], u.mor[p.mor[m]])
            if lhs != rhs:
                bad.append(f"alpha is not natural at {D.mor_names[m]}")
        return bad


def two_sided_factor(sq: Square, a, b, gamma) -> FinCat:
    """Triples ``(d, a -> p(d), q(d) -> b)`` whose pasting with ``alpha`` is ``gamma``."""
    p, q, u, v = sq.p, sq.q, sq.u, sq.v
    A, B, C, D = p.target, q.target, u.target, sq.D
    a, b, gamma = A.obj(a), B.obj(b), C.mor(gamma)
    if C.src[gamma] != u.ob[a] or C.tgt[gamma] != v.ob[b]:
        raise BadSquareData(f"{C.mor_names[gamma]} is not a morphism u(a) -> v(b)")
    objs = []
    for d in range(D.n_obj):
        for phi in A.hom(a, p.ob[d]):
            for psi in B.hom(q.ob[d], b):
                g = C.compose(v.mor[psi], C.compose(sq.alpha[d], u.mor[phi]))
                if g == gamma:
                    objs.append((d, phi, psi))
    idx = {o: i for i, o in enumerate(objs)}
    post = {}
    arrows = []
    for i, (d, phi, psi) in enumerate(objs):
        for delta in D.out_list[d]:
            d2 = D.tgt[delta]
            phi2 = A.compose(p.mor[delta], phi)
            key = (delta, b)
            if key not in post:
                qd = q.mor[delta]
                tbl = {}
                for psi2 in B.hom(B.tgt[qd], b):
                    tbl.setdefault(B.compose(psi2, qd), []).append(psi2)
                post[key] = tbl
            for psi2 in post[key].get(psi, ()):
                arrows.append((i, delta, idx[(d2, phi2, psi2)]))
    names = [f"({D.objects[d]},{A.mor_names[phi]},{B.mor_names[psi]})" for d, phi, psi in objs]
    return _build(objs, names, arrows, D.compose, lambda o: D.ident[o[0]],
                  name=f"two-sided factorizations of {C.mor_names[gamma]}",
                  base_names=D.mor_names)


def hoepi_square(u: CatFunctor) -> Square:
    """The square ``A =u=> B`` twice, closed by identities on ``B``."""
    idB = identity_functor(u.target)
    return Square(u, u, idB, idB, [u.target.ident[u.ob[x]] for x in range(u.source.n_obj)])


def comma_category(u: CatFunctor, c, over: bool = True) -> tuple[FinCat, CatFunctor, list[int]]:
    """``(u/c)`` (``over=True``) or ``(c/u)``, with the forgetful functor and the
    structure morphisms of its objects."""
    A, C = u.source, u.target
    c = C.obj(c)
    objs = []
    for a in range(A.n_obj):
        ms = C.hom(u.ob[a], c) if over else C.hom(c, u.ob[a])
        objs.extend((a, f) for f in ms)
    idx = {o: i for i, o in enumerate(objs)}
    arrows = []
    for i, (a, f) in enumerate(objs):
        for al in A.out_list[a]:
            a2 = A.tgt[al]
            if over:
                for f2 in C.hom(u.ob[a2], c):
                    if C.compose(f2, u.mor[al]) == f:
                        arrows.append((i, al, idx[(a2, f2)]))
            else:
                arrows.append((i, al, idx[(a2, C.compose(u.mor[al], f))]))
    names = [f"({A.objects[a]},{C.mor_names[f]})" for a, f in objs]
    K = _build(objs, names, arrows, A.compose, lambda o: A.ident[o[0]],
               name=f"({u.name or 'u'}/{C.objects[c]})" if over else f"({C.objects[c]}/{u.name or 'u'})",
               base_names=A.mor_names)
    forget = CatFunctor(K, A, [a for a, _ in objs], K.base_morphisms)
    return K, forget, [f for _, f in objs]


def comma_square(u: CatFunctor, c) -> Square:
    """``(u/c) -> A``, ``(u/c) -> 1``, ``u`` and the object ``c``, with the
    canonical transformation given by the structure maps."""
    K, forget, legs = comma_category(u, c, over=True)
    one = terminal()
    C = u.target
    to_one = CatFunctor(K, one, [0] * K.n_obj, [0] * K.n_mor)
    pick = CatFunctor(one, C, [C.obj(c)], [C.ident[C.obj(c)]])
    return Square(forget, to_one, u, pick, legs)
