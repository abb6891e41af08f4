"""Finite presentations and their realization by coset enumeration.

For each object ``s`` a table of "morphisms out of ``s``" is enumerated:
states are morphisms, a generator acts by post-composition, and every
relation is traced at every state, merging states whenever both sides land
in different places.  A closed table in which every relation holds at every
state is exactly the set of morphisms out of ``s``; that closure is the
completeness certificate recorded on the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError, NotStabilized, SizeLimit
from .core import FinCat

SEP = "∘"
MAX_MORPHISMS = 20_000


@dataclass
class Presentation:
    """Objects, generators ``(name, src, tgt)`` and relations.

    A relation is a pair of paths; each path is a list of generator names with
    the leftmost applied last (``["b", "a"]`` is ``b o a``).  An empty list
    stands for the identity at the other side's endpoint.
    """

    objects: list[str]
    generators: list[tuple[str, str, str]]
    relations: list[tuple[list[str], list[str]]] = field(default_factory=list)

    def __post_init__(self):
        self.objects = [str(o) for o in self.objects]
        self.generators = [tuple(map(str, g)) for g in self.generators]
        self.relations = [(list(r[0]), list(r[1])) for r in self.relations]
        if len(set(self.objects)) != len(self.objects):
            raise InputError("duplicate object in presentation")
        names = [g[0] for g in self.generators]
        if len(set(names)) != len(names):
            raise InputError("duplicate generator name")
        objs = set(self.objects)
        for g, s, t in self.generators:
            if s not in objs or t not in objs:
                raise InputError(f"generator {g} has an unknown endpoint")
            if SEP in g:
                raise InputError(f"generator name {g!r} may not contain {SEP!r}")

    def gen_index(self):
        return {g[0]: i for i, g in enumerate(self.generators)}

    def normalized_relations(self):
        """Relations as ``(start, lhs, rhs)`` with generator indices in application order."""
        gi = self.gen_index()
        out = []
        for lhs, rhs in self.relations:
            sides = []
            for path in (lhs, rhs):
                try:
                    sides.append([gi[g] for g in reversed(path)])
                except KeyError as exc:
                    raise InputError(f"relation mentions unknown generator {exc}") from None
            ends = []
            for path in sides:
                if path:
                    s = self.generators[path[0]][1]
                    cur = s
                    for g in path:
                        if self.generators[g][1] != cur:
                            raise InputError(f"relation path {lhs} / {rhs} is not composable")
                        cur = self.generators[g][2]
                    ends.append((s, cur))
                else:
                    ends.append(None)
            if ends[0] is None and ends[1] is None:
                continue
            e = ends[0] or ends[1]
            for other in ends:
                if other is not None and other != e:
                    raise InputError(f"relation {lhs} = {rhs} has mismatched endpoints")
            if (ends[0] is None or ends[1] is None) and e[0] != e[1]:
                raise InputError(f"relation {lhs} = {rhs} equates an identity with a non-endomorphism")
            out.append((e[0], sides[0], sides[1]))
        return out

    def union(self, other: "Presentation") -> "Presentation":
        """Glue two presentations along shared object and generator names."""
        objs = list(self.objects) + [o for o in other.objects if o not in self.objects]
        mine = {g[0]: g for g in self.generators}
        gens = list(self.generators)
        for g in other.generators:
            if g[0] in mine:
                if mine[g[0]] != g:
                    raise InputError(f"generator {g[0]} glued with different endpoints")
            else:
                gens.append(g)
        return Presentation(objs, gens, self.relations + other.relations)


class _Table:
    """Coset table for the morphisms out of one object."""

    def __init__(self, start: int, out_gens, gen_tgt, rels_from, bound: int, limit: int):
        self.out_gens = out_gens
        self.gen_tgt = gen_tgt
        self.rels_from = rels_from
        self.bound = bound
        self.limit = limit
        self.parent = [0]
        self.obj = [start]
        self.rep = [()]
        self.trans = [dict()]
        self.n_live = 1

    def find(self, x):
        p = self.parent
        root = x
        while p[root] != root:
            root = p[root]
        while p[x] != root:
            p[x], x = root, p[x]
        return root

    def _new(self, frm, g):
        if len(self.rep[frm]) + 1 > self.bound:
            return None
        j = len(self.obj)
        if j > self.limit:
            raise SizeLimit(f"coset enumeration exceeded {self.limit} states")
        self.parent.append(j)
        self.obj.append(self.gen_tgt[g])
        self.rep.append(self.rep[frm] + (g,))
        self.trans.append(dict())
        self.trans[frm][g] = j
        self.n_live += 1
        return j

    def trace(self, x, word, define: bool):
        cur = self.find(x)
        for g in word:
            t = self.trans[cur].get(g)
            if t is None:
                if not define:
                    return None
                t = self._new(cur, g)
                if t is None:
                    return None
            cur = self.find(t)
        return cur

    def coincide(self, a, b):
        queue = [(a, b)]
        merged = False
        while queue:
            a, b = queue.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            merged = True
            if b < a:
                a, b = b, a
            if (len(self.rep[b]), self.rep[b]) < (len(self.rep[a]), self.rep[a]):
                self.rep[a] = self.rep[b]
            self.parent[b] = a
            self.n_live -= 1
            ta = self.trans[a]
            for g, t in self.trans[b].items():
                if g in ta:
                    queue.append((ta[g], t))
                else:
                    ta[g] = t
            self.trans[b] = None
        return merged

    def sweep(self):
        """One enumeration pass over all states; returns whether anything merged."""
        merged = False
        i = 0
        while i < len(self.obj):
            if self.find(i) == i:
                for g in self.out_gens[self.obj[i]]:
                    if self.find(i) != i:
                        break
                    if g not in self.trans[i]:
                        self._new(i, g)
                for lhs, rhs in self.rels_from[self.obj[i]]:
                    if self.find(i) != i:
                        break
                    a = self.trace(i, lhs, True)
                    b = self.trace(i, rhs, True)
                    if a is not None and b is not None and a != b:
                        merged |= self.coincide(a, b)
            i += 1
        return merged

    def verify(self):
        """Closed and consistent?  Returns (ok, merged) and merges violations."""
        ok, merged = True, False
        for i in range(len(self.obj)):
            if self.find(i) != i:
                continue
            for g in self.out_gens[self.obj[i]]:
                if g not in self.trans[i]:
                    ok = False
            for lhs, rhs in self.rels_from[self.obj[i]]:
                if self.find(i) != i:
                    break
                a = self.trace(i, lhs, False)
                b = self.trace(i, rhs, False)
                if a is None or b is None:
                    ok = False
                elif a != b:
                    merged |= self.coincide(a, b)
        return ok and not merged, merged


def realize(P: Presentation, bound: int, max_morphisms: int = MAX_MORPHISMS,
            name: str = "") -> FinCat:
    """The finite category presented by ``P``.

    ``bound`` caps the length of the defining words tried during
    enumeration.  Raises :class:`NotStabilized` when some table cannot be
    closed within the bound and :class:`SizeLimit` beyond ``max_morphisms``.
    """
    objs = {o: i for i, o in enumerate(P.objects)}
    gens = [(n, objs[s], objs[t]) for n, s, t in P.generators]
    gen_tgt = [t for _, _, t in gens]
    out_gens = [[] for _ in P.objects]
    for gi, (_, s, _) in enumerate(gens):
        out_gens[s].append(gi)
    rels_from = [[] for _ in P.objects]
    for start, lhs, rhs in P.normalized_relations():
        rels_from[objs[start]].append((tuple(lhs), tuple(rhs)))

    per_source = []
    total = 0
    for s in range(len(P.objects)):
        T = _Table(s, out_gens, gen_tgt, rels_from, bound, limit=50 * max_morphisms)
        while True:
            T.sweep()
            ok, merged = T.verify()
            if ok:
                break
            if not merged:
                raise NotStabilized(
                    f"morphisms out of {P.objects[s]} do not close within bound {bound}")
        live = _canonical(T, s, out_gens)
        total += len(live)
        if total > max_morphisms:
            raise SizeLimit(f"more than {max_morphisms} morphisms")
        per_source.append((T, live))
    return _assemble(P, gens, per_source, bound, name)


def _canonical(T: _Table, s, out_gens):
    """Live states in shortlex order of their shortest words (BFS over the
    closed table, generators in declaration order)."""
    start = T.find(0)
    order = [start]
    word = {start: ()}
    k = 0
    while k < len(order):
        x = order[k]
        k += 1
        for g in out_gens[T.obj[x]]:
            y = T.find(T.trans[x][g])
            if y not in word:
                word[y] = word[x] + (g,)
                order.append(y)
    order.sort(key=lambda x: (len(word[x]), word[x]))
    return [(x, word[x]) for x in order]


def _assemble(P, gens, per_source, bound, name) -> FinCat:
    ng = len(gens)
    names, src, tgt, words = [], [], [], []
    ident = [0] * len(P.objects)
    index = []  # per source: state -> global id
    for s, (T, live) in enumerate(per_source):
        loc = {}
        for x, w in live:
            loc[x] = len(names)
            if not w:
                ident[s] = len(names)
                names.append(f"id_{P.objects[s]}")
            else:
                names.append(SEP.join(gens[g][0] for g in reversed(w)))
            src.append(s)
            tgt.append(T.obj[x])
            words.append(w)
        index.append(loc)
    M = len(names)
    # global transition table; the extra column is a padding no-op
    trans = np.full((M, ng + 1), -1, dtype=np.int64)
    trans[:, ng] = np.arange(M)
    for s, (T, live) in enumerate(per_source):
        loc = index[s]
        for x, _ in live:
            for g, y in T.trans[x].items():
                trans[loc[x], g] = loc[T.find(y)]
    n = len(P.objects)
    in_list = [[] for _ in range(n)]
    out_list = [[] for _ in range(n)]
    for m in range(M):
        in_list[tgt[m]].append(m)
        out_list[src[m]].append(m)
    tables = []
    for y in range(n):
        ins = np.array(in_list[y], dtype=np.int64)
        outs = out_list[y]
        L = max((len(words[g]) for g in outs), default=0)
        W = np.full((len(outs), max(L, 1)), ng, dtype=np.int64)
        for j, g in enumerate(outs):
            W[j, :len(words[g])] = words[g]
        cur = np.repeat(ins[:, None], len(outs), axis=1)
        for k in range(W.shape[1]):
            cur = trans[cur, W[None, :, k]]
        if (cur < 0).any():
            raise NotStabilized("composition table has holes")
        tables.append(cur.tolist())
    # a generator's morphism is where it sends the identity of its source
    gm = [int(trans[ident[s], g]) for g, (_, s, _) in enumerate(gens)]
    C = FinCat(P.objects, names, src, tgt, ident, tables=tables,
               gens=sorted(set(gm)), words=[tuple(gm[g] for g in w) for w in words],
               name=name)
    C.certificate = {"bound": bound, "morphisms": M,
                     "tables_closed": True, "relations_checked_at_every_state": True}
    C.presentation = P
    return C


def tautological_presentation(C: FinCat) -> Presentation:
    """Every morphism a generator, every composition (and identity) a relation."""
    gens = [(f"g{m}", C.objects[C.src[m]], C.objects[C.tgt[m]]) for m in range(C.n_mor)]
    rels = []
    for x in range(C.n_obj):
        rels.append(([f"g{C.ident[x]}"], []))
    for y in range(C.n_obj):
        for f in C.in_list[y]:
            for g in C.out_list[y]:
                rels.append(([f"g{g}", f"g{f}"], [f"g{C.compose(g, f)}"]))
    return Presentation(list(C.objects), gens, rels)


def presentation_from_json(data: dict) -> Presentation:
    try:
        objs = data["objects"]
        gens = [(g["id"], g["src"], g["tgt"]) if isinstance(g, dict) else tuple(g)
                for g in data["generators"]]
        rels = [(r[0], r[1]) for r in data.get("relations", [])]
    except (KeyError, TypeError, IndexError) as exc:
        raise InputError(f"malformed presentation: {exc}") from None
    return Presentation(objs, gens, rels)


def presentation_to_json(P: Presentation) -> dict:
    return {"objects": list(P.objects),
            "generators": [{"id": n, "src": s, "tgt": t} for n, s, t in P.generators],
            "relations": [[list(l), list(r)] for l, r in P.relations]}


def escalating_realize(P: Presentation, start_bound: int, escalations: int = 4,
                       name: str = "", max_morphisms: int = MAX_MORPHISMS) -> FinCat:
    """Realize with bounds ``b, 2b, 4b, ...`` (at most ``escalations`` retries)."""
    b = start_bound
    for k in range(escalations + 1):
        try:
            return realize(P, b, max_morphisms=max_morphisms, name=name)
        except NotStabilized:
            if k == escalations:
                raise
            b *= 2
    raise AssertionError("unreachable")

