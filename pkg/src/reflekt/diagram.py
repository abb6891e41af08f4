"""Vector-space valued diagrams on finite categories: restriction, pointwise
Kan extensions, exactness checks for squares and cubes, the biproduct cube,
and the reflection pipeline along a gluing chain."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import BaseMismatch, Mismatch, NotFunctorial, NotInvertible, ShapeMismatch
from .fincat.chain import ReflectionChain, build_reflection_chain, reflected_embedding, tuple_name
from .fincat.core import CatFunctor, FinCat
from .fincat.factor import _PostCache
from .fincat.shapes import cube_poset, free_category, subcube
from .linalg import (ExactMatrix, FieldSpec, cokernel, free_columns, hstack, nullspace,
                     vstack)
from .linrep import Representation, find_isomorphism, reflect_minus
from .quiver import reflect

EXHAUSTIVE_PAIRS = 100_000


class VectDiagram:
    """A functor ``base -> Vect``.

    Matrices are stored for the generating morphisms of ``base`` (plus any
    other morphisms given explicitly); the rest are composed along
    ``base.words`` on demand and cached.
    """

    def __init__(self, base: FinCat, field: FieldSpec, dims, maps: Mapping, check: bool = True):
        self.base = base
        self.field = field
        if isinstance(dims, Mapping):
            self.dims = [int(dims.get(o, 0)) for o in base.objects]
        else:
            self.dims = [int(d) for d in dims]
        if len(self.dims) != base.n_obj or any(d < 0 for d in self.dims):
            raise Mismatch("need one nonnegative dimension per object")
        self._maps: dict[int, ExactMatrix] = {}
        for k, m in maps.items():
            self._maps[base.mor(k)] = m
        for x in range(base.n_obj):
            self._maps[base.ident[x]] = ExactMatrix.identity(field, self.dims[x])
        missing = [base.mor_names[g] for g in base.gens if g not in self._maps]
        if missing:
            raise Mismatch(f"no matrix for generators {missing[:3]}")
        for m, A in self._maps.items():
            if A.field != field:
                raise Mismatch(f"{base.mor_names[m]}: matrix over {A.field}, diagram over {field}")
            if A.shape != (self.dims[base.tgt[m]], self.dims[base.src[m]]):
                raise Mismatch(f"{base.mor_names[m]}: shape {A.shape}, expected "
                               f"{(self.dims[base.tgt[m]], self.dims[base.src[m]])}")
        if check:
            bad = self.audit()
            if bad:
                raise NotFunctorial("; ".join(bad[:3]))

    def __repr__(self):
        return f"<VectDiagram on {self.base.name or 'C'} over {self.field}: dims {self.dims}>"

    def dim(self, x) -> int:
        return self.dims[self.base.obj(x)]

    def map(self, m) -> ExactMatrix:
        m = self.base.mor(m)
        A = self._maps.get(m)
        if A is None:
            w = self.base.words[m]
            A = self._maps[self.base.ident[self.base.src[m]]]
            for g in w:
                A = self.map(g) @ A
            self._maps[m] = A
        return A

    def gen_maps(self) -> dict[str, ExactMatrix]:
        return {self.base.mor_names[g]: self.map(g) for g in self.base.gens}

    def all_maps(self) -> list[ExactMatrix]:
        return [self.map(m) for m in range(self.base.n_mor)]

    def audit(self, exhaustive: bool | None = None) -> list[str]:
        """Functoriality check.

        Exhaustive over composable pairs when small (or when forced); otherwise
        the defining relations of the base presentation are checked on the
        generator matrices, which is equivalent because every other matrix is
        composed along a recorded word.
        """
        C = self.base
        bad = []
        P = getattr(C, "presentation", None)
        if exhaustive is None:
            exhaustive = P is None or C.n_composable_pairs() <= EXHAUSTIVE_PAIRS
        if exhaustive:
            for y in range(C.n_obj):
                for f in C.in_list[y]:
                    Mf = self.map(f)
                    for g in C.out_list[y]:
                        if self.map(C.compose(g, f)) != self.map(g) @ Mf:
                            bad.append(f"F({C.mor_names[g]} o {C.mor_names[f]}) != F(g)F(f)")
                            if len(bad) > 10:
                                return bad
            return bad
        gm = [C.mor(g[0]) for g in P.generators]
        for start, lhs, rhs in P.normalized_relations():
            x = C.obj(start)
            sides = []
            for path in (lhs, rhs):
                A = ExactMatrix.identity(self.field, self.dims[x])
                for g in path:
                    A = self.map(gm[g]) @ A
                sides.append(A)
            if sides[0] != sides[1]:
                bad.append(f"relation at {start} fails")
        return bad

    def __eq__(self, other):
        if not isinstance(other, VectDiagram) or other.base is not self.base or other.field != self.field:
            return False
        return self.dims == other.dims and all(self.map(g) == other.map(g) for g in self.base.gens)

    def to_json(self) -> dict:
        return {"field": str(self.field),
                "dims": {o: d for o, d in zip(self.base.objects, self.dims)},
                "maps": {self.base.mor_names[g]: self.map(g).to_strings() for g in self.base.gens}}


def diagram_from_json(base: FinCat, d: dict) -> VectDiagram:
    F = FieldSpec.parse(d["field"])
    dims = {o: int(v) for o, v in d["dims"].items()}
    if set(dims) - set(base.objects):
        raise BaseMismatch(f"unknown objects {sorted(set(dims) - set(base.objects))[:3]}")
    maps = {}
    for k, rows in d["maps"].items():
        m = base.mor(k)
        maps[k] = ExactMatrix(F, dims.get(base.objects[base.tgt[m]], 0),
                              dims.get(base.objects[base.src[m]], 0),
                              [[F.elem(x) for x in r] for r in rows])
    return VectDiagram(base, F, dims, maps)


def zero_diagram(base: FinCat, F: FieldSpec) -> VectDiagram:
    return VectDiagram(base, F, [0] * base.n_obj,
                       {g: ExactMatrix.zeros(F, 0, 0) for g in base.gens}, check=False)


# -- conversions ------------------------------------------------------------------

def rep_to_diagram(M: Representation, base: FinCat | None = None) -> VectDiagram:
    """A quiver representation as a diagram on the free category of its quiver."""
    base = base or free_category(M.quiver, name="Q")
    return VectDiagram(base, M.field, {v: M.dims[v] for v in M.quiver.vertices},
                       {a.id: M.maps[a.id] for a in M.quiver.arrows}, check=False)


def diagram_to_rep(X: VectDiagram, j: CatFunctor, quiver) -> Representation:
    """Read off a representation of ``quiver`` from ``X`` along ``j : free(quiver) -> base``."""
    Y = restrict(X, j)
    return Representation(quiver, X.field, {v: Y.dim(v) for v in quiver.vertices},
                          {a.id: Y.map(a.id) for a in quiver.arrows})


def restrict(X: VectDiagram, u: CatFunctor) -> VectDiagram:
    if u.target is not X.base:
        raise BaseMismatch("restriction needs a functor into the base of the diagram")
    A = u.source
    maps = {g: X.map(u.mor[g]) for g in A.gens}
    return VectDiagram(A, X.field, [X.dims[u.ob[a]] for a in range(A.n_obj)], maps, check=False)


# -- Kan extensions ------------------------------------------------------------------

@dataclass
class KanResult:
    diagram: VectDiagram
    comparison: list[ExactMatrix]   # unit X_a -> (u^* u_! X)_a, or counit (u^* u_* X)_a -> X_a
    side: str

    def comparison_is_iso(self) -> bool:
        return all(c.rows == c.cols and c.rank() == c.rows for c in self.comparison)


@dataclass
class _Pointwise:
    """Colimit (or limit) over one comma category.

    ``gen_objs`` are the comma objects whose values span (left) or determine
    (right) the result; ``T[o]`` is the transport between ``X_o`` and the sum
    of the ``gen_objs`` values.
    """

    objects: list[tuple[int, int]]
    index: dict
    gen_objs: list[int]
    offsets: list[int]
    total: int
    T: list[ExactMatrix]
    P: ExactMatrix | None = None        # left: projection onto the colimit
    S: ExactMatrix | None = None        # left: section of P
    N: ExactMatrix | None = None        # right: limit inclusion
    free: list[int] = field(default_factory=list)  # right: coordinates of the limit

    @property
    def dim(self):
        return self.P.rows if self.P is not None else self.N.cols


def _comma(u: CatFunctor, b: int, left: bool, cache):
    A, B = u.source, u.target
    objs = []
    for a in range(A.n_obj):
        ms = B.hom(u.ob[a], b) if left else B.hom(b, u.ob[a])
        objs.extend((a, f) for f in ms)
    index = {o: i for i, o in enumerate(objs)}
    edges = []   # (i, alpha, j): i -> j in the comma category
    for i, (a, f) in enumerate(objs):
        for al in A.out_list[a]:
            if al not in cache["gens"]:
                continue
            a2 = A.tgt[al]
            if left:
                for f2 in cache["post"].get(al, b).get(f, ()):
                    edges.append((i, al, index[(a2, f2)]))
            else:
                edges.append((i, al, index[(a2, B.compose(u.mor[al], f))]))
    return objs, index, edges


def _sink_roots(n: int, edges, prefer, forward: bool):
    """One root per terminal (``forward``) or initial strongly connected component."""
    succ = [[] for _ in range(n)]
    pred = [[] for _ in range(n)]
    for i, _, j in edges:
        (succ if forward else pred)[i].append(j)
        (pred if forward else succ)[j].append(i)
    # Kosaraju
    order, seen = [], [False] * n
    for s in range(n):
        if seen[s]:
            continue
        stack = [(s, 0)]
        seen[s] = True
        while stack:
            v, k = stack.pop()
            if k < len(succ[v]):
                stack.append((v, k + 1))
                w = succ[v][k]
                if not seen[w]:
                    seen[w] = True
                    stack.append((w, 0))
            else:
                order.append(v)
    comp = [-1] * n
    nc = 0
    for s in reversed(order):
        if comp[s] >= 0:
            continue
        stack = [s]
        comp[s] = nc
        while stack:
            v = stack.pop()
            for w in pred[v]:
                if comp[w] < 0:
                    comp[w] = nc
                    stack.append(w)
        nc += 1
    terminal = [True] * nc
    for v in range(n):
        for w in succ[v]:
            if comp[w] != comp[v]:
                terminal[comp[v]] = False
    roots = {}
    for v in range(n):
        c = comp[v]
        if terminal[c]:
            if c not in roots or (prefer(v), v) < (prefer(roots[c]), roots[c]):
                roots[c] = v
    return sorted(roots.values())


def _pointwise(X: VectDiagram, u: CatFunctor, b: int, left: bool, method: str, cache) -> _Pointwise:
    F = X.field
    B = u.target
    objs, index, edges = _comma(u, b, left, cache)
    n = len(objs)
    dimo = [X.dims[a] for a, _ in objs]
    if method == "dense":
        gen_objs = list(range(n))
    else:
        gen_objs = _sink_roots(n, edges, lambda v: 0 if B.is_identity(objs[v][1]) else 1, forward=left)
    offsets, tot = [], 0
    for r in gen_objs:
        offsets.append(tot)
        tot += dimo[r]
    T: list[ExactMatrix | None] = [None] * n
    for r, off in zip(gen_objs, offsets):
        idx = range(off, off + dimo[r])
        E = ExactMatrix.unit_columns(F, tot, list(idx))  # X_r -> sum
        T[r] = E if left else E.T
    tree_edges = set()
    if method != "dense":
        # breadth-first transport away from the roots
        adj = [[] for _ in range(n)]
        for e, (i, al, j) in enumerate(edges):
            if left:
                adj[j].append((e, i))   # walk backwards: i -> j known, reach i
            else:
                adj[i].append((e, j))
        dq = deque(gen_objs)
        while dq:
            v = dq.popleft()
            for e, w in adj[v]:
                if T[w] is None:
                    _, al, _ = edges[e]
                    T[w] = T[v] @ X.map(al) if left else X.map(al) @ T[v]
                    tree_edges.add(e)
                    dq.append(w)
        assert all(t is not None for t in T)
    rel = []
    for e, (i, al, j) in enumerate(edges):
        if e in tree_edges:
            continue
        if left:
            rel.append(T[i] - T[j] @ X.map(al))    # X_i -> sum
        else:
            rel.append(X.map(al) @ T[i] - T[j])    # sum -> X_j
    pw = _Pointwise(objs, index, gen_objs, offsets, tot, T)
    if left:
        R = hstack(F, tot, rel)
        pw.P, comp = cokernel(R)
        pw.S = ExactMatrix.unit_columns(F, tot, comp)
    else:
        K = vstack(F, tot, rel)
        pw.N = nullspace(K)
        pw.free = free_columns(K)
    return pw


def kan_extend(X: VectDiagram, u: CatFunctor, side: str = "left", method: str = "forest") -> KanResult:
    """Pointwise left (colimit over ``(u/b)``) or right (limit over ``(b/u)``)
    Kan extension of ``X`` along ``u``.

    ``method="dense"`` uses the two-term presentation over every comma object
    and every generating comma morphism; ``"forest"`` first transports along a
    spanning forest and keeps only the remaining relations.
    """
    if u.source is not X.base:
        raise BaseMismatch("Kan extension needs a functor out of the base of the diagram")
    if side not in ("left", "right"):
        raise ValueError(side)
    left = side == "left"
    A, B = u.source, u.target
    F = X.field
    cache = {"post": _PostCache(u), "gens": set(A.gens)}
    pws = [_pointwise(X, u, b, left, method, cache) for b in range(B.n_obj)]
    maps = {}
    for beta in B.gens:
        b, b2 = B.src[beta], B.tgt[beta]
        pw, pw2 = pws[b], pws[b2]
        if left:
            blocks = []
            for r in pw.gen_objs:
                a, f = pw.objects[r]
                o2 = pw2.index[(a, B.compose(beta, f))]
                blocks.append(pw2.T[o2])
            M = pw2.P @ hstack(F, pw2.total, blocks) @ pw.S
        else:
            blocks = []
            for r in pw2.gen_objs:
                a, f = pw2.objects[r]
                o = pw.index[(a, B.compose(f, beta))]
                blocks.append(pw.T[o])
            V = vstack(F, pw.total, blocks) @ pw.N
            M = V.submatrix(pw2.free, range(V.cols))
        maps[beta] = M
    Y = VectDiagram(B, F, [pw.dim for pw in pws], maps, check=False)
    comp = []
    for a in range(A.n_obj):
        b = u.ob[a]
        pw = pws[b]
        o = pw.index[(a, B.ident[b])]
        comp.append(pw.P @ pw.T[o] if left else pw.T[o] @ pw.N)
    return KanResult(Y, comp, side)


def left_kan(X, u, method="forest") -> VectDiagram:
    return kan_extend(X, u, "left", method).diagram


def right_kan(X, u, method="forest") -> VectDiagram:
    return kan_extend(X, u, "right", method).diagram


# -- morphisms of diagrams -------------------------------------------------------------

def diagram_hom_dim(X: VectDiagram, Y: VectDiagram) -> int:
    """Dimension of the space of natural transformations ``X -> Y``."""
    if X.base is not Y.base or X.field != Y.field:
        raise BaseMismatch("diagrams on different bases")
    C, F = X.base, X.field
    offs, tot = [], 0
    for x in range(C.n_obj):
        offs.append(tot)
        tot += Y.dims[x] * X.dims[x]
    rows = []
    for g in C.gens:
        s, t = C.src[g], C.tgt[g]
        Xg, Yg = X.map(g), Y.map(g)
        # (phi_t Xg - Yg phi_s)[i][j] = 0
        for i in range(Y.dims[t]):
            for j in range(X.dims[s]):
                row = [F.zero] * tot
                for k in range(X.dims[t]):
                    c = Xg[k, j]
                    if c:
                        row[offs[t] + i * X.dims[t] + k] += c
                for k in range(Y.dims[s]):
                    c = Yg[i, k]
                    if c:
                        row[offs[s] + k * X.dims[s] + j] -= c
                if F.p:
                    row = [x % F.p for x in row]
                rows.append(row)
    if not rows:
        return tot
    return tot - ExactMatrix(F, len(rows), tot, rows).rank()


# -- exactness -------------------------------------------------------------------------

def _cube_index(C: FinCat, n: int | None = None):
    """Map coordinate tuples to objects of a thin cube-shaped base."""
    coords = {}
    for x, name in enumerate(C.objects):
        try:
            t = tuple(int(v) for v in name.strip("()").split(","))
        except ValueError:
            raise ShapeMismatch(f"object {name!r} is not a cube coordinate") from None
        coords[t] = x
    lens = {len(t) for t in coords}
    if len(lens) != 1 or (n is not None and lens != {n}):
        raise ShapeMismatch("objects are not coordinate tuples of one length")
    for t, x in coords.items():
        for t2, y in coords.items():
            le = all(a <= b for a, b in zip(t, t2))
            if len(C.hom(x, y)) != (1 if le else 0):
                raise ShapeMismatch("base is not the coordinatewise order on its tuples")
    return coords, lens.pop()


def _between(X: VectDiagram, coords, s, t) -> ExactMatrix:
    return X.map(X.base.hom(coords[s], coords[t])[0])


@dataclass
class SquareReport:
    corners: tuple
    cocartesian: bool
    cartesian: bool


def square_exactness(X: VectDiagram, coords, x00, x10, x01, x11) -> SquareReport:
    F = X.field
    f = _between(X, coords, x00, x10)
    g = _between(X, coords, x00, x01)
    h = _between(X, coords, x10, x11)
    k = _between(X, coords, x01, x11)
    d00, d10, d01, d11 = (X.dims[coords[c]] for c in (x00, x10, x01, x11))
    # pushout = coker(X00 -> X10 + X01), canonical map to X11
    P, comp = cokernel(vstack(F, d00, [f, -g]))
    can = hstack(F, d11, [h, k]) @ ExactMatrix.unit_columns(F, d10 + d01, comp)
    cocart = P.rows == d11 and can.rank() == d11
    # pullback = ker(X10 + X01 -> X11), canonical map from X00
    Kn = nullspace(hstack(F, d11, [h, -k]))
    cart = Kn.cols == d00 and vstack(F, d00, [f, g]).rank() == d00
    return SquareReport((x00, x10, x01, x11), cocart, cart)


def _subsquares(coords, n):
    pts = set(coords)
    for k, l in itertools.combinations(range(n), 2):
        for t in sorted(pts):
            for a2 in range(t[k] + 1, 3):
                for b2 in range(t[l] + 1, 3):
                    t10 = t[:k] + (a2,) + t[k + 1:]
                    t01 = t[:l] + (b2,) + t[l + 1:]
                    t11 = t10[:l] + (b2,) + t10[l + 1:]
                    if {t10, t01, t11} <= pts:
                        yield t, t10, t01, t11


@dataclass
class ExactnessReport:
    kind: str
    ok: bool
    failures: list[str]
    details: dict = field(default_factory=dict)

    def to_json(self):
        return {"kind": self.kind, "verdict": "true" if self.ok else "false",
                "failures": self.failures, **self.details}


def exactness_check(X: VectDiagram, kind: str, along: CatFunctor | None = None) -> ExactnessReport:
    """Exactness conditions on a square or cube shaped diagram (optionally
    restricted along ``along`` first).  The base must be thin with objects
    named by coordinate tuples."""
    if along is not None:
        X = restrict(X, along)
    coords, n = _cube_index(X.base)
    fails = []
    if kind in ("cocartesian_square", "cartesian_square", "cofiber_square"):
        if n != 2 or set(coords) != set(itertools.product((0, 1), repeat=2)):
            raise ShapeMismatch(f"{kind} needs a square base")
        rep = square_exactness(X, coords, (0, 0), (1, 0), (0, 1), (1, 1))
        if kind != "cartesian_square" and not rep.cocartesian:
            fails.append("not cocartesian")
        if kind == "cartesian_square" and not rep.cartesian:
            fails.append("not cartesian")
        if kind == "cofiber_square" and X.dims[coords[(0, 1)]] != 0:
            fails.append("value at (0,1) is not zero")
        return ExactnessReport(kind, not fails, fails)
    if kind == "strongly_bicartesian_cube":
        if set(coords) != set(itertools.product((0, 1), repeat=n)) and \
                set(coords) != set(itertools.product((0, 1, 2), repeat=n)):
            raise ShapeMismatch("strongly bicartesian check needs [1]^n or [2]^n")
        for sq in _subsquares(coords, n):
            rep = square_exactness(X, coords, *sq)
            if not (rep.cartesian and rep.cocartesian):
                fails.append(f"subsquare {sq} is not bicartesian")
        return ExactnessReport(kind, not fails, fails)
    if kind == "biproduct_conditions":
        if set(coords) != set(itertools.product((0, 1, 2), repeat=n)):
            raise ShapeMismatch("biproduct conditions need the base [2]^n")
        for t in itertools.product((0, 2), repeat=n):
            if X.dims[coords[t]]:
                fails.append(f"corner {tuple_name(t)} is not zero")
        for sq in _subsquares(coords, n):
            rep = square_exactness(X, coords, *sq)
            if not (rep.cartesian and rep.cocartesian):
                fails.append(f"subsquare {tuple(map(tuple_name, sq))} is not bicartesian")
        for t in coords:
            for k in range(n):
                if t[k] == 0:
                    M = _between(X, coords, t, t[:k] + (2,) + t[k + 1:])
                    if M.rows != M.cols or M.rank() != M.rows:
                        fails.append(f"length-two map from {tuple_name(t)} in direction {k + 1} "
                                     "is not invertible")
        return ExactnessReport(kind, not fails, fails,
                               {"center_dim": X.dims[coords[(1,) * n]]})
    raise ValueError(f"unknown exactness kind {kind!r}")


# -- the biproduct cube ---------------------------------------------------------------

def biproduct_cube(inputs: Sequence[int], F: FieldSpec) -> VectDiagram:
    """Diagram on ``[2]^n`` with the inputs at ``(2,..,1_i,..,2)`` built by right
    extension by zero, right Kan extension to ``{1,2}^n``, left extension by
    zero to the corners ``(2,..,0_i,..,2)`` and right Kan extension to ``[2]^n``."""
    n = len(inputs)
    if n < 1:
        raise ValueError("need at least one input")
    full = cube_poset(n)
    pos = [tuple(1 if j == i else 2 for j in range(n)) for i in range(n)]
    far = (2,) * n
    corners = [tuple(0 if j == i else 2 for j in range(n)) for i in range(n)]
    inner = list(itertools.product((1, 2), repeat=n))
    stages = [pos, pos + [far], inner, inner + [c for c in corners if c not in inner],
              list(itertools.product((0, 1, 2), repeat=n))]
    cats = [subcube(s, name=f"w{k}") for k, s in enumerate(stages[:-1])] + [full]
    X = VectDiagram(cats[0], F, list(inputs), {}, check=False)
    for k, side in enumerate(("right", "right", "left", "right")):
        A, B = cats[k], cats[k + 1]
        u = CatFunctor.from_names(A, B, {o: o for o in A.objects},
                                  {m: m for m in A.mor_names})
        X = kan_extend(X, u, side).diagram
    return X


# -- the reflection pipeline ------------------------------------------------------------

def invert_cube(X: VectDiagram, ch: ReflectionChain) -> VectDiagram:
    """The diagram on ``Q2`` restricting to ``X`` along ``u5``: every inverted
    generator gets the exact inverse of the corresponding length-two map."""
    Q1, Q2 = ch.stages["Q1"], ch.stages["Q2"]
    if X.base is not Q1:
        raise BaseMismatch("invert_cube needs a diagram on Q1")
    u5 = ch.functors["u5"]
    maps = {}
    inv_of = {}
    for g in Q2.gens:
        nm = Q2.mor_names[g]
        if nm in Q1.mor_names:
            maps[g] = X.map(nm)
            continue
        # r{k}(t): t_k = 2 -> 0; inverse of the length-two map 0 -> 2
        s = Q2.objects[Q2.src[g]]
        t = Q2.objects[Q2.tgt[g]]
        start = _coords(ch, t)
        k = int(nm[1:nm.index("(")]) - 1
        L = X.map(ch.cube_morphism(Q1, start, _coords(ch, s)))
        if L.rows != L.cols or L.rank() != L.rows:
            raise NotInvertible(f"length-two map {tuple_name(start)} -> {s} in direction {k + 1} "
                                "is singular")
        maps[g] = L.inverse()
        inv_of[g] = L
    Y = VectDiagram(Q2, X.field, [X.dims[Q1.obj(o)] for o in Q2.objects], maps, check=False)
    bad = Y.audit()
    if bad:
        raise NotFunctorial("; ".join(bad[:3]))
    assert all(u5.ob[x] == Q2.obj(Q1.objects[x]) for x in range(Q1.n_obj))
    return Y


def _coords(ch: ReflectionChain, name: str):
    for i, q in enumerate(ch.neighbours):
        if name == q:
            return ch.position(i)
    return tuple(int(x) for x in name.strip("()").split(","))


def length_two_audit(X: VectDiagram, ch: ReflectionChain) -> list[str]:
    """Length-two cube maps of a diagram on ``Q1`` that are not invertible."""
    bad = []
    Q1 = ch.stages["Q1"]
    for t in itertools.product((0, 1, 2), repeat=ch.n):
        for k in range(ch.n):
            if t[k] == 0:
                e = t[:k] + (2,) + t[k + 1:]
                L = X.map(ch.cube_morphism(Q1, t, e))
                if L.rows != L.cols or L.rank() != L.rows:
                    bad.append(f"{tuple_name(t)} -> {tuple_name(e)}")
    return bad


@dataclass
class StageRecord:
    stage: str
    step: str
    dims: dict
    audit: str

    def to_json(self):
        return {"stage": self.stage, "step": self.step, "dims": self.dims, "audit": self.audit}


@dataclass
class PipelineResult:
    result: Representation
    trace: list[StageRecord]
    classical: Representation | None = None
    isomorphism: object | None = None

    @property
    def matches(self) -> bool | None:
        if self.classical is None:
            return None
        return self.isomorphism is not None

    def to_json(self):
        out = {"dims": self.result.dims, "trace": [r.to_json() for r in self.trace]}
        if self.classical is not None:
            out["classical_dims"] = self.classical.dims
            out["verdict"] = "true" if self.matches else "false"
        return out


_CHAINS: dict = {}


def chain_for(Q, q0) -> ReflectionChain:
    key = (Q, q0)
    ch = _CHAINS.get(key)
    if ch is None:
        ch = _CHAINS[key] = build_reflection_chain(Q, q0)
    return ch


def pipeline_reflect(M: Representation, q0: str, compare_classical: bool = False,
                     chain: ReflectionChain | None = None, seed: int = 0) -> PipelineResult:
    """Run ``M`` through the gluing chain at the source ``q0`` and read the
    result off on the reflected quiver."""
    ch = chain or chain_for(M.quiver, q0)
    Fn = ch.functors
    trace = []

    def record(stage, step, X):
        bad = X.audit()
        trace.append(StageRecord(stage, step, dict(zip(X.base.objects, X.dims)),
                                 "ok" if not bad else "; ".join(bad[:2])))
        if bad:
            raise NotFunctorial(f"stage {stage}: {bad[0]}")

    X = rep_to_diagram(M, ch.stages["Q"])
    record("Q", "input", X)
    for key, side, stage in (("u1", "right", "Q(1)"), ("u2", "right", "Q(2)"),
                             ("u3", "left", "Q(3)"), ("u4", "right", "Q1")):
        X = kan_extend(X, Fn[key], side).diagram
        record(stage, f"{key}_{'*' if side == 'right' else '!'}", X)
    bad = length_two_audit(X, ch)
    trace.append(StageRecord("Q1", "length-two audit", {}, "ok" if not bad else "; ".join(bad[:2])))
    X = invert_cube(X, ch)
    record("Q2", "invert", X)
    X = kan_extend(X, Fn["u6"], "right").diagram
    record("Q(4)", "u6_*", X)
    X = kan_extend(X, Fn["u7"], "left").diagram
    record("Q3", "u7_!", X)
    j = reflected_embedding(ch)
    R = diagram_to_rep(X, j, reflect(M.quiver, q0))
    out = PipelineResult(R, trace)
    if compare_classical:
        out.classical = reflect_minus(M, q0)
        out.isomorphism = find_isomorphism(R, out.classical, seed=seed)
    return out
