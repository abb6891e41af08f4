"""Quivers, source/sink reflections and reorientation of trees."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

from .errors import (CyclicQuiver, GraphMismatch, InputError, NotATree,
                     UnknownVertex)

SOURCE, SINK, INTERIOR, ISOLATED = "source", "sink", "interior", "isolated"


@dataclass(frozen=True)
class Arrow:
    id: str
    src: str
    tgt: str


@dataclass(frozen=True)
class Quiver:
    """Finite directed multigraph with named vertices and arrows.

    ``vertices`` keeps the insertion order; outputs preserve every identifier.
    """

    vertices: tuple[str, ...]
    arrows: tuple[Arrow, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(str(v) for v in self.vertices))
        object.__setattr__(self, "arrows", tuple(
            a if isinstance(a, Arrow) else Arrow(*map(str, a)) for a in self.arrows))
        if len(set(self.vertices)) != len(self.vertices):
            raise InputError("duplicate vertex identifier")
        ids = [a.id for a in self.arrows]
        if len(set(ids)) != len(ids):
            raise InputError("duplicate arrow identifier")
        vs = set(self.vertices)
        for a in self.arrows:
            if a.src not in vs or a.tgt not in vs:
                raise InputError(f"arrow {a.id} has an endpoint outside the vertex set")

    @classmethod
    def build(cls, vertices: Iterable, arrows: Iterable[tuple]) -> "Quiver":
        """``Quiver.build("123", [("a","1","2")])``."""
        return cls(tuple(vertices), tuple(Arrow(*map(str, a)) for a in arrows))

    def arrow(self, aid: str) -> Arrow:
        for a in self.arrows:
            if a.id == aid:
                return a
        raise KeyError(aid)

    def adjacent(self, v: str) -> list[Arrow]:
        self._check(v)
        return [a for a in self.arrows if v in (a.src, a.tgt)]

    def out_arrows(self, v: str) -> list[Arrow]:
        return [a for a in self.arrows if a.src == v]

    def in_arrows(self, v: str) -> list[Arrow]:
        return [a for a in self.arrows if a.tgt == v]

    def _check(self, v):
        if v not in self.vertices:
            raise UnknownVertex(v)

    def undirected_edges(self):
        """Arrow id -> unordered endpoint pair."""
        return {a.id: frozenset((a.src, a.tgt)) for a in self.arrows}

    def opposite(self) -> "Quiver":
        return Quiver(self.vertices, tuple(Arrow(a.id, a.tgt, a.src) for a in self.arrows))


def classify_vertex(Q: Quiver, v: str) -> str:
    adj = Q.adjacent(v)
    if not adj:
        return ISOLATED
    if any(a.src == a.tgt for a in adj):
        return INTERIOR
    if all(a.src == v for a in adj):
        return SOURCE
    if all(a.tgt == v for a in adj):
        return SINK
    return INTERIOR


def reflect(Q: Quiver, v: str) -> Quiver:
    Q._check(v)
    return Quiver(Q.vertices, tuple(
        Arrow(a.id, a.tgt, a.src) if v in (a.src, a.tgt) else a for a in Q.arrows))


def is_oriented_tree(Q: Quiver) -> bool:
    if not Q.vertices or len(Q.arrows) != len(Q.vertices) - 1:
        return False
    parent = {v: v for v in Q.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in Q.arrows:
        r1, r2 = find(a.src), find(a.tgt)
        if r1 == r2:
            return False
        parent[r1] = r2
    return True


def is_acyclic(Q: Quiver) -> bool:
    try:
        topological_order(Q)
    except CyclicQuiver:
        return False
    return True


def topological_order(Q: Quiver) -> list[str]:
    indeg = {v: 0 for v in Q.vertices}
    for a in Q.arrows:
        indeg[a.tgt] += 1
    ready = [v for v in Q.vertices if indeg[v] == 0]
    out = []
    while ready:
        v = ready.pop(0)
        out.append(v)
        for a in Q.out_arrows(v):
            indeg[a.tgt] -= 1
            if indeg[a.tgt] == 0:
                ready.append(a.tgt)
    if len(out) != len(Q.vertices):
        raise CyclicQuiver("quiver has a directed cycle")
    return out


def paths_from(Q: Quiver, v: str) -> list[tuple[str, ...]]:
    """All directed paths starting at ``v`` as arrow-id tuples (application
    order), sorted lexicographically; the empty path comes first."""
    if not is_acyclic(Q):
        raise CyclicQuiver("quiver has a directed cycle")
    out = []

    def walk(w, path):
        out.append(path)
        for a in Q.out_arrows(w):
            walk(a.tgt, path + (a.id,))

    walk(v, ())
    return sorted(out)


def path_end(Q: Quiver, start: str, path: tuple[str, ...]) -> str:
    v = start
    for aid in path:
        v = Q.arrow(aid).tgt
    return v


def path_count_matrix(Q: Quiver) -> dict[tuple[str, str], int]:
    """(u, v) -> number of directed paths u ~> v, trivial paths included."""
    counts = defaultdict(int)
    for u in Q.vertices:
        for p in paths_from(Q, u):
            counts[(u, path_end(Q, u, p))] += 1
    return {(u, v): counts[(u, v)] for u in Q.vertices for v in Q.vertices}


@dataclass(frozen=True)
class ReflectionStep:
    vertex: str
    kind: str  # SOURCE or SINK

    def to_json(self):
        return {"vertex": self.vertex, "kind": self.kind}


def apply_step(Q: Quiver, step: ReflectionStep) -> Quiver:
    kind = classify_vertex(Q, step.vertex)
    if kind != step.kind:
        raise InputError(f"step at {step.vertex}: vertex is {kind}, not {step.kind}")
    return reflect(Q, step.vertex)


def replay(Q: Quiver, plan: Iterable[ReflectionStep]) -> Quiver:
    for step in plan:
        Q = apply_step(Q, step)
    return Q


def _check_same_graph(Q: Quiver, Q2: Quiver):
    if set(Q.vertices) != set(Q2.vertices):
        raise GraphMismatch("vertex sets differ")
    if Q.undirected_edges() != Q2.undirected_edges():
        raise GraphMismatch("arrow identifiers or underlying edges differ")


def plan_reorientation(Q: Quiver, Q2: Quiver) -> list[ReflectionStep]:
    """Reflections at sources/sinks turning the tree ``Q`` into ``Q2``.

    Leaves are peeled one at a time.  A plan for the tree without the leaf is
    lifted back: before a step at the leaf's neighbour, the leaf is reflected
    if its edge would make that step inadmissible, and a final leaf
    reflection fixes the leaf edge itself.
    """
    for q in (Q, Q2):
        if not is_oriented_tree(q):
            raise NotATree("reorientation needs oriented trees")
    _check_same_graph(Q, Q2)
    want = {a.id: (a.src, a.tgt) for a in Q2.arrows}
    return _plan(Q, want)


def _plan(Q: Quiver, want: dict) -> list[ReflectionStep]:
    if not Q.arrows:
        return []
    deg = defaultdict(int)
    for a in Q.arrows:
        deg[a.src] += 1
        deg[a.tgt] += 1
    leaf = next(v for v in Q.vertices if deg[v] == 1)
    edge = Q.adjacent(leaf)[0]
    nb = edge.tgt if edge.src == leaf else edge.src
    sub = Quiver(tuple(v for v in Q.vertices if v != leaf),
                 tuple(a for a in Q.arrows if a.id != edge.id))
    steps = []
    cur = Q
    for st in _plan(sub, want):
        if st.vertex == nb and classify_vertex(cur, nb) != st.kind:
            steps.append(ReflectionStep(leaf, classify_vertex(cur, leaf)))
            cur = reflect(cur, leaf)
        steps.append(ReflectionStep(st.vertex, classify_vertex(cur, st.vertex)))
        cur = reflect(cur, st.vertex)
    a = cur.arrow(edge.id)
    if (a.src, a.tgt) != want[edge.id]:
        steps.append(ReflectionStep(leaf, classify_vertex(cur, leaf)))
    return steps
