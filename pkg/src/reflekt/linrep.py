"""Representations of quivers over Q and F_p, and the reflection functors."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import Mismatch, NotASink, NotASource, NotATree
from .linalg import (ExactMatrix, FieldSpec, block_diag, cokernel, free_columns,
                     hstack, nullspace, random_matrix, solve, vstack)
from .quiver import (SINK, SOURCE, Quiver, classify_vertex, is_oriented_tree,
                     path_count_matrix, path_end, paths_from, reflect)


@dataclass(frozen=True)
class Representation:
    quiver: Quiver
    field: FieldSpec
    dims: Mapping[str, int]
    maps: Mapping[str, ExactMatrix]

    def __post_init__(self):
        dims = {v: int(self.dims.get(v, 0)) for v in self.quiver.vertices}
        object.__setattr__(self, "dims", dims)
        for a in self.quiver.arrows:
            m = self.maps.get(a.id)
            if m is None:
                raise Mismatch(f"no matrix for arrow {a.id}")
            if m.field != self.field:
                raise Mismatch(f"arrow {a.id}: matrix over {m.field}, representation over {self.field}")
            if m.shape != (dims[a.tgt], dims[a.src]):
                raise Mismatch(f"arrow {a.id}: shape {m.shape}, expected {(dims[a.tgt], dims[a.src])}")
        object.__setattr__(self, "maps", {a.id: self.maps[a.id] for a in self.quiver.arrows})

    def dim_vector(self):
        return tuple(self.dims[v] for v in self.quiver.vertices)

    def total_dim(self):
        return sum(self.dims.values())

    def __eq__(self, other):
        return (isinstance(other, Representation) and self.quiver == other.quiver
                and self.field == other.field and self.dims == other.dims
                and self.maps == other.maps)

    def __hash__(self):
        return hash((self.quiver, self.field, tuple(sorted(self.dims.items()))))


@dataclass(frozen=True)
class RepMorphism:
    source: Representation
    target: Representation
    components: Mapping[str, ExactMatrix]

    def is_intertwining(self) -> bool:
        for a in self.source.quiver.arrows:
            lhs = self.components[a.tgt] @ self.source.maps[a.id]
            rhs = self.target.maps[a.id] @ self.components[a.src]
            if lhs != rhs:
                return False
        return True

    def is_iso(self) -> bool:
        return all(c.rows == c.cols and c.rank() == c.rows for c in self.components.values())


def zero_rep(Q: Quiver, F: FieldSpec) -> Representation:
    return Representation(Q, F, {v: 0 for v in Q.vertices},
                          {a.id: ExactMatrix.zeros(F, 0, 0) for a in Q.arrows})


def simple(Q: Quiver, v: str, F: FieldSpec) -> Representation:
    dims = {w: int(w == v) for w in Q.vertices}
    return Representation(Q, F, dims, {a.id: ExactMatrix.zeros(F, dims[a.tgt], dims[a.src])
                                      for a in Q.arrows})


def random_rep(Q: Quiver, F: FieldSpec, rng: random.Random, max_dim: int = 3) -> Representation:
    dims = {v: rng.randint(0, max_dim) for v in Q.vertices}
    return Representation(Q, F, dims, {a.id: random_matrix(F, dims[a.tgt], dims[a.src], rng)
                                      for a in Q.arrows})


def _same_base(M: Representation, N: Representation):
    if M.quiver != N.quiver:
        raise Mismatch("representations live on different quivers")
    if M.field != N.field:
        raise Mismatch(f"field {M.field} vs {N.field}")


def hom_basis(M: Representation, N: Representation) -> list[RepMorphism]:
    """Basis of Hom(M, N), from the kernel of the intertwining system.

    Unknowns are the entries of each component ``phi_v`` (``dim N_v x dim M_v``,
    row-major, vertices in quiver order).
    """
    _same_base(M, N)
    F = M.field
    Q = M.quiver
    offset = {}
    n = 0
    for v in Q.vertices:
        offset[v] = n
        n += N.dims[v] * M.dims[v]
    rows = []
    p = F.p
    for a in Q.arrows:
        s, t = a.src, a.tgt
        Ma, Na = M.maps[a.id], N.maps[a.id]
        # (phi_t Ma - Na phi_s)[i][j] = 0
        for i in range(N.dims[t]):
            for j in range(M.dims[s]):
                row = [F.zero] * n
                for k in range(M.dims[t]):
                    x = Ma.data[k][j]
                    if x:
                        idx = offset[t] + i * M.dims[t] + k
                        row[idx] += x
                for k in range(N.dims[s]):
                    x = Na.data[i][k]
                    if x:
                        idx = offset[s] + k * M.dims[s] + j
                        row[idx] -= x
                if p:
                    row = [x % p for x in row]
                rows.append(row)
    K = nullspace(ExactMatrix(F, len(rows), n, rows)) if rows else ExactMatrix.identity(F, n)
    out = []
    for c in range(K.cols):
        comps = {}
        for v in Q.vertices:
            r, cc = N.dims[v], M.dims[v]
            o = offset[v]
            comps[v] = ExactMatrix(F, r, cc, [[K.data[o + i * cc + j][c] for j in range(cc)]
                                              for i in range(r)])
        out.append(RepMorphism(M, N, comps))
    return out


def linear_combination(F: FieldSpec, basis: Sequence[RepMorphism], coeffs) -> RepMorphism:
    b0 = basis[0]
    comps = {}
    for v, m0 in b0.components.items():
        acc = ExactMatrix.zeros(F, m0.rows, m0.cols)
        for c, b in zip(coeffs, basis):
            if c:
                acc = acc + b.components[v].scale(c)
        comps[v] = acc
    return RepMorphism(b0.source, b0.target, comps)


def find_isomorphism(M: Representation, N: Representation, seed: int = 0,
                     tries: int = 256) -> RepMorphism | None:
    """Search for an isomorphism ``M -> N`` among random combinations of a
    hom basis.  ``None`` means none was found (not a proof of non-isomorphism
    unless the dimension vectors differ)."""
    _same_base(M, N)
    if M.dims != N.dims:
        return None
    F = M.field
    if M.total_dim() == 0:
        return RepMorphism(M, N, {v: ExactMatrix.zeros(F, 0, 0) for v in M.quiver.vertices})
    basis = hom_basis(M, N)
    if not basis:
        return None
    rng = random.Random(seed)
    for t in range(tries):
        hi = 3 + t // 16
        coeffs = [F.elem(rng.randint(-hi, hi)) if not F.p else rng.randrange(F.p) for _ in basis]
        f = linear_combination(F, basis, coeffs)
        if f.is_iso():
            return f
    return None


def kernel(f: RepMorphism):
    """Vertexwise kernel ``K`` with its inclusion ``K -> source``."""
    M = f.source
    F = M.field
    Q = M.quiver
    inc, left = {}, {}
    for v in Q.vertices:
        fv = f.components[v]
        inc[v] = nullspace(fv)
        left[v] = free_columns(fv)
    dims = {v: inc[v].cols for v in Q.vertices}
    maps = {}
    for a in Q.arrows:
        img = M.maps[a.id] @ inc[a.src]
        maps[a.id] = img.submatrix(left[a.tgt], range(img.cols))
    K = Representation(Q, F, dims, maps)
    mor = RepMorphism(K, M, inc)
    assert mor.is_intertwining()
    return K, mor


def cokernel_rep(f: RepMorphism):
    """Vertexwise cokernel ``C`` with the projection ``target -> C``."""
    N = f.target
    F = N.field
    Q = N.quiver
    proj, comp = {}, {}
    for v in Q.vertices:
        proj[v], comp[v] = cokernel(f.components[v])
    dims = {v: proj[v].rows for v in Q.vertices}
    maps = {}
    for a in Q.arrows:
        sec = ExactMatrix.unit_columns(F, N.dims[a.src], comp[a.src])
        maps[a.id] = proj[a.tgt] @ N.maps[a.id] @ sec
    C = Representation(Q, F, dims, maps)
    mor = RepMorphism(N, C, proj)
    assert mor.is_intertwining()
    return C, mor


def projective(Q: Quiver, v: str, F: FieldSpec) -> Representation:
    """Indecomposable projective at ``v``: paths out of ``v`` in lexicographic order."""
    paths = paths_from(Q, v)
    by_end = {w: [] for w in Q.vertices}
    for p in paths:
        by_end[path_end(Q, v, p)].append(p)
    index = {w: {p: i for i, p in enumerate(ps)} for w, ps in by_end.items()}
    maps = {}
    for a in Q.arrows:
        s, t = a.src, a.tgt
        m = [[F.zero] * len(by_end[s]) for _ in by_end[t]]
        for j, p in enumerate(by_end[s]):
            m[index[t][p + (a.id,)]][j] = F.one
        maps[a.id] = ExactMatrix(F, len(by_end[t]), len(by_end[s]), m)
    return Representation(Q, F, {w: len(ps) for w, ps in by_end.items()}, maps)


def _star(Q: Quiver, q0: str, out: bool):
    """Arrows at ``q0`` sorted by (neighbour id, arrow id)."""
    arrs = Q.out_arrows(q0) if out else Q.in_arrows(q0)
    return sorted(arrs, key=lambda a: ((a.tgt if out else a.src), a.id))


def canonical_map(M: Representation, q0: str) -> ExactMatrix:
    """``M_q0 -> (+)_i M_qi`` stacked from the arrow maps out of the source ``q0``."""
    arrs = _star(M.quiver, q0, out=True)
    return vstack(M.field, M.dims[q0], [M.maps[a.id] for a in arrs])


def reflect_minus(M: Representation, q0: str) -> Representation:
    Q = M.quiver
    if classify_vertex(Q, q0) != SOURCE:
        raise NotASource(q0)
    F = M.field
    arrs = _star(Q, q0, out=True)
    P, _ = cokernel(canonical_map(M, q0))
    dims = dict(M.dims)
    dims[q0] = P.rows
    maps = dict(M.maps)
    col = 0
    for a in arrs:
        d = M.dims[a.tgt]
        maps[a.id] = P.submatrix(range(P.rows), range(col, col + d))
        col += d
    return Representation(reflect(Q, q0), F, dims, maps)


def reflect_plus(N: Representation, q0: str) -> Representation:
    Q = N.quiver
    if classify_vertex(Q, q0) != SINK:
        raise NotASink(q0)
    F = N.field
    arrs = _star(Q, q0, out=False)
    total = sum(N.dims[a.src] for a in arrs)
    K = nullspace(hstack(F, N.dims[q0], [N.maps[a.id] for a in arrs]))
    dims = dict(N.dims)
    dims[q0] = K.cols
    maps = dict(N.maps)
    row = 0
    for a in arrs:
        d = N.dims[a.src]
        maps[a.id] = K.submatrix(range(row, row + d), range(K.cols))
        row += d
    assert row == total
    return Representation(reflect(Q, q0), F, dims, maps)


@dataclass
class AdjunctionReport:
    dim_left: int          # dim Hom(s^- M, N)
    dim_right: int         # dim Hom(M, s^+ N)
    transfer: ExactMatrix  # matrix of Hom(s^- M, N) -> Hom(M, s^+ N) in the hom bases
    bijective: bool

    @property
    def ok(self):
        return self.dim_left == self.dim_right and self.bijective


def _coords(F, basis: list[RepMorphism], g: RepMorphism) -> list:
    """Coordinates of ``g`` in ``basis`` (solved on the flattened components)."""
    verts = list(g.components)

    def flat(h):
        return [x for v in verts for r in h.components[v].data for x in r]

    n = len(flat(g))
    A = ExactMatrix(F, n, len(basis), list(zip(*[flat(b) for b in basis]))) if basis else \
        ExactMatrix.zeros(F, n, 0)
    return [r[0] for r in solve(A, ExactMatrix(F, n, 1, [[x] for x in flat(g)])).data]


def check_adjunction(M: Representation, N: Representation, q0: str) -> AdjunctionReport:
    """Compare Hom(s^- M, N) with Hom(M, s^+ N) via the explicit transfer
    ``phi -> (phi_v away from q0, m -> (phi_qi M_fi m)_i at q0)``."""
    Q = M.quiver
    if N.quiver != reflect(Q, q0):
        raise Mismatch("N must live on the reflected quiver")
    if M.field != N.field:
        raise Mismatch("fields differ")
    F = M.field
    sM = reflect_minus(M, q0)
    sN = reflect_plus(N, q0)
    left = hom_basis(sM, N)
    right = hom_basis(M, sN)
    arrs = _star(Q, q0, out=True)
    K = nullspace(hstack(F, N.dims[q0], [N.maps[a.id] for a in _star(N.quiver, q0, out=False)]))
    kfree = free_columns(hstack(F, N.dims[q0], [N.maps[a.id] for a in _star(N.quiver, q0, out=False)]))
    cols = []
    for phi in left:
        comps = {v: phi.components[v] for v in Q.vertices if v != q0}
        stacked = vstack(F, M.dims[q0], [phi.components[a.tgt] @ M.maps[a.id] for a in arrs])
        comps[q0] = stacked.submatrix(kfree, range(stacked.cols))
        img = RepMorphism(M, sN, comps)
        assert img.is_intertwining()
        assert K @ comps[q0] == stacked
        cols.append(_coords(F, right, img))
    T = ExactMatrix(F, len(right), len(left), [list(r) for r in zip(*cols)]) if cols else \
        ExactMatrix.zeros(F, len(right), 0)
    bij = T.rows == T.cols and T.rank() == T.rows
    return AdjunctionReport(len(left), len(right), T, bij)


@dataclass
class TiltReport:
    dim_end: int
    dim_path_algebra: int
    hom_matrix: dict
    path_matrix: dict

    @property
    def ok(self):
        return self.dim_end == self.dim_path_algebra and self.hom_matrix == self.path_matrix


def tilting_summands(Q: Quiver, q0: str, F: FieldSpec) -> dict[str, Representation]:
    """Summands of the APR module at the source ``q0``, as right modules.

    Right kQ-modules are representations of the opposite quiver, where ``q0``
    is a sink and its projective is simple.  ``T_q0`` is the cokernel of
    ``P_q0 -> (+)_i P_qi``; ``T_v = P_v`` otherwise.
    """
    Qop = Q.opposite()
    P = {v: projective(Qop, v, F) for v in Q.vertices}
    T = {v: P[v] for v in Q.vertices if v != q0}
    arrs = _star(Q, q0, out=True)
    # Hom(P_q0, P_qi) is P_qi at q0; the arrow q0 -> qi of Q is a path qi ~> q0 in Qop
    comps = {}
    for v in Q.vertices:
        blocks = []
        for a in arrs:
            Pi = P[a.tgt]
            # the morphism P_q0 -> P_qi sends the empty path at q0 to the path (a,)
            # at q0, extended along paths of Qop out of q0 (there are none: q0 is a sink)
            blocks.append(_path_morphism(Qop, Pi, a.tgt, v, a.id, F, P[q0].dims[v]))
        total = sum(b.rows for b in blocks)
        comps[v] = vstack(F, P[q0].dims[v], blocks) if blocks else ExactMatrix.zeros(F, total, P[q0].dims[v])
    S = _direct_sum([P[a.tgt] for a in arrs], Qop, F)
    f = RepMorphism(P[q0], S, comps)
    assert f.is_intertwining()
    T[q0] = cokernel_rep(f)[0]
    return T


def _path_morphism(Qop, Pi, qi, v, aid, F, src_dim):
    """Component at ``v`` of the map ``P_q0 -> P_qi`` given by the arrow ``aid``."""
    if src_dim == 0:
        return ExactMatrix.zeros(F, Pi.dims[v], 0)
    paths = [p for p in paths_from(Qop, qi) if path_end(Qop, qi, p) == v]
    m = [[F.zero] for _ in paths]
    m[paths.index((aid,))][0] = F.one
    return ExactMatrix(F, len(paths), 1, m)


def _direct_sum(reps: Sequence[Representation], Q: Quiver, F: FieldSpec) -> Representation:
    dims = {v: sum(r.dims[v] for r in reps) for v in Q.vertices}
    maps = {a.id: block_diag(F, [r.maps[a.id] for r in reps]) if reps
            else ExactMatrix.zeros(F, 0, 0) for a in Q.arrows}
    return Representation(Q, F, dims, maps)


def apr_tilting_check(Q: Quiver, q0: str, F: FieldSpec) -> TiltReport:
    if not is_oriented_tree(Q):
        raise NotATree("APR check needs an oriented tree")
    if classify_vertex(Q, q0) != SOURCE:
        raise NotASource(q0)
    T = tilting_summands(Q, q0, F)
    H = {(u, v): len(hom_basis(T[u], T[v])) for u in Q.vertices for v in Q.vertices}
    C = path_count_matrix(reflect(Q, q0))
    return TiltReport(sum(H.values()), sum(C.values()), H, C)


def euler_form(Q: Quiver, d: Mapping[str, int], e: Mapping[str, int]) -> int:
    return (sum(d[v] * e[v] for v in Q.vertices)
            - sum(d[a.src] * e[a.tgt] for a in Q.arrows))


def reflect_dim_vector(Q: Quiver, q0: str, d: Mapping[str, int]) -> dict:
    out = dict(d)
    out[q0] = sum(d[a.tgt if a.src == q0 else a.src] for a in Q.adjacent(q0)) - d[q0]
    return out


@dataclass
class EulerReport:
    pairs: list
    ok: bool


def euler_reflection_check(Q: Quiver, q0: str, samples) -> EulerReport:
    if not is_oriented_tree(Q):
        raise NotATree("Euler check needs an oriented tree")
    if classify_vertex(Q, q0) not in (SOURCE, SINK):
        raise NotASource(q0)
    Q2 = reflect(Q, q0)
    pairs = []
    for d, e in samples:
        lhs = euler_form(Q, d, e)
        rhs = euler_form(Q2, reflect_dim_vector(Q, q0, d), reflect_dim_vector(Q, q0, e))
        pairs.append((lhs, rhs))
    return EulerReport(pairs, all(a == b for a, b in pairs))


__all__ = [
    "Representation", "RepMorphism", "hom_basis", "kernel", "cokernel_rep", "projective",
    "reflect_minus", "reflect_plus", "check_adjunction", "apr_tilting_check",
    "euler_reflection_check", "find_isomorphism", "simple", "zero_rep", "random_rep",
    "canonical_map",
]
