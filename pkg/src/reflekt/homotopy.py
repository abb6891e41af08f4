"""Nerves of loopfree finite categories, integral homology, collapse
certificates, and the homotopical-epimorphism / homotopy-exactness checks."""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

from .errors import NotLoopfree, NotLoopfreeD, NotLoopfreeSource, SizeLimit
from .fincat.core import CatFunctor, FinCat
from .fincat.factor import Square, _PostCache, factorization_categories, two_sided_factor

MAX_SIMPLICES = 400_000
CONTRACTIBLE, NOT_CONTRACTIBLE, UNKNOWN = "contractible", "not_contractible", "unknown"


def is_loopfree(C: FinCat) -> bool:
    return C.is_loopfree()


@dataclass
class SimplicialComplexData:
    """Semi-simplicial complex: ``simplices[k]`` are the k-simplices (for the
    nerve: the object for k = 0, chains of k non-identity morphisms otherwise)
    and ``faces[k][i]`` lists the k+1 facets ``d_0 .. d_k`` of simplex ``i``."""

    simplices: list[list[tuple]]
    faces: list[list[tuple[int, ...]]]
    labels: list[str] | None = None  # vertex labels

    @property
    def dim(self):
        return len(self.simplices) - 1

    def counts(self):
        return [len(s) for s in self.simplices]

    def size(self):
        return sum(self.counts())

    def euler_characteristic(self):
        return sum((-1) ** k * n for k, n in enumerate(self.counts()))

    def check_identities(self) -> bool:
        """``d_i d_j = d_{j-1} d_i`` for ``i < j``."""
        for k in range(2, len(self.simplices)):
            for fs in self.faces[k]:
                for j in range(k + 1):
                    for i in range(j):
                        if self.faces[k - 1][fs[j]][i] != self.faces[k - 1][fs[i]][j - 1]:
                            return False
        return True


def nerve(C: FinCat, max_simplices: int = MAX_SIMPLICES) -> SimplicialComplexData:
    if not C.is_loopfree():
        raise NotLoopfree(f"{C!r} has non-identity endomorphisms or isomorphisms")
    simp = [[(x,) for x in range(C.n_obj)]]
    faces = [[() for _ in range(C.n_obj)]]
    nonid = [m for m in range(C.n_mor) if not C.is_identity(m)]
    out_nonid = [[m for m in C.out_list[y] if not C.is_identity(m)] for y in range(C.n_obj)]
    chains = [(m,) for m in nonid]
    simp.append(chains)
    faces.append([(C.tgt[m], C.src[m]) for m in nonid])
    index = {c: i for i, c in enumerate(chains)}
    total = C.n_obj + len(chains)
    while chains:
        nxt = []
        for c in chains:
            for m in out_nonid[C.tgt[c[-1]]]:
                nxt.append(c + (m,))
        if not nxt:
            break
        total += len(nxt)
        if total > max_simplices:
            raise SizeLimit(f"nerve has more than {max_simplices} simplices")
        k = len(nxt[0])
        fl = []
        for c in nxt:
            fs = [index[c[1:]]]
            for i in range(1, k):
                fs.append(index[c[:i - 1] + (C.compose(c[i], c[i - 1]),) + c[i + 1:]])
            fs.append(index[c[:-1]])
            fl.append(tuple(fs))
        simp.append(nxt)
        faces.append(fl)
        index = {c: i for i, c in enumerate(nxt)}
        chains = nxt
    return SimplicialComplexData(simp, faces, list(C.objects))


# -- integer linear algebra ---------------------------------------------------------

def boundary_matrix(K: SimplicialComplexData, k: int, reduced: bool = True):
    """Sparse rows of ``d_k : C_k -> C_{k-1}`` as ``{row: {col: value}}``
    (columns are k-simplices).  With ``reduced``, ``d_0`` is the augmentation."""
    rows: dict[int, dict[int, int]] = {}
    if k == 0:
        if reduced and K.simplices[0]:
            rows[0] = {j: 1 for j in range(len(K.simplices[0]))}
        return rows, (1 if reduced else 0), len(K.simplices[0])
    for j, fs in enumerate(K.faces[k]):
        for i, f in enumerate(fs):
            r = rows.setdefault(f, {})
            r[j] = r.get(j, 0) + (-1) ** i
            if r[j] == 0:
                del r[j]
    return rows, len(K.simplices[k - 1]), len(K.simplices[k])


def smith_invariants(rows: dict[int, dict[int, int]]) -> list[int]:
    """Nonzero invariant factors of a sparse integer matrix.

    Unit pivots are eliminated sparsely first; the remainder goes through a
    dense Smith normal form.
    """
    rows = {r: dict(v) for r, v in rows.items() if v}
    inv = []
    colidx: dict[int, set] = {}
    for r, v in rows.items():
        for c in v:
            colidx.setdefault(c, set()).add(r)
    progress = True
    while progress:
        progress = False
        for r in sorted(rows, key=lambda r: len(rows[r])):
            v = rows.get(r)
            if v is None:
                continue
            c = next((c for c, x in v.items() if x in (1, -1)), None)
            if c is None:
                continue
            # eliminate column c from every other row
            piv = rows.pop(r)
            for cc in piv:
                colidx[cc].discard(r)
            s = piv[c]
            for r2 in list(colidx.get(c, ())):
                w = rows[r2]
                f = w[c] * s
                for cc, x in piv.items():
                    y = w.get(cc, 0) - f * x
                    if y:
                        if cc not in w:
                            colidx.setdefault(cc, set()).add(r2)
                        w[cc] = y
                    elif cc in w:
                        del w[cc]
                        colidx[cc].discard(r2)
                if not w:
                    del rows[r2]
            inv.append(1)
            progress = True
    if rows:
        cols = sorted({c for v in rows.values() for c in v})
        cpos = {c: i for i, c in enumerate(cols)}
        dense = []
        for v in rows.values():
            row = [0] * len(cols)
            for c, x in v.items():
                row[cpos[c]] = x
            dense.append(row)
        inv.extend(_dense_snf(dense))
    return sorted(inv)


def _dense_snf(A: list[list[int]]) -> list[int]:
    A = [list(r) for r in A]
    m = len(A)
    n = len(A[0]) if m else 0
    out = []
    t = 0
    while t < min(m, n):
        # smallest nonzero entry as pivot
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        A[t], A[i] = A[i], A[t]
        for r in A:
            r[t], r[j] = r[j], r[t]
        done = False
        while not done:
            done = True
            p = A[t][t]
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // p
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                    if A[i][t]:
                        done = False
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // p
                    for r in A:
                        r[j] -= q * r[t]
                    if A[t][j]:
                        done = False
            if not done:
                # move the smallest remaining entry of row/column t into the pivot
                cand = [(abs(A[i][t]), i, t) for i in range(t, m) if A[i][t]] + \
                       [(abs(A[t][j]), t, j) for j in range(t, n) if A[t][j]]
                _, i, j = min(cand)
                A[t], A[i] = A[i], A[t]
                for r in A:
                    r[t], r[j] = r[j], r[t]
                continue
            # the pivot must divide every remaining entry
            p = A[t][t]
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p), None)
            if bad is not None:
                A[t] = [a + b for a, b in zip(A[t], A[bad[0]])]
                done = False
        out.append(abs(A[t][t]))
        t += 1
    return out


def rational_rank(rows: dict[int, dict[int, int]]) -> int:
    """Rank over Q by fraction-exact sparse elimination (independent of the SNF path)."""
    work = [{c: Fraction(x) for c, x in v.items() if x} for v in rows.values()]
    work = [w for w in work if w]
    rank = 0
    while work:
        w = work.pop()
        if not w:
            continue
        c = min(w)
        p = w[c]
        rank += 1
        nxt = []
        for u in work:
            if c in u:
                f = u[c] / p
                for cc, x in w.items():
                    y = u.get(cc, 0) - f * x
                    if y:
                        u[cc] = y
                    else:
                        u.pop(cc, None)
            if u:
                nxt.append(u)
        work = nxt
    return rank


@dataclass
class HomologyGroup:
    betti: int
    torsion: list[int]

    def is_zero(self):
        return self.betti == 0 and not self.torsion

    def __str__(self):
        parts = (["Z"] if self.betti == 1 else [f"Z^{self.betti}"] if self.betti else []) + \
                [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


def reduced_homology(K: SimplicialComplexData) -> list[HomologyGroup]:
    """Reduced integral homology in degrees ``0 .. dim``."""
    dims = K.counts()
    invs = []
    for k in range(len(dims) + 1):
        if k < len(dims):
            rows, _, _ = boundary_matrix(K, k)
            invs.append(smith_invariants(rows))
        else:
            invs.append([])
    out = []
    for k, n in enumerate(dims):
        r_k = len(invs[k])
        r_next = len(invs[k + 1])
        out.append(HomologyGroup(n - r_k - r_next, [d for d in invs[k + 1] if d > 1]))
    return out


def rational_betti(K: SimplicialComplexData) -> list[int]:
    dims = K.counts()
    ranks = [rational_rank(boundary_matrix(K, k)[0]) for k in range(len(dims))] + [0]
    return [n - ranks[k] - ranks[k + 1] for k, n in enumerate(dims)]


# -- collapses -------------------------------------------------------------------

@dataclass
class ContractibilityVerdict:
    kind: str
    certificate: list | None = None
    witness: dict | None = None
    diagnostics: dict | None = None

    def to_json(self):
        out = {"verdict": self.kind}
        if self.certificate is not None:
            out["certificate"] = [list(s) + list(t) for s, t in self.certificate]
        if self.witness is not None:
            out["witness"] = self.witness
        if self.diagnostics is not None:
            out["diagnostics"] = self.diagnostics
        return out


def _cofaces(K: SimplicialComplexData):
    cof = [[[] for _ in s] for s in K.simplices]
    for k in range(1, len(K.simplices)):
        for j, fs in enumerate(K.faces[k]):
            for f in fs:
                cof[k - 1][f].append(j)
    return cof


def greedy_collapse(K: SimplicialComplexData, rng: random.Random | None = None, cof=None):
    """Greedy elementary collapses, lowest dimension first.

    Priority ties go by simplex index, or by a random order when ``rng`` is
    given.  Returns ``(pairs, alive)``.
    """
    cof = cof or _cofaces(K)
    alive = [[True] * len(s) for s in K.simplices]
    count = [[len(c) for c in cs] for cs in cof]
    prio = [list(range(len(s))) for s in K.simplices]
    if rng is not None:
        for p in prio:
            rng.shuffle(p)
    heap = [(k, prio[k][i], i) for k in range(len(K.simplices) - 1)
            for i in range(len(K.simplices[k])) if count[k][i] == 1]
    heapq.heapify(heap)
    pairs = []
    top = len(K.simplices) - 1
    while heap:
        k, _, i = heapq.heappop(heap)
        if not alive[k][i] or count[k][i] != 1:
            continue
        j = next(j for j in cof[k][i] if alive[k + 1][j])
        if k + 1 < top and count[k + 1][j] != 0:
            continue  # coface not maximal yet; requeued when it becomes maximal
        alive[k][i] = alive[k + 1][j] = False
        pairs.append(((k, i), (k + 1, j)))
        for f in K.faces[k + 1][j]:
            count[k][f] -= 1
            if alive[k][f] and count[k][f] == 1:
                heapq.heappush(heap, (k, prio[k][f], f))
        if k > 0:
            for f in K.faces[k][i]:
                count[k - 1][f] -= 1
                if alive[k - 1][f] and count[k - 1][f] == 1:
                    heapq.heappush(heap, (k - 1, prio[k - 1][f], f))
            # faces of sigma that just became maximal may unlock their own faces
            for f in K.faces[k][i]:
                if alive[k - 1][f] and count[k - 1][f] == 0 and k - 1 > 0:
                    for g in K.faces[k - 1][f]:
                        if alive[k - 2][g] and count[k - 2][g] == 1:
                            heapq.heappush(heap, (k - 2, prio[k - 2][g], g))
        # tau's faces other than sigma may have become maximal as well
        for f in K.faces[k + 1][j]:
            if alive[k][f] and count[k][f] == 0 and k > 0:
                for g in K.faces[k][f]:
                    if alive[k - 1][g] and count[k - 1][g] == 1:
                        heapq.heappush(heap, (k - 1, prio[k - 1][g], g))
    return pairs, alive


def replay_collapse(K: SimplicialComplexData, pairs) -> bool:
    """Apply recorded collapses, checking each is elementary; True iff one vertex remains."""
    alive = [set(range(len(s))) for s in K.simplices]
    cof = _cofaces(K)
    for (k, i), (k1, j) in pairs:
        if k1 != k + 1 or i not in alive[k] or j not in alive[k1]:
            return False
        live_cof = [c for c in cof[k][i] if c in alive[k1]]
        if live_cof != [j]:
            return False
        if k1 + 1 < len(K.simplices) and any(c in alive[k1 + 1] for c in cof[k1][j]):
            return False
        alive[k].discard(i)
        alive[k1].discard(j)
    return len(alive[0]) == 1 and all(not a for a in alive[1:])


def _core(K: SimplicialComplexData, alive) -> SimplicialComplexData:
    """Subcomplex of the surviving simplices (reindexed)."""
    new_index = []
    simp, faces = [], []
    for k, s in enumerate(K.simplices):
        idx = {i: n for n, i in enumerate(i for i in range(len(s)) if alive[k][i])}
        new_index.append(idx)
        simp.append([s[i] for i in idx])
        if k == 0:
            faces.append([() for _ in idx])
        else:
            faces.append([tuple(new_index[k - 1][f] for f in K.faces[k][i]) for i in idx])
    while len(simp) > 1 and not simp[-1]:
        simp.pop()
        faces.pop()
    return SimplicialComplexData(simp, faces, K.labels)


def contractibility(K: SimplicialComplexData, restarts: int = 32, seed: int = 0) -> ContractibilityVerdict:
    if not K.simplices or not K.simplices[0]:
        return ContractibilityVerdict(NOT_CONTRACTIBLE, witness={"type": "empty"})
    cof = _cofaces(K)
    best = None
    rng = random.Random(seed)
    for attempt in range(restarts + 1):
        pairs, alive = greedy_collapse(K, None if attempt == 0 else rng, cof)
        left = sum(sum(a) for a in alive)
        if left == 1:
            return ContractibilityVerdict(CONTRACTIBLE, certificate=pairs,
                                          diagnostics={"attempt": attempt})
        if best is None or left < best[0]:
            best = (left, alive)
    core = _core(K, best[1])
    H = reduced_homology(core)
    for k, h in enumerate(H):
        if not h.is_zero():
            w = {"type": "homology", "degree": k, "group": str(h), "betti": h.betti,
                 "torsion": h.torsion}
            if k == 0:
                w["type"] = "disconnected"
                w["components"] = h.betti + 1
            return ContractibilityVerdict(NOT_CONTRACTIBLE, witness=w)
    gens, rels, trivial = pi1_presentation(core)
    return ContractibilityVerdict(UNKNOWN, diagnostics={
        "homology": "trivial", "core_size": core.counts(), "pi1_generators": gens,
        "pi1_relators": rels, "pi1_trivially_trivial": trivial,
        "restarts": restarts})


def recheck_witness(K: SimplicialComplexData, witness: dict) -> bool:
    """Recompute a NotContractible witness with rational ranks on ``K`` itself."""
    if witness["type"] == "empty":
        return not K.simplices or not K.simplices[0]
    b = rational_betti(K)
    k = witness["degree"]
    if witness.get("betti", 0) > 0:
        return b[k] == witness["betti"]
    # torsion-only witness: rational Betti vanish, integral group nonzero
    return b[k] == 0 and not reduced_homology(K)[k].is_zero()


def pi1_presentation(K: SimplicialComplexData, budget: int = 1000):
    """Edge-path presentation of the fundamental group at the first vertex,
    after at most ``budget`` Tietze moves.  Returns (generators, relators, trivial?)."""
    nv = len(K.simplices[0])
    edges = K.faces[1] if len(K.faces) > 1 else []
    parent = list(range(nv))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree = set()
    for e, (t, s) in enumerate(edges):
        rs, rt = find(s), find(t)
        if rs != rt:
            parent[rs] = rt
            tree.add(e)
    gens = [e for e in range(len(edges)) if e not in tree]
    rels = []
    if len(K.faces) > 2:
        for fs in K.faces[2]:
            d0, d1, d2 = fs  # (g), (g o f), (f)
            word = [(d2, 1), (d0, 1), (d1, -1)]
            rels.append([x for x in word if x[0] not in tree])
    steps = 0
    gens = set(gens)
    while steps < budget:
        rels = [r for r in (_reduce(r) for r in rels) if r]
        killed = None
        for r in rels:
            counts = {}
            for g, _ in r:
                counts[g] = counts.get(g, 0) + 1
            once = [g for g, c in counts.items() if c == 1]
            if once:
                killed = (r, once[0])
                break
        if killed is None:
            break
        r, g = killed
        steps += 1
        pos = next(i for i, (h, _) in enumerate(r) if h == g)
        e = r[pos][1]
        rest = r[pos + 1:] + r[:pos]  # g^e * rest = 1  =>  g = (rest^-1)^(e)
        sub = [(h, -s) for h, s in reversed(rest)]
        if e == -1:
            sub = [(h, -s) for h, s in reversed(sub)]
        gens.discard(g)
        new = []
        for r2 in rels:
            if r2 is r:
                continue
            out = []
            for h, s in r2:
                if h == g:
                    out.extend(sub if s == 1 else [(x, -y) for x, y in reversed(sub)])
                else:
                    out.append((h, s))
            new.append(out)
        rels = new
    rels = [r for r in (_reduce(r) for r in rels) if r]
    return sorted(gens), [[[g, s] for g, s in r] for r in rels], not gens


def _reduce(word):
    out = []
    for x in word:
        if out and out[-1][0] == x[0] and out[-1][1] == -x[1]:
            out.pop()
        else:
            out.append(x)
    while len(out) > 1 and out[0][0] == out[-1][0] and out[0][1] == -out[-1][1]:
        out = out[1:-1]
    return out


# -- epimorphism and exactness checks ------------------------------------------------

@dataclass
class CaseResult:
    gamma: str
    verdict: ContractibilityVerdict
    label: str = ""
    size: tuple = ()
    category: FinCat | None = field(default=None, repr=False)
    complex: SimplicialComplexData | None = field(default=None, repr=False)

    def to_json(self):
        out = {"gamma": self.gamma}
        if self.label:
            out["case"] = self.label
        v = self.verdict.to_json()
        out["verdict"] = v.pop("verdict")
        out.update(v)
        return out


@dataclass
class CheckResult:
    verdict: str  # "true" | "false" | "unknown"
    cases: list[CaseResult]

    def to_json(self):
        return {"verdict": self.verdict, "cases": [c.to_json() for c in self.cases]}

    @property
    def failing(self):
        return [c for c in self.cases if c.verdict.kind != CONTRACTIBLE]


def aggregate(cases: Iterable[CaseResult]) -> CheckResult:
    cases = sorted(cases, key=lambda c: (c.gamma, c.label))
    kinds = {c.verdict.kind for c in cases}
    if NOT_CONTRACTIBLE in kinds:
        v = "false"
    elif UNKNOWN in kinds:
        v = "unknown"
    else:
        v = "true"
    return CheckResult(v, cases)


def is_homotopical_epimorphism(u: CatFunctor, restarts: int = 32, seed: int = 0,
                               keep: bool = False) -> CheckResult:
    """Check every factorization category of ``u`` for a contractible nerve."""
    A, B = u.source, u.target
    if not A.is_loopfree():
        raise NotLoopfreeSource("the source category must be loopfree")
    cache = _PostCache(u)
    cases = []
    for b1 in range(B.n_obj):
        for b2 in range(B.n_obj):
            if not B.hom(b1, b2):
                continue
            for g, C in factorization_categories(u, b1, b2, cache=cache).items():
                K = nerve(C)
                v = contractibility(K, restarts=restarts, seed=seed)
                cases.append(CaseResult(B.mor_names[g], v, size=(C.n_obj, C.n_mor),
                                        category=C if keep else None, complex=K if keep else None))
    return aggregate(cases)


def is_homotopy_exact(sq: Square, restrict=None, restarts: int = 32, seed: int = 0,
                      keep: bool = False) -> CheckResult:
    """Check the two-sided factorization categories ``(a/D/b)_gamma``.

    ``restrict`` is an optional iterable of ``(a, b, gamma)`` triples (names).
    """
    D = sq.D
    if not D.is_loopfree():
        raise NotLoopfreeD("the D-corner must be loopfree")
    A, B, C = sq.p.target, sq.q.target, sq.u.target
    if restrict is None:
        triples = [(a, b, g) for a in range(A.n_obj) for b in range(B.n_obj)
                for g in C.hom(sq.u.ob[a], sq.v.ob[b])]
    else:
        triples = [(A.obj(a), B.obj(b), C.mor(g)) for a, b, g in restrict]
    cases = []
    for a, b, g in triples:
        E = two_sided_factor(sq, a, b, g)
        K = nerve(E)
        v = contractibility(K, restarts=restarts, seed=seed)
        cases.append(CaseResult(C.mor_names[g], v, label=f"{A.objects[a]}|{B.objects[b]}",
                                size=(E.n_obj, E.n_mor), category=E if keep else None,
                                complex=K if keep else None))
    return aggregate(cases)


def replay_case(case: CaseResult) -> bool:
    """Replay a case certificate (needs ``keep=True`` when checking)."""
    if case.verdict.kind == CONTRACTIBLE:
        return replay_collapse(case.complex, case.verdict.certificate)
    if case.verdict.kind == NOT_CONTRACTIBLE:
        return recheck_witness(case.complex, case.verdict.witness)
    return False
