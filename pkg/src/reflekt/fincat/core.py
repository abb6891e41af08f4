"""Finite categories with full composition tables, and functors between them.

Objects and morphisms are addressed internally by integer index; names are
kept for I/O.  Composition is stored per middle object ``y`` as a table
indexed by (position of ``f`` among arrows into ``y``, position of ``g``
among arrows out of ``y``), so the memory is the number of composable pairs.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Mapping, Sequence

from ..errors import BadMorphism, InputError, NotFunctorial, UnknownObject


class FinCat:
    """A finite category.

    ``words[m]`` (optional) expresses ``m`` as a composite of the generating
    morphisms ``gens`` in application order; categories without explicit
    generators use every non-identity morphism as a generator.
    """

    def __init__(self, objects: Sequence[str], mor_names: Sequence[str],
                 src: Sequence[int], tgt: Sequence[int], ident: Sequence[int],
                 compose_fn: Callable[[int, int], int] | None = None, *,
                 tables=None, gens: Sequence[int] | None = None,
                 words: Sequence[tuple[int, ...]] | None = None, name: str = ""):
        self.objects = tuple(str(o) for o in objects)
        self.mor_names = tuple(str(m) for m in mor_names)
        self.src = tuple(src)
        self.tgt = tuple(tgt)
        self.ident = tuple(ident)
        self.name = name
        if len(set(self.objects)) != len(self.objects):
            raise InputError("duplicate object name")
        if len(set(self.mor_names)) != len(self.mor_names):
            dup = [m for m in self.mor_names if self.mor_names.count(m) > 1][:3]
            raise InputError(f"duplicate morphism names {dup}")
        self._obj_index = {o: i for i, o in enumerate(self.objects)}
        self._mor_index = {m: i for i, m in enumerate(self.mor_names)}
        n = len(self.objects)
        self.in_list = [[] for _ in range(n)]
        self.out_list = [[] for _ in range(n)]
        self._hom = {}
        for m in range(len(self.mor_names)):
            self.in_list[self.tgt[m]].append(m)
            self.out_list[self.src[m]].append(m)
            self._hom.setdefault((self.src[m], self.tgt[m]), []).append(m)
        self.inpos = [0] * len(self.mor_names)
        self.outpos = [0] * len(self.mor_names)
        for y in range(n):
            for i, m in enumerate(self.in_list[y]):
                self.inpos[m] = i
            for i, m in enumerate(self.out_list[y]):
                self.outpos[m] = i
        for x, i in enumerate(self.ident):
            if self.src[i] != x or self.tgt[i] != x:
                raise InputError(f"identity of {self.objects[x]} is not an endomorphism")
        if tables is None:
            if compose_fn is None:
                raise InputError("need a composition")
            tables = [[[compose_fn(g, f) for g in self.out_list[y]] for f in self.in_list[y]]
                      for y in range(n)]
        self.tables = tables
        self._is_ident = [False] * len(self.mor_names)
        for i in self.ident:
            self._is_ident[i] = True
        if gens is None:
            gens = [m for m in range(len(self.mor_names)) if not self._is_ident[m]]
            words = [() if self._is_ident[m] else (m,) for m in range(len(self.mor_names))]
        self.gens = tuple(gens)
        self.words = tuple(tuple(w) for w in words) if words is not None else None

    # -- lookups ------------------------------------------------------------
    @property
    def n_obj(self):
        return len(self.objects)

    @property
    def n_mor(self):
        return len(self.mor_names)

    def obj(self, name) -> int:
        if isinstance(name, int):
            return name
        try:
            return self._obj_index[name]
        except KeyError:
            raise UnknownObject(name) from None

    def mor(self, name) -> int:
        if isinstance(name, int):
            return name
        try:
            return self._mor_index[name]
        except KeyError:
            raise BadMorphism(f"unknown morphism {name!r}") from None

    def has_object(self, name) -> bool:
        return name in self._obj_index

    def hom(self, x, y) -> list[int]:
        return self._hom.get((self.obj(x), self.obj(y)), [])

    def identity(self, x) -> int:
        return self.ident[self.obj(x)]

    def is_identity(self, m: int) -> bool:
        return self._is_ident[m]

    def compose(self, g: int, f: int) -> int:
        """``g o f`` (``f`` first)."""
        y = self.tgt[f]
        if self.src[g] != y:
            raise BadMorphism(f"{self.mor_names[g]} o {self.mor_names[f]} is not composable")
        return self.tables[y][self.inpos[f]][self.outpos[g]]

    def compose_path(self, ms: Iterable[int], start: int | None = None) -> int:
        """Composite of morphisms given in application order."""
        acc = None
        for m in ms:
            acc = m if acc is None else self.compose(m, acc)
        if acc is None:
            if start is None:
                raise BadMorphism("empty path without a start object")
            return self.ident[start]
        return acc

    def n_composable_pairs(self) -> int:
        return sum(len(self.in_list[y]) * len(self.out_list[y]) for y in range(self.n_obj))

    def hom_counts(self) -> dict[tuple[str, str], int]:
        return {(self.objects[x], self.objects[y]): len(ms) for (x, y), ms in self._hom.items()}

    def __repr__(self):
        nm = f" {self.name}" if self.name else ""
        return f"<FinCat{nm}: {self.n_obj} objects, {self.n_mor} morphisms>"

    # -- audits ---------------------------------------------------------------
    def audit(self) -> list[str]:
        """Exhaustive identity and associativity check; returns the failures."""
        bad = []
        for m in range(self.n_mor):
            if self.compose(m, self.ident[self.src[m]]) != m:
                bad.append(f"right identity fails at {self.mor_names[m]}")
            if self.compose(self.ident[self.tgt[m]], m) != m:
                bad.append(f"left identity fails at {self.mor_names[m]}")
        for y in range(self.n_obj):
            for f in self.in_list[y]:
                for g in self.out_list[y]:
                    gf = self.compose(g, f)
                    if self.src[gf] != self.src[f] or self.tgt[gf] != self.tgt[g]:
                        bad.append(f"{self.mor_names[g]} o {self.mor_names[f]} has wrong endpoints")
                        continue
                    z = self.tgt[g]
                    for h in self.out_list[z]:
                        if self.compose(h, gf) != self.compose(self.compose(h, g), f):
                            bad.append("associativity fails at "
                                       f"({self.mor_names[h]}, {self.mor_names[g]}, {self.mor_names[f]})")
                            if len(bad) > 20:
                                return bad
        return bad

    def audit_words(self) -> list[str]:
        """Check that every recorded word composes to its morphism."""
        bad = []
        if self.words is None:
            return bad
        for m, w in enumerate(self.words):
            if self.compose_path(w, self.src[m]) != m:
                bad.append(f"word of {self.mor_names[m]} does not compose to it")
        return bad

    # -- structure --------------------------------------------------------
    def is_loopfree(self) -> bool:
        """Only identities as endomorphisms and no isomorphisms between distinct objects."""
        for x in range(self.n_obj):
            if len(self.hom(x, x)) != 1:
                return False
        # with trivial endomorphism monoids, a pair of opposite arrows is an iso pair
        for (x, y), ms in self._hom.items():
            if x < y and (y, x) in self._hom:
                return False
        return True

    def is_thin(self) -> bool:
        return all(len(ms) <= 1 for ms in self._hom.values())

    def full_subcategory(self, objs: Iterable, name: str = "") -> tuple["FinCat", "CatFunctor"]:
        keep = [self.obj(o) for o in objs]
        kset = set(keep)
        mors = [m for m in range(self.n_mor) if self.src[m] in kset and self.tgt[m] in kset]
        onew = {x: i for i, x in enumerate(keep)}
        mnew = {m: i for i, m in enumerate(mors)}
        sub = FinCat([self.objects[x] for x in keep], [self.mor_names[m] for m in mors],
                     [onew[self.src[m]] for m in mors], [onew[self.tgt[m]] for m in mors],
                     [mnew[self.ident[x]] for x in keep],
                     lambda g, f: mnew[self.compose(mors[g], mors[f])], name=name)
        return sub, CatFunctor(sub, self, keep, mors)


class CatFunctor:
    """A functor given by its object and morphism maps (as index lists)."""

    def __init__(self, source: FinCat, target: FinCat, ob: Sequence[int], mor: Sequence[int],
                 name: str = ""):
        self.source = source
        self.target = target
        self.ob = tuple(ob)
        self.mor = tuple(mor)
        self.name = name
        if len(self.ob) != source.n_obj or len(self.mor) != source.n_mor:
            raise InputError("functor maps have the wrong length")

    @classmethod
    def from_names(cls, source: FinCat, target: FinCat, ob: Mapping[str, str],
                   mor: Mapping[str, str], name: str = "") -> "CatFunctor":
        try:
            obl = [target.obj(ob[o]) for o in source.objects]
        except KeyError as exc:
            raise InputError(f"functor has no image for object {exc}") from None
        morl = []
        for i, m in enumerate(source.mor_names):
            if m in mor:
                morl.append(target.mor(mor[m]))
            elif source.is_identity(i):
                morl.append(target.ident[obl[source.src[i]]])
            else:
                raise InputError(f"functor has no image for morphism {m}")
        return cls(source, target, obl, morl, name)

    def __repr__(self):
        return f"<CatFunctor {self.name or ''}: {self.source!r} -> {self.target!r}>"

    def ob_name(self, x) -> str:
        return self.target.objects[self.ob[self.source.obj(x)]]

    def mor_name(self, m) -> str:
        return self.target.mor_names[self.mor[self.source.mor(m)]]

    def problems(self, exhaustive: bool = True) -> list[str]:
        """Functoriality failures.  With ``exhaustive=False`` only the generators'
        endpoints and the recorded words are checked, which suffices when the
        map was built from generator images and the source words are valid."""
        A, B = self.source, self.target
        bad = []
        for m in range(A.n_mor):
            fm = self.mor[m]
            if B.src[fm] != self.ob[A.src[m]] or B.tgt[fm] != self.ob[A.tgt[m]]:
                bad.append(f"{A.mor_names[m]}: endpoints not preserved")
        for x in range(A.n_obj):
            if self.mor[A.ident[x]] != B.ident[self.ob[x]]:
                bad.append(f"identity of {A.objects[x]} not preserved")
        if bad or not exhaustive:
            return bad
        for y in range(A.n_obj):
            for f in A.in_list[y]:
                for g in A.out_list[y]:
                    if self.mor[A.compose(g, f)] != B.compose(self.mor[g], self.mor[f]):
                        bad.append(f"composition {A.mor_names[g]} o {A.mor_names[f]} not preserved")
                        if len(bad) > 20:
                            return bad
        return bad

    def check(self, exhaustive: bool = True) -> "CatFunctor":
        bad = self.problems(exhaustive)
        if bad:
            raise NotFunctorial("; ".join(bad[:5]))
        return self

    def then(self, other: "CatFunctor") -> "CatFunctor":
        """``other o self``."""
        if other.source is not self.target:
            raise InputError("functors are not composable")
        return CatFunctor(self.source, other.target, [other.ob[x] for x in self.ob],
                          [other.mor[m] for m in self.mor])

    def is_faithful(self) -> bool:
        A = self.source
        return all(len({self.mor[m] for m in ms}) == len(ms) for ms in A._hom.values())

    def is_full(self) -> bool:
        A, B = self.source, self.target
        for x in range(A.n_obj):
            for y in range(A.n_obj):
                img = {self.mor[m] for m in A.hom(x, y)}
                if len(img) != len(B.hom(self.ob[x], self.ob[y])):
                    return False
        return True

    def is_fully_faithful(self) -> bool:
        return self.is_full() and self.is_faithful()

    def is_bijective(self) -> bool:
        return (sorted(self.ob) == list(range(self.target.n_obj))
                and sorted(self.mor) == list(range(self.target.n_mor)))

    def inverse(self) -> "CatFunctor":
        if not self.is_bijective():
            raise InputError("functor is not bijective")
        ob = [0] * len(self.ob)
        mor = [0] * len(self.mor)
        for i, j in enumerate(self.ob):
            ob[j] = i
        for i, j in enumerate(self.mor):
            mor[j] = i
        return CatFunctor(self.target, self.source, ob, mor)

    def is_identity(self) -> bool:
        return (self.source is self.target and self.ob == tuple(range(self.source.n_obj))
                and self.mor == tuple(range(self.source.n_mor)))


def identity_functor(C: FinCat) -> CatFunctor:
    return CatFunctor(C, C, range(C.n_obj), range(C.n_mor), name="id")


def functor_from_generators(source: FinCat, target: FinCat, ob: Mapping, gen_images: Mapping,
                            name: str = "", check: bool = True) -> CatFunctor:
    """Extend generator images to a functor using the source's recorded words.

    ``ob`` maps object names to object names; ``gen_images`` maps generator
    names to target morphisms (names or indices).
    """
    if source.words is None:
        raise InputError("source category has no generator words")
    obl = [target.obj(ob[o]) for o in source.objects]
    gimg = {}
    for g in source.gens:
        nm = source.mor_names[g]
        if nm not in gen_images:
            raise InputError(f"no image for generator {nm}")
        gimg[g] = target.mor(gen_images[nm])
    morl = []
    for m, w in enumerate(source.words):
        morl.append(target.compose_path((gimg[g] for g in w), obl[source.src[m]]))
    F = CatFunctor(source, target, obl, morl, name)
    if check:
        F.check(exhaustive=source.n_composable_pairs() <= 200_000)
    return F


def find_isomorphism(C: FinCat, D: FinCat) -> CatFunctor | None:
    """Brute-force isomorphism search for small thin categories (posets and
    free categories on forests of paths), matching hom counts."""
    if C.n_obj != D.n_obj or C.n_mor != D.n_mor or not (C.is_thin() and D.is_thin()):
        return None
    cnt_c = {k: len(v) for k, v in C._hom.items()}
    cnt_d = {k: len(v) for k, v in D._hom.items()}
    n = C.n_obj
    for perm in itertools.permutations(range(n)):
        if all(cnt_d.get((perm[x], perm[y]), 0) == c for (x, y), c in cnt_c.items()) and \
                sum(cnt_d.values()) == sum(cnt_c.values()):
            mor = [D.hom(perm[C.src[m]], perm[C.tgt[m]])[0] for m in range(C.n_mor)]
            F = CatFunctor(C, D, perm, mor)
            if F.is_bijective() and not F.problems():
                return F
    return None
