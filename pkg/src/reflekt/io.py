"""JSON encodings for quivers, representations, categories, functors, squares
and diagrams.  Every file carries a top-level ``"version": "reflekt/1"``."""

from __future__ import annotations

import json
import re
import sys
from typing import Any

from . import FORMAT_VERSION
from .errors import InputError, ReflektError
from .fincat.core import CatFunctor, FinCat, functor_from_generators
from .fincat.factor import Square
from .fincat.present import escalating_realize, presentation_from_json
from .fincat.shapes import (category_R, cube_poset, free_category, interval, localization_p,
                            parallel_pair, terminal)
from .fincat.chain import square_category
from .linalg import ExactMatrix, FieldSpec
from .linrep import Representation
from .quiver import Arrow, Quiver, ReflectionStep


# -- files ---------------------------------------------------------------------------

def read_json(path: str) -> dict:
    try:
        if path == "-":
            data = json.load(sys.stdin)
        else:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be an object")
    if data.get("version") != FORMAT_VERSION:
        raise InputError(f"{path}: missing or unsupported version tag (need {FORMAT_VERSION!r})")
    return data


def dumps(payload: dict) -> str:
    return json.dumps({"version": FORMAT_VERSION, **payload}, ensure_ascii=False, indent=2)


def write_json(path: str, payload: dict) -> None:
    text = dumps(payload) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _need(d: dict, key: str, what: str):
    try:
        return d[key]
    except (KeyError, TypeError):
        raise InputError(f"{what}: missing field {key!r}") from None


# -- quivers and representations -----------------------------------------------------

def quiver_to_json(Q: Quiver) -> dict:
    return {"vertices": list(Q.vertices),
            "arrows": [{"id": a.id, "src": a.src, "tgt": a.tgt} for a in Q.arrows]}


def quiver_from_json(d: dict) -> Quiver:
    try:
        return Quiver(tuple(str(v) for v in d["vertices"]),
                      tuple(Arrow(str(a["id"]), str(a["src"]), str(a["tgt"])) for a in d["arrows"]))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed quiver: {exc}") from None


def plan_to_json(steps) -> list:
    return [s.to_json() for s in steps]


def plan_from_json(items) -> list[ReflectionStep]:
    return [ReflectionStep(str(s["vertex"]), str(s["kind"])) for s in items]


def matrix_from_json(F: FieldSpec, rows, nrows: int, ncols: int, what: str) -> ExactMatrix:
    try:
        data = [[F.elem(x) for x in r] for r in rows]
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise InputError(f"{what}: bad matrix entry ({exc})") from None
    if len(data) != nrows or any(len(r) != ncols for r in data):
        raise InputError(f"{what}: expected a {nrows}x{ncols} matrix")
    return ExactMatrix(F, nrows, ncols, data)


def rep_to_json(M: Representation) -> dict:
    return {"field": str(M.field), "quiver": quiver_to_json(M.quiver),
            "dims": dict(M.dims), "maps": {k: m.to_strings() for k, m in M.maps.items()}}


def rep_from_json(d: dict) -> Representation:
    F = FieldSpec.parse(_need(d, "field", "representation"))
    Q = quiver_from_json(_need(d, "quiver", "representation"))
    dims = {str(k): int(v) for k, v in _need(d, "dims", "representation").items()}
    raw = _need(d, "maps", "representation")
    maps = {}
    for a in Q.arrows:
        if a.id not in raw:
            raise InputError(f"representation: no matrix for arrow {a.id}")
        maps[a.id] = matrix_from_json(F, raw[a.id], dims.get(a.tgt, 0), dims.get(a.src, 0),
                                      f"arrow {a.id}")
    return Representation(Q, F, dims, maps)


# -- categories ------------------------------------------------------------------------

def fincat_to_json(C: FinCat) -> dict:
    return {"name": C.name,
            "objects": list(C.objects),
            "morphisms": [{"id": C.mor_names[m], "src": C.objects[C.src[m]], "tgt": C.objects[C.tgt[m]]}
                          for m in range(C.n_mor)],
            "identity": {C.objects[x]: C.mor_names[C.ident[x]] for x in range(C.n_obj)},
            "compose": [[C.mor_names[g], C.mor_names[f], C.mor_names[C.compose(g, f)]]
                        for y in range(C.n_obj) for f in C.in_list[y] for g in C.out_list[y]
                        if not C.is_identity(f) and not C.is_identity(g)]}


def fincat_from_json(d: dict) -> FinCat:
    objs = [str(o) for o in _need(d, "objects", "category")]
    mors = _need(d, "morphisms", "category")
    names = [str(m["id"]) for m in mors]
    oi = {o: i for i, o in enumerate(objs)}
    mi = {m: i for i, m in enumerate(names)}
    try:
        src = [oi[str(m["src"])] for m in mors]
        tgt = [oi[str(m["tgt"])] for m in mors]
        ident = [mi[str(d["identity"][o])] for o in objs]
    except KeyError as exc:
        raise InputError(f"category: unknown name {exc}") from None
    table = {}
    for g, f, gf in d.get("compose", []):
        try:
            table[(mi[g], mi[f])] = mi[gf]
        except KeyError as exc:
            raise InputError(f"category: unknown morphism {exc} in composition table") from None
    is_id = set(ident)

    def comp(g, f):
        if g in is_id:
            return f
        if f in is_id:
            return g
        try:
            return table[(g, f)]
        except KeyError:
            raise InputError(f"category: composite {names[g]} o {names[f]} missing") from None

    C = FinCat(objs, names, src, tgt, ident, comp, name=str(d.get("name", "")))
    bad = C.audit()
    if bad:
        raise InputError(f"category: {bad[0]}")
    return C


_CUBE = re.compile(r"^\[2\]\^(\d+)$")
_INTERVAL = re.compile(r"^\[(\d+)\]$")


def builtin_category(name: str) -> FinCat:
    """Named shapes: ``1``, ``[n]``, ``[2]^n``, ``R``, ``parallel_pair``, ``square``."""
    if name in ("1", "terminal"):
        return terminal()
    if name == "R":
        return category_R()
    if name == "parallel_pair":
        return parallel_pair()
    if name == "square":
        return square_category()
    m = _CUBE.match(name)
    if m:
        return cube_poset(int(m.group(1)))
    m = _INTERVAL.match(name)
    if m:
        return interval(int(m.group(1)))
    raise InputError(f"unknown category {name!r}")


class Context:
    """Named categories shared by the functors and diagrams of one invocation,
    so that composable data refer to the very same category objects."""

    def __init__(self):
        self.categories: dict[str, FinCat] = {}

    def register(self, d: dict, bound: int = 16) -> None:
        for name, ref in d.get("categories", {}).items():
            self.categories[name] = self.category(ref, bound, name=name)

    def category(self, ref: Any, bound: int = 16, name: str = "") -> FinCat:
        if isinstance(ref, str):
            if ref not in self.categories:
                C = builtin_category(ref)
                self.categories[ref] = C
            return self.categories[ref]
        if not isinstance(ref, dict):
            raise InputError("a category is a name or an object")
        if "presentation" in ref:
            P = presentation_from_json(ref["presentation"])
            return escalating_realize(P, int(ref.get("bound", bound)), name=name)
        if "quiver" in ref:
            return free_category(quiver_from_json(ref["quiver"]), name=name)
        C = fincat_from_json(ref)
        if name and not C.name:
            C.name = name
        return C

    def functor(self, d: dict, bound: int = 16) -> CatFunctor:
        A = self.category(_need(d, "source", "functor"), bound)
        B = self.category(_need(d, "target", "functor"), bound)
        ob = {str(k): str(v) for k, v in _need(d, "ob", "functor").items()}
        mor = {str(k): str(v) for k, v in d.get("mor", {}).items()}
        if set(mor) >= {A.mor_names[m] for m in range(A.n_mor) if not A.is_identity(m)}:
            u = CatFunctor.from_names(A, B, ob, mor, name=str(d.get("name", "")))
            bad = u.problems()
            if bad:
                raise InputError(f"functor: {bad[0]}")
            return u
        try:
            return functor_from_generators(A, B, ob, mor, name=str(d.get("name", "")))
        except ReflektError as exc:
            raise InputError(f"functor: {exc}") from None

    def square(self, d: dict, bound: int = 16) -> Square:
        fs = {k: self.functor(_need(d, k, "square"), bound) for k in ("p", "q", "u", "v")}
        C = fs["u"].target
        D = fs["p"].source
        alpha = _need(d, "alpha", "square")
        return Square(fs["p"], fs["q"], fs["u"], fs["v"], [C.mor(alpha[o]) for o in D.objects])


def functor_to_json(u: CatFunctor, source_ref=None, target_ref=None) -> dict:
    return {"name": u.name,
            "source": source_ref if source_ref is not None else fincat_to_json(u.source),
            "target": target_ref if target_ref is not None else fincat_to_json(u.target),
            "ob": {u.source.objects[x]: u.target.objects[u.ob[x]] for x in range(u.source.n_obj)},
            "mor": {u.source.mor_names[m]: u.target.mor_names[u.mor[m]] for m in range(u.source.n_mor)
                    if not u.source.is_identity(m)}}


def p_functor_json() -> dict:
    """The localization ``[2] -> R`` as a functor file."""
    return {"categories": {}, **functor_to_json(localization_p(), "[2]", "R")}


def report_to_json(result) -> dict:
    return result.to_json()
