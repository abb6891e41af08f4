"""Command-line front end.

Reports go to ``--out`` (standard output by default) as JSON; a one-line
summary goes to standard error.  Exit codes: 0 true/success, 1 false,
2 unknown, 3 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass

from . import FORMAT_VERSION, __version__
from . import io as rio
from .errors import ReflektError
from .linalg import FieldSpec

EXIT = {"true": 0, "false": 1, "unknown": 2}
INPUT_ERROR = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class CommandResult:
    code: int
    payload: dict
    summary: str


def emit_report(results) -> str:
    """Merge checker results into one report with a stable field order."""
    cases = []
    verdicts = []
    for r in results:
        d = r if isinstance(r, dict) else r.to_json()
        verdicts.append(d.get("verdict"))
        cases.extend(d.get("cases", []))
    cases.sort(key=lambda c: (str(c.get("gamma", "")), str(c.get("case", ""))))
    payload = {"cases": cases}
    if verdicts:
        payload = {"verdict": _aggregate(verdicts), **payload}
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"))


def _aggregate(verdicts) -> str:
    if "false" in verdicts:
        return "false"
    if "unknown" in verdicts or None in verdicts:
        return "unknown"
    return "true"


# -- handlers ------------------------------------------------------------------------

def _quiver(args):
    from .quiver import classify_vertex, is_oriented_tree, plan_reorientation, reflect, replay
    Q = rio.quiver_from_json(rio.read_json(args.inp))
    if args.action == "reflect":
        Q2 = reflect(Q, args.vertex)
        return CommandResult(0, rio.quiver_to_json(Q2),
                             f"reflected at {args.vertex} ({classify_vertex(Q, args.vertex)})")
    if args.action == "plan":
        target = rio.quiver_from_json(rio.read_json(args.target))
        plan = plan_reorientation(Q, target)
        ok = replay(Q, plan) == target
        return CommandResult(0 if ok else 1, {"plan": rio.plan_to_json(plan),
                                              "verdict": "true" if ok else "false"},
                             f"{len(plan)} reflections")
    ok = is_oriented_tree(Q)
    return CommandResult(0 if ok else 1, {"verdict": "true" if ok else "false"},
                         "oriented tree" if ok else "not an oriented tree")


def _rep(args):
    from . import linrep
    F = FieldSpec.parse(args.field)
    if args.action in ("tilt-check", "euler-check"):
        Q = rio.quiver_from_json(rio.read_json(args.inp))
        if args.action == "tilt-check":
            r = linrep.apr_tilting_check(Q, args.vertex, F)
            payload = {"verdict": "true" if r.ok else "false", "dim_end": r.dim_end,
                       "dim_path_algebra": r.dim_path_algebra,
                       "hom_matrix": [[u, v, n] for (u, v), n in sorted(r.hom_matrix.items())],
                       "path_matrix": [[u, v, n] for (u, v), n in sorted(r.path_matrix.items())]}
            return CommandResult(EXIT[payload["verdict"]], payload,
                                 f"dim End(T) = {r.dim_end}, dim kQ' = {r.dim_path_algebra}")
        rng = random.Random(args.seed)
        samples = [({v: rng.randint(0, 3) for v in Q.vertices}, {v: rng.randint(0, 3) for v in Q.vertices})
                   for _ in range(args.samples)]
        r = linrep.euler_reflection_check(Q, args.vertex, samples)
        payload = {"verdict": "true" if r.ok else "false", "pairs": [list(p) for p in r.pairs]}
        return CommandResult(EXIT[payload["verdict"]], payload, f"{len(r.pairs)} samples")
    M = rio.rep_from_json(rio.read_json(args.inp))
    if args.action == "reflect-minus":
        R = linrep.reflect_minus(M, args.vertex)
        return CommandResult(0, rio.rep_to_json(R), f"dims {R.dims}")
    if args.action == "reflect-plus":
        R = linrep.reflect_plus(M, args.vertex)
        return CommandResult(0, rio.rep_to_json(R), f"dims {R.dims}")
    if not args.other:
        raise UsageError(f"rep {args.action} needs --other")
    N = rio.rep_from_json(rio.read_json(args.other))
    if args.action == "hom":
        basis = linrep.hom_basis(M, N)
        payload = {"dim": len(basis),
                   "basis": [{v: c.to_strings() for v, c in f.components.items()} for f in basis]}
        return CommandResult(0, payload, f"dim Hom = {len(basis)}")
    r = linrep.check_adjunction(M, N, args.vertex)
    payload = {"verdict": "true" if r.ok else "false", "dim_left": r.dim_left,
               "dim_right": r.dim_right, "transfer": r.transfer.to_strings()}
    return CommandResult(EXIT[payload["verdict"]], payload, f"{r.dim_left} vs {r.dim_right}")


def _cat(args):
    from .fincat import chain as fchain
    from .fincat import shapes
    from .fincat.factor import factor_category
    from .fincat.present import presentation_from_json, realize
    ctx = rio.Context()
    if args.action == "realize":
        d = rio.read_json(args.inp)
        P = presentation_from_json(d.get("presentation", d))
        C = realize(P, args.bound)
        payload = rio.fincat_to_json(C)
        payload["certificate"] = C.certificate
        return CommandResult(0, payload, f"{C.n_obj} objects, {C.n_mor} morphisms")
    if args.action == "free":
        C = shapes.free_category(rio.quiver_from_json(rio.read_json(args.inp)))
        return CommandResult(0, rio.fincat_to_json(C), f"{C.n_mor} morphisms")
    if args.action == "product":
        d1 = rio.read_json(args.inp)
        d2 = rio.read_json(args.other) if args.other else d1
        C = shapes.product(ctx.category(d1.get("category", d1), args.bound),
                           ctx.category(d2.get("category", d2), args.bound))
        return CommandResult(0, rio.fincat_to_json(C), f"{C.n_mor} morphisms")
    if args.action in ("extend", "factor"):
        d = rio.read_json(args.inp)
        ctx.register(d, args.bound)
        u = ctx.functor(d.get("functor", d), args.bound)
        if args.action == "extend":
            u2, _, _ = shapes.extend_functor(u, args.attach, args.direction)
            return CommandResult(0, rio.functor_to_json(u2), f"extended at {args.attach}")
        C = factor_category(u, args.b1, args.b2, args.gamma)
        return CommandResult(0, rio.fincat_to_json(C), f"{C.n_obj} factorizations")
    Q = rio.quiver_from_json(rio.read_json(args.inp))
    if args.action == "chain":
        build = fchain.build_dual_chain if args.dual else fchain.build_reflection_chain
        ch = build(Q, args.vertex)
        bad = fchain.chain_problems(ch)
        payload = {"verdict": "false" if bad else "true", "stages": ch.summary(), "problems": bad}
        return CommandResult(1 if bad else 0, payload, "chain built")
    from .quiver import reflect
    ch = fchain.build_reflection_chain(Q, args.vertex)
    dual = fchain.build_dual_chain(reflect(Q, args.vertex), args.vertex)
    sigma = fchain.sigma_iso(ch, dual)
    bad = fchain.sigma_problems(ch, dual, sigma)
    payload = {"verdict": "false" if bad else "true", "problems": bad,
               "ob": {sigma.source.objects[x]: sigma.target.objects[sigma.ob[x]]
                      for x in range(sigma.source.n_obj)}}
    return CommandResult(1 if bad else 0, payload, "sigma is an isomorphism" if not bad else bad[0])


def _hoepi(args):
    from .homotopy import is_homotopical_epimorphism
    d = rio.read_json(args.functor or args.inp)
    ctx = rio.Context()
    ctx.register(d, args.bound)
    u = ctx.functor(d.get("functor", d), args.bound)
    r = is_homotopical_epimorphism(u, restarts=args.restarts, seed=args.seed)
    return CommandResult(EXIT[r.verdict], r.to_json(), f"{r.verdict}: {len(r.cases)} cases")


def _square(args):
    from .homotopy import is_homotopy_exact
    d = rio.read_json(args.inp)
    ctx = rio.Context()
    ctx.register(d, args.bound)
    sq = ctx.square(d.get("square", d), args.bound)
    r = is_homotopy_exact(sq, restarts=args.restarts, seed=args.seed)
    return CommandResult(EXIT[r.verdict], r.to_json(), f"{r.verdict}: {len(r.cases)} cases")


def _diagram(args):
    from . import diagram as dg
    F = FieldSpec.parse(args.field)
    if args.action == "biproduct":
        try:
            dims = [int(x) for x in args.dims.split(",")]
        except ValueError:
            raise UsageError("--dims takes comma-separated integers") from None
        X = dg.biproduct_cube(dims, F)
        rep = dg.exactness_check(X, "biproduct_conditions")
        payload = {"base": f"[2]^{len(dims)}", **X.to_json(), "report": rep.to_json()}
        return CommandResult(0 if rep.ok else 1, payload, f"center dim {rep.details['center_dim']}")
    if args.action == "pipeline":
        M = rio.rep_from_json(rio.read_json(args.rep or args.inp))
        r = dg.pipeline_reflect(M, args.source, compare_classical=args.compare_classical, seed=args.seed)
        payload = {"result": rio.rep_to_json(r.result), **r.to_json()}
        code = 0 if r.matches in (None, True) else 1
        return CommandResult(code, payload, f"dims {r.result.dims}"
                             + ("" if r.matches is None else f", matches classical: {r.matches}"))
    ctx = rio.Context()
    d = rio.read_json(args.inp)
    extra = rio.read_json(args.functor) if args.functor else {}
    ctx.register(extra, args.bound)
    ctx.register(d, args.bound)
    base = ctx.category(rio._need(d, "base", "diagram"), args.bound)
    X = dg.diagram_from_json(base, d)
    if args.action == "exact":
        rep = dg.exactness_check(X, args.kind)
        return CommandResult(0 if rep.ok else 1, rep.to_json(), "ok" if rep.ok else rep.failures[0])
    if not args.functor:
        raise UsageError("diagram kan needs --functor")
    u = ctx.functor(extra.get("functor", extra), args.bound)
    K = dg.kan_extend(X, u, args.side)
    tgt_ref = extra.get("functor", extra).get("target")
    payload = {"base": tgt_ref if isinstance(tgt_ref, str) else rio.fincat_to_json(u.target),
               **K.diagram.to_json(),
               "comparison": [c.to_strings() for c in K.comparison]}
    return CommandResult(0, payload, f"dims {K.diagram.dims}")


def _report(args):
    results = [rio.read_json(p) for p in (args.inputs or [])]
    text = emit_report(results)
    payload = json.loads(text)
    v = payload.get("verdict", "true")
    return CommandResult(EXIT[v], payload, f"{len(payload['cases'])} cases")


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--in", dest="inp", default="-", help="input file ('-' for stdin)")
    common.add_argument("--out", default="-", help="output file ('-' for stdout)")
    common.add_argument("--field", default="Q", help="Q or Fp for a prime p")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--bound", type=int, default=16, help="enumeration bound for presentations")
    common.add_argument("--restarts", type=int, default=32, help="collapse restarts")

    p = _Parser(prog="reflekt", description="Reflection functors, finite categories and "
                                            "homotopical epimorphisms.")
    p.add_argument("--version", action="version", version=f"reflekt {__version__} ({FORMAT_VERSION})")
    top = p.add_subparsers(dest="group", required=True)

    q = top.add_parser("quiver", parents=[common]).add_subparsers(dest="action", required=True)
    for a in ("reflect", "plan", "check-tree"):
        s = q.add_parser(a, parents=[common])
        s.add_argument("--vertex")
        s.add_argument("--target", help="target orientation (plan)")
        s.set_defaults(func=_quiver)

    r = top.add_parser("rep", parents=[common]).add_subparsers(dest="action", required=True)
    for a in ("hom", "reflect-minus", "reflect-plus", "adjunction", "tilt-check", "euler-check"):
        s = r.add_parser(a, parents=[common])
        s.add_argument("--vertex")
        s.add_argument("--other", help="second representation")
        s.add_argument("--samples", type=int, default=20)
        s.set_defaults(func=_rep)

    c = top.add_parser("cat", parents=[common]).add_subparsers(dest="action", required=True)
    for a in ("realize", "free", "product", "extend", "factor", "chain", "sigma"):
        s = c.add_parser(a, parents=[common])
        s.add_argument("--other")
        s.add_argument("--vertex")
        s.add_argument("--dual", action="store_true")
        s.add_argument("--attach")
        s.add_argument("--direction", default="to_target", choices=("to_target", "to_source"))
        s.add_argument("--b1")
        s.add_argument("--b2")
        s.add_argument("--gamma")
        s.set_defaults(func=_cat)

    h = top.add_parser("hoepi", parents=[common]).add_subparsers(dest="action", required=True)
    s = h.add_parser("check", parents=[common])
    s.add_argument("--functor")
    s.set_defaults(func=_hoepi)

    sq = top.add_parser("square", parents=[common]).add_subparsers(dest="action", required=True)
    s = sq.add_parser("check", parents=[common])
    s.set_defaults(func=_square)

    d = top.add_parser("diagram", parents=[common]).add_subparsers(dest="action", required=True)
    for a in ("kan", "exact", "biproduct", "pipeline"):
        s = d.add_parser(a, parents=[common])
        s.add_argument("--functor")
        s.add_argument("--side", default="left", choices=("left", "right"))
        s.add_argument("--kind", default="cocartesian_square",
                       choices=("cocartesian_square", "cartesian_square", "strongly_bicartesian_cube",
                                "biproduct_conditions", "cofiber_square"))
        s.add_argument("--dims", default="1")
        s.add_argument("--rep")
        s.add_argument("--source")
        s.add_argument("--compare-classical", action="store_true")
        s.set_defaults(func=_diagram)

    rp = top.add_parser("report", parents=[common])
    rp.add_argument("inputs", nargs="*", help="report files to merge")
    rp.set_defaults(func=_report, action="report")
    return p


def run(argv) -> CommandResult:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        return CommandResult(INPUT_ERROR, {"error": f"usage: {exc}"}, f"usage error: {exc}")
    except (ReflektError, KeyError, ValueError) as exc:
        msg = str(exc) or type(exc).__name__
        return CommandResult(INPUT_ERROR, {"error": f"{type(exc).__name__}: {msg}"},
                             f"error: {type(exc).__name__}: {msg}")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    res = run(argv)
    out = "-"
    for i, a in enumerate(argv):
        if a == "--out" and i + 1 < len(argv):
            out = argv[i + 1]
        elif a.startswith("--out="):
            out = a.split("=", 1)[1]
    try:
        rio.write_json(out, res.payload)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc.strerror}", file=sys.stderr)
        return INPUT_ERROR
    print(res.summary, file=sys.stderr)
    return res.code


if __name__ == "__main__":
    sys.exit(main())
