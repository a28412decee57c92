"""``predtopos``: batch checks over description files.

Exit codes: 0 pass, 1 fail, 2 bounded or inconclusive, 3 input error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from typing import Callable

from ..amc.choice import find_amc_square
from ..amc.small import SmallMapClass, rp_square_from_representation, small_class_from_square
from ..amc.squares import is_collection_square, is_covering_square
from ..completion import (
    ExLex,
    ExReg,
    check_recog_exlex,
    check_recog_exreg,
    discrete,
    exlex_quotient,
    proj_coincidence,
    unit_embedding,
)
from ..core.category import validate_category
from ..core.psh import FinPsh
from ..errors import FormulaSyntaxError, HypothesisFailed, NotInClass, ParseError, PredToposError, SortError, UnknownName
from ..finset import FinSet, FinSetMap, FinSetObj
from ..logic.parse import parse_formula
from ..logic.semantics import eval_finset, force
from ..sites import (
    check_L,
    check_M,
    check_site,
    check_universal,
    generate_cov,
    is_collection_site,
    is_sheaf,
    sheafify,
    sheaves_up_to,
    sieve_saturate,
    unit_is_iso,
)
from ..topspace import FinTop
from ..wtypes import wtype
from .fileformat import Workspace, parse_workspace
from .report import INPUT_ERROR, Report

TREE_LISTING = 10


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


# ---------------------------------------------------------------- workspace access


def _load(args, *name_args: str, validate_categories: bool = True) -> Workspace:
    files = list(args.files)
    for a in name_args:
        v = getattr(args, a, None)
        if v and os.path.isfile(v) and v not in files:
            files.append(v)
    return parse_workspace(files, validate_categories)


def _pick(ws: Workspace, kind: str, ref: str | None):
    """A block by name, or the single block of ``kind`` defined in the file ``ref``."""
    if ref and os.path.isfile(ref):
        names = [n for (k, n), (f, _) in ws.origin.items() if k == kind and f == ref]
        stem = os.path.splitext(os.path.basename(ref))[0]
        if len(names) == 1:
            return ws.get(kind, names[0])
        if stem in names:
            return ws.get(kind, stem)
        raise UnknownName(f"{ref} does not single out one {kind} (found {sorted(names)})", witness=ref)
    return ws.get(kind, ref)


def _pick_map(ws: Workspace, ref: str | None):
    try:
        return _pick(ws, "map", ref)
    except UnknownName:
        return _pick(ws, "nat", ref)


def _failures(checks: dict) -> list:
    return [name for name, ok in checks.items() if not ok]


# ---------------------------------------------------------------- commands


def cmd_check_category(args) -> Report:
    ws = _load(args, validate_categories=False)
    names = [args.category] if args.category else ws.names("category")
    if not names:
        raise UnknownName("no category in the workspace", witness="category")
    data, wit = {}, []
    for name in names:
        C = ws.get("category", name)
        try:
            validate_category(C)
            data[name] = {"valid": True, "objects": len(C.objects), "arrows": len(C.arrows)}
        except PredToposError as e:
            data[name] = {"valid": False}
            wit.append({"category": name, "law": type(e).__name__, "message": str(e), "witness": e.witness})
    return Report(
        "check-category",
        "fail" if wit else "pass",
        data,
        wit,
        {name: "core.category.validate_category" for name in names},
    )


def cmd_check_site(args) -> Report:
    ws = _load(args)
    s = _pick(ws, "site", args.site)
    reps = {"axiom C": check_site(s), "axiom M": check_M(s), "axiom L": check_L(s)}
    coll = is_collection_site(s)
    strong = is_collection_site(s, strong=True)
    data = {k: bool(r) for k, r in reps.items()}
    data["collection site"] = bool(coll)
    data["strong collection site"] = bool(strong)
    data["note"] = coll.note
    wit = [{"check": k, "witness": r.witness} for k, r in reps.items() if not r]
    return Report(
        "check-site",
        "pass" if reps["axiom C"] else "fail",
        data,
        wit,
        {
            "axiom C": "sites.check_site",
            "axiom M": "sites.check_M",
            "axiom L": "sites.check_L",
            "collection site": "sites.is_collection_site",
            "strong collection site": "sites.is_collection_site(strong=True)",
        },
    )


def cmd_saturate(args) -> Report:
    ws = _load(args)
    s = _pick(ws, "site", args.site)
    J = sieve_saturate(s)
    checks = J.check()
    data = {
        "sieves": {C: [sorted(S) for S in sorted(J.sieves[C], key=lambda S: (len(S), sorted(S)))] for C in s.cat.objects},
        "topology checks": checks,
    }
    prov = {"sieves": "sites.sieve_saturate", "topology checks": "sites.GrothendieckTopology.check"}
    wit = [{"check": k} for k in _failures(checks)]
    rc = check_site(s)
    if rc:
        g = generate_cov(s, args.depth)
        data["COV level sizes"] = g.level_sizes
        data["COV fixed-point equation"] = g.equation_holds()
        prov["COV level sizes"] = "sites.generate_cov"
        prov["COV fixed-point equation"] = "sites.GeneratedCov.equation_holds"
    else:
        data["COV"] = "not generated: the site fails axiom C"
        wit.append({"check": "axiom C", "witness": rc.witness})
    ok = not _failures(checks) and (not rc or data["COV fixed-point equation"])
    return Report("saturate", "pass" if ok else "fail", data, wit, prov, {"depth": args.depth} if rc else {})


def cmd_sheafify(args) -> Report:
    ws = _load(args)
    s = _pick(ws, "site", args.site)
    P = _pick(ws, "presheaf", args.presheaf)
    if P.base != s.cat:
        raise UnknownName(f"presheaf {P.name} is not over the category of site {s.name}", witness=P.name)
    res = sheafify(P, s)
    J = res.topology
    before = is_sheaf(P, J)
    after = is_sheaf(res.sheaf, J)
    univ, bad = check_universal(res, sheaves_up_to(J, args.bound))
    data = {
        "input is a sheaf": bool(before),
        "stalk sizes": res.sheaf.sizes(),
        "result is a sheaf": bool(after),
        "unit is iso": unit_is_iso(res),
        "universal property": univ,
    }
    wit = []
    if not before:
        wit.append({"input not a sheaf": before.witness})
    if not after:
        wit.append({"result not a sheaf": after.witness})
    if bad is not None:
        wit.append({"universal property": bad})
    return Report(
        "sheafify",
        "pass-up-to-bound" if after and univ else "fail",
        data,
        wit,
        {
            "input is a sheaf": "sites.is_sheaf",
            "stalk sizes": "sites.sheafify",
            "result is a sheaf": "sites.is_sheaf",
            "unit is iso": "sites.unit_is_iso",
            "universal property": "sites.check_universal over sites.sheaves_up_to",
        },
        {"bound": args.bound},
    )


def cmd_wtype(args) -> Report:
    ws = _load(args, "sig")
    pf = _pick(ws, "sig", args.sig)
    res = wtype(pf, args.cap)
    top = res.levels[-1].carrier if res.levels else ()
    data = {
        "kind": res.kind,
        "chain": res.sizes,
        "trees": [str(t) for t in top[:TREE_LISTING]],
    }
    if len(top) > TREE_LISTING:
        data["trees shown"] = f"first {TREE_LISTING} of {len(top)}"
    exact = res.kind != "infinite-truncated"
    return Report(
        "wtype",
        "pass" if exact else "pass-up-to-bound",
        data,
        [],
        {"kind": "wtypes.classify", "chain": "wtypes.wtype", "trees": "wtypes.wtype"},
        {} if exact else {"cap": args.cap},
    )


def cmd_amc_square(args) -> Report:
    ws = _load(args, "map")
    f = _pick_map(ws, args.map)
    amb = FinSet() if isinstance(f, FinSetMap) else FinPsh(f.dom.base)
    res = find_amc_square(f, amb, search_bound=args.bound)
    if not res:
        return Report("amc-square", "fail", {"found": False}, res.trace, {"found": "amc.choice.find_amc_square"}, {"search": args.bound})
    sq = res.square
    cov = is_covering_square(sq)
    strong = is_collection_square(sq, strong=True)
    data = {
        "found": True,
        "construction": res.path,
        "steps": res.trace,
        "left map": sq.g,
        "covering": bool(cov),
        "strong collection": bool(strong),
    }
    wit = [w for w in (cov.witness if not cov else None, strong.witness if not strong else None) if w is not None]
    return Report(
        "amc-square",
        "pass" if cov and strong else "fail",
        data,
        wit,
        {
            "found": "amc.choice.find_amc_square",
            "covering": "amc.squares.is_covering_square",
            "strong collection": "amc.squares.is_collection_square(strong=True)",
        },
        {"search": args.bound} if res.path == "search" else {},
    )


def cmd_rp_roundtrip(args) -> Report:
    ws = _load(args, "map", "rep")
    f = _pick(ws, "map", args.map)
    pi = _pick(ws, "map", args.rep)
    cls = SmallMapClass.from_representation(pi)
    prov = {"square": "amc.small.rp_square_from_representation"}
    try:
        sq = rp_square_from_representation(f, cls)
    except NotInClass as e:
        return Report("rp-roundtrip", "fail", {"in class": False}, [{"fibre not covered": e.witness}], {"in class": "amc.small.SmallMapClass.member"})
    cov = is_covering_square(sq)
    strong = is_collection_square(sq, strong=True)
    back = small_class_from_square(sq)
    member = back.member(f)
    data = {
        "square": {"C": len(sq.C), "D": len(sq.D)},
        "covering": bool(cov),
        "strong collection": bool(strong),
        "map in generated class": bool(member),
    }
    prov.update({
        "covering": "amc.squares.is_covering_square",
        "strong collection": "amc.squares.is_collection_square(strong=True)",
        "map in generated class": "amc.small.small_class_from_square",
    })
    ok = cov and strong and member
    return Report("rp-roundtrip", "pass" if ok else "fail", data, [] if ok else [member.witness], prov)


def _base_ambient(ws: Workspace, name: str):
    if name == "finset":
        return FinSet()
    if name == "top":
        return FinTop()
    return FinPsh(ws.get("category", name))


def cmd_complete(args) -> Report:
    ws = _load(args)
    base = _base_ambient(ws, args.ambient)
    sample = list(base.objects_up_to(args.bound))
    prov = {}
    try:
        if args.kind == "coincidence":
            rep = proj_coincidence(base, args.bound)
            prov["checks"] = "completion.proj_coincidence"
        elif args.kind == "exreg":
            rep = check_recog_exreg(unit_embedding(ExReg(base)), sample)
            prov["checks"] = "completion.check_recog_exreg"
        else:
            rep = check_recog_exlex(unit_embedding(ExLex(base)), sample)
            prov["checks"] = "completion.check_recog_exlex"
    except HypothesisFailed as e:
        return Report("complete", "fail", {"hypothesis": str(e)}, [e.witness], {"hypothesis": f"completion ({args.kind})"}, {"bound": args.bound})
    data = {"checks": rep.checks, "sample sizes": rep.sample_sizes}
    if rep.conclusion:
        data["conclusion"] = rep.conclusion
    wit = [{k: v} for k, v in rep.witnesses.items()]
    ok = rep.ok
    names = ws.names("relation")
    if names and (args.kind != "exlex" or args.ambient != "finset"):
        raise UnknownName("relation blocks are quotiented in ex/lex over finite sets only", witness=names)
    amb = FinSet()
    for name in names:
        X, pairs = ws.get("relation", name)
        S = FinSetObj(tuple((k, a, b) for k, (a, b) in enumerate(pairs)))
        s0 = FinSetMap(S, X, lambda e: e[1])
        s1 = FinSetMap(S, X, lambda e: e[2])
        q = exlex_quotient(discrete(amb, X), S, s0, s1)
        data[f"quotient {name}"] = {"coequalizes": q.coequalizes, "kernel is the relation": q.kernel_matches, "exact": q.exact}
        prov[f"quotient {name}"] = "completion.exlex_quotient"
        ok = ok and q.exact
    return Report("complete", "pass-up-to-bound" if ok else "fail", data, wit, prov, {"bound": args.bound})


def cmd_eval(args) -> Report:
    ws = _load(args)
    S = _pick(ws, "structure", args.structure)
    if args.text:
        text = args.text
    else:
        text = _pick(ws, "formula", args.formula)
    phi = parse_formula(text, S)
    data = {"formula": str(phi)}
    prov = {}
    wit = []
    if S.is_finset:
        t = eval_finset(phi, S)
        k = force(phi, S)
        data.update({"true": t.value, "forced": k.value, "semantics agree": t.value == k.value})
        prov.update({"true": "logic.semantics.eval_finset", "forced": "logic.semantics.force"})
        wit = [{"kind": w.kind, "variable": w.var, "value": w.value, "in": w.formula} for w in t.witnesses[:5]]
        ok = t.value and k.value
    else:
        stages = [args.stage] if args.stage else list(S.stages())
        for c in stages:
            if c not in S.stages():
                raise UnknownName(f"unknown stage {c!r}", witness=c)
        forced = {c: force(phi, S, c).value for c in stages}
        data["forced at"] = forced
        prov["forced at"] = "logic.semantics.force"
        wit = [{"not forced at": c} for c, v in forced.items() if not v]
        ok = all(forced.values())
    return Report("eval", "pass" if ok else "fail", data, wit, prov)


COMMANDS: dict[str, Callable] = {
    "check-category": cmd_check_category,
    "check-site": cmd_check_site,
    "saturate": cmd_saturate,
    "sheafify": cmd_sheafify,
    "wtype": cmd_wtype,
    "amc-square": cmd_amc_square,
    "rp-roundtrip": cmd_rp_roundtrip,
    "complete": cmd_complete,
    "eval": cmd_eval,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("files", nargs="*", help="description files")
    common.add_argument("--bound", type=int, default=3, help="object-size bound for searches (default 3)")
    common.add_argument("--depth", type=int, default=3, help="generation depth (default 3)")
    common.add_argument("--cap", type=int, default=4, help="W-type height cap (default 4)")
    common.add_argument("--format", choices=("text", "machine"), default="text")
    common.add_argument("--strict", action="store_true", help="treat bounded verdicts as failures")

    p = _Parser(prog="predtopos", description="Finite-scale checks for predicative toposes.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("check-category", parents=[common], help="validate category laws").add_argument("--category")
    q = sub.add_parser("check-site", parents=[common], help="axioms C, M, L and collection")
    q.add_argument("--site")
    sub.add_parser("saturate", parents=[common], help="least topology and generated COV").add_argument("--site")
    q = sub.add_parser("sheafify", parents=[common], help="plus construction twice")
    q.add_argument("--site")
    q.add_argument("--presheaf")
    sub.add_parser("wtype", parents=[common], help="W-type chain of a signature").add_argument("--sig")
    sub.add_parser("amc-square", parents=[common], help="covering strong collection square").add_argument("--map")
    q = sub.add_parser("rp-roundtrip", parents=[common], help="representation to square and back")
    q.add_argument("--map")
    q.add_argument("--rep")
    q = sub.add_parser("complete", parents=[common], help="exact completion recognition")
    q.add_argument("--kind", choices=("exlex", "exreg", "coincidence"), default="exlex")
    q.add_argument("--ambient", default="finset", help="finset, top, or a category name from the files")
    q = sub.add_parser("eval", parents=[common], help="evaluate a formula in a structure")
    q.add_argument("--structure")
    q.add_argument("--formula")
    q.add_argument("--text")
    q.add_argument("--stage")
    return p


def run(argv: list[str] | None = None) -> tuple[Report | None, int, str]:
    """Parse ``argv``, run the command and return ``(report, exit code, rendered output)``."""
    try:
        args = build_parser().parse_args(argv)
    except InputError as e:
        return None, INPUT_ERROR, f"error: {e}\n"
    except SystemExit as e:  # --help
        return None, int(e.code or 0), ""
    for flag in ("bound", "depth", "cap"):
        if getattr(args, flag) < 0:
            return None, INPUT_ERROR, f"error: --{flag} must be non-negative\n"
    t0 = time.perf_counter()
    try:
        rep = COMMANDS[args.command](args)
    except (ParseError, UnknownName, FormulaSyntaxError, SortError) as e:
        return None, INPUT_ERROR, f"error: {e}\n"
    except PredToposError as e:
        return None, INPUT_ERROR, f"error: {type(e).__name__}: {e}\n"
    rep.timing = time.perf_counter() - t0
    out = rep.to_json() if args.format == "machine" else rep.to_text()
    return rep, rep.exit_code(args.strict), out


def main(argv: list[str] | None = None) -> int:
    rep, code, out = run(argv)
    (sys.stdout if rep is not None else sys.stderr).write(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
