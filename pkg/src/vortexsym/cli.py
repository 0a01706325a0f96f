"""Command-line front end: ``vortexsym <group> <command> [options]``.

Exit codes: 0 all verified, 1 something refuted, 2 inconclusive results,
3 usage or input error.  Text output is rendered from the JSON report.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .casebook import Casebook, UnknownEntry, contact_families, entry, list_entries, point_families
from .checker import (
    check_flow,
    check_general_solution,
    check_generator,
    check_invariant,
    commutator_table,
    GENERATOR_SAMPLES,
    Invariant,
)
from .detsys import ModeError, compare_systems, derive_determining
from .jet import VectorField
from .kernel import DSLError
from .kernel.numeric import DEFAULT_SEED, DEFAULT_TOL
from .report import VerificationReport

SCHEMA = "1"
EXIT_OK, EXIT_REFUTED, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3
SEED_ENV = "VORTEXSYM_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (env {SEED_ENV}; default {DEFAULT_SEED})")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--tol", type=float, default=None, help="numeric tolerance")
    p.add_argument("--samples", type=int, default=None, help="numeric sample points per check")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = _Parser(prog="vortexsym", description=__doc__.splitlines()[0])
    top.add_argument("--version", action="version", version=f"vortexsym {__version__}")
    groups = top.add_subparsers(dest="group", required=True, parser_class=_Parser)

    cb = groups.add_parser("casebook", help="inspect the catalog").add_subparsers(dest="command", required=True)
    cb.add_parser("list", parents=[common])
    emit = cb.add_parser("emit", parents=[common])
    emit.add_argument("id")

    check = groups.add_parser("check", help="symbolic checks").add_subparsers(dest="command", required=True)
    gen = check.add_parser("gen", parents=[common], help="generator annihilates an equation")
    _field_source(gen)
    gen.add_argument("--eq", default="eq2", choices=("eq1", "eq2"))
    gen.add_argument("--mode", default="prolonged", choices=("prolonged", "direct"))
    gen.add_argument("--reduction", default="identical", choices=("identical", "on_shell"))
    for name in ("inv", "flow", "solution"):
        sp = check.add_parser(name, parents=[common])
        sp.add_argument("--case", required=True, help="example entry id")
        sp.add_argument("--field", default="printed", help="which field of the example")
        if name == "inv":
            sp.add_argument("--label", action="append", help="invariant label (repeatable)")
            sp.add_argument("--expr", help="check this DSL expression instead")

    det = groups.add_parser("det", help="determining systems").add_subparsers(dest="command", required=True)
    derive = det.add_parser("derive", parents=[common])
    derive.add_argument("--eq", default="eq2", choices=("eq2",))
    derive.add_argument("--ansatz", default="point", choices=("point", "contact"))
    derive.add_argument("--reduction", default="free", choices=("free", "on_shell"))
    derive.add_argument("--compare", choices=("paper",), help="compare with the printed system")
    cmp_ = det.add_parser("compare", parents=[common])
    cmp_.add_argument("file", help="JSON list of {monomial, coefficient} (as written by det derive)")

    br = groups.add_parser("bracket", help="Lie brackets").add_subparsers(dest="command", required=True)
    table = br.add_parser("table", parents=[common])
    table.add_argument("--case", default="table-1", help="table-1, table-2 or an entry holding fields")

    num = groups.add_parser("num", help="numeric lab").add_subparsers(dest="command", required=True)
    solve = num.add_parser("solve", parents=[common])
    _scenario_source(solve)
    solve.add_argument("--csv", help="write the curve to this CSV file")
    tr = num.add_parser("transport", parents=[common])
    _scenario_source(tr)
    tr.add_argument("--case", required=True, help="example entry id whose flow is used")
    tr.add_argument("--s", type=float, action="append", required=True, help="group parameter (repeatable)")
    rp = num.add_parser("reparam", parents=[common])
    _scenario_source(rp, default="eq1-pivot")
    rp.add_argument("--w", type=float, default=None)

    claims = groups.add_parser("claims", help="the claim suite").add_subparsers(dest="command", required=True)
    run = claims.add_parser("run", parents=[common])
    run.add_argument("--all", action="store_true", help="run every claim (default)")
    run.add_argument("--id", action="append", help="run only this claim (repeatable)")
    return top


def _field_source(p):
    p.add_argument("--case", help="catalog entry id")
    p.add_argument("--field", help="field name inside the entry")
    p.add_argument("--file", help="vector field JSON file")
    p.add_argument("--T", help="instantiate T (a DSL expression in t)")
    p.add_argument("--H", help="instantiate H (a DSL expression in a1, a2, a3)")


PRESETS = {
    "exp": {"n1": "1", "n2": "0", "n3": "0", "k2": "0", "k3": "0", "k1_0": 1.0},
    "plus-one": {"n1": "1", "n2": "1", "n3": "0", "k2": "1", "k3": "0", "k1_0": 0.0},
    "mixed": {"n1": "1", "n2": "t", "n3": "1", "k2": "sin(t)", "k3": "t^2", "k1_0": 1.0},
    "eq1-pivot": {"n1": "1", "n2": "0", "n3": "0", "k2": "phi", "k3": "0", "k1_0": 1.5,
                  "a": 0.5, "b": 1.5, "equation": "eq1", "parameters": {"w": 2}},
}


def _scenario_source(p, default="exp"):
    p.add_argument("--scenario", help="ScenarioSpec JSON file")
    p.add_argument("--preset", choices=sorted(PRESETS), default=default)
    p.add_argument("--h", type=float, default=None, help="step size")


# -- config and output ----------------------------------------------------------------


def resolve_config(args) -> dict:
    if args.seed is not None:
        seed = args.seed
    elif os.environ.get(SEED_ENV):
        try:
            seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer") from None
    else:
        seed = DEFAULT_SEED
    if args.group == "num":
        from .numlab import DEFAULT_CONFIG

        default_tol = DEFAULT_CONFIG.verify_tol
    else:
        default_tol = DEFAULT_TOL
    if args.samples is not None and args.samples < 1:
        raise UsageError("--samples must be positive")
    return {
        "seed": seed,
        "tol": args.tol if args.tol is not None else default_tol,
        "samples": args.samples if args.samples is not None else GENERATOR_SAMPLES,
        "format": args.format,
    }


def _exit_for(reports) -> int:
    verdicts = [r["verdict"] for r in reports]
    if "refuted" in verdicts:
        return EXIT_REFUTED
    if "inconclusive" in verdicts:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def render_text(doc: dict) -> str:
    cfg = doc["config"]
    lines = [
        f"vortexsym {doc['command']}  (schema {doc['schema']}; seed={cfg['seed']} tol={cfg['tol']:g} "
        f"samples={cfg['samples']})"
    ]
    for item in doc.get("items", []):
        lines.append(item if isinstance(item, str) else json.dumps(item, sort_keys=True))
    for note in doc.get("notes", []):
        lines.append(note)
    for r in doc.get("results", []):
        line = f"{r['claim']}: {r['verdict']}"
        if r.get("paper_agreement", "n/a") != "n/a":
            line += f"  [paper: {r['paper_agreement']}]"
        if r.get("engine") == "mismatch":
            line += "  [ENGINE MISMATCH vs hand computation]"
        if r["verdict"] != "verified" and r.get("residual"):
            line += f"  residual: {r['residual']}"
        lines.append(line)
        for key in ("max_residual", "ratio", "integrated_residual", "orthogonal_residual"):
            if key in r.get("details", {}):
                lines.append(f"    {key} = {r['details'][key]:.3e}")
    lines.append(f"exit code {doc['exit_code']}")
    return "\n".join(lines)


def _emit(doc: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        out.write(render_text(doc) + "\n")


# -- commands ------------------------------------------------------------------------------


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _kw(cfg) -> dict:
    return {"seed": cfg["seed"], "tol": cfg["tol"], "samples": cfg["samples"]}


def _field_from_args(cb: Casebook, args) -> VectorField:
    if args.file:
        return VectorField.from_json(_load_json(args.file), cb.space)
    if not args.case:
        raise UsageError("give --case or --file")
    v = cb.field(args.case, args.field)
    if args.T is not None or args.H is not None:
        v = cb.instantiate_field(v, args.T, args.H)
    return v


def cmd_casebook(cb, args, cfg):
    if args.command == "list":
        items = [f"{e.id:18s} {e.kind:18s} {e.locator}" for e in list_entries()]
        return {"entries": [{"id": e.id, "kind": e.kind, "locator": e.locator} for e in list_entries()],
                "items": items}, EXIT_OK
    e = entry(args.id)
    return {"entry": e.to_json(), "items": [json.dumps(e.to_json(), indent=2, sort_keys=True)]}, EXIT_OK


def cmd_check(cb, args, cfg):
    kw = _kw(cfg)
    if args.command == "gen":
        v = _field_from_args(cb, args)
        rep = check_generator(v, cb.equation(args.eq), mode=args.mode, reduction=args.reduction, **kw)
        return {"results": [rep.to_json()]}, None
    ex = cb.example(args.case)
    if args.field not in ex.fields:
        raise UsageError(f"{args.case} has no field {args.field!r}; choose from {', '.join(ex.fields)}")
    v = ex.fields[args.field]
    if args.command == "inv":
        if args.expr:
            ws = cb.ws()
            invs = [Invariant("expr", ws.parse(args.expr))]
        else:
            invs = [I for I in ex.invariants if not args.label or I.label in args.label]
            if not invs:
                raise UsageError(f"no invariants match {args.label}")
        reps = [check_invariant(I, v, **kw) for I in invs]
        return {"results": [r.to_json() for r in reps]}, None
    if args.command == "flow":
        return {"results": [check_flow(ex.flow, v, **kw).to_json()]}, None
    return {"results": [check_general_solution(ex.general_solution, v, **kw).to_json()]}, None


def cmd_det(cb, args, cfg):
    expected = cb.expected_point_system()
    if args.command == "derive":
        eq = cb.equation(args.eq)
        if args.ansatz == "point":
            ds = derive_determining(cb.point_ansatz(), eq, args.reduction, "prolonged")
        else:
            ds = derive_determining(cb.contact_ansatz(), eq, args.reduction, "direct")
        doc = {"system": ds.to_json(), "provenance": ds.provenance,
               "items": [f"{d['monomial']}: {d['coefficient']} = 0" for d in ds.to_json()],
               "notes": [f"{len(ds)} determining equations"]}
        if args.compare:
            rep = compare_systems(ds.members(), expected.members(), "derived system vs printed (4)-(7)")
            doc["results"] = [rep.to_json()]
            doc["notes"].append(
                "system equivalent to Eqs. (4)-(7)" if rep.verdict == "verified" else "system NOT equivalent to Eqs. (4)-(7)"
            )
            return doc, None
        return doc, EXIT_OK
    data = _load_json(args.file)
    if not isinstance(data, list):
        raise UsageError("expected a JSON list of {monomial, coefficient}")
    ws = cb.ws(cb_funcs())
    try:
        members = [ws.parse(d["coefficient"]) for d in data]
    except (KeyError, TypeError):
        raise UsageError("each item needs a 'coefficient' string") from None
    rep = compare_systems(members, expected.members(), "given system vs printed (4)-(7)")
    return {"results": [rep.to_json()]}, None


def cb_funcs():
    from .casebook import POINT_ANSATZ_FUNCS

    return POINT_ANSATZ_FUNCS


def cmd_bracket(cb, args, cfg):
    gens = cb.fields(args.case)
    fams = contact_families(cb) if args.case in ("table-2", "contact-basis-25") else point_families(cb)
    tab = commutator_table(gens, fams)
    return {"table": tab.to_json(), "items": tab.render().splitlines()}, EXIT_OK


def _scenario(args):
    from .numlab import ScenarioSpec

    data = _load_json(args.scenario) if args.scenario else dict(PRESETS[args.preset])
    if args.h is not None:
        data["h"] = args.h
    try:
        return ScenarioSpec.from_json(data)
    except TypeError as exc:
        raise UsageError(f"bad scenario: {exc}") from None


def cmd_num(cb, args, cfg):
    from .numlab import DEFAULT_CONFIG, NumConfig, integrate_solution, reparametrize_phi_to_t, residual, transport

    conf = NumConfig(verify_tol=args.tol) if args.tol is not None else DEFAULT_CONFIG
    spec = _scenario(args)
    eq = cb.equation(spec.equation)
    curve = integrate_solution(spec, eq, conf)
    r0 = residual(curve, eq, conf)
    base = {"scenario": spec.to_json(), "residual": r0}
    if args.command == "solve":
        if args.csv:
            Path(args.csv).write_text(curve.to_csv())
        rep = VerificationReport("curve solves " + eq.name, "verified" if r0 < conf.verify_tol else "refuted",
                                 details={"max_residual": r0, "points": len(curve.grid)})
        return {**base, "results": [rep.to_json()]}, None
    if args.command == "transport":
        if spec.equation != "eq2":
            raise UsageError("transport works on eq2 scenarios")
        flow = cb.example(args.case).flow
        results = []
        for s in args.s:
            r = transport(curve, flow, s, eq, conf).provenance["residual"]
            results.append(VerificationReport(f"{args.case} flow at s={s:+g}",
                                              "verified" if r < conf.verify_tol else "refuted",
                                              details={"max_residual": r}).to_json())
        return {**base, "results": results}, None
    if spec.equation != "eq1":
        raise UsageError("reparam needs an eq1 scenario (independent variable phi)")
    w = args.w if args.w is not None else float(spec.parameters.get("w", 0.0))
    out = reparametrize_phi_to_t(curve, w)
    r = residual(out, cb.equation("eq2"), conf)
    rep = VerificationReport("reparametrized curve solves eq2", "verified" if r < conf.verify_tol else "refuted",
                             details={"max_residual": r})
    return {**base, "results": [rep.to_json()]}, None


def cmd_claims(cb, args, cfg):
    from .claims import run_claims

    pairs = run_claims(args.id, seed=cfg["seed"], cb=cb)
    results = []
    mismatch = inconclusive = False
    for claim, rep in pairs:
        d = rep.to_json()
        d.pop("breakdown", None)
        d["details"] = {k: v for k, v in d.get("details", {}).items() if not isinstance(v, (dict, list))}
        ok = claim.engine_ok(rep)
        d["engine"] = "ok" if ok else "mismatch"
        mismatch |= not ok
        inconclusive |= rep.verdict == "inconclusive"
        results.append(d)
    summary = {
        "claims": len(results),
        "agrees": sum(r["paper_agreement"] == "agrees" for r in results),
        "conflicts": sum(r["paper_agreement"] == "conflicts" for r in results),
    }
    code = EXIT_INCONCLUSIVE if inconclusive else (EXIT_REFUTED if mismatch else EXIT_OK)
    notes = [f"{summary['claims']} claims; paper agrees on {summary['agrees']}, conflicts on {summary['conflicts']}"]
    return {"results": results, "summary": summary, "notes": notes}, code


COMMANDS = {
    "casebook": cmd_casebook,
    "check": cmd_check,
    "det": cmd_det,
    "bracket": cmd_bracket,
    "num": cmd_num,
    "claims": cmd_claims,
}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(args)
        doc, code = COMMANDS[args.group](Casebook(), args, cfg)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        err.write(f"vortexsym: error: {exc}\n")
        return EXIT_USAGE
    except DSLError as exc:
        err.write(f"vortexsym: input error: {exc}\n")
        return EXIT_USAGE
    except (UnknownEntry, KeyError) as exc:
        err.write(f"vortexsym: error: {exc.args[0] if exc.args else exc}\n")
        return EXIT_USAGE
    except (ModeError, ValueError) as exc:
        err.write(f"vortexsym: error: {exc}\n")
        return EXIT_USAGE
    if code is None:
        code = _exit_for(doc.get("results", []))
    full = {"schema": SCHEMA, "command": f"{args.group} {args.command}", "config": cfg, **doc, "exit_code": code}
    if cfg["format"] == "json":
        full.pop("items", None)
    _emit(full, cfg["format"], out)
    return code


def main(argv=None) -> int:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
