"""Command-line front end.

Subcommands: ``run <scenario|all>``, ``cohomology``, ``classify-rep``,
``fermion`` and ``table``.  Exit status is 0 only when every produced report
passes, 1 when an assertion fails, and 2 for invalid arguments.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import scenarios
from .cohomology import class_coordinates, compute_h2
from .errors import UnsupportedCombination
from .fermion import build_fermion_unwind, build_model, verify_fermion_plan
from .io import load_group
from .projective import detect_factor_system
from .scenarios import SCENARIOS, Options, ScenarioError


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--L", type=int, default=scenarios.DEFAULT_L, help="number of sites")
    p.add_argument("--group", help="group file (JSON) or bundled name such as z2z2.json")
    p.add_argument("--cocycle", type=int, default=0, help="index of the H2 generator to use")
    p.add_argument("--class", dest="cls", help="symmetry class or model variant")
    p.add_argument("--out", help="directory for JSON reports and other files")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    p.add_argument("--jobs", type=int, default=1, help="parallel processes for 'run all'")
    p.add_argument("--dump-state", action="store_true", help="write input/output state snapshots")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sptunwind", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a named scenario and verify it")
    p.add_argument("scenario", choices=SCENARIOS + ("all",))
    p.add_argument("--markdown", action="store_true", help="also write a markdown summary")
    _add_common(p)

    p = sub.add_parser("cohomology", help="H2(G, U(1)) of a group file")
    _add_common(p)

    p = sub.add_parser("classify-rep", help="factor-system class of a matrices file")
    p.add_argument("file")
    p.add_argument("--modulus", type=int, help="Z_n for the phases (default: smallest that fits)")

    p = sub.add_parser("fermion", help="Majorana-chain models and unwinding circuits")
    p.add_argument("--class", dest="cls", default="cii")
    p.add_argument("--L", type=int, default=scenarios.DEFAULT_L)
    p.add_argument("--nu", type=int, choices=(2, 4), default=4)
    p.add_argument("--verify", action="store_true", help="emit the verification report")
    p.add_argument("--out", help="write the JSON here instead of stdout")

    p = sub.add_parser("table", help="markdown summary table with live verification")
    p.add_argument("which", type=int, choices=(3, 4, 5))
    p.add_argument("--out", help="directory for the markdown file")
    return parser


def _options(args) -> Options:
    return Options(L=args.L, group=args.group, cocycle=args.cocycle, cls=args.cls,
                   out=args.out, seed=args.seed, dump_state=args.dump_state)


def _run_one(name: str, opts: Options) -> dict:
    return scenarios.run(name, opts)


def _markdown(name: str, report: dict) -> str:
    lines = [f"# {name}", "", f"Result: {'PASS' if report['passed'] else 'FAIL'}", ""]
    for key in ("fidelity", "hamiltonian_residual", "schmidt_rank1_cut", "h2"):
        if key in report:
            lines.append(f"- {key}: {report[key]}")
    if report.get("commutators"):
        worst = max(c["norm"] for c in report["commutators"])
        lines.append(f"- largest layer commutator norm: {worst}")
    for f in report["failures"]:
        lines.append(f"- failure: {f}")
    return "\n".join(lines) + "\n"


def _emit(name: str, report: dict, args, markdown: bool = False):
    text = scenarios.report_json(report)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.json").write_text(text)
        if markdown:
            (out / f"{name}.md").write_text(_markdown(name, report), encoding="utf-8")
        print(f"{'PASS' if report['passed'] else 'FAIL'} {name}")
    else:
        sys.stdout.write(text)


def _status(name: str, report: dict) -> int:
    if report["passed"]:
        return 0
    print(f"FAIL {name}: {report['failures'][0]}", file=sys.stderr)
    return 1


def cmd_run(args) -> int:
    names = SCENARIOS if args.scenario == "all" else (args.scenario,)
    opts = _options(args)
    for name in names:
        scenarios.validate(name, opts)
    if len(names) > 1 and args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_run_one, names, [opts] * len(names)))
    else:
        reports = [_run_one(n, opts) for n in names]
    code = 0
    for name, report in zip(names, reports):
        if name == "cohomology":
            print(f"H2 = {report['h2']}")
        _emit(name, report, args, getattr(args, "markdown", False))
        code = max(code, _status(name, report))
    return code


def cmd_cohomology(args) -> int:
    opts = _options(args)
    scenarios.validate("cohomology", opts)
    report = scenarios.run("cohomology", opts)
    print(f"H2 = {report['h2']}")
    if args.out:
        _emit("cohomology", report, args)
    return _status("cohomology", report)


def cmd_classify_rep(args) -> int:
    spec = load_group(args.file)
    if spec.rep is None:
        raise ScenarioError("file has no representation matrices")
    from .projective import factor_system

    f = factor_system(spec.rep, args.modulus) if args.modulus else detect_factor_system(spec.rep)
    h2 = compute_h2(spec.group)
    coords = class_coordinates(f.cocycle, h2)
    result = {"group": spec.name, "order": spec.group.order, "dimension": spec.rep.dim,
              "modulus": f.cocycle.modulus, "h2": scenarios.h2_label(h2.invariant_factors),
              "class": list(coords), "trivial": not any(coords)}
    sys.stdout.write(json.dumps(result, indent=2) + "\n")
    return 0


def cmd_fermion(args) -> int:
    cls = args.cls.upper()
    if not args.verify:
        H = build_model("CII" if args.nu == 4 else "AIII(1)", args.L, extended=True)
        text = json.dumps(H.to_dict(), indent=2) + "\n"
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0
    if args.L % 2:
        raise ScenarioError("fermion circuits need an even --L")
    report = verify_fermion_plan(build_fermion_unwind(args.nu, args.L, cls)).to_dict()
    text = scenarios.report_json(report)
    if args.out:
        Path(args.out).write_text(text)
        print(f"{'PASS' if report['passed'] else 'FAIL'} {report['plan']}")
    else:
        sys.stdout.write(text)
    return _status(report["plan"], report)


def cmd_table(args) -> int:
    text = scenarios.table_report(args.which)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"table{args.which}.md").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return 0 if "| FAIL" not in text else 1


COMMANDS = {"run": cmd_run, "cohomology": cmd_cohomology, "classify-rep": cmd_classify_rep,
            "fermion": cmd_fermion, "table": cmd_table}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ScenarioError, UnsupportedCombination, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
