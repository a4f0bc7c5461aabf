"""Batch command line for analyses, inference, and report comparison.

Four subcommands:

    modcheck analyze  --stage {0,1,2,3} file.mc...   run one analysis stage
    modcheck infer    file.mc...                     iterate contract inference
    modcheck single-module file.mc                   refresh one module's record
    modcheck diff-reports a.json b.json              compare two reports

Stages layer contracts incrementally.  Stage 0 is an integration analysis of
the linked project from ``--entry`` with zero-initialized globals and no
contracts.  Stage 1 analyzes each module's generated harness with only the
implicit type contracts (enum member ranges, finite floats).  Stage 2 adds
contracts imported from ``--interface`` XML plus contracts synthesized from
the summary database.  Stage 3 adds manual contracts: ``/// [[ ... ]]``
annotations in the sources and any ``--contracts`` files, which outrank
everything else.

Exit codes: 0 no alarms, 1 alarms reported, 2 tool or usage error,
3 inference failed to converge within the pass cap.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .analyzer import AnalysisConfig, AnalysisError, analyze_program
from .contractsio import load_contracts, save_contracts
from .database import DatabaseError, SummaryDatabase
from .domains import DomainError
from .frontend.contracts import ContractSet
from .frontend.contracts import merge as merge_contracts
from .frontend.lexer import FrontendError
from .frontend.nodes import Module
from .frontend.parser import parse_module
from .frontend.resolve import resolve_project
from .harness import HarnessError
from .ifacespec import IfaceError, constraints_to_contracts, load_interface
from .inference import (
    analyze_module,
    extract_summary,
    external_refs_of,
    run_fixpoint,
    synthesize_contracts,
)
from .report import (
    ReportError,
    build_report,
    diff_reports,
    diff_text,
    report_table,
    report_to_json,
)

EXIT_CLEAN = 0
EXIT_ALARMS = 1
EXIT_ERROR = 2
EXIT_NO_CONVERGENCE = 3

_TOOL_ERRORS = (FrontendError, AnalysisError, HarnessError, IfaceError,
                DatabaseError, ReportError, DomainError, OSError,
                json.JSONDecodeError)


def _default_db() -> str:
    return os.environ.get("MODCHECK_DB", "modcheck-db")


def _load_modules(paths: list[str]) -> list[Module]:
    mods = []
    for p in paths:
        path = Path(p)
        mods.append(parse_module(path.read_text(encoding="utf-8"), path.name))
    return mods


def _manual_contracts(modules: list[Module], files: list[str]) -> ContractSet:
    # explicit --contracts files outrank in-source annotations
    cs = ContractSet()
    for f in files:
        cs = merge_contracts(cs, load_contracts(f))
    prog = resolve_project(modules)
    return merge_contracts(cs, prog.manual_contracts)


def _interface_contracts(modules: list[Module], files: list[str]) -> ContractSet:
    cs = ContractSet()
    for f in files:
        constraints = load_interface(f)
        imported, warnings = constraints_to_contracts(constraints, modules)
        for w in warnings:
            print(f"warning: {f}: {w}", file=sys.stderr)
        cs = merge_contracts(cs, imported)
    return cs


def _stage_contracts(stage: int, modules: list[Module],
                     args: argparse.Namespace) -> ContractSet:
    """The contract set a module-level stage analyzes under."""
    if stage <= 1:
        resolve_project(modules)  # surface frontend errors before analysis
        return ContractSet()
    interface = _interface_contracts(modules, args.interface)
    db = SummaryDatabase(args.db)
    inferred = synthesize_contracts(db.read_all(), args.int_width,
                                    external_refs_of(modules))
    cs = merge_contracts(interface, inferred)
    if stage >= 3:
        cs = merge_contracts(_manual_contracts(modules, args.contracts), cs)
    else:
        resolve_project(modules)
    return cs


def _config(args: argparse.Namespace, **over) -> AnalysisConfig:
    return AnalysisConfig(int_width=args.int_width, **over)


def _emit_harnesses(runs, out_dir: str) -> None:
    dest = Path(out_dir)
    dest.mkdir(parents=True, exist_ok=True)
    for name, (harness, _out) in sorted(runs.items()):
        (dest / f"{name}.harness.mc").write_text(harness.source,
                                                 encoding="utf-8")


def _finish_report(doc: dict, args: argparse.Namespace) -> int:
    Path(args.json).write_text(report_to_json(doc), encoding="utf-8")
    print(report_table(doc), end="")
    return EXIT_ALARMS if doc["totals"]["total"] > 0 else EXIT_CLEAN


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_analyze(args: argparse.Namespace) -> int:
    modules = _load_modules(args.paths)
    if args.stage == 0:
        if not args.entry:
            print("error: stage 0 is an integration analysis and needs "
                  "--entry", file=sys.stderr)
            return EXIT_ERROR
        prog = resolve_project(modules, entry=args.entry,
                               zero_init_globals=True)
        out = analyze_program(prog, args.entry,
                              _config(args, zero_init_globals=True))
        outputs = {m.name: out for m in modules}
        doc = build_report(0, modules, outputs, entry=args.entry)
        return _finish_report(doc, args)

    contracts = _stage_contracts(args.stage, modules, args)
    cfg = _config(args)
    runs: dict = {}
    mods = sorted(modules, key=lambda m: m.name)
    if args.jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(
                lambda m: (m.name, analyze_module(m, contracts, cfg)), mods))
        runs = dict(results)
    else:
        runs = {m.name: analyze_module(m, contracts, cfg) for m in mods}

    if args.emit_harness:
        _emit_harnesses(runs, args.emit_harness)

    outputs = {name: out for name, (_h, out) in runs.items()}
    doc = build_report(args.stage, modules, outputs)
    return _finish_report(doc, args)


def cmd_infer(args: argparse.Namespace) -> int:
    modules = _load_modules(args.paths)
    db = SummaryDatabase(args.db)
    export = Path(args.db) / "inferred.contracts"
    if not modules:
        save_contracts(ContractSet(), export)
        print("no modules given; nothing inferred")
        return EXIT_CLEAN

    base = merge_contracts(_manual_contracts(modules, args.contracts),
                           _interface_contracts(modules, args.interface))
    res = run_fixpoint(modules, db, base, _config(args),
                       jobs=args.jobs, max_passes=args.max_passes)
    save_contracts(res.inferred, export)

    by_kind: dict = {}
    for c in res.inferred.all_contracts():
        by_kind[c.kind] = by_kind.get(c.kind, 0) + 1
    kinds = ", ".join(f"{n} {k}" for k, n in sorted(by_kind.items())) or "none"
    total = len(res.inferred.all_contracts())
    if res.converged:
        print(f"converged in {res.passes} pass(es) "
              f"[{res.seconds:.2f}s]: {total} contract(s) inferred ({kinds})")
        print(f"exported to {export}")
        return EXIT_CLEAN

    print(f"did not converge within {args.max_passes} pass(es); "
          f"still changing:", file=sys.stderr)
    prev = set(res.previous.canonical()) if res.previous is not None else set()
    cur = set(res.inferred.canonical())
    for kind, subject, text in sorted(cur - prev):
        print(f"  + {subject}: {text}", file=sys.stderr)
    for kind, subject, text in sorted(prev - cur):
        print(f"  - {subject}: {text}", file=sys.stderr)
    return EXIT_NO_CONVERGENCE


def cmd_single_module(args: argparse.Namespace) -> int:
    if not Path(args.db).is_dir():
        print(f"error: database directory {args.db!r} does not exist; "
              f"run 'modcheck infer' first", file=sys.stderr)
        return EXIT_ERROR
    [mod] = _load_modules([args.path])
    contracts = _stage_contracts(args.stage, [mod], args)
    h, out = analyze_module(mod, contracts, _config(args))
    db = SummaryDatabase(args.db)
    db.write(extract_summary(mod, h, out, contracts))
    if args.emit_harness:
        _emit_harnesses({mod.name: (h, out)}, args.emit_harness)
    doc = build_report(args.stage, [mod], {mod.name: out})
    return _finish_report(doc, args)


def cmd_diff_reports(args: argparse.Namespace) -> int:
    a = json.loads(Path(args.first).read_text(encoding="utf-8"))
    b = json.loads(Path(args.second).read_text(encoding="utf-8"))
    delta = diff_reports(a, b)
    print(diff_text(delta), end="")
    unchanged = not delta["added"] and not delta["removed"] \
        and not any(delta["class_delta"].values())
    return EXIT_CLEAN if unchanged else EXIT_ALARMS


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, with_stage=True) -> None:
    if with_stage:
        p.add_argument("--stage", type=int, choices=(0, 1, 2, 3), default=1,
                       help="contract stage to analyze at (default 1)")
    p.add_argument("--db", default=_default_db(),
                   help="summary database directory "
                        "(default $MODCHECK_DB or ./modcheck-db)")
    p.add_argument("--contracts", action="append", default=[],
                   metavar="FILE", help="detached .contracts file (repeatable)")
    p.add_argument("--interface", action="append", default=[],
                   metavar="FILE", help="interface description XML (repeatable)")
    p.add_argument("--jobs", type=int, default=1, metavar="N",
                   help="analyze modules in parallel")
    p.add_argument("--int-width", type=int, default=32, metavar="BITS",
                   help="signed int width in bits (default 32)")
    p.add_argument("--json", default="report.json", metavar="PATH",
                   help="report JSON output path (default report.json)")
    p.add_argument("--emit-harness", metavar="DIR",
                   help="also write generated harness sources to DIR")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="modcheck",
        description="Module-level runtime-error analysis for Mini-C with "
                    "generated verification harnesses and contract inference.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="run one analysis stage over a project")
    p.add_argument("paths", nargs="+", metavar="FILE.mc")
    p.add_argument("--entry", help="integration entry function (stage 0)")
    _add_common(p)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("infer", help="iterate contract inference to a fixpoint")
    p.add_argument("paths", nargs="*", metavar="FILE.mc")
    p.add_argument("--max-passes", type=int, default=20, metavar="N",
                   help="inference pass cap (default 20)")
    _add_common(p, with_stage=False)
    p.set_defaults(fn=cmd_infer)

    p = sub.add_parser("single-module",
                       help="re-analyze one module against the database")
    p.add_argument("path", metavar="FILE.mc")
    _add_common(p)
    # a lone module is usually re-checked against the shared database, so
    # the default stage includes inferred contracts; stage 0 needs a project
    p.set_defaults(fn=cmd_single_module, stage_floor=1, stage=2)

    p = sub.add_parser("diff-reports", help="compare two report.json files")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(fn=cmd_diff_reports)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "stage_floor", 0) > getattr(args, "stage", 3):
        print("error: single-module analysis is stage 1-3", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.fn(args)
    except _TOOL_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
