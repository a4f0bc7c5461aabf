"""Contract inference across module boundaries.

A single module, analyzed in isolation, knows nothing about the values its
neighbors feed it, so a first pass assumes the worst everywhere.  But that
first pass also *observes* concrete facts: the range each exported function
can return, the state it leaves in the globals it writes, and the arguments
it passes to the externals it calls.  Those observations, stored per module
in a summary database, are translated into contracts here:

  * a function's joined return range becomes an ``ensures`` on ``return``,
  * the joined after-write ranges of a global (across every writer in every
    recorded module) become an ``invariant`` on that global,
  * the joined argument ranges at every recorded call site of a function
    become a ``requires`` on the callee's parameters.

Re-analyzing every module under the inferred contracts tightens the
observations, which may tighten the contracts again; `run_fixpoint` iterates
until the inferred set reproduces itself.  A run that starts from an already
converged database confirms convergence in a single pass.

A ``requires`` is only trustworthy once every module that could call the
function has contributed its call sites, so parameter contracts are held
back until every project module that declares the callee's prototype has a
database record.  Manual and interface contracts always take precedence:
the merge is left-biased, so an inferred contract is dropped whenever a
user-supplied one constrains the same subject path.
"""

from __future__ import annotations

import hashlib
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

from .analyzer import AnalysisConfig, AnalysisOutput, analyze_program
from .database import (
    FunctionSummary,
    ModuleRecord,
    Observation,
    SummaryDatabase,
)
from .domains import FMAX, FloatInterval, IntInterval, IntSet, join_value
from .frontend.contracts import Contract, ContractSet, format_float, merge
from .frontend.nodes import (
    EnumType,
    FloatType,
    IntType,
    Loc,
    Module,
    StructType,
    Type,
    UCharType,
)
from .frontend.parser import parse_contract_text
from .harness import DRIVER_ENTRY, Harness, build_harness, harness_program

INFERRED_LOC = Loc("<inferred>", 0, 0)


class InferenceError(Exception):
    pass


# ---------------------------------------------------------------------------
# summary extraction
# ---------------------------------------------------------------------------

def _kind_of(ty: Type, enums: dict) -> str | None:
    """Type kind tag for an observation; None for non-scalar types."""
    if isinstance(ty, IntType):
        return "int"
    if isinstance(ty, UCharType):
        return "uchar"
    if isinstance(ty, FloatType):
        return "float"
    if isinstance(ty, EnumType):
        decl = enums.get(ty.name)
        if decl is None:
            raise InferenceError(f"unknown enum type {ty.name!r}")
        return f"enum:{len(decl.members)}"
    return None


def contracts_fingerprint(contracts: ContractSet) -> str:
    """Stable hash of a contract set, stored with each database record.

    Lets a reader tell which contracts a record was produced under, e.g. to
    spot records that predate a manual contract edit.
    """
    blob = json.dumps([list(row) for row in contracts.canonical()])
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def extract_summary(mod: Module, harness: Harness, out: AnalysisOutput,
                    contracts: ContractSet | None = None) -> ModuleRecord:
    """Turn one harness analysis into the module's database record."""
    enums = mod.enums()
    structs = mod.structs()
    globals_ty = {name: g.ty for name, g in mod.globals().items()}
    defined = {name: fd.sig for name, fd in mod.functions().items()}
    protos = {name: sig for name, sig in mod.prototypes().items()
              if name not in defined}

    def global_path_kind(pretty: str) -> str | None:
        name, dot, fld = pretty.partition(".")
        ty = globals_ty.get(name)
        if ty is None:
            return None
        if dot:
            if not isinstance(ty, StructType):
                return None
            decl = structs.get(ty.name)
            fty = next((f.ty for f in decl.fields if f.name == fld), None) if decl else None
            return _kind_of(fty, enums) if fty is not None else None
        return _kind_of(ty, enums)

    functions = {name: FunctionSummary() for name in defined}

    ex = out.extraction
    for fn, val in ex.returns.items():
        sig = defined.get(fn)
        if sig is None or sig.ret is None:
            continue
        kind = _kind_of(sig.ret, enums)
        if kind is not None and not val.is_bottom():
            functions[fn].returns = Observation(kind, val)

    for (fn, pretty), val in ex.globals_after.items():
        if fn not in functions or val.is_bottom():
            continue
        kind = global_path_kind(pretty)
        if kind is not None:
            functions[fn].globals[pretty] = Observation(kind, val)

    calls: dict[str, dict[str, Observation]] = {}
    for (fn, pname), val in ex.params.items():
        proto = protos.get(fn)
        if proto is None or val.is_bottom():
            continue
        pty = next((p.ty for p in proto.params if p.name == pname), None)
        kind = _kind_of(pty, enums) if pty is not None else None
        if kind is not None:
            calls.setdefault(fn, {})[pname] = Observation(kind, val)
    for fn in ex.called_stubs:
        if fn in protos:
            calls.setdefault(fn, {})

    return ModuleRecord(
        module=mod.name,
        functions=functions,
        calls=calls,
        externals=tuple(sorted(harness.plan.stub_names)),
        analyzed_at=datetime.now(timezone.utc).isoformat(),
        contracts_fingerprint=(
            contracts_fingerprint(contracts) if contracts is not None else ""
        ),
    )


# ---------------------------------------------------------------------------
# observation -> contract text
# ---------------------------------------------------------------------------

def _trivial_range(kind: str, width: int) -> tuple:
    if kind == "int":
        return -(1 << (width - 1)), (1 << (width - 1)) - 1
    if kind == "uchar":
        return 0, 255
    if kind == "float":
        return -FMAX, FMAX
    if kind.startswith("enum:"):
        return 0, int(kind.split(":", 1)[1]) - 1
    raise InferenceError(f"unknown observation kind {kind!r}")


def _num_text(v, kind: str) -> str:
    if kind == "float":
        return format_float(float(v))
    return str(int(v))


def bounds_text(var: str, obs: Observation, width: int) -> str | None:
    """Render an observation as a boolean constraint over ``var``.

    Returns None when the observation is trivially true for the subject's
    type, in which case no contract should be emitted.
    """
    t_lo, t_hi = _trivial_range(obs.kind, width)
    v = obs.value
    if isinstance(v, IntSet):
        vals = v.vals
        if vals[0] == t_lo and vals[-1] == t_hi and len(vals) == t_hi - t_lo + 1:
            return None
        return " || ".join(f"{var} == {n}" for n in vals)
    if isinstance(v, (IntInterval, FloatInterval)):
        if v.is_bottom():
            return None
        parts = []
        if v.lo > t_lo:
            parts.append(f"{var} >= {_num_text(v.lo, obs.kind)}")
        if v.hi < t_hi:
            parts.append(f"{var} <= {_num_text(v.hi, obs.kind)}")
        return " && ".join(parts) if parts else None
    raise InferenceError(f"cannot render {v!r}")


def _make_contract(kind: str, subject: str, body: str) -> Contract:
    # round-trip through the contract parser so inferred text obeys exactly
    # the grammar a user could have written by hand
    k, expr, tag = parse_contract_text(f"{kind}: {body}", INFERRED_LOC, origin="inferred")
    return Contract(kind=k, subject=subject, expr=expr, seq_tag=tag,
                    origin="inferred", loc=INFERRED_LOC)


def _join_obs(a: Observation | None, b: Observation, what: str) -> Observation:
    if a is None:
        return b
    if a.kind != b.kind:
        raise InferenceError(f"conflicting type kinds for {what}: {a.kind} vs {b.kind}")
    return Observation(a.kind, join_value(a.value, b.value))


@dataclass
class Aggregate:
    """Database records joined project-wide, one entry per subject.

    Each map value equals the join over every record currently contributing
    an observation for that subject; recomputing from the raw records is
    idempotent.
    """

    returns: dict[str, Observation] = field(default_factory=dict)
    globals: dict[str, Observation] = field(default_factory=dict)
    params: dict[tuple[str, str], Observation] = field(default_factory=dict)


def aggregate_records(records: dict[str, ModuleRecord]) -> Aggregate:
    """Join all per-module observations into project-wide value maps."""
    agg = Aggregate()
    for mname in sorted(records):
        rec = records[mname]
        for fn in sorted(rec.functions):
            summ = rec.functions[fn]
            if summ.returns is not None:
                agg.returns[fn] = _join_obs(agg.returns.get(fn), summ.returns,
                                            f"return of {fn!r}")
            for path in sorted(summ.globals):
                agg.globals[path] = _join_obs(agg.globals.get(path),
                                              summ.globals[path],
                                              f"global {path!r}")
        for fn in sorted(rec.calls):
            for pname in sorted(rec.calls[fn]):
                key = (fn, pname)
                agg.params[key] = _join_obs(agg.params.get(key),
                                            rec.calls[fn][pname],
                                            f"parameter {fn}.{pname}")
    return agg


def synthesize_contracts(records: dict[str, ModuleRecord], width: int,
                         external_refs: dict[str, set] | None = None) -> ContractSet:
    """Combine all database records into one inferred contract set.

    ``external_refs`` maps a function name to the set of project modules
    that declare its prototype; a requires contract for that function is
    emitted only once every one of those modules has a record.  Without the
    map no requires contracts are gated (useful for tests).
    """
    out = ContractSet()
    agg = aggregate_records(records)

    # ensures: each function's joined return range (a function is defined in
    # exactly one module, so the join is that module's observation)
    for fn in sorted(agg.returns):
        body = bounds_text("return", agg.returns[fn], width)
        if body is not None:
            out.add(_make_contract("ensures", fn, body))

    # invariants: the after-write ranges of each global joined across every
    # recorded writer
    for path in sorted(agg.globals):
        body = bounds_text(path, agg.globals[path], width)
        if body is not None:
            out.add(_make_contract("invariant", path, body))

    # requires: each callee's argument ranges joined across every recorded
    # caller, gated on all referencing modules being recorded
    param_obs: dict[str, dict[str, Observation]] = {}
    for (fn, pname), obs in agg.params.items():
        param_obs.setdefault(fn, {})[pname] = obs
    for fn in sorted(param_obs):
        if external_refs is not None:
            refs = external_refs.get(fn, set())
            if not refs <= set(records):
                continue
        conjuncts = []
        for pname in sorted(param_obs[fn]):
            body = bounds_text(pname, param_obs[fn][pname], width)
            if body is not None:
                conjuncts.append(body)
        if conjuncts:
            out.add(_make_contract("requires", fn, " && ".join(conjuncts)))

    return out


def external_refs_of(modules: list[Module]) -> dict[str, set]:
    """Map each externally declared function to the modules declaring it."""
    refs: dict[str, set] = {}
    for mod in modules:
        defined = set(mod.functions())
        for name in mod.prototypes():
            if name not in defined:
                refs.setdefault(name, set()).add(mod.name)
    return refs


# ---------------------------------------------------------------------------
# the fixpoint driver
# ---------------------------------------------------------------------------

@dataclass
class ModuleRun:
    """One module's analysis within a pass."""

    module: Module
    harness: Harness
    output: AnalysisOutput
    record: ModuleRecord


@dataclass
class FixpointResult:
    converged: bool
    passes: int
    inferred: ContractSet
    runs: dict[str, ModuleRun] = field(default_factory=dict)
    seconds: float = 0.0
    # the set one pass earlier; lets a non-converged run show what still moved
    previous: ContractSet | None = None


def analyze_module(mod: Module, contracts: ContractSet,
                   config: AnalysisConfig) -> tuple[Harness, AnalysisOutput]:
    """Build the module's harness and analyze its driver entry."""
    h = build_harness(mod, contracts, config.int_width)
    prog = harness_program(mod, h)
    cfg = replace(config, contracts=contracts, zero_init_globals=False)
    out = analyze_program(prog, DRIVER_ENTRY, cfg, plan=h.plan)
    return h, out


def run_fixpoint(modules: list[Module], db: SummaryDatabase,
                 base_contracts: ContractSet, config: AnalysisConfig,
                 jobs: int = 1, max_passes: int = 20) -> FixpointResult:
    """Iterate per-module analyses until the inferred contracts stabilize.

    Every pass analyzes each module's harness under the current contracts
    (user-supplied merged over inferred), refreshes the database records,
    and re-synthesizes.  Convergence is reached when a pass reproduces the
    contract set it started from, so a warm start on an already stable
    database costs exactly one confirming pass.
    """
    t0 = time.monotonic()
    mods = sorted(modules, key=lambda m: m.name)
    refs = external_refs_of(mods)
    records = db.read_all()
    inferred = synthesize_contracts(records, config.int_width, refs)

    runs: dict[str, ModuleRun] = {}
    previous: ContractSet | None = None
    for pass_no in range(1, max_passes + 1):
        stage = merge(base_contracts, inferred)

        def one(mod: Module) -> ModuleRun:
            h, out = analyze_module(mod, stage, config)
            return ModuleRun(mod, h, out, extract_summary(mod, h, out, stage))

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(one, mods))
        else:
            results = [one(m) for m in mods]

        runs = {r.module.name: r for r in results}
        for r in results:
            records[r.module.name] = r.record
        db.write_many(r.record for r in results)

        new_inferred = synthesize_contracts(records, config.int_width, refs)
        if new_inferred.canonical() == inferred.canonical():
            return FixpointResult(True, pass_no, new_inferred, runs,
                                  time.monotonic() - t0, previous=previous)
        previous = inferred
        inferred = new_inferred

    return FixpointResult(False, max_passes, inferred, runs,
                          time.monotonic() - t0, previous=previous)
