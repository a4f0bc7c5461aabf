"""Verification harness generation.

A module is checked in isolation by closing it on both sides.  Stub
definitions stand in for the external functions it calls: each stub
asserts the callee's preconditions against the caller's arguments,
havocs whatever the callee is allowed to change, and constrains its
result by the callee's postconditions.  A driver plays the module's
environment: it havocs the module globals under their invariants,
runs any init-sequence functions, and then calls every function the
module defines, forever, in every order, with every argument the
contracts allow.

Both sides are produced as one ordinary Mini-C module (AST, not text)
that resolves together with the module under test, plus an extraction
plan telling the analyzer where to record value snapshots for contract
inference.  `print_module` renders the harness for human inspection.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .analyzer import ExtractionPlan
from .domains import INT_BOT, IntInterval, abs_binop, int_max, int_min
from .frontend import ContractSet, resolve_project
from .frontend.nodes import (
    ArrayType, AssertStmt, Assign, Binary, Block, Break, Call, Case,
    EnumDecl, EnumType, Expr, ExprStmt, FieldAccess, FloatLit, FloatType,
    FunctionDef, FunctionSig, GlobalAssert, GlobalDecl, If, Index, IntLit,
    KnownFact, LengthOf, Loc, Module, ModifyFullRange, Name, PointerType,
    Program, Return, ReturnVal, StructDecl, StructType, Switch, UCharType,
    Unary, VarDecl, While, ZERO_FILL,
)
from .frontend.pretty import print_module

DRIVER_ENTRY = "__driver_main"

_CHOICE = "__driver_choice"
_STUB_RES = "__stub_res"


class HarnessError(Exception):
    """The module's contracts cannot be materialized into a harness."""


@dataclass
class Harness:
    """The generated closing module for one module under test."""

    module_name: str
    entry: str
    harness_module: Module
    plan: ExtractionPlan
    source: str


class _Lines:
    """Synthetic location factory: one line per generated statement.

    Distinct lines keep alarm deduplication and the extraction plan's
    location keys unambiguous; the printed harness has its own layout.
    """

    def __init__(self, filename: str):
        self.file = filename
        self.n = 0

    def next(self, col: int = 5) -> Loc:
        self.n += 1
        return Loc(self.file, self.n, col)


# ---------------------------------------------------------------------------
# contract expression helpers
# ---------------------------------------------------------------------------

def _rename(e: Expr, m: dict) -> Expr:
    """Rewrite parameter names and `return` to driver locals."""
    if isinstance(e, Name):
        if e.ident in m:
            return Name(m[e.ident], e.loc)
        return e
    if isinstance(e, ReturnVal):
        if "return" not in m:
            raise HarnessError(
                f"'return' in a contract for a void function at {e.loc}")
        return Name(m["return"], e.loc)
    if isinstance(e, Unary):
        return Unary(e.op, _rename(e.operand, m), e.loc)
    if isinstance(e, Binary):
        return Binary(e.op, _rename(e.left, m), _rename(e.right, m), e.loc)
    return e


def _names_in(e: Expr, acc: set) -> set:
    if isinstance(e, Name):
        acc.add(e.ident)
    elif isinstance(e, FieldAccess):
        acc.add(e.base.ident)
    elif isinstance(e, Unary):
        _names_in(e.operand, acc)
    elif isinstance(e, Binary):
        _names_in(e.left, acc)
        _names_in(e.right, acc)
    return acc


def _ranges_from_requires(reqs, width: int) -> dict:
    """Integer parameter bounds implied by the requires contracts.

    Handles the checkable fragment only: comparisons of a name against an
    integer literal, combined with && / ||.  Anything else contributes no
    constraint, which errs toward "unbounded" and a sizing diagnostic.
    """
    full = IntInterval(int_min(width), int_max(width))

    def of_cmp(op: str, name: str, c: int) -> dict:
        lo, hi = full.lo, full.hi
        if op in ("<", "<="):
            hi = c - 1 if op == "<" else c
        elif op in (">", ">="):
            lo = c + 1 if op == ">" else c
        elif op == "==":
            lo = hi = c
        else:  # !=
            return {}
        if lo > hi:
            return {name: INT_BOT}
        return {name: IntInterval(max(lo, full.lo), min(hi, full.hi))}

    _FLIP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=",
             "==": "==", "!=": "!="}

    def walk(e: Expr) -> dict:
        if isinstance(e, Binary) and e.op == "&&":
            l, r = walk(e.left), walk(e.right)
            out = dict(l)
            for k, v in r.items():
                out[k] = v.meet(out[k]) if k in out else v
            return out
        if isinstance(e, Binary) and e.op == "||":
            l, r = walk(e.left), walk(e.right)
            return {k: l[k].join(r[k]) for k in l.keys() & r.keys()}
        if isinstance(e, Binary) and e.op in ("<", "<=", ">", ">=", "==",
                                              "!="):
            if isinstance(e.left, Name) and isinstance(e.right, IntLit):
                return of_cmp(e.op, e.left.ident, e.right.value)
            if isinstance(e.left, IntLit) and isinstance(e.right, Name):
                return of_cmp(_FLIP[e.op], e.right.ident, e.left.value)
        return {}

    env: dict = {}
    for c in reqs:
        for k, v in walk(c.expr).items():
            env[k] = v.meet(env[k]) if k in env else v
    return env


def _interval_of(e: Expr, env: dict, width: int) -> IntInterval:
    full = IntInterval(int_min(width), int_max(width))
    if isinstance(e, IntLit):
        return IntInterval(e.value, e.value)
    if isinstance(e, Name):
        return env.get(e.ident, full)
    if isinstance(e, Unary) and e.op == "-":
        v, _ = abs_binop("-", IntInterval(0, 0),
                         _interval_of(e.operand, env, width), width)
        return v if isinstance(v, IntInterval) else full
    if isinstance(e, Binary) and e.op in ("+", "-", "*"):
        v, _ = abs_binop(e.op, _interval_of(e.left, env, width),
                         _interval_of(e.right, env, width), width)
        return v if isinstance(v, IntInterval) else full
    return full


def _array_len(rhs: Expr | None, env: dict, width: int,
               fn: str, param: str) -> int:
    """Concrete array length to materialize for a pointer parameter."""
    if rhs is None:
        return 1  # no arrayspec: minimal witness, deeper access shows as IPA
    iv = _interval_of(rhs, env, width)
    if iv.is_bottom():
        return 1
    if iv.hi >= int_max(width):
        raise HarnessError(
            f"cannot size the array for parameter '{param}' of '{fn}': "
            f"the arrayspec bound is unbounded; add a requires contract "
            f"that bounds it from above")
    return max(1, iv.hi)


# ---------------------------------------------------------------------------
# statement builders
# ---------------------------------------------------------------------------

def _zero_expr(ty, loc: Loc, enums: dict) -> Expr:
    if isinstance(ty, FloatType):
        return FloatLit(0.0, loc)
    if isinstance(ty, EnumType):
        return Name(enums[ty.name].members[0], loc)
    return IntLit(0, loc)


def _materialize_call(sig: FunctionSig, cs: ContractSet, enums: dict,
                      width: int, L: _Lines, prefix: str):
    """Locals + havoc + requires facts + the call (+ ensures asserts).

    Returns (statements, call loc, result local name or None).
    """
    fn = sig.name
    m = {p.name: prefix + p.name for p in sig.params}
    res = None
    if sig.ret is not None:
        res = prefix + "res"
        m["return"] = res
    reqs = cs.for_function(fn, "requires")
    ranges = _ranges_from_requires(reqs, width)
    aspec: dict = {}
    for c in cs.for_function(fn, "arrayspec"):
        if isinstance(c.expr, Binary) and isinstance(c.expr.left, LengthOf):
            aspec[c.expr.left.ident] = c.expr.right

    stmts: list = []
    args: list = []
    for p in sig.params:
        ln = m[p.name]
        if isinstance(p.ty, PointerType):
            n = _array_len(aspec.get(p.name), ranges, width, fn, p.name)
            stmts.append(VarDecl(ln, ArrayType(p.ty.elem, n), ZERO_FILL,
                                 L.next()))
        elif isinstance(p.ty, (StructType, ArrayType)):
            raise HarnessError(
                f"cannot materialize parameter '{p.name}' of '{fn}': "
                f"only scalar and pointer parameters are supported")
        else:
            loc = L.next()
            stmts.append(VarDecl(ln, p.ty, _zero_expr(p.ty, loc, enums),
                                 loc))
        stmts.append(ModifyFullRange(Name(ln, L.next(col=24)), L.next()))
        args.append(Name(ln, Loc(L.file, L.n, 30)))
    for c in reqs:
        stmts.append(KnownFact(_rename(c.expr, m), L.next(), c.cid))
    call_loc = L.next(col=20)
    call = Call(fn, tuple(args), call_loc)
    if res is not None:
        stmts.append(VarDecl(res, sig.ret, call, Loc(L.file, L.n, 5)))
    else:
        stmts.append(ExprStmt(call, Loc(L.file, L.n, 5)))
    for c in cs.for_function(fn, "ensures"):
        stmts.append(AssertStmt(_rename(c.expr, m), L.next(), c.cid))
    return stmts, call_loc, res


def _build_stub(sig: FunctionSig, cs: ContractSet, global_names: set,
                enums: dict, L: _Lines) -> FunctionDef:
    fn = sig.name
    body: list = []
    for c in cs.for_function(fn, "requires"):
        body.append(AssertStmt(c.expr, L.next(), c.cid))
    ptypes = {p.name: p.ty for p in sig.params}
    for c in cs.for_function(fn, "arrayspec"):
        if not (isinstance(c.expr, Binary)
                and isinstance(c.expr.left, LengthOf)):
            continue
        pname, rhs = c.expr.left.ident, c.expr.right
        elem = ptypes[pname].elem
        loc = L.next()
        # a write to p[rhs-1] checks the promised length against the
        # array actually passed; writes skip init tracking, reads don't
        idx = Binary("-", rhs, IntLit(1, loc), loc)
        body.append(If(Binary(">=", rhs, IntLit(1, loc), loc),
                       Block((_touch_write(pname, idx, elem, loc, enums),),
                             loc),
                       None, loc))
    for p in sig.params:
        if isinstance(p.ty, PointerType):
            body.append(ModifyFullRange(Name(p.name, L.next(col=24)),
                                        L.next()))
    ens = cs.for_function(fn, "ensures")
    mentioned = set()
    for c in ens:
        _names_in(c.expr, mentioned)
    touched_globals = sorted(mentioned & global_names)
    for g in touched_globals:
        body.append(ModifyFullRange(Name(g, L.next(col=24)), L.next()))
    for g in touched_globals:
        for c in cs.for_var(g):
            body.append(KnownFact(c.expr, L.next(), c.cid))
    m: dict = {}
    if sig.ret is not None:
        loc = L.next()
        body.append(VarDecl(_STUB_RES, sig.ret,
                            _zero_expr(sig.ret, loc, enums), loc))
        body.append(ModifyFullRange(Name(_STUB_RES, loc), L.next()))
        m["return"] = _STUB_RES
    for c in ens:
        body.append(KnownFact(_rename(c.expr, m), L.next(), c.cid))
    if sig.ret is not None:
        body.append(Return(Name(_STUB_RES, L.n and Loc(L.file, L.n, 12)),
                           L.next()))
    loc = L.next()
    return FunctionDef(sig, Block(tuple(body), loc), loc)


def _touch_write(pname: str, idx: Expr, elem, loc: Loc, enums: dict):
    return Assign(Index(Name(pname, loc), idx, loc),
                  _zero_expr(elem, loc, enums), loc)


def _var_contract_paths(gd: GlobalDecl, structs: dict) -> list:
    """Contract lookup paths for one global: itself, then its fields."""
    paths = [gd.name]
    if isinstance(gd.ty, StructType):
        sd = structs.get(gd.ty.name)
        if sd is not None:
            paths.extend(f"{gd.name}.{f.name}" for f in sd.fields)
    return paths


def _target_for_path(path: str, loc: Loc) -> Expr:
    if "." in path:
        base, fld = path.split(".", 1)
        return FieldAccess(Name(base, loc), fld, loc)
    return Name(path, loc)


# ---------------------------------------------------------------------------
# the driver
# ---------------------------------------------------------------------------

def _build_driver(mod: Module, cs: ContractSet, width: int, L: _Lines):
    """Returns (FunctionDef, case_break_locs, case_call_locs, result_vars)."""
    enums = mod.enums()
    structs = mod.structs()
    defined = [d for d in mod.decls if isinstance(d, FunctionDef)]

    body: list = []
    # the environment may have written anything the invariants allow
    for gd in (d for d in mod.decls if isinstance(d, GlobalDecl)):
        body.append(ModifyFullRange(Name(gd.name, L.next(col=24)), L.next()))
        if isinstance(gd.ty, ArrayType):
            # range invariants on arrays are kept for review and export but
            # not materialized: the havocked summary over-approximates them
            continue
        for path in _var_contract_paths(gd, structs):
            for c in cs.for_var(path):
                body.append(KnownFact(c.expr, L.next(), c.cid))
    # watch every invariant from here on: module writes must preserve them
    for gd in (d for d in mod.decls if isinstance(d, GlobalDecl)):
        if isinstance(gd.ty, ArrayType):
            continue
        for path in _var_contract_paths(gd, structs):
            for c in cs.for_var(path):
                loc = L.next()
                body.append(GlobalAssert(_target_for_path(path, loc),
                                         c.expr, loc, c.cid))

    for fd in defined:
        if cs.sequence_tag(fd.sig.name) == "init":
            stmts, _, _ = _materialize_call(
                fd.sig, cs, enums, width, L,
                prefix=f"{fd.sig.name}__pre__")
            body.extend(stmts)

    case_break_locs: dict = {}
    case_call_locs: dict = {}
    result_vars: dict = {}
    cases: list = []
    for i, fd in enumerate(defined):
        fn = fd.sig.name
        stmts, call_loc, res = _materialize_call(
            fd.sig, cs, enums, width, L, prefix=f"{fn}__")
        bloc = L.next()
        stmts.append(Break(bloc))
        case_break_locs[bloc] = fn
        case_call_locs[call_loc] = fn
        if res is not None:
            result_vars[fn] = res
        loc = stmts[0].loc if stmts else bloc
        cases.append(Case(IntLit(i, loc), tuple(stmts), loc))

    dloc = L.next()
    body.append(VarDecl(_CHOICE, UCharType(), IntLit(0, dloc), dloc))
    sw_loc = L.next()
    loop_body = Block((
        ModifyFullRange(Name(_CHOICE, sw_loc), L.next()),
        Switch(Name(_CHOICE, sw_loc), tuple(cases),
               (Break(L.next()),), sw_loc),
    ), sw_loc)
    wloc = L.next()
    body.append(While(IntLit(1, wloc), loop_body, wloc))

    floc = L.next()
    sig = FunctionSig(DRIVER_ENTRY, (), None, floc)
    fd = FunctionDef(sig, Block(tuple(body), floc), floc)
    return fd, case_break_locs, case_call_locs, result_vars


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def build_harness(mod: Module, contracts: ContractSet,
                  int_width: int = 32) -> Harness:
    """Generate the closing module and extraction plan for `mod`.

    `contracts` is the full contract set in force for this analysis run
    (manual, interface and inferred, already merged by the caller).
    """
    L = _Lines(f"{mod.name}.harness.mc")
    defined = {d.sig.name for d in mod.decls if isinstance(d, FunctionDef)}
    global_names = set(mod.globals().keys())
    enums = mod.enums()

    decls: list = []
    for d in mod.decls:
        if isinstance(d, (StructDecl, EnumDecl)):
            decls.append(d)
        elif isinstance(d, GlobalDecl):
            decls.append(GlobalDecl(d.name, d.ty, None, d.loc))
    for d in mod.decls:
        if isinstance(d, FunctionDef):
            decls.append(d.sig)

    externals = [d for d in mod.decls
                 if isinstance(d, FunctionSig) and d.name not in defined]
    for sig in externals:
        decls.append(_build_stub(sig, contracts, global_names, enums, L))

    driver, breaks, calls, results = _build_driver(mod, contracts,
                                                   int_width, L)
    decls.append(driver)

    hmod = Module(name=f"{mod.name}.harness",
                  file=L.file, decls=decls, contracts=ContractSet())
    plan = ExtractionPlan(
        stub_names=frozenset(s.name for s in externals),
        case_break_locs=breaks,
        case_call_locs=calls,
        result_vars=results,
    )
    return Harness(module_name=mod.name, entry=DRIVER_ENTRY,
                   harness_module=hmod, plan=plan,
                   source=print_module(hmod))


def harness_program(mod: Module, h: Harness) -> Program:
    """Resolve the module together with its harness, driver as entry."""
    return resolve_project([mod, h.harness_module], entry=h.entry,
                           zero_init_globals=False)
