"""Abstract interpreter for Mini-C programs.

Analyzes one entry function over a resolved program, inlining calls up to a
depth bound and falling back to contract summaries past it.  Loops run
through three phases: exact unrolling, a widening ascent to a loop
invariant, and a single narrowing step; alarms, coverage and inference
snapshots are recorded during the unrolled iterations and during one final
reporting pass from the narrowed invariant, never during the ascent.

Alarm classes:

  IPA  index outside array bounds
  ISA  shift amount outside [0, width-1]
  IRO  arithmetic result outside the type range
  DMZ  division or modulo by zero
  UIV  read of an uninitialized variable
  UFC  call to a function of unknown origin
  ASR  violated assertion (contract or user assert)

A definite alarm kills the paths it fires on, with one exception: an
unsigned char store wraps (defined behavior), so its range alarm stays
possible and execution continues with the wrapped value.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

from .domains import (
    FLOAT_BOT, FloatInterval, INT_BOT, IntInterval, IntSet,
    abs_binop, abs_unop, compare, convert, default_float_thresholds,
    default_int_thresholds, exclude_zero, join_value, meet_value,
    narrow_value, refine, top_for, truth, value_leq, widen_value, zero_for,
)
from .frontend import (
    ArrayType, Assign, AssertStmt, Binary, Block, Break, Call, ContractSet,
    EnumType, Expr, ExprStmt, FieldAccess, FloatLit, FloatType, For,
    FunctionDef, GlobalAssert, If, Index, IntLit, IntType, KnownFact,
    LengthOf, Loc, LOGIC_OPS, ModifyFullRange, Name, PointerType, Program,
    Return, ReturnVal, Stmt, StructType, Switch, Type, UCharType, Unary,
    VarDecl, While, ZERO_FILL, count_statements, walk_exprs, walk_stmts,
)

ALARM_CLASSES = ("IPA", "ISA", "IRO", "DMZ", "UIV", "UFC", "ASR")

_NEGATE = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}
_SWAP = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "==": "==", "!=": "!="}

_MAX_WIDEN_ITERS = 200


class AnalysisError(Exception):
    """Tool failure: budget exhausted or malformed input past the frontend."""


@dataclass
class AnalysisConfig:
    int_width: int = 32
    unroll: int = 8
    inline_depth: int = 8
    budget: int = 1_000_000
    zero_init_globals: bool = False
    contracts: ContractSet = field(default_factory=ContractSet)


@dataclass
class ExtractionPlan:
    """What a harness asks the analyzer to record for contract inference."""

    stub_names: frozenset = frozenset()
    case_break_locs: dict = field(default_factory=dict)  # Loc -> fn name
    case_call_locs: dict = field(default_factory=dict)  # Loc -> fn name
    result_vars: dict = field(default_factory=dict)  # fn name -> driver local


@dataclass
class Extraction:
    """Joined value snapshots recorded while analyzing one harness."""

    returns: dict = field(default_factory=dict)  # fn -> value
    globals_after: dict = field(default_factory=dict)  # (fn, path) -> value
    params: dict = field(default_factory=dict)  # (fn, param) -> value
    called_stubs: set = field(default_factory=set)


@dataclass(frozen=True)
class Alarm:
    cls: str
    loc: Loc
    definite: bool
    message: str
    stack: tuple = ()
    contract_id: str | None = None


@dataclass
class AnalysisOutput:
    entry: str
    alarms: list
    reached: set
    coverage: dict  # module name -> (reached, total)
    extraction: Extraction
    visits: int
    seconds: float


# ---------------------------------------------------------------------------
# abstract store
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArrayVal:
    """Summarized array: one value for every cell plus an init profile.

    Cells [0, prefix) are definitely initialized; cells at or past the
    prefix carry the `beyond` status ('no' or 'maybe').  `summary` joins
    every value ever written; bottom while nothing was.
    """

    summary: object
    length: int
    prefix: int
    beyond: str  # 'no' | 'maybe'


@dataclass(frozen=True)
class PtrVal:
    target: tuple  # env key of the array this pointer is bound to


@dataclass(frozen=True)
class Watch:
    key: tuple
    pretty: str
    cond: Expr
    contract_id: str | None


def _init_join(a: str, b: str) -> str:
    return a if a == b else "maybe"


def _init_leq(a: str, b: str) -> bool:
    return a == b or b == "maybe"


def _bottom_for_kind(kind: str):
    return FLOAT_BOT if kind == "float" else INT_BOT


@dataclass
class AbsState:
    env: dict
    init: dict
    watches: tuple
    reachable: bool = True

    def clone(self) -> "AbsState":
        return AbsState(dict(self.env), dict(self.init), self.watches,
                        self.reachable)

    def dead(self) -> "AbsState":
        s = self.clone()
        s.reachable = False
        return s

    def take(self, other: "AbsState") -> None:
        self.env = other.env
        self.init = other.init
        self.watches = other.watches
        self.reachable = other.reachable


def _scalar_bottom_like(v):
    return FLOAT_BOT if isinstance(v, FloatInterval) else INT_BOT


def _default_like(v):
    """Value for a key missing on one side of a join."""
    if isinstance(v, ArrayVal):
        return ArrayVal(_scalar_bottom_like(v.summary), v.length, 0, "no")
    if isinstance(v, PtrVal):
        return v
    return _scalar_bottom_like(v)


def _array_join(a: ArrayVal, b: ArrayVal) -> ArrayVal:
    if a.length != b.length:
        raise AnalysisError("array length mismatch in join")
    summary = join_value(a.summary, b.summary)
    prefix = min(a.prefix, b.prefix)
    beyond = _init_join(a.beyond, b.beyond)
    if a.prefix != b.prefix:
        beyond = "maybe"
    return ArrayVal(summary, a.length, prefix, beyond)


def _array_leq(a: ArrayVal, b: ArrayVal) -> bool:
    if not value_leq(a.summary, b.summary):
        return False
    if a.prefix < b.prefix:
        return False
    if a.prefix > b.prefix and b.beyond != "maybe":
        return False
    return _init_leq(a.beyond, b.beyond)


def _value_join(va, vb):
    if isinstance(va, ArrayVal) or isinstance(vb, ArrayVal):
        return _array_join(va, vb)
    if isinstance(va, PtrVal) or isinstance(vb, PtrVal):
        if va != vb:
            raise AnalysisError("pointer join with different targets")
        return va
    return join_value(va, vb)


def _value_leq(va, vb) -> bool:
    if isinstance(va, ArrayVal) and isinstance(vb, ArrayVal):
        return _array_leq(va, vb)
    if isinstance(va, PtrVal) or isinstance(vb, PtrVal):
        return va == vb
    return value_leq(va, vb)


def state_join(a: AbsState, b: AbsState) -> AbsState:
    if not a.reachable:
        return b.clone()
    if not b.reachable:
        return a.clone()
    env = {}
    for k in a.env.keys() | b.env.keys():
        va = a.env.get(k)
        vb = b.env.get(k)
        if va is None:
            va = _default_like(vb)
        if vb is None:
            vb = _default_like(va)
        env[k] = _value_join(va, vb)
    init = {}
    for k in a.init.keys() | b.init.keys():
        init[k] = _init_join(a.init.get(k, "no"), b.init.get(k, "no"))
    watches = a.watches + tuple(w for w in b.watches if w not in a.watches)
    return AbsState(env, init, watches, True)


def state_leq(a: AbsState, b: AbsState) -> bool:
    if not a.reachable:
        return True
    if not b.reachable:
        return False
    for k, va in a.env.items():
        vb = b.env.get(k)
        if vb is None:
            vb = _default_like(va)
        if not _value_leq(va, vb):
            return False
    for k in a.init.keys() | b.init.keys():
        if not _init_leq(a.init.get(k, "no"), b.init.get(k, "no")):
            return False
    return all(w in b.watches for w in a.watches)


def state_widen(a: AbsState, b: AbsState, int_ts, float_ts,
                width: int) -> AbsState:
    if not a.reachable:
        return b.clone()
    if not b.reachable:
        return a.clone()
    env = {}
    for k in a.env.keys() | b.env.keys():
        va = a.env.get(k)
        vb = b.env.get(k)
        if va is None:
            va = _default_like(vb)
        if vb is None:
            vb = _default_like(va)
        if isinstance(va, ArrayVal):
            joined = _array_join(va, vb)
            env[k] = replace(joined, summary=widen_value(
                va.summary, joined.summary, int_ts, float_ts, width))
        elif isinstance(va, PtrVal):
            env[k] = va
        else:
            env[k] = widen_value(va, vb, int_ts, float_ts, width)
    init = {}
    for k in a.init.keys() | b.init.keys():
        init[k] = _init_join(a.init.get(k, "no"), b.init.get(k, "no"))
    watches = a.watches + tuple(w for w in b.watches if w not in a.watches)
    return AbsState(env, init, watches, True)


def state_narrow(a: AbsState, b: AbsState, width: int) -> AbsState:
    if not a.reachable or not b.reachable:
        return b.clone()
    env = {}
    for k, va in a.env.items():
        vb = b.env.get(k)
        if isinstance(va, ArrayVal):
            if isinstance(vb, ArrayVal):
                env[k] = replace(va, summary=narrow_value(
                    va.summary, vb.summary, width))
            else:
                env[k] = va
        elif isinstance(va, PtrVal) or vb is None \
                or isinstance(vb, (ArrayVal, PtrVal)):
            env[k] = va
        elif va.is_bottom() or vb.is_bottom():
            env[k] = va
        else:
            env[k] = narrow_value(va, vb, width)
    return AbsState(env, dict(a.init), a.watches, True)


# ---------------------------------------------------------------------------
# frames and thresholds
# ---------------------------------------------------------------------------

@dataclass
class Frame:
    fn: FunctionDef
    frame_id: tuple
    locals: set
    synth: dict = field(default_factory=dict)  # synthetic local -> Type


def _fn_local_names(fn: FunctionDef) -> set:
    names = {p.name for p in fn.sig.params}
    for s in walk_stmts(fn.body):
        if isinstance(s, VarDecl):
            names.add(s.name)
    return names


def _scalar_kind(ty: Type) -> str:
    if isinstance(ty, (IntType, EnumType)):
        return "int"
    if isinstance(ty, UCharType):
        return "uchar"
    if isinstance(ty, FloatType):
        return "float"
    raise AnalysisError(f"not a scalar type: {ty!r}")


def _key_pretty(key: tuple) -> str:
    if key[0] == "g":
        return key[1] if len(key) == 2 else f"{key[1]}.{key[2]}"
    return key[2] if len(key) == 3 else f"{key[2]}.{key[3]}"


def _assert_msg(contract_id: str | None) -> str:
    if contract_id is None:
        return "assertion may be violated"
    subject, kind, body = contract_id.split(":", 2)
    return f"{kind} contract of '{subject}' may be violated: {body}"


def _stmt_exprs(s: Stmt):
    if isinstance(s, VarDecl) and isinstance(s.init, Expr):
        yield s.init
    elif isinstance(s, Assign):
        yield s.target
        yield s.value
    elif isinstance(s, (If, While)):
        yield s.cond
    elif isinstance(s, For):
        if s.init is not None:
            yield s.init.value
        if s.cond is not None:
            yield s.cond
        if s.step is not None:
            yield s.step.value
    elif isinstance(s, Switch):
        yield s.subject
        for c in s.cases:
            yield c.value
    elif isinstance(s, Return) and s.value is not None:
        yield s.value
    elif isinstance(s, ExprStmt):
        yield s.expr
    elif isinstance(s, (AssertStmt, KnownFact, GlobalAssert)):
        yield s.cond


def collect_thresholds(prog: Program, contracts: ContractSet, width: int):
    """Widening thresholds: the defaults plus every constant that appears
    in the program text or in the contracts in force."""
    ints: set = set()
    floats: set = set()

    def take(e: Expr) -> None:
        for sub in walk_exprs(e):
            if isinstance(sub, Unary) and sub.op == "-":
                if isinstance(sub.operand, IntLit):
                    ints.add(-sub.operand.value)
                elif isinstance(sub.operand, FloatLit):
                    floats.add(-sub.operand.value)
            elif isinstance(sub, IntLit):
                ints.add(sub.value)
            elif isinstance(sub, FloatLit):
                floats.add(sub.value)

    for mod in prog.modules:
        for fd in mod.functions().values():
            for s in walk_stmts(fd.body):
                for e in _stmt_exprs(s):
                    take(e)
        for gd in mod.globals().values():
            if isinstance(gd.ty, ArrayType):
                ints.add(gd.ty.size)
            if isinstance(gd.init, Expr):
                take(gd.init)
        for c in mod.contracts.all_contracts():
            if c.expr is not None:
                take(c.expr)
    for c in contracts.all_contracts():
        if c.expr is not None:
            take(c.expr)
    for _name, (val, _enum) in prog.enum_consts.items():
        ints.add(val)
    return (default_int_thresholds(width, ints),
            default_float_thresholds(floats))


# ---------------------------------------------------------------------------
# the interpreter
# ---------------------------------------------------------------------------

class Analyzer:
    def __init__(self, prog: Program, config: AnalysisConfig,
                 plan: ExtractionPlan | None = None):
        self.prog = prog
        self.config = config
        self.plan = plan or ExtractionPlan()
        self.width = config.int_width
        self.int_ts, self.float_ts = collect_thresholds(
            prog, config.contracts, self.width)
        self.alarm_map: dict = {}
        self.reached: set = set()
        self.extraction = Extraction()
        self.visits = 0
        self.suppress = 0  # recording off while > 0 (widening phases)
        self.frames: list = []
        self.call_stack: list = []
        self.return_stack: list = []  # one [(state, value)] list per call
        self.break_stack: list = []  # one [state] list per loop or switch
        self.write_logs: list = []  # global-key sets for marked calls
        self.force_global = False  # resolve names globally (watch conds)
        self.struct_fields = {
            name: [(f.name, f.ty) for f in sd.fields]
            for name, sd in prog.structs.items()
        }

    # -- recording ----------------------------------------------------------

    @property
    def recording(self) -> bool:
        return self.suppress == 0

    def alarm(self, cls: str, loc: Loc, definite: bool, message: str,
              contract_id: str | None = None) -> None:
        if not self.recording:
            return
        a = Alarm(cls, loc, definite, message,
                  tuple(self.call_stack[-3:]), contract_id)
        self.alarm_map.setdefault((cls, loc), []).append(a)

    def op_alarms(self, alarms, loc: Loc, what: str) -> None:
        for al in alarms:
            self.alarm(al.cls, loc, al.definite,
                       _op_alarm_message(al.cls, al.definite, what))

    def log_global_write(self, key: tuple) -> None:
        if key[0] == "g" and self.write_logs:
            for log in self.write_logs:
                log.add(key)

    # -- name resolution ------------------------------------------------------

    def frame(self) -> Frame:
        return self.frames[-1]

    def key_for_name(self, name: str):
        fr = self.frame()
        if not self.force_global and name in fr.locals:
            return ("l", fr.frame_id, name)
        if name in self.prog.globals:
            return ("g", name)
        return None

    def decl_type(self, name: str) -> Type:
        fr = self.frame()
        if not self.force_global and name in fr.locals:
            if name in fr.synth:
                return fr.synth[name]
            for p in fr.fn.sig.params:
                if p.name == name:
                    return p.ty
            for s in walk_stmts(fr.fn.body):
                if isinstance(s, VarDecl) and s.name == name:
                    return s.ty
        gd = self.prog.globals.get(name)
        if gd is not None:
            return gd.ty
        raise AnalysisError(f"unknown name {name!r}")

    def path_key(self, e: Expr):
        """(key, kind, pretty) for a scalar variable path, else None."""
        if isinstance(e, Name):
            key = self.key_for_name(e.ident)
            if key is None:
                return None
            ty = self.decl_type(e.ident)
            if not isinstance(ty, (IntType, UCharType, FloatType, EnumType)):
                return None
            return key, _scalar_kind(ty), e.ident
        if isinstance(e, FieldAccess):
            key = self.key_for_name(e.base.ident)
            if key is None:
                return None
            ty = self.decl_type(e.base.ident)
            if not isinstance(ty, StructType):
                return None
            fty = dict(self.struct_fields[ty.name]).get(e.fieldname)
            if fty is None:
                return None
            return (key + (e.fieldname,), _scalar_kind(fty),
                    f"{e.base.ident}.{e.fieldname}")
        return None

    def array_key(self, e: Name, st: AbsState) -> tuple:
        """Env key of the array a name denotes (through pointers)."""
        key = self.key_for_name(e.ident)
        if key is None:
            raise AnalysisError(f"unknown array {e.ident!r}")
        ty = self.decl_type(e.ident)
        if isinstance(ty, PointerType):
            ptr = st.env.get(key)
            if not isinstance(ptr, PtrVal):
                raise AnalysisError(f"unbound pointer {e.ident!r}")
            return ptr.target
        return key

    def _key_array_type(self, key: tuple) -> ArrayType:
        if key[0] == "g":
            return self.prog.globals[key[1]].ty
        frame_id, name = key[1], key[2]
        for fr in self.frames:
            if fr.frame_id == frame_id:
                for s in walk_stmts(fr.fn.body):
                    if isinstance(s, VarDecl) and s.name == name:
                        return s.ty
        raise AnalysisError(f"cannot find the array behind {key!r}")

    # -- scalar reads and writes ---------------------------------------------

    def read_scalar(self, st: AbsState, key: tuple, kind: str, loc: Loc,
                    pretty: str):
        ini = st.init.get(key, "no")
        if ini == "no":
            self.alarm("UIV", loc, True,
                       f"read of uninitialized variable '{pretty}'")
            st.reachable = False
            return _bottom_for_kind(kind)
        if ini == "maybe":
            self.alarm("UIV", loc, False,
                       f"read of possibly uninitialized variable '{pretty}'")
        v = st.env.get(key)
        if v is None:
            return _bottom_for_kind(kind)
        return v

    def write_scalar(self, st: AbsState, key: tuple, kind: str, value,
                     loc: Loc, pretty: str) -> None:
        value, alarms = convert(value, kind, self.width)
        self.op_alarms(alarms, loc, f"store to '{pretty}'")
        if any(a.definite for a in alarms):
            st.reachable = False
            return
        st.env[key] = value
        st.init[key] = "yes"
        self.log_global_write(key)
        self.fire_watches(st, key, loc)

    def fire_watches(self, st: AbsState, key: tuple, loc: Loc) -> None:
        for w in st.watches:
            if w.key != key or not st.reachable:
                continue
            prev = self.force_global
            self.force_global = True
            try:
                st_t, st_f = self.eval_bool(st, w.cond)
            finally:
                self.force_global = prev
            if st_f.reachable and not st_t.reachable:
                self.alarm("ASR", loc, True,
                           f"write to '{w.pretty}' violates its invariant",
                           w.contract_id)
                st.reachable = False
            elif st_f.reachable:
                self.alarm("ASR", loc, False,
                           f"write to '{w.pretty}' may violate its "
                           f"invariant", w.contract_id)
                st.env = st_t.env
                st.init = st_t.init
            # definitely true: nothing to report

    # -- havoc ----------------------------------------------------------------

    def havoc_key(self, st: AbsState, key: tuple, ty: Type) -> None:
        """Full-range write: the semantics of __modify_full_range.

        A havoc is a write, so a scalar becomes initialized outright.  An
        array keeps its definite prefix but its remaining cells may or may
        not have been touched.
        """
        if isinstance(ty, ArrayType):
            old = st.env.get(key)
            prefix = old.prefix if isinstance(old, ArrayVal) else 0
            beyond = "maybe" if prefix < ty.size else "no"
            st.env[key] = ArrayVal(top_for(_scalar_kind(ty.elem), self.width),
                                   ty.size, prefix, beyond)
            self.log_global_write(key)
            return
        if isinstance(ty, StructType):
            for fname, fty in self.struct_fields[ty.name]:
                self.havoc_key(st, key + (fname,), fty)
            return
        if isinstance(ty, PointerType):
            ptr = st.env.get(key)
            if isinstance(ptr, PtrVal):
                self.havoc_key(st, ptr.target,
                               self._key_array_type(ptr.target))
            return
        st.env[key] = top_for(_scalar_kind(ty), self.width)
        st.init[key] = "yes"
        self.log_global_write(key)

    def havoc_all_globals(self, st: AbsState) -> None:
        for name, gd in self.prog.globals.items():
            self.havoc_key(st, ("g", name), gd.ty)

    # -- expression evaluation --------------------------------------------------

    def eval(self, st: AbsState, e: Expr):
        if not st.reachable:
            return INT_BOT
        if isinstance(e, IntLit):
            return IntSet.const(e.value)
        if isinstance(e, FloatLit):
            return FloatInterval.const(e.value)
        if isinstance(e, Name):
            key = self.key_for_name(e.ident)
            if key is None:
                ec = self.prog.enum_consts.get(e.ident)
                if ec is None:
                    raise AnalysisError(f"unknown name {e.ident!r}")
                return IntSet.const(ec[0])
            ty = self.decl_type(e.ident)
            if isinstance(ty, ArrayType):
                return PtrVal(key)
            if isinstance(ty, PointerType):
                v = st.env.get(key)
                if v is None:
                    raise AnalysisError(f"unbound pointer {e.ident!r}")
                return v
            return self.read_scalar(st, key, _scalar_kind(ty), e.loc, e.ident)
        if isinstance(e, Index):
            return self.read_cell(st, e)
        if isinstance(e, FieldAccess):
            pk = self.path_key(e)
            if pk is None:
                raise AnalysisError(f"bad field access at {e.loc}")
            key, kind, pretty = pk
            return self.read_scalar(st, key, kind, e.loc, pretty)
        if isinstance(e, LengthOf):
            akey = self.array_key(Name(e.ident, e.loc), st)
            return IntSet.const(self._key_array_type(akey).size)
        if isinstance(e, Unary):
            v = self.eval(st, e.operand)
            if not st.reachable:
                return INT_BOT
            res, alarms = abs_unop(e.op, v, self.width)
            if e.op == "-":
                self.op_alarms(alarms, e.loc, "negation")
                if any(a.definite for a in alarms):
                    st.reachable = False
            return res
        if isinstance(e, Binary):
            if e.op in LOGIC_OPS or e.op in _NEGATE:
                return self._eval_bool_value(st, e)
            lv = self.eval(st, e.left)
            rv = self.eval(st, e.right)
            if not st.reachable:
                return INT_BOT
            res, alarms = abs_binop(e.op, lv, rv, self.width)
            self.op_alarms(alarms, e.loc, f"'{e.op}'")
            if any(a.definite for a in alarms):
                st.reachable = False
            return res
        if isinstance(e, Call):
            return self.eval_call(st, e)
        raise AnalysisError(f"cannot evaluate {e!r}")

    def _eval_bool_value(self, st: AbsState, e: Expr):
        """A comparison or &&/|| in value position: 0, 1 or {0, 1}."""
        st_t, st_f = self.eval_bool(st, e)
        merged = state_join(st_t, st_f)
        st.take(merged)
        if st_t.reachable and not st_f.reachable:
            return IntSet.const(1)
        if st_f.reachable and not st_t.reachable:
            return IntSet.const(0)
        if not merged.reachable:
            return INT_BOT
        return IntSet.make((0, 1))

    def read_cell(self, st: AbsState, e: Index):
        akey = self.array_key(e.base, st)
        aty = self._key_array_type(akey)
        kind = _scalar_kind(aty.elem)
        arr = st.env.get(akey)
        if not isinstance(arr, ArrayVal):
            arr = ArrayVal(_bottom_for_kind(kind), aty.size, 0, "no")
        iv = self.eval(st, e.index)
        if not st.reachable:
            return _bottom_for_kind(kind)
        bounds = IntInterval(0, arr.length - 1)
        legal = meet_value(iv, bounds)
        pretty = e.base.ident
        if legal.is_bottom():
            self.alarm("IPA", e.loc, True,
                       f"index outside the bounds of '{pretty}' "
                       f"(length {arr.length})")
            st.reachable = False
            return _bottom_for_kind(kind)
        if not value_leq(iv, bounds):
            self.alarm("IPA", e.loc, False,
                       f"index may fall outside the bounds of '{pretty}' "
                       f"(length {arr.length})")
            pk = self.path_key(e.index)
            if pk is not None:
                st.env[pk[0]] = legal
        lo = legal.vals[0] if isinstance(legal, IntSet) else legal.lo
        hi = legal.vals[-1] if isinstance(legal, IntSet) else legal.hi
        if lo >= arr.prefix and arr.beyond == "no":
            self.alarm("UIV", e.loc, True,
                       f"read of uninitialized cell of '{pretty}'")
            st.reachable = False
            return _bottom_for_kind(kind)
        if hi >= arr.prefix and arr.beyond != "no":
            self.alarm("UIV", e.loc, False,
                       f"read of possibly uninitialized cell of '{pretty}'")
        if arr.summary.is_bottom():
            return _bottom_for_kind(kind)
        return arr.summary

    def write_cell(self, st: AbsState, e: Index, value) -> None:
        akey = self.array_key(e.base, st)
        aty = self._key_array_type(akey)
        kind = _scalar_kind(aty.elem)
        arr = st.env.get(akey)
        if not isinstance(arr, ArrayVal):
            arr = ArrayVal(_bottom_for_kind(kind), aty.size, 0, "no")
        iv = self.eval(st, e.index)
        if not st.reachable:
            return
        value, alarms = convert(value, kind, self.width)
        self.op_alarms(alarms, e.loc, f"store to '{e.base.ident}'")
        if any(a.definite for a in alarms):
            st.reachable = False
            return
        bounds = IntInterval(0, arr.length - 1)
        legal = meet_value(iv, bounds)
        if legal.is_bottom():
            self.alarm("IPA", e.loc, True,
                       f"index outside the bounds of '{e.base.ident}' "
                       f"(length {arr.length})")
            st.reachable = False
            return
        if not value_leq(iv, bounds):
            self.alarm("IPA", e.loc, False,
                       f"index may fall outside the bounds of "
                       f"'{e.base.ident}' (length {arr.length})")
            pk = self.path_key(e.index)
            if pk is not None:
                st.env[pk[0]] = legal
        singleton = None
        if isinstance(legal, IntSet) and len(legal.vals) == 1:
            singleton = legal.vals[0]
        elif isinstance(legal, IntInterval) and legal.lo == legal.hi:
            singleton = legal.lo
        if arr.length == 1 and singleton == 0:
            arr = ArrayVal(value, arr.length, 1, arr.beyond)
        else:
            summary = value if arr.summary.is_bottom() \
                else join_value(arr.summary, value)
            prefix, beyond = arr.prefix, arr.beyond
            if singleton is not None and singleton == prefix:
                prefix += 1
            elif singleton is not None and singleton < prefix:
                pass  # strong position already inside the prefix
            else:
                hi = legal.vals[-1] if isinstance(legal, IntSet) else legal.hi
                if hi >= prefix:
                    beyond = "maybe"
            arr = ArrayVal(summary, arr.length, prefix, beyond)
        st.env[akey] = arr
        self.log_global_write(akey)

    # -- conditions --------------------------------------------------------------

    def eval_bool(self, st: AbsState, e: Expr):
        """Split on a condition; returns (state_true, state_false)."""
        if not st.reachable:
            return st.clone(), st.clone()
        if isinstance(e, Unary) and e.op == "!":
            st_t, st_f = self.eval_bool(st, e.operand)
            return st_f, st_t
        if isinstance(e, Binary) and e.op == "&&":
            lt, lf = self.eval_bool(st, e.left)
            tt, tf = self.eval_bool(lt, e.right)
            return tt, state_join(lf, tf)
        if isinstance(e, Binary) and e.op == "||":
            lt, lf = self.eval_bool(st, e.left)
            ft, ff = self.eval_bool(lf, e.right)
            return state_join(lt, ft), ff
        if isinstance(e, Binary) and e.op in _NEGATE:
            work = st.clone()
            lv = self.eval(work, e.left)
            rv = self.eval(work, e.right)
            if not work.reachable:
                return work.clone(), work.clone()
            verdict = compare(e.op, lv, rv)
            st_t, st_f = work.clone(), work.clone()
            if verdict == "true":
                st_f.reachable = False
                return st_t, st_f
            if verdict == "false":
                st_t.reachable = False
                return st_t, st_f
            self._refine_path(st_t, e.left, e.op, rv)
            self._refine_path(st_t, e.right, _SWAP[e.op], lv)
            neg = _NEGATE[e.op]
            self._refine_path(st_f, e.left, neg, rv)
            self._refine_path(st_f, e.right, _SWAP[neg], lv)
            return st_t, st_f
        # anything else: truthiness of its value
        work = st.clone()
        v = self.eval(work, e)
        if not work.reachable:
            return work.clone(), work.clone()
        t = truth(v)
        st_t, st_f = work.clone(), work.clone()
        if t == "true":
            st_f.reachable = False
        elif t == "false":
            st_t.reachable = False
        else:
            pk = self.path_key(e) if isinstance(e, (Name, FieldAccess)) \
                else None
            if pk is not None:
                key, kind, _ = pk
                nz = exclude_zero(v)
                if nz.is_bottom():
                    st_t.reachable = False
                else:
                    st_t.env[key] = nz
                zero = meet_value(v, zero_for(kind))
                if zero.is_bottom():
                    st_f.reachable = False
                else:
                    st_f.env[key] = zero
        return st_t, st_f

    def _refine_path(self, st: AbsState, side: Expr, op: str, other) -> None:
        if not st.reachable:
            return
        pk = self.path_key(side) if isinstance(side, (Name, FieldAccess)) \
            else None
        if pk is None:
            return
        key = pk[0]
        own = st.env.get(key)
        if own is None or isinstance(own, (ArrayVal, PtrVal)):
            return
        refined = refine(own, op, other, self.width)
        if refined.is_bottom():
            st.reachable = False
        else:
            st.env[key] = refined

    # -- calls ----------------------------------------------------------------------

    def eval_call(self, st: AbsState, e: Call):
        target = self.prog.functions.get(e.callee)
        if target is None:
            return self._unknown_call(st, e)
        _mod_name, fd = target
        args = []
        for a, p in zip(e.args, fd.sig.params):
            if isinstance(p.ty, PointerType):
                if not isinstance(a, Name):
                    raise AnalysisError(f"bad pointer argument at {e.loc}")
                args.append(PtrVal(self.array_key(a, st)))
            else:
                args.append(self.eval(st, a))
        if not st.reachable:
            return _ret_bottom(fd.sig.ret)
        if self.recording and e.callee in self.plan.stub_names:
            self.extraction.called_stubs.add(e.callee)
            for p, v in zip(fd.sig.params, args):
                if isinstance(p.ty, PointerType):
                    continue
                conv, _ = convert(v, _scalar_kind(p.ty), self.width)
                if conv.is_bottom():
                    continue
                k = (e.callee, p.name)
                prev = self.extraction.params.get(k)
                self.extraction.params[k] = conv if prev is None \
                    else join_value(prev, conv)
        log_this = self.recording and e.loc in self.plan.case_call_locs
        written: set = set()
        if log_this:
            self.write_logs.append(set())
        try:
            if len(self.frames) > self.config.inline_depth:
                result = self._summary_call(st, e, fd)
            else:
                result = self._inline_call(st, e, fd, args)
        finally:
            if log_this:
                written = self.write_logs.pop()
        if log_this and st.reachable:
            # snapshot before any trailing asserts: the record must reflect
            # what the body did, not what a stale contract claims it does
            self._record_call_values(st, self.plan.case_call_locs[e.loc],
                                     written, result)
        return result

    def _inline_call(self, st: AbsState, e: Call, fd: FunctionDef, args):
        frame_id = self.frame().frame_id + (e.loc,)
        fr = Frame(fd, frame_id, _fn_local_names(fd))
        for p, v in zip(fd.sig.params, args):
            key = ("l", frame_id, p.name)
            if isinstance(p.ty, PointerType):
                st.env[key] = v
                st.init[key] = "yes"
            else:
                conv, alarms = convert(v, _scalar_kind(p.ty), self.width)
                self.op_alarms(alarms, e.loc, f"argument for '{p.name}'")
                if any(a.definite for a in alarms):
                    st.reachable = False
                st.env[key] = conv
                st.init[key] = "yes"
        if not st.reachable:
            return _ret_bottom(fd.sig.ret)
        self.frames.append(fr)
        self.call_stack.append(e.loc)
        self.return_stack.append([])
        try:
            out = self.visit_stmt(st, fd.body)
        finally:
            returns = self.return_stack.pop()
            self.call_stack.pop()
            self.frames.pop()
        if out.reachable:
            if fd.sig.ret is not None:
                # fell off the end of a value-returning function
                returns.append((out, top_for(_scalar_kind(fd.sig.ret),
                                             self.width)))
            else:
                returns.append((out, None))
        if not returns:
            st.take(out)
            self._drop_frame_keys(st, frame_id)
            return _ret_bottom(fd.sig.ret)
        joined, value = returns[0]
        for s2, v2 in returns[1:]:
            joined = state_join(joined, s2)
            if value is None:
                value = v2
            elif v2 is not None:
                value = join_value(value, v2)
        st.take(joined)
        self._drop_frame_keys(st, frame_id)
        if fd.sig.ret is None:
            return None
        return value if value is not None else _ret_bottom(fd.sig.ret)

    def _drop_frame_keys(self, st: AbsState, frame_id: tuple) -> None:
        dead = [k for k in st.env if k[0] == "l" and k[1] == frame_id]
        for k in dead:
            st.env.pop(k, None)
            st.init.pop(k, None)

    def _summary_call(self, st: AbsState, e: Call, fd: FunctionDef):
        """Past the inline depth: apply the callee's contracts instead."""
        contracts = self.config.contracts.for_function(fd.sig.name)
        param_map = {p.name: a for p, a in zip(fd.sig.params, e.args)}
        for c in contracts:
            if c.kind != "requires":
                continue
            cond = _subst_expr(c.expr, param_map, None)
            self._assert_like(
                st, cond, e.loc, c.cid,
                f"call may violate a requires contract of '{fd.sig.name}'")
            if not st.reachable:
                return _ret_bottom(fd.sig.ret)
        for c in contracts:
            if c.kind != "arrayspec":
                continue
            pname = c.expr.left.ident
            arg = param_map.get(pname)
            if not isinstance(arg, Name):
                continue
            akey = self.array_key(arg, st)
            length = self._key_array_type(akey).size
            need = self.eval(st, _subst_expr(c.expr.right, param_map, None))
            if not st.reachable:
                return _ret_bottom(fd.sig.ret)
            verdict = compare("<=", need, IntSet.const(length))
            if verdict == "false":
                self.alarm("IPA", e.loc, True,
                           f"array for '{pname}' is shorter than "
                           f"'{fd.sig.name}' requires")
                st.reachable = False
                return _ret_bottom(fd.sig.ret)
            if verdict == "maybe":
                self.alarm("IPA", e.loc, False,
                           f"array for '{pname}' may be shorter than "
                           f"'{fd.sig.name}' requires")
        self.havoc_all_globals(st)
        for p, a in zip(fd.sig.params, e.args):
            if isinstance(p.ty, PointerType) and isinstance(a, Name):
                akey = self.array_key(a, st)
                self.havoc_key(st, akey, self._key_array_type(akey))
        if fd.sig.ret is None:
            return None
        result = top_for(_scalar_kind(fd.sig.ret), self.width)
        ensures = [c for c in contracts if c.kind == "ensures"]
        if ensures:
            result = self._apply_ensures(st, ensures, param_map, result,
                                         fd.sig.ret, e.loc)
        return result

    def _apply_ensures(self, st, ensures, param_map, result, ret_ty, loc):
        fr = self.frame()
        tmp = "$ret"
        fr.locals.add(tmp)
        fr.synth[tmp] = ret_ty
        key = ("l", fr.frame_id, tmp)
        st.env[key] = result
        st.init[key] = "yes"
        try:
            for c in ensures:
                cond = _subst_expr(c.expr, param_map, Name(tmp, loc))
                st_t, _ = self.eval_bool(st, cond)
                if not st_t.reachable:
                    st.reachable = False
                    break
                st.env, st.init = st_t.env, st_t.init
            result = st.env.get(key, result)
        finally:
            fr.locals.discard(tmp)
            fr.synth.pop(tmp, None)
            st.env.pop(key, None)
            st.init.pop(key, None)
        return result

    def _unknown_call(self, st: AbsState, e: Call):
        for a in e.args:
            self.eval(st, a)
        if not st.reachable:
            return INT_BOT
        self.alarm("UFC", e.loc, False,
                   f"call to '{e.callee}' of unknown origin")
        self.havoc_all_globals(st)
        for a in e.args:
            if isinstance(a, Name):
                try:
                    ty = self.decl_type(a.ident)
                except AnalysisError:
                    continue
                if isinstance(ty, (ArrayType, PointerType)):
                    akey = self.array_key(a, st)
                    self.havoc_key(st, akey, self._key_array_type(akey))
        return IntInterval.full(self.width)

    # -- assertions ---------------------------------------------------------------

    def _assert_like(self, st: AbsState, cond: Expr, loc: Loc,
                     contract_id: str | None, may_msg: str) -> None:
        st_t, st_f = self.eval_bool(st, cond)
        if st_f.reachable and not st_t.reachable:
            self.alarm("ASR", loc, True,
                       may_msg.replace("may violate", "violates")
                              .replace("may be violated", "is violated"),
                       contract_id)
            st.reachable = False
            return
        if st_f.reachable:
            self.alarm("ASR", loc, False, may_msg, contract_id)
        st.take(st_t)

    # -- statements ------------------------------------------------------------------

    def visit_stmt(self, st: AbsState, s: Stmt) -> AbsState:
        if not st.reachable:
            return st
        self.visits += 1
        if self.visits > self.config.budget:
            raise AnalysisError(
                f"statement visit budget exceeded ({self.config.budget})")
        if not isinstance(s, Block) and self.recording:
            self.reached.add(s.loc)
        if isinstance(s, Block):
            for sub in s.stmts:
                st = self.visit_stmt(st, sub)
            return st
        if isinstance(s, VarDecl):
            return self._visit_vardecl(st, s)
        if isinstance(s, Assign):
            v = self.eval(st, s.value)
            if not st.reachable:
                return st
            if isinstance(s.target, Index):
                self.write_cell(st, s.target, v)
            else:
                pk = self.path_key(s.target)
                if pk is None:
                    raise AnalysisError(f"bad assignment target at {s.loc}")
                key, kind, pretty = pk
                self.write_scalar(st, key, kind, v, s.loc, pretty)
            return st
        if isinstance(s, If):
            st_t, st_f = self.eval_bool(st, s.cond)
            out_t = self.visit_stmt(st_t, s.then)
            out_f = self.visit_stmt(st_f, s.orelse) \
                if s.orelse is not None else st_f
            return state_join(out_t, out_f)
        if isinstance(s, While):
            return self._visit_loop(st, s.cond, (s.body,))
        if isinstance(s, For):
            if s.init is not None:
                st = self.visit_stmt(st, s.init)
            cond = s.cond if s.cond is not None else IntLit(1, s.loc)
            body = (s.body, s.step) if s.step is not None else (s.body,)
            return self._visit_loop(st, cond, body)
        if isinstance(s, Switch):
            return self._visit_switch(st, s)
        if isinstance(s, Return):
            value = None
            if s.value is not None:
                v = self.eval(st, s.value)
                if not st.reachable:
                    return st
                kind = _scalar_kind(self.frame().fn.sig.ret)
                v, alarms = convert(v, kind, self.width)
                self.op_alarms(alarms, s.loc, "the return value")
                if any(a.definite for a in alarms):
                    st.reachable = False
                    return st
                value = v
            if self.return_stack:
                self.return_stack[-1].append((st.clone(), value))
            return st.dead()
        if isinstance(s, Break):
            if self.break_stack:
                self.break_stack[-1].append(st.clone())
            return st.dead()
        if isinstance(s, ExprStmt):
            self.eval(st, s.expr)
            return st
        if isinstance(s, ModifyFullRange):
            return self._visit_modify(st, s)
        if isinstance(s, AssertStmt):
            self._assert_like(st, s.cond, s.loc, s.contract_id,
                              _assert_msg(s.contract_id))
            return st
        if isinstance(s, KnownFact):
            st_t, _ = self.eval_bool(st, s.cond)
            return st_t
        if isinstance(s, GlobalAssert):
            prev = self.force_global
            self.force_global = True
            try:
                pk = self.path_key(s.target)
            finally:
                self.force_global = prev
            if pk is None:
                raise AnalysisError(f"bad watch target at {s.loc}")
            key, _kind, pretty = pk
            w = Watch(key, pretty, s.cond, s.contract_id)
            if w not in st.watches:
                st.watches = st.watches + (w,)
            return st
        raise AnalysisError(f"cannot analyze statement {s!r}")

    def _visit_vardecl(self, st: AbsState, s: VarDecl) -> AbsState:
        key = ("l", self.frame().frame_id, s.name)
        if isinstance(s.ty, ArrayType):
            kind = _scalar_kind(s.ty.elem)
            if s.init is ZERO_FILL:
                st.env[key] = ArrayVal(zero_for(kind), s.ty.size,
                                       s.ty.size, "no")
            else:
                st.env[key] = ArrayVal(_bottom_for_kind(kind), s.ty.size,
                                       0, "no")
            return st
        if isinstance(s.ty, StructType):
            for fname, fty in self.struct_fields[s.ty.name]:
                fkey = key + (fname,)
                st.env[fkey] = _bottom_for_kind(_scalar_kind(fty))
                st.init[fkey] = "no"
            return st
        if isinstance(s.init, Expr):
            v = self.eval(st, s.init)
            if not st.reachable:
                return st
            self.write_scalar(st, key, _scalar_kind(s.ty), v, s.loc, s.name)
        else:
            st.env[key] = _bottom_for_kind(_scalar_kind(s.ty))
            st.init[key] = "no"
        return st

    def _visit_modify(self, st: AbsState, s: ModifyFullRange) -> AbsState:
        # environment havoc, not a program write: watches stay silent
        if isinstance(s.target, Name):
            key = self.key_for_name(s.target.ident)
            if key is None:
                raise AnalysisError(f"unknown name in modify at {s.loc}")
            self.havoc_key(st, key, self.decl_type(s.target.ident))
        else:
            pk = self.path_key(s.target)
            if pk is None:
                raise AnalysisError(f"bad modify target at {s.loc}")
            key, kind, _pretty = pk
            st.env[key] = top_for(kind, self.width)
            st.init[key] = "yes"
            self.log_global_write(key)
        return st

    def _record_call_values(self, st: AbsState, fname: str,
                            written: set, result) -> None:
        if result is not None and not isinstance(result, (ArrayVal, PtrVal)) \
                and not result.is_bottom():
            prev = self.extraction.returns.get(fname)
            self.extraction.returns[fname] = result if prev is None \
                else join_value(prev, result)
        for key in sorted(written):
            v = st.env.get(key)
            if v is None or isinstance(v, (ArrayVal, PtrVal)) \
                    or v.is_bottom():
                continue
            k = (fname, _key_pretty(key))
            prev = self.extraction.globals_after.get(k)
            self.extraction.globals_after[k] = v if prev is None \
                else join_value(prev, v)

    # -- loops --------------------------------------------------------------------

    def _visit_loop(self, st: AbsState, cond: Expr, body: tuple) -> AbsState:
        exits: list = []
        breaks: list = []
        head = st
        stabilized = False
        for _ in range(self.config.unroll):
            st_t, st_f = self.eval_bool(head, cond)
            exits.append(st_f)
            if not st_t.reachable:
                stabilized = True
                break
            self.break_stack.append([])
            out = st_t
            for b in body:
                out = self.visit_stmt(out, b)
            breaks.extend(self.break_stack.pop())
            if state_leq(out, head):
                stabilized = True
                break
            head = out
        if not stabilized and head.reachable:
            invariant = self._loop_fixpoint(head, cond, body)
            st_t, st_f = self.eval_bool(invariant, cond)
            exits.append(st_f)
            if st_t.reachable:
                self.break_stack.append([])
                out = st_t
                for b in body:
                    out = self.visit_stmt(out, b)
                breaks.extend(self.break_stack.pop())
        result = AbsState({}, {}, (), False)
        for s2 in exits + breaks:
            result = state_join(result, s2)
        return result

    def _loop_fixpoint(self, entry: AbsState, cond: Expr,
                       body: tuple) -> AbsState:
        """Widening ascent plus one narrowing step; recording disabled."""
        self.suppress += 1
        saved_returns = None
        if self.return_stack:
            saved_returns = self.return_stack[-1]
            self.return_stack[-1] = []
        try:
            x = entry
            for _ in range(_MAX_WIDEN_ITERS):
                fx = self._loop_body_once(x, cond, body, entry)
                if state_leq(fx, x):
                    break
                x = state_widen(x, fx, self.int_ts, self.float_ts,
                                self.width)
            else:
                raise AnalysisError("loop analysis failed to stabilize")
            fx = self._loop_body_once(x, cond, body, entry)
            return state_narrow(x, fx, self.width)
        finally:
            if saved_returns is not None:
                self.return_stack[-1] = saved_returns
            self.suppress -= 1

    def _loop_body_once(self, x: AbsState, cond: Expr, body: tuple,
                        entry: AbsState) -> AbsState:
        st_t, _ = self.eval_bool(x, cond)
        if not st_t.reachable:
            return entry.clone()
        self.break_stack.append([])
        out = st_t
        for b in body:
            out = self.visit_stmt(out, b)
        self.break_stack.pop()
        return state_join(entry, out)

    # -- switch ----------------------------------------------------------------------

    def _case_const(self, e: Expr) -> int:
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, Unary) and e.op == "-" \
                and isinstance(e.operand, IntLit):
            return -e.operand.value
        if isinstance(e, Name):
            ec = self.prog.enum_consts.get(e.ident)
            if ec is not None:
                return ec[0]
        raise AnalysisError(f"case label is not a constant: {e!r}")

    def _visit_switch(self, st: AbsState, s: Switch) -> AbsState:
        subj = self.eval(st, s.subject)
        if not st.reachable:
            return st
        subj_pk = self.path_key(s.subject) \
            if isinstance(s.subject, (Name, FieldAccess)) else None
        self.break_stack.append([])
        remaining = st  # paths that matched none of the cases so far
        pending = AbsState({}, {}, (), False)  # fall-through from above
        for case in s.cases:
            cv = IntSet.const(self._case_const(case.value))
            entry = remaining.clone()
            if entry.reachable:
                if subj_pk is not None:
                    key = subj_pk[0]
                    cur = entry.env.get(key, subj)
                    refined = refine(cur, "==", cv, self.width)
                    if refined.is_bottom():
                        entry.reachable = False
                    else:
                        entry.env[key] = refined
                elif not subj.is_bottom() \
                        and compare("==", subj, cv) == "false":
                    entry.reachable = False
            entry = state_join(entry, pending)
            out = entry
            for sub in case.body:
                out = self.visit_stmt(out, sub)
            pending = out
            nomatch = remaining.clone()
            if nomatch.reachable:
                if subj_pk is not None:
                    key = subj_pk[0]
                    cur = nomatch.env.get(key, subj)
                    refined = refine(cur, "!=", cv, self.width)
                    if refined.is_bottom():
                        nomatch.reachable = False
                    else:
                        nomatch.env[key] = refined
                elif not subj.is_bottom() \
                        and compare("==", subj, cv) == "true":
                    nomatch.reachable = False
            remaining = nomatch
        if s.default is not None:
            out = state_join(remaining, pending)
            for sub in s.default:
                out = self.visit_stmt(out, sub)
            after = out
        else:
            after = state_join(remaining, pending)
        for b in self.break_stack.pop():
            after = state_join(after, b)
        return after

    # -- top level --------------------------------------------------------------------

    def setup_globals(self, st: AbsState) -> None:
        for name, gd in self.prog.globals.items():
            key = ("g", name)
            if isinstance(gd.ty, ArrayType):
                kind = _scalar_kind(gd.ty.elem)
                if self.config.zero_init_globals:
                    st.env[key] = ArrayVal(zero_for(kind), gd.ty.size,
                                           gd.ty.size, "no")
                else:
                    st.env[key] = ArrayVal(_bottom_for_kind(kind),
                                           gd.ty.size, 0, "no")
                continue
            if isinstance(gd.ty, StructType):
                for fname, fty in self.struct_fields[gd.ty.name]:
                    fkey = key + (fname,)
                    kind = _scalar_kind(fty)
                    if self.config.zero_init_globals:
                        st.env[fkey] = zero_for(kind)
                        st.init[fkey] = "yes"
                    else:
                        st.env[fkey] = _bottom_for_kind(kind)
                        st.init[fkey] = "no"
                continue
            kind = _scalar_kind(gd.ty)
            if isinstance(gd.init, Expr):
                st.env[key] = self.eval_const(gd.init, kind)
                st.init[key] = "yes"
            elif self.config.zero_init_globals:
                st.env[key] = zero_for(kind)
                st.init[key] = "yes"
            else:
                st.env[key] = _bottom_for_kind(kind)
                st.init[key] = "no"

    def eval_const(self, e: Expr, kind: str):
        if isinstance(e, IntLit):
            v = IntSet.const(e.value)
        elif isinstance(e, FloatLit):
            v = FloatInterval.const(e.value)
        elif isinstance(e, Unary) and e.op == "-":
            inner = self.eval_const(e.operand, kind)
            v, _ = abs_unop("-", inner, self.width)
        elif isinstance(e, Name) and e.ident in self.prog.enum_consts:
            v = IntSet.const(self.prog.enum_consts[e.ident][0])
        else:
            raise AnalysisError(f"global initializer is not constant: {e!r}")
        v, _ = convert(v, kind, self.width)
        return v

    def run(self, entry: str) -> AnalysisOutput:
        t0 = time.monotonic()
        target = self.prog.functions.get(entry)
        if target is None:
            raise AnalysisError(f"entry function {entry!r} is not defined")
        _mod_name, fd = target
        st = AbsState({}, {}, ())
        self.setup_globals(st)
        frame_id = ()
        self.frames.append(Frame(fd, frame_id, _fn_local_names(fd)))
        self.return_stack.append([])
        try:
            for p in fd.sig.params:
                if isinstance(p.ty, PointerType):
                    raise AnalysisError(
                        "entry function cannot take pointer parameters")
                key = ("l", frame_id, p.name)
                st.env[key] = top_for(_scalar_kind(p.ty), self.width)
                st.init[key] = "yes"
            self.visit_stmt(st, fd.body)
        finally:
            self.return_stack.pop()
            self.frames.pop()
        return AnalysisOutput(
            entry=entry,
            alarms=self._merged_alarms(),
            reached=set(self.reached),
            coverage=self._coverage(),
            extraction=self.extraction,
            visits=self.visits,
            seconds=time.monotonic() - t0,
        )

    def _merged_alarms(self) -> list:
        merged = []
        for (cls, loc), items in self.alarm_map.items():
            definite = all(a.definite for a in items)
            first = items[0]
            merged.append(Alarm(cls, loc, definite, first.message,
                                first.stack, first.contract_id))
        merged.sort(key=lambda a: (a.loc.file, a.loc.line, a.loc.col, a.cls))
        return merged

    def _coverage(self) -> dict:
        cov = {}
        for mod in self.prog.modules:
            total = sum(count_statements(fd)
                        for fd in mod.functions().values())
            reached = sum(1 for loc in self.reached if loc.file == mod.file)
            cov[mod.name] = (reached, total)
        return cov


def _ret_bottom(ret: Type | None):
    if ret is None:
        return None
    return FLOAT_BOT if isinstance(ret, FloatType) else INT_BOT


def _op_alarm_message(cls: str, definite: bool, what: str) -> str:
    if cls == "IRO":
        return (f"result of {what} leaves the type range" if definite
                else f"result of {what} may leave the type range")
    if cls == "DMZ":
        return (f"{what} divides by zero" if definite
                else f"{what} may divide by zero")
    if cls == "ISA":
        return (f"shift amount of {what} is invalid" if definite
                else f"shift amount of {what} may be invalid")
    return f"{what} may fail"


def _subst_expr(e: Expr, params: dict, ret: Expr | None) -> Expr:
    """Substitute argument expressions for parameter names in a contract."""
    if isinstance(e, Name):
        return params.get(e.ident, e)
    if isinstance(e, ReturnVal):
        if ret is None:
            raise AnalysisError("return value used outside ensures")
        return ret
    if isinstance(e, LengthOf):
        repl = params.get(e.ident)
        if isinstance(repl, Name):
            return LengthOf(repl.ident, e.loc)
        return e
    if isinstance(e, Unary):
        return Unary(e.op, _subst_expr(e.operand, params, ret), e.loc)
    if isinstance(e, Binary):
        return Binary(e.op, _subst_expr(e.left, params, ret),
                      _subst_expr(e.right, params, ret), e.loc)
    if isinstance(e, Index):
        base = _subst_expr(e.base, params, ret)
        if not isinstance(base, Name):
            raise AnalysisError("contract index on a non-array")
        return Index(base, _subst_expr(e.index, params, ret), e.loc)
    if isinstance(e, FieldAccess):
        base = _subst_expr(e.base, params, ret)
        if not isinstance(base, Name):
            raise AnalysisError("contract field access on a non-struct")
        return FieldAccess(base, e.fieldname, e.loc)
    return e


def analyze_program(prog: Program, entry: str, config: AnalysisConfig,
                    plan: ExtractionPlan | None = None) -> AnalysisOutput:
    """Analyze `entry` over the resolved program and report the findings."""
    return Analyzer(prog, config, plan).run(entry)
