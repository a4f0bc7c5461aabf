"""Concrete Mini-C interpreter.

Runs one entry function with concrete argument values and reports the first
runtime error, using exactly the same error classes and trigger points as
the abstract analyzer.  Serves as the ground truth the analyzer is tested
against: if a concrete run hits an error, the analyzer must have an alarm
of the same class at the same location.

Nondeterminism (__modify_full_range) is resolved from a caller-supplied
input list; each havocked scalar consumes one entry, arrays consume one
entry per cell.  A false __known_fact makes the run vacuous: it stops and
counts as error-free.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .domains import FMAX, int_max, int_min
from .frontend import (
    ArrayType, Assign, AssertStmt, Binary, Block, Break, Call, EnumType,
    Expr, ExprStmt, FieldAccess, FloatLit, FloatType, For, FunctionDef,
    GlobalAssert, If, Index, IntLit, IntType, KnownFact, LengthOf,
    ModifyFullRange, Name, PointerType, Program, Return, Stmt, StructType,
    Switch, Type, UCharType, Unary, VarDecl, While, ZERO_FILL, walk_stmts,
)


class ConcreteError(Exception):
    """Tool failure (step cap, malformed program), not a program error."""


class _Err(Exception):
    def __init__(self, cls: str, loc):
        self.cls = cls
        self.loc = loc
        super().__init__(f"{cls} at {loc}")


class _Vacuous(Exception):
    pass


class _BreakSignal(Exception):
    pass


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value
        super().__init__()


@dataclass
class ConcreteResult:
    error: tuple | None  # (class, Loc) of the first error, or None
    vacuous: bool
    returned: object
    steps: int
    globals_after: dict = field(default_factory=dict)


@dataclass
class _Array:
    cells: list
    init: list  # per-cell bool


def _cdiv(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _cmod(a: int, b: int) -> int:
    return a - _cdiv(a, b) * b


def _is_float_type(ty: Type) -> bool:
    return isinstance(ty, FloatType)


class _Interp:
    def __init__(self, prog: Program, inputs, int_width: int,
                 step_cap: int, zero_init_globals: bool):
        self.prog = prog
        self.inputs = list(inputs)
        self.in_pos = 0
        self.width = int_width
        self.imin = int_min(int_width)
        self.imax = int_max(int_width)
        self.step_cap = step_cap
        self.steps = 0
        self.env: dict = {}
        self.init: dict = {}
        self.watches: list = []  # (key, pretty, cond)
        self.frames: list = []  # (fn, frame_id)
        self.next_frame = 0
        self.struct_fields = {
            name: [(f.name, f.ty) for f in sd.fields]
            for name, sd in prog.structs.items()
        }
        self.zero_init = zero_init_globals
        self.force_global = False  # watch conditions resolve globally
        self._setup_globals()

    # -- setup ---------------------------------------------------------------

    def _setup_globals(self) -> None:
        for name, gd in self.prog.globals.items():
            key = ("g", name)
            if isinstance(gd.ty, ArrayType):
                fl = _is_float_type(gd.ty.elem)
                if self.zero_init:
                    self.env[key] = _Array([0.0 if fl else 0] * gd.ty.size,
                                           [True] * gd.ty.size)
                else:
                    self.env[key] = _Array([0.0 if fl else 0] * gd.ty.size,
                                           [False] * gd.ty.size)
                continue
            if isinstance(gd.ty, StructType):
                for fname, fty in self.struct_fields[gd.ty.name]:
                    fkey = key + (fname,)
                    self.env[fkey] = 0.0 if _is_float_type(fty) else 0
                    self.init[fkey] = self.zero_init
                continue
            if isinstance(gd.init, Expr):
                self.env[key] = self._const(gd.init, gd.ty)
                self.init[key] = True
            else:
                self.env[key] = 0.0 if _is_float_type(gd.ty) else 0
                self.init[key] = self.zero_init

    def _const(self, e: Expr, ty: Type):
        if isinstance(e, IntLit):
            v = e.value
        elif isinstance(e, FloatLit):
            v = e.value
        elif isinstance(e, Unary) and e.op == "-":
            v = -self._const(e.operand, ty)
        elif isinstance(e, Name) and e.ident in self.prog.enum_consts:
            v = self.prog.enum_consts[e.ident][0]
        else:
            raise ConcreteError(f"non-constant global initializer: {e!r}")
        return float(v) if _is_float_type(ty) else int(v)

    def _next_input(self) -> int:
        if self.in_pos < len(self.inputs):
            v = self.inputs[self.in_pos]
            self.in_pos += 1
            return v
        return 0

    def _havoc_value(self, ty: Type):
        raw = self._next_input()
        if isinstance(ty, UCharType):
            return int(raw) % 256
        if isinstance(ty, FloatType):
            f = float(raw)
            if math.isnan(f):
                return 0.0
            return max(-FMAX, min(FMAX, f))
        span = self.imax - self.imin + 1
        return (int(raw) - self.imin) % span + self.imin

    # -- names ----------------------------------------------------------------

    def frame_id(self):
        return self.frames[-1][1]

    def fn(self) -> FunctionDef:
        return self.frames[-1][0]

    def key_for_name(self, name: str):
        if not self.force_global and self._is_live_local(name):
            return ("l", self.frame_id(), name)
        if name in self.prog.globals:
            return ("g", name)
        return None

    def _local_type(self, name: str):
        if not self.frames:
            return None
        fn = self.fn()
        for p in fn.sig.params:
            if p.name == name:
                return p.ty
        for s in walk_stmts(fn.body):
            if isinstance(s, VarDecl) and s.name == name:
                return s.ty
        return None

    def decl_type(self, name: str) -> Type:
        if not self.force_global and self._is_live_local(name):
            return self._local_type(name)
        gd = self.prog.globals.get(name)
        if gd is not None:
            return gd.ty
        raise ConcreteError(f"unknown name {name!r}")

    def _is_live_local(self, name: str) -> bool:
        if not self.frames:
            return False
        key = ("l", self.frame_id(), name)
        if key in self.env:
            return True
        ty = self._local_type(name)
        if isinstance(ty, StructType):
            return any(key + (f,) in self.env
                       for f, _ in self.struct_fields[ty.name])
        return False

    def array_ref(self, e: Name) -> tuple:
        """Env key of the array a name denotes (through pointers)."""
        if not self.force_global and self._is_live_local(e.ident):
            key = ("l", self.frame_id(), e.ident)
            ty = self._local_type(e.ident)
            if isinstance(ty, PointerType):
                return self.env[key]
            return key
        if e.ident in self.prog.globals:
            return ("g", e.ident)
        raise ConcreteError(f"unknown array {e.ident!r}")

    # -- value stores ------------------------------------------------------------

    def store(self, key: tuple, v, ty: Type, loc) -> None:
        v = self._convert(v, ty, loc)
        self.env[key] = v
        self.init[key] = True
        self._fire_watches(key, loc)

    def _convert(self, v, ty: Type, loc):
        if isinstance(ty, FloatType):
            f = float(v)
            if math.isnan(f) or math.isinf(f) or abs(f) > FMAX:
                raise _Err("IRO", loc)
            return f
        iv = math.trunc(v)
        if isinstance(ty, UCharType):
            return iv % 256  # wrap is defined behavior
        if iv < self.imin or iv > self.imax:
            raise _Err("IRO", loc)
        return iv

    def _fire_watches(self, key: tuple, loc) -> None:
        for wkey, _pretty, cond in self.watches:
            if wkey != key:
                continue
            prev = self.force_global
            self.force_global = True
            try:
                ok = self._truth(self.eval(cond))
            finally:
                self.force_global = prev
            if not ok:
                raise _Err("ASR", loc)

    # -- expressions ----------------------------------------------------------------

    def _truth(self, v) -> bool:
        return v != 0

    def eval(self, e: Expr):
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, FloatLit):
            return e.value
        if isinstance(e, Name):
            return self._eval_name(e)
        if isinstance(e, Index):
            akey = self.array_ref(e.base)
            arr = self.env[akey]
            idx = self.eval(e.index)
            idx = math.trunc(idx)
            if idx < 0 or idx >= len(arr.cells):
                raise _Err("IPA", e.loc)
            if not arr.init[idx]:
                raise _Err("UIV", e.loc)
            return arr.cells[idx]
        if isinstance(e, FieldAccess):
            key = self.key_for_name(e.base.ident)
            if key is None:
                raise ConcreteError(f"unknown struct {e.base.ident!r}")
            fkey = key + (e.fieldname,)
            if not self.init.get(fkey, False):
                raise _Err("UIV", e.loc)
            return self.env[fkey]
        if isinstance(e, LengthOf):
            akey = self.array_ref(Name(e.ident, e.loc))
            return len(self.env[akey].cells)
        if isinstance(e, Unary):
            if e.op == "!":
                return 0 if self._truth(self.eval(e.operand)) else 1
            v = self.eval(e.operand)
            r = -v
            if isinstance(r, int) and not (self.imin <= r <= self.imax):
                raise _Err("IRO", e.loc)
            if isinstance(r, float) and (math.isnan(r) or abs(r) > FMAX):
                raise _Err("IRO", e.loc)
            return r
        if isinstance(e, Binary):
            return self._eval_binary(e)
        if isinstance(e, Call):
            return self.call(e)
        raise ConcreteError(f"cannot evaluate {e!r}")

    def _eval_name(self, e: Name):
        key = self.key_for_name(e.ident)
        if key is None:
            ec = self.prog.enum_consts.get(e.ident)
            if ec is None:
                raise ConcreteError(f"unknown name {e.ident!r}")
            return ec[0]
        v = self.env.get(key)
        if isinstance(v, (_Array, tuple)):
            return v  # array value or pointer key; used as call argument
        if not self.init.get(key, False):
            raise _Err("UIV", e.loc)
        return v

    def _eval_binary(self, e: Binary):
        if e.op == "&&":
            if not self._truth(self.eval(e.left)):
                return 0
            return 1 if self._truth(self.eval(e.right)) else 0
        if e.op == "||":
            if self._truth(self.eval(e.left)):
                return 1
            return 1 if self._truth(self.eval(e.right)) else 0
        a = self.eval(e.left)
        b = self.eval(e.right)
        op = e.op
        if op in ("<", "<=", ">", ">=", "==", "!="):
            res = {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b,
                   "==": a == b, "!=": a != b}[op]
            return 1 if res else 0
        if isinstance(a, float) or isinstance(b, float):
            if op in ("%", "<<", ">>"):
                raise ConcreteError(f"float operand for {op!r}")
            fa, fb = float(a), float(b)
            if op == "/":
                if fb == 0.0:
                    raise _Err("DMZ", e.loc)
                r = fa / fb
            elif op == "+":
                r = fa + fb
            elif op == "-":
                r = fa - fb
            else:
                r = fa * fb
            if math.isnan(r) or math.isinf(r) or abs(r) > FMAX:
                raise _Err("IRO", e.loc)
            return r
        if op == "/":
            if b == 0:
                raise _Err("DMZ", e.loc)
            r = _cdiv(a, b)
        elif op == "%":
            if b == 0:
                raise _Err("DMZ", e.loc)
            r = _cmod(a, b)
        elif op == "<<":
            if b < 0 or b >= self.width:
                raise _Err("ISA", e.loc)
            r = a << b
        elif op == ">>":
            if b < 0 or b >= self.width:
                raise _Err("ISA", e.loc)
            r = a >> b
        elif op == "+":
            r = a + b
        elif op == "-":
            r = a - b
        else:
            r = a * b
        if r < self.imin or r > self.imax:
            raise _Err("IRO", e.loc)
        return r

    # -- calls --------------------------------------------------------------------

    def call(self, e: Call):
        target = self.prog.functions.get(e.callee)
        if target is None:
            raise ConcreteError(f"call to undefined function {e.callee!r}")
        _mod, fd = target
        argv = []
        for a, p in zip(e.args, fd.sig.params):
            if isinstance(p.ty, PointerType):
                if not isinstance(a, Name):
                    raise ConcreteError(f"bad pointer argument at {e.loc}")
                argv.append(self.array_ref(a))
            else:
                argv.append(self.eval(a))
        frame_id = self.next_frame
        self.next_frame += 1
        self.frames.append((fd, frame_id))
        try:
            for p, v in zip(fd.sig.params, argv):
                key = ("l", frame_id, p.name)
                if isinstance(p.ty, PointerType):
                    self.env[key] = v
                    self.init[key] = True
                else:
                    self.env[key] = self._convert(v, p.ty, e.loc)
                    self.init[key] = True
            try:
                self.exec_stmt(fd.body)
                value = None
            except _ReturnSignal as r:
                value = r.value
            if fd.sig.ret is not None and value is None:
                raise ConcreteError(
                    f"{e.callee!r} fell off the end without a return value")
            return value
        finally:
            dead = [k for k in self.env
                    if k[0] == "l" and k[1] == frame_id]
            for k in dead:
                self.env.pop(k, None)
                self.init.pop(k, None)
            self.frames.pop()

    # -- statements ------------------------------------------------------------------

    def exec_stmt(self, s: Stmt) -> None:
        self.steps += 1
        if self.steps > self.step_cap:
            raise ConcreteError(f"step cap exceeded ({self.step_cap})")
        if isinstance(s, Block):
            for sub in s.stmts:
                self.exec_stmt(sub)
            return
        if isinstance(s, VarDecl):
            self._exec_vardecl(s)
            return
        if isinstance(s, Assign):
            v = self.eval(s.value)
            self._assign(s.target, v, s.loc)
            return
        if isinstance(s, If):
            if self._truth(self.eval(s.cond)):
                self.exec_stmt(s.then)
            elif s.orelse is not None:
                self.exec_stmt(s.orelse)
            return
        if isinstance(s, While):
            while self._truth(self.eval(s.cond)):
                self.steps += 1
                if self.steps > self.step_cap:
                    raise ConcreteError(f"step cap exceeded "
                                        f"({self.step_cap})")
                try:
                    self.exec_stmt(s.body)
                except _BreakSignal:
                    break
            return
        if isinstance(s, For):
            if s.init is not None:
                self.exec_stmt(s.init)
            while s.cond is None or self._truth(self.eval(s.cond)):
                self.steps += 1
                if self.steps > self.step_cap:
                    raise ConcreteError(f"step cap exceeded "
                                        f"({self.step_cap})")
                try:
                    self.exec_stmt(s.body)
                except _BreakSignal:
                    break
                if s.step is not None:
                    self.exec_stmt(s.step)
            return
        if isinstance(s, Switch):
            self._exec_switch(s)
            return
        if isinstance(s, Return):
            if s.value is None:
                raise _ReturnSignal(None)
            v = self.eval(s.value)
            raise _ReturnSignal(self._convert(v, self.fn().sig.ret, s.loc))
        if isinstance(s, Break):
            raise _BreakSignal()
        if isinstance(s, ExprStmt):
            self.eval(s.expr)
            return
        if isinstance(s, ModifyFullRange):
            self._exec_modify(s)
            return
        if isinstance(s, AssertStmt):
            if not self._truth(self.eval(s.cond)):
                raise _Err("ASR", s.loc)
            return
        if isinstance(s, KnownFact):
            if not self._truth(self.eval(s.cond)):
                raise _Vacuous()
            return
        if isinstance(s, GlobalAssert):
            if isinstance(s.target, Name):
                key = ("g", s.target.ident)
                pretty = s.target.ident
            else:
                key = ("g", s.target.base.ident, s.target.fieldname)
                pretty = f"{s.target.base.ident}.{s.target.fieldname}"
            self.watches.append((key, pretty, s.cond))
            return
        raise ConcreteError(f"cannot execute {s!r}")

    def _exec_vardecl(self, s: VarDecl) -> None:
        key = ("l", self.frame_id(), s.name)
        if isinstance(s.ty, ArrayType):
            fl = _is_float_type(s.ty.elem)
            filled = s.init is ZERO_FILL
            self.env[key] = _Array([0.0 if fl else 0] * s.ty.size,
                                   [filled] * s.ty.size)
            return
        if isinstance(s.ty, StructType):
            for fname, fty in self.struct_fields[s.ty.name]:
                fkey = key + (fname,)
                self.env[fkey] = 0.0 if _is_float_type(fty) else 0
                self.init[fkey] = False
            return
        if isinstance(s.init, Expr):
            v = self.eval(s.init)
            self.store(key, v, s.ty, s.loc)
        else:
            self.env[key] = 0.0 if _is_float_type(s.ty) else 0
            self.init[key] = False

    def _assign(self, target: Expr, v, loc) -> None:
        if isinstance(target, Index):
            akey = self.array_ref(target.base)
            arr = self.env[akey]
            idx = math.trunc(self.eval(target.index))
            if idx < 0 or idx >= len(arr.cells):
                raise _Err("IPA", target.loc)
            elem_ty = self._array_elem_type(akey)
            arr.cells[idx] = self._convert(v, elem_ty, loc)
            arr.init[idx] = True
            return
        if isinstance(target, FieldAccess):
            key = self.key_for_name(target.base.ident)
            ty = self.decl_type(target.base.ident)
            fty = dict(self.struct_fields[ty.name])[target.fieldname]
            self.store(key + (target.fieldname,), v, fty, loc)
            return
        if isinstance(target, Name):
            key = self.key_for_name(target.ident)
            if key is None:
                raise ConcreteError(f"unknown name {target.ident!r}")
            ty = self.decl_type(target.ident)
            self.store(key, v, ty, loc)
            return
        raise ConcreteError(f"bad assignment target {target!r}")

    def _array_elem_type(self, akey: tuple) -> Type:
        if akey[0] == "g":
            return self.prog.globals[akey[1]].ty.elem
        name = akey[2]
        for fd, fid in self.frames:
            if fid == akey[1]:
                for s in walk_stmts(fd.body):
                    if isinstance(s, VarDecl) and s.name == name:
                        return s.ty.elem
        raise ConcreteError(f"cannot find array behind {akey!r}")

    def _exec_switch(self, s: Switch) -> None:
        subj = self.eval(s.subject)
        start = None
        for i, case in enumerate(s.cases):
            cv = self.eval(case.value)
            if subj == cv:
                start = i
                break
        try:
            if start is not None:
                for case in s.cases[start:]:
                    for sub in case.body:
                        self.exec_stmt(sub)
                if s.default is not None:
                    for sub in s.default:
                        self.exec_stmt(sub)
            elif s.default is not None:
                for sub in s.default:
                    self.exec_stmt(sub)
        except _BreakSignal:
            pass

    def _exec_modify(self, s: ModifyFullRange) -> None:
        # environment havoc, not a program write: watches stay silent
        if isinstance(s.target, FieldAccess):
            key = self.key_for_name(s.target.base.ident)
            ty = self.decl_type(s.target.base.ident)
            fty = dict(self.struct_fields[ty.name])[s.target.fieldname]
            fkey = key + (s.target.fieldname,)
            self.env[fkey] = self._havoc_value(fty)
            self.init[fkey] = True
            return
        name = s.target.ident
        key = self.key_for_name(name)
        if key is None:
            raise ConcreteError(f"unknown name in modify: {name!r}")
        ty = self.decl_type(name)
        if isinstance(ty, PointerType):
            akey = self.array_ref(s.target)
            arr = self.env[akey]
            ety = self._array_elem_type(akey)
            for i in range(len(arr.cells)):
                arr.cells[i] = self._havoc_value(ety)
                arr.init[i] = True
            return
        if isinstance(ty, ArrayType):
            arr = self.env[key]
            for i in range(len(arr.cells)):
                arr.cells[i] = self._havoc_value(ty.elem)
                arr.init[i] = True
            return
        if isinstance(ty, StructType):
            for fname, fty in self.struct_fields[ty.name]:
                fkey = key + (fname,)
                self.env[fkey] = self._havoc_value(fty)
                self.init[fkey] = True
            return
        self.env[key] = self._havoc_value(ty)
        self.init[key] = True

    # -- top level --------------------------------------------------------------------

    def run(self, entry: str, args) -> ConcreteResult:
        target = self.prog.functions.get(entry)
        if target is None:
            raise ConcreteError(f"entry function {entry!r} is not defined")
        _mod, fd = target
        if len(args) != len(fd.sig.params):
            raise ConcreteError("entry argument count mismatch")
        frame_id = self.next_frame
        self.next_frame += 1
        self.frames.append((fd, frame_id))
        error = None
        vacuous = False
        returned = None
        try:
            for p, v in zip(fd.sig.params, args):
                key = ("l", frame_id, p.name)
                self.env[key] = self._convert(v, p.ty, fd.loc)
                self.init[key] = True
            try:
                self.exec_stmt(fd.body)
            except _ReturnSignal as r:
                returned = r.value
        except _Err as err:
            error = (err.cls, err.loc)
        except _Vacuous:
            vacuous = True
        finally:
            self.frames.pop()
        globals_after = {}
        for name, gd in self.prog.globals.items():
            if isinstance(gd.ty, ArrayType):
                continue
            if isinstance(gd.ty, StructType):
                for fname, _fty in self.struct_fields[gd.ty.name]:
                    fkey = ("g", name, fname)
                    if self.init.get(fkey, False):
                        globals_after[f"{name}.{fname}"] = self.env[fkey]
                continue
            if self.init.get(("g", name), False):
                globals_after[name] = self.env[("g", name)]
        return ConcreteResult(error, vacuous, returned, self.steps,
                              globals_after)


def run_concrete(prog: Program, entry: str, args=(), inputs=(), *,
                 int_width: int = 32, step_cap: int = 200_000,
                 zero_init_globals: bool = True) -> ConcreteResult:
    """Execute `entry` with concrete arguments; report the first error."""
    interp = _Interp(prog, inputs, int_width, step_cap, zero_init_globals)
    return interp.run(entry, args)
