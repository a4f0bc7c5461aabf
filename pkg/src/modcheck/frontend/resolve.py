"""Project resolution: link parsed modules into one Program.

Unifies shared globals, structs and enums by name, classifies the external
functions each module calls, and runs the static well-formedness checks the
analyzer relies on (declared names, call arity, index/field typing).
"""
from __future__ import annotations

from .contracts import ContractSet, merge as merge_contracts
from .lexer import FrontendError
from .nodes import (
    ArrayType, Assign, AssertStmt, Binary, Block, Break, Call, Case, EnumDecl,
    EnumType, Expr, ExprStmt, ExternalRef, FieldAccess, FloatType, For,
    FunctionDef, FunctionSig, GlobalAssert, GlobalDecl, If, Index, IntLit,
    IntType, KnownFact, LengthOf, Loc, ModifyFullRange, Module, Name, Param,
    PointerType, Program, Return, ReturnVal, Stmt, StructDecl, StructType,
    Switch, Type, UCharType, Unary, VarDecl, While, type_name, walk_exprs,
)

_SCALAR = (IntType, UCharType, FloatType, EnumType)


def resolve_project(modules: list[Module], entry: str | None = None,
                    zero_init_globals: bool = True) -> Program:
    names = [m.name for m in modules]
    dupes = {n for n in names if names.count(n) > 1}
    if dupes:
        raise FrontendError(
            f"duplicate module name {sorted(dupes)[0]!r}", Loc("<project>", 0, 0)
        )

    prog = Program(modules=list(modules))
    prog.zero_init_globals = zero_init_globals

    _unify_structs(prog)
    _unify_enums(prog)
    _unify_globals(prog)
    _collect_functions(prog)
    _classify_externals(prog)
    for mod in modules:
        _check_module_bodies(prog, mod)
    _check_contract_types(prog)

    manual = ContractSet()
    for mod in modules:
        manual = merge_contracts(manual, mod.contracts)
    prog.manual_contracts = manual

    if entry is not None:
        if entry not in prog.functions:
            raise FrontendError(f"entry function {entry!r} is not defined in "
                                f"any module", Loc("<project>", 0, 0))
        prog.entry = entry
    return prog


# ---------------------------------------------------------------------------
# unification
# ---------------------------------------------------------------------------

def _unify_structs(prog: Program) -> None:
    for mod in prog.modules:
        for name, sd in mod.structs().items():
            prev = prog.structs.get(name)
            if prev is None:
                prog.structs[name] = sd
            else:
                a = [(f.name, f.ty) for f in prev.fields]
                b = [(f.name, f.ty) for f in sd.fields]
                if a != b:
                    raise FrontendError(
                        f"struct {name!r} is declared with different fields "
                        f"in another module", sd.loc,
                    )


def _unify_enums(prog: Program) -> None:
    for mod in prog.modules:
        for name, ed in mod.enums().items():
            prev = prog.enums.get(name)
            if prev is None:
                prog.enums[name] = ed
                for i, member in enumerate(ed.members):
                    clash = prog.enum_consts.get(member)
                    if clash is not None and clash != (i, name):
                        raise FrontendError(
                            f"enum constant {member!r} already means "
                            f"{clash[0]} in enum {clash[1]!r}", ed.loc,
                        )
                    prog.enum_consts[member] = (i, name)
            elif prev.members != ed.members:
                raise FrontendError(
                    f"enum {name!r} is declared with different members in "
                    f"another module", ed.loc,
                )


def _unify_globals(prog: Program) -> None:
    for mod in prog.modules:
        for name, gd in mod.globals().items():
            prev = prog.globals.get(name)
            if prev is None:
                prog.globals[name] = gd
                continue
            if prev.ty != gd.ty:
                raise FrontendError(
                    f"global {name!r} has type {type_name(gd.ty)} here but "
                    f"{type_name(prev.ty)} elsewhere", gd.loc,
                )
            if gd.init is not None:
                if prev.init is not None and prev.init != gd.init:
                    raise FrontendError(
                        f"global {name!r} is initialized in two modules",
                        gd.loc,
                    )
                prog.globals[name] = gd


def _collect_functions(prog: Program) -> None:
    for mod in prog.modules:
        for name, fd in mod.functions().items():
            prev = prog.functions.get(name)
            if prev is not None:
                raise FrontendError(
                    f"function {name!r} is defined in module "
                    f"{prev[0]!r} and again in {mod.name!r}", fd.loc,
                )
            if name in prog.globals:
                raise FrontendError(
                    f"{name!r} is both a global variable and a function",
                    fd.loc,
                )
            prog.functions[name] = (mod.name, fd)


def _classify_externals(prog: Program) -> None:
    for mod in prog.modules:
        defined_here = set(mod.functions())
        protos = mod.prototypes()
        refs: dict[str, ExternalRef] = {}
        for fd in mod.functions().values():
            for e in _calls_in(fd.body):
                callee = e.callee
                if callee in defined_here:
                    continue
                ref = refs.get(callee)
                if ref is None:
                    if callee in protos:
                        ref = ExternalRef(protos[callee], "prototype", [])
                    elif callee in prog.functions:
                        ref = ExternalRef(prog.functions[callee][1].sig,
                                          "other-module", [])
                    else:
                        ref = ExternalRef(None, "unknown", [])
                    refs[callee] = ref
                ref.call_locs.append(e.loc)
        # prototypes never called still shape the harness, keep them visible
        for pname, sig in protos.items():
            if pname not in refs and pname not in defined_here:
                refs[pname] = ExternalRef(sig, "prototype", [])
        prog.externals[mod.name] = refs


def _calls_in(body: Block):
    from .nodes import walk_stmts

    for s in walk_stmts(body):
        for e in _stmt_exprs(s):
            for sub in walk_exprs(e):
                if isinstance(sub, Call):
                    yield sub


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
            yield s.init.target
            yield s.init.value
        if s.cond is not None:
            yield s.cond
        if s.step is not None:
            yield s.step.target
            yield s.step.value
    elif isinstance(s, Switch):
        yield s.subject
        for c in s.cases:
            yield c.value
    elif isinstance(s, Return) and s.value is not None:
        yield s.value
    elif isinstance(s, ExprStmt):
        yield s.expr
    elif isinstance(s, (AssertStmt, KnownFact)):
        yield s.cond
    elif isinstance(s, ModifyFullRange):
        yield s.target
    elif isinstance(s, GlobalAssert):
        yield s.target
        yield s.cond


# ---------------------------------------------------------------------------
# well-formedness of function bodies
# ---------------------------------------------------------------------------

class _Scope:
    """Flat per-function scope: params and every local declared so far."""

    def __init__(self, prog: Program, mod: Module, fd: FunctionDef):
        self.prog = prog
        self.mod = mod
        self.fd = fd
        self.vars: dict[str, Type] = {}
        for p in fd.sig.params:
            if isinstance(p.ty, PointerType):
                if not isinstance(p.ty.elem, _SCALAR):
                    raise FrontendError(
                        "pointer parameters must point at scalars", p.loc
                    )
            elif not isinstance(p.ty, _SCALAR):
                raise FrontendError(
                    "parameters must be scalars or pointers", p.loc
                )
            if p.name in self.vars:
                raise FrontendError(f"duplicate parameter {p.name!r}", p.loc)
            self.vars[p.name] = p.ty
        self.globals = {n: g.ty for n, g in prog.globals.items()
                        if n in mod.globals()}

    def declare(self, d: VarDecl) -> None:
        if d.name in self.vars:
            raise FrontendError(
                f"duplicate local {d.name!r} in {self.fd.sig.name!r}", d.loc
            )
        if isinstance(d.ty, ArrayType) and not isinstance(d.ty.elem, _SCALAR):
            raise FrontendError("array elements must be scalars", d.loc)
        if isinstance(d.ty, PointerType):
            raise FrontendError("pointer locals are not supported", d.loc)
        self.vars[d.name] = d.ty

    def type_of(self, name: str, loc: Loc) -> Type:
        if name in self.vars:
            return self.vars[name]
        if name in self.globals:
            return self.globals[name]
        if name in self.mod.globals():
            return self.mod.globals()[name].ty
        if name in self.prog.enum_consts:
            return EnumType(self.prog.enum_consts[name][1])
        raise FrontendError(
            f"undeclared name {name!r} in {self.fd.sig.name!r}", loc
        )


def _check_module_bodies(prog: Program, mod: Module) -> None:
    for gd in mod.globals().values():
        if isinstance(gd.ty, ArrayType):
            if not isinstance(gd.ty.elem, _SCALAR):
                raise FrontendError("array elements must be scalars", gd.loc)
            if isinstance(gd.init, Expr):
                raise FrontendError(
                    "array globals take no initializer or = {0}", gd.loc
                )
        elif isinstance(gd.ty, PointerType):
            raise FrontendError("pointer globals are not supported", gd.loc)
        elif isinstance(gd.init, Expr) and not _is_const_expr(gd.init, prog):
            raise FrontendError(
                f"initializer of global {gd.name!r} must be a constant",
                gd.loc,
            )
    for fd in mod.functions().values():
        scope = _Scope(prog, mod, fd)
        _check_stmt_list(fd.body.stmts, scope, in_loop=False)
        _check_returns(fd, scope)


def _is_const_expr(e: Expr, prog: Program) -> bool:
    from .nodes import FloatLit

    if isinstance(e, (IntLit, FloatLit)):
        return True
    if isinstance(e, Unary) and e.op == "-":
        return _is_const_expr(e.operand, prog)
    if isinstance(e, Name):
        return e.ident in prog.enum_consts
    return False


def _check_stmt_list(stmts, scope: _Scope, in_loop: bool) -> None:
    for s in stmts:
        _check_stmt(s, scope, in_loop)


def _check_stmt(s: Stmt, scope: _Scope, in_loop: bool) -> None:
    if isinstance(s, Block):
        _check_stmt_list(s.stmts, scope, in_loop)
    elif isinstance(s, VarDecl):
        if isinstance(s.init, Expr):
            _check_expr(s.init, scope, want_value=True)
        scope.declare(s)
    elif isinstance(s, Assign):
        _check_assign_target(s.target, scope)
        _check_expr(s.value, scope, want_value=True)
    elif isinstance(s, If):
        _check_expr(s.cond, scope, want_value=True)
        _check_stmt(s.then, scope, in_loop)
        if s.orelse is not None:
            _check_stmt(s.orelse, scope, in_loop)
    elif isinstance(s, While):
        _check_expr(s.cond, scope, want_value=True)
        _check_stmt(s.body, scope, in_loop=True)
    elif isinstance(s, For):
        if s.init is not None:
            _check_assign_target(s.init.target, scope)
            _check_expr(s.init.value, scope, want_value=True)
        if s.cond is not None:
            _check_expr(s.cond, scope, want_value=True)
        if s.step is not None:
            _check_assign_target(s.step.target, scope)
            _check_expr(s.step.value, scope, want_value=True)
        _check_stmt(s.body, scope, in_loop=True)
    elif isinstance(s, Switch):
        _check_expr(s.subject, scope, want_value=True)
        for c in s.cases:
            if isinstance(c.value, Name):
                if c.value.ident not in scope.prog.enum_consts:
                    raise FrontendError(
                        f"case label {c.value.ident!r} is not an enum "
                        f"constant", c.loc,
                    )
            _check_stmt_list(c.body, scope, in_loop=True)
        if s.default is not None:
            _check_stmt_list(s.default, scope, in_loop=True)
    elif isinstance(s, Return):
        if s.value is not None:
            _check_expr(s.value, scope, want_value=True)
    elif isinstance(s, Break):
        if not in_loop:
            raise FrontendError("break outside loop or switch", s.loc)
    elif isinstance(s, ExprStmt):
        _check_expr(s.expr, scope, want_value=False)
    elif isinstance(s, (AssertStmt, KnownFact)):
        _check_expr(s.cond, scope, want_value=True)
    elif isinstance(s, ModifyFullRange):
        _check_assign_target(s.target, scope, allow_whole_array=True)
    elif isinstance(s, GlobalAssert):
        if not isinstance(s.target, (Name, FieldAccess)):
            raise FrontendError("__global_assert watches a variable or "
                                "struct field", s.loc)
        _check_assign_target(s.target, scope, allow_whole_array=False)
        _check_expr(s.cond, scope, want_value=True)


def _check_assign_target(e: Expr, scope: _Scope,
                         allow_whole_array: bool = False) -> None:
    if isinstance(e, Name):
        ty = scope.type_of(e.ident, e.loc)
        if e.ident in scope.prog.enum_consts and e.ident not in scope.vars \
                and e.ident not in scope.globals:
            raise FrontendError(f"cannot assign to enum constant {e.ident!r}",
                                e.loc)
        if isinstance(ty, ArrayType) and not allow_whole_array:
            raise FrontendError("cannot assign to a whole array", e.loc)
        if isinstance(ty, StructType) and not allow_whole_array:
            raise FrontendError("cannot assign to a whole struct", e.loc)
        # a havoc of a pointer parameter targets the array it points to
        if isinstance(ty, PointerType) and not allow_whole_array:
            raise FrontendError("cannot reassign a pointer parameter", e.loc)
    elif isinstance(e, Index):
        ty = scope.type_of(e.base.ident, e.loc)
        if not isinstance(ty, (ArrayType, PointerType)):
            raise FrontendError(f"{e.base.ident!r} is not an array", e.loc)
        _check_expr(e.index, scope, want_value=True)
    elif isinstance(e, FieldAccess):
        ty = scope.type_of(e.base.ident, e.loc)
        if not isinstance(ty, StructType):
            raise FrontendError(f"{e.base.ident!r} is not a struct", e.loc)
        sd = scope.prog.structs.get(ty.name)
        if sd is None or e.fieldname not in {f.name for f in sd.fields}:
            raise FrontendError(
                f"struct {ty.name!r} has no field {e.fieldname!r}", e.loc
            )
    else:
        raise FrontendError("assignment target must be a variable, array "
                            "cell or struct field", getattr(e, "loc"))


def _check_expr(e: Expr, scope: _Scope, want_value: bool) -> None:
    from .nodes import FloatLit

    if isinstance(e, (IntLit, FloatLit)):
        return
    if isinstance(e, Name):
        ty = scope.type_of(e.ident, e.loc)
        if want_value and isinstance(ty, StructType):
            raise FrontendError(
                f"struct {e.ident!r} cannot be used as a value", e.loc
            )
        return
    if isinstance(e, Index):
        ty = scope.type_of(e.base.ident, e.loc)
        if not isinstance(ty, (ArrayType, PointerType)):
            raise FrontendError(f"{e.base.ident!r} is not an array", e.loc)
        _check_expr(e.index, scope, want_value=True)
        return
    if isinstance(e, FieldAccess):
        _check_assign_target(e, scope)
        return
    if isinstance(e, Unary):
        _check_expr(e.operand, scope, want_value=True)
        return
    if isinstance(e, Binary):
        _check_expr(e.left, scope, want_value=True)
        _check_expr(e.right, scope, want_value=True)
        return
    if isinstance(e, Call):
        _check_call(e, scope, want_value)
        return
    raise FrontendError("expression form not allowed here", getattr(e, "loc"))


def _check_call(e: Call, scope: _Scope, want_value: bool) -> None:
    prog = scope.prog
    mod = scope.mod
    sig: FunctionSig | None = None
    if e.callee in mod.functions():
        sig = mod.functions()[e.callee].sig
    elif e.callee in mod.prototypes():
        sig = mod.prototypes()[e.callee]
    elif e.callee in prog.functions:
        sig = prog.functions[e.callee][1].sig
    if sig is None:
        for a in e.args:
            _check_expr(a, scope, want_value=True)
        return
    if len(e.args) != len(sig.params):
        raise FrontendError(
            f"call to {e.callee!r} passes {len(e.args)} arguments, "
            f"expected {len(sig.params)}", e.loc,
        )
    if want_value and sig.ret is None:
        raise FrontendError(
            f"void function {e.callee!r} used as a value", e.loc
        )
    for a, p in zip(e.args, sig.params):
        if isinstance(p.ty, PointerType):
            if not isinstance(a, Name):
                raise FrontendError(
                    f"pointer parameter {p.name!r} needs an array argument",
                    e.loc,
                )
            aty = scope.type_of(a.ident, a.loc)
            if isinstance(aty, ArrayType):
                if aty.elem != p.ty.elem:
                    raise FrontendError(
                        f"array {a.ident!r} has element type "
                        f"{type_name(aty.elem)}, parameter {p.name!r} "
                        f"expects {type_name(p.ty.elem)}", e.loc,
                    )
            elif isinstance(aty, PointerType):
                if aty.elem != p.ty.elem:
                    raise FrontendError(
                        f"pointer {a.ident!r} does not match parameter "
                        f"{p.name!r}", e.loc,
                    )
            else:
                raise FrontendError(
                    f"pointer parameter {p.name!r} needs an array argument",
                    e.loc,
                )
        else:
            _check_expr(a, scope, want_value=True)


def _check_returns(fd: FunctionDef, scope: _Scope) -> None:
    from .nodes import walk_stmts

    for s in walk_stmts(fd.body):
        if isinstance(s, Return):
            if fd.sig.ret is None and s.value is not None:
                raise FrontendError(
                    f"void function {fd.sig.name!r} returns a value", s.loc
                )
            if fd.sig.ret is not None and s.value is None:
                raise FrontendError(
                    f"function {fd.sig.name!r} returns without a value", s.loc
                )


# ---------------------------------------------------------------------------
# contract / declaration consistency across the project
# ---------------------------------------------------------------------------

def _check_contract_types(prog: Program) -> None:
    for mod in prog.modules:
        cs = mod.contracts
        for fname, contracts in cs.func.items():
            has_seq = [c for c in contracts if c.kind == "sequence"]
            if len(has_seq) > 1:
                raise FrontendError(
                    f"function {fname!r} carries two sequence contracts",
                    has_seq[1].loc,
                )
            has_spec = [c for c in contracts if c.kind == "arrayspec"]
            seen_ptr: set[str] = set()
            for c in has_spec:
                ptr = c.expr.left.ident  # length(p) >= ... by construction
                if ptr in seen_ptr:
                    raise FrontendError(
                        f"duplicate arrayspec for parameter {ptr!r}", c.loc
                    )
                seen_ptr.add(ptr)
