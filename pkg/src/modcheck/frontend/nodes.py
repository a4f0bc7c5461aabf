"""AST node and type definitions for the Mini-C language.

Mini-C is a deliberately small C subset: scalar types (``int``, ``unsigned
char``, ``float``), bounded enums, structs of scalar fields, fixed-size arrays
of scalars, and pointer-to-array in parameter position only.  Statements cover
declarations, assignment, ``if``/``else``, ``while``, ``for``,
``switch``/``case``/``break``, ``return``, and calls; expressions cover the
arithmetic, shift, comparison and logical operators plus array indexing and
struct field access.

Verification directives are first-class statements so that generated harness
text stays parseable by the same grammar:

    __modify_full_range(x);
    __assert(x >= 0);
    __known_fact(x > 0);
    __global_assert(v, v <= 8);
"""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Loc:
    """Source position of a token or node."""

    file: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}"


NOWHERE = Loc("<builtin>", 0, 0)


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

class Type:
    """Base class for Mini-C types."""


@dataclass(frozen=True)
class IntType(Type):
    """Signed int; the bit width comes from the analysis configuration."""


@dataclass(frozen=True)
class UCharType(Type):
    """unsigned char, always 8 bits wide."""


@dataclass(frozen=True)
class FloatType(Type):
    """Bounded float; values stay within +/- 3.4028e38 and NaN is excluded."""


@dataclass(frozen=True)
class EnumType(Type):
    name: str


@dataclass(frozen=True)
class StructType(Type):
    name: str


@dataclass(frozen=True)
class ArrayType(Type):
    elem: Type
    size: int


@dataclass(frozen=True)
class PointerType(Type):
    """Pointer to an array of `elem`; legal in parameter position only."""

    elem: Type


INT = IntType()
UCHAR = UCharType()
FLOAT = FloatType()


def type_name(ty: Type | None) -> str:
    if ty is None:
        return "void"
    if isinstance(ty, IntType):
        return "int"
    if isinstance(ty, UCharType):
        return "unsigned char"
    if isinstance(ty, FloatType):
        return "float"
    if isinstance(ty, EnumType):
        return f"enum {ty.name}"
    if isinstance(ty, StructType):
        return f"struct {ty.name}"
    if isinstance(ty, ArrayType):
        return f"{type_name(ty.elem)}[{ty.size}]"
    if isinstance(ty, PointerType):
        return f"{type_name(ty.elem)} *"
    raise TypeError(f"unknown type {ty!r}")


def is_scalar(ty: Type | None) -> bool:
    return isinstance(ty, (IntType, UCharType, FloatType, EnumType))


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    loc: Loc


@dataclass(frozen=True)
class FloatLit(Expr):
    value: float
    loc: Loc


@dataclass(frozen=True)
class Name(Expr):
    ident: str
    loc: Loc


@dataclass(frozen=True)
class Index(Expr):
    """base[index]; base names an array variable or pointer parameter."""

    base: Name
    index: Expr
    loc: Loc


@dataclass(frozen=True)
class FieldAccess(Expr):
    base: Name
    fieldname: str
    loc: Loc


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # '-' or '!'
    operand: Expr
    loc: Loc


@dataclass(frozen=True)
class Binary(Expr):
    op: str  # + - * / % << >> < <= > >= == != && ||
    left: Expr
    right: Expr
    loc: Loc


@dataclass(frozen=True)
class Call(Expr):
    callee: str
    args: tuple[Expr, ...]
    loc: Loc


@dataclass(frozen=True)
class LengthOf(Expr):
    """length(p) — legal only inside arrayspec contracts."""

    ident: str
    loc: Loc


@dataclass(frozen=True)
class ReturnVal(Expr):
    """The callee's return value — legal only inside ensures contracts."""

    loc: Loc


ARITH_OPS = ("+", "-", "*", "/", "%", "<<", ">>")
CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGIC_OPS = ("&&", "||")


# ---------------------------------------------------------------------------
# statements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Stmt:
    pass


ZERO_FILL = "zero-fill"  # marker for `= {0}` array initializers


@dataclass(frozen=True)
class VarDecl(Stmt):
    name: str
    ty: Type
    init: Expr | str | None  # expression, ZERO_FILL, or None
    loc: Loc


@dataclass(frozen=True)
class Assign(Stmt):
    target: Expr  # Name, Index or FieldAccess
    value: Expr
    loc: Loc


@dataclass(frozen=True)
class Block(Stmt):
    stmts: tuple[Stmt, ...]
    loc: Loc


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Block
    orelse: Block | None
    loc: Loc


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: Block
    loc: Loc


@dataclass(frozen=True)
class For(Stmt):
    init: Assign | None
    cond: Expr | None
    step: Assign | None
    body: Block
    loc: Loc


@dataclass(frozen=True)
class Case:
    value: Expr  # integer literal, negated literal, or enum constant
    body: tuple[Stmt, ...]
    loc: Loc


@dataclass(frozen=True)
class Switch(Stmt):
    subject: Expr
    cases: tuple[Case, ...]
    default: tuple[Stmt, ...] | None
    loc: Loc


@dataclass(frozen=True)
class Return(Stmt):
    value: Expr | None
    loc: Loc


@dataclass(frozen=True)
class Break(Stmt):
    loc: Loc


@dataclass(frozen=True)
class ExprStmt(Stmt):
    expr: Expr
    loc: Loc


# directive statements ------------------------------------------------------

@dataclass(frozen=True)
class ModifyFullRange(Stmt):
    target: Expr  # Name or FieldAccess
    loc: Loc


@dataclass(frozen=True)
class AssertStmt(Stmt):
    cond: Expr
    loc: Loc
    contract_id: str | None = None


@dataclass(frozen=True)
class KnownFact(Stmt):
    cond: Expr
    loc: Loc
    contract_id: str | None = None


@dataclass(frozen=True)
class GlobalAssert(Stmt):
    target: Expr  # Name or FieldAccess
    cond: Expr
    loc: Loc
    contract_id: str | None = None


# ---------------------------------------------------------------------------
# declarations / module / program
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Param:
    name: str
    ty: Type
    loc: Loc


@dataclass(frozen=True)
class FunctionSig:
    name: str
    params: tuple[Param, ...]
    ret: Type | None  # None == void
    loc: Loc


@dataclass(frozen=True)
class FunctionDef:
    sig: FunctionSig
    body: Block
    loc: Loc


@dataclass(frozen=True)
class GlobalDecl:
    name: str
    ty: Type
    init: Expr | str | None
    loc: Loc


@dataclass(frozen=True)
class StructField:
    name: str
    ty: Type
    loc: Loc


@dataclass(frozen=True)
class StructDecl:
    name: str
    fields: tuple[StructField, ...]
    loc: Loc


@dataclass(frozen=True)
class EnumDecl:
    name: str
    members: tuple[str, ...]
    loc: Loc


TopDecl = "StructDecl | EnumDecl | GlobalDecl | FunctionSig | FunctionDef"


@dataclass
class Module:
    """One parsed Mini-C translation unit plus its source-level contracts."""

    name: str
    file: str
    decls: list  # top-level declarations in source order
    contracts: "object"  # ContractSet; typed loosely to avoid a cycle

    def structs(self) -> dict[str, StructDecl]:
        return {d.name: d for d in self.decls if isinstance(d, StructDecl)}

    def enums(self) -> dict[str, EnumDecl]:
        return {d.name: d for d in self.decls if isinstance(d, EnumDecl)}

    def globals(self) -> dict[str, GlobalDecl]:
        return {d.name: d for d in self.decls if isinstance(d, GlobalDecl)}

    def functions(self) -> dict[str, FunctionDef]:
        return {d.sig.name: d for d in self.decls if isinstance(d, FunctionDef)}

    def prototypes(self) -> dict[str, FunctionSig]:
        return {d.name: d for d in self.decls if isinstance(d, FunctionSig)}


@dataclass
class ExternalRef:
    """A function used by a module but not defined in it."""

    sig: FunctionSig | None  # None when the origin is unknown
    origin: str  # 'prototype' | 'other-module' | 'unknown'
    call_locs: list[Loc] = field(default_factory=list)


@dataclass
class Program:
    """A resolved project: modules plus cross-module symbol tables."""

    modules: list[Module]
    functions: dict[str, tuple[str, FunctionDef]] = field(default_factory=dict)
    globals: dict[str, GlobalDecl] = field(default_factory=dict)
    structs: dict[str, StructDecl] = field(default_factory=dict)
    enums: dict[str, EnumDecl] = field(default_factory=dict)
    enum_consts: dict[str, tuple[int, str]] = field(default_factory=dict)
    externals: dict[str, dict[str, ExternalRef]] = field(default_factory=dict)
    entry: str | None = None
    zero_init_globals: bool = True
    manual_contracts: "ContractSet | None" = None

    def module_named(self, name: str) -> Module:
        for m in self.modules:
            if m.name == name:
                return m
        raise KeyError(name)


def walk_stmts(stmt: Stmt):
    """Yield every statement node reachable from `stmt`, including itself."""
    yield stmt
    if isinstance(stmt, Block):
        for s in stmt.stmts:
            yield from walk_stmts(s)
    elif isinstance(stmt, If):
        yield from walk_stmts(stmt.then)
        if stmt.orelse is not None:
            yield from walk_stmts(stmt.orelse)
    elif isinstance(stmt, While):
        yield from walk_stmts(stmt.body)
    elif isinstance(stmt, For):
        if stmt.init is not None:
            yield from walk_stmts(stmt.init)
        if stmt.step is not None:
            yield from walk_stmts(stmt.step)
        yield from walk_stmts(stmt.body)
    elif isinstance(stmt, Switch):
        for case in stmt.cases:
            for s in case.body:
                yield from walk_stmts(s)
        if stmt.default is not None:
            for s in stmt.default:
                yield from walk_stmts(s)


def count_statements(fn: FunctionDef) -> int:
    """Number of coverage-relevant statements in a function body.

    Block wrappers are structural and do not count.
    """
    return sum(
        1 for s in walk_stmts(fn.body) if not isinstance(s, Block)
    )


def walk_exprs(expr: Expr):
    yield expr
    if isinstance(expr, Index):
        yield from walk_exprs(expr.base)
        yield from walk_exprs(expr.index)
    elif isinstance(expr, FieldAccess):
        yield from walk_exprs(expr.base)
    elif isinstance(expr, Unary):
        yield from walk_exprs(expr.operand)
    elif isinstance(expr, Binary):
        yield from walk_exprs(expr.left)
        yield from walk_exprs(expr.right)
    elif isinstance(expr, Call):
        for a in expr.args:
            yield from walk_exprs(a)
