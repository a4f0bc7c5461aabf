"""Recursive-descent parser for Mini-C modules.

The module name is the source file's base name without extension.  Contract
comments bind to the immediately following declaration; a contract with no
following declaration is an error.
"""
from __future__ import annotations

import os

from .contracts import (
    Contract, ContractSet, FUNC_KINDS, KINDS, validate_contract_expr,
)
from .lexer import FrontendError, Token, tokenize
from .nodes import (
    ArrayType, Assign, AssertStmt, Binary, Block, Break, Call, Case, EnumDecl,
    EnumType, Expr, ExprStmt, FieldAccess, FLOAT, FloatLit, FloatType, For,
    FunctionDef, FunctionSig, GlobalAssert, GlobalDecl, If, INT, Index, IntLit,
    IntType, KnownFact, LengthOf, Loc, ModifyFullRange, Module, Name, Param,
    PointerType, Return, ReturnVal, Stmt, StructDecl, StructField, StructType,
    Switch, Type, UCHAR, UCharType, Unary, VarDecl, While, ZERO_FILL,
)

DIRECTIVE_NAMES = {
    "__modify_full_range", "__assert", "__known_fact", "__global_assert",
}

_TYPE_START = {"int", "unsigned", "char", "float", "enum", "struct"}


class Parser:
    def __init__(self, tokens: list[Token], contract_mode: bool = False):
        self.tokens = tokens
        self.pos = 0
        self.contract_mode = contract_mode

    # -- token helpers ------------------------------------------------------

    def cur(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        i = min(self.pos + k, len(self.tokens) - 1)
        return self.tokens[i]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at(self, kind: str, value: str | None = None) -> bool:
        t = self.cur()
        return t.kind == kind and (value is None or t.value == value)

    def expect(self, kind: str, value: str | None = None) -> Token:
        t = self.cur()
        if not self.at(kind, value):
            want = value if value is not None else kind
            raise FrontendError(f"expected {want!r}, found {t.value!r}", t.loc)
        return self.advance()

    # -- types --------------------------------------------------------------

    # type ::= 'int' | 'unsigned' 'char' | 'float' | 'enum' ID | 'struct' ID
    def parse_type(self) -> Type:
        t = self.cur()
        if self.at("KW", "int"):
            self.advance()
            return INT
        if self.at("KW", "unsigned"):
            self.advance()
            self.expect("KW", "char")
            return UCHAR
        if self.at("KW", "float"):
            self.advance()
            return FLOAT
        if self.at("KW", "enum"):
            self.advance()
            name = self.expect("ID").value
            return EnumType(name)
        if self.at("KW", "struct"):
            self.advance()
            name = self.expect("ID").value
            return StructType(name)
        raise FrontendError(f"expected a type, found {t.value!r}", t.loc)

    def at_type_start(self) -> bool:
        return self.cur().kind == "KW" and self.cur().value in _TYPE_START

    # -- expressions (precedence climbing) ----------------------------------

    # expression ::= logical_or
    def parse_expr(self) -> Expr:
        return self.parse_logical_or()

    # logical_or ::= logical_and ('||' logical_and)*
    def parse_logical_or(self) -> Expr:
        e = self.parse_logical_and()
        while self.at("OP", "||"):
            loc = self.advance().loc
            e = Binary("||", e, self.parse_logical_and(), loc)
        return e

    # logical_and ::= equality ('&&' equality)*
    def parse_logical_and(self) -> Expr:
        e = self.parse_equality()
        while self.at("OP", "&&"):
            loc = self.advance().loc
            e = Binary("&&", e, self.parse_equality(), loc)
        return e

    # equality ::= relational (('==' | '!=') relational)*
    def parse_equality(self) -> Expr:
        e = self.parse_relational()
        while self.cur().kind == "OP" and self.cur().value in ("==", "!="):
            op = self.advance()
            e = Binary(op.value, e, self.parse_relational(), op.loc)
        return e

    # relational ::= shift (('<' | '<=' | '>' | '>=') shift)*
    def parse_relational(self) -> Expr:
        e = self.parse_shift()
        while self.cur().kind == "OP" and self.cur().value in ("<", "<=", ">", ">="):
            op = self.advance()
            e = Binary(op.value, e, self.parse_shift(), op.loc)
        return e

    # shift ::= additive (('<<' | '>>') additive)*
    def parse_shift(self) -> Expr:
        e = self.parse_additive()
        while self.cur().kind == "OP" and self.cur().value in ("<<", ">>"):
            op = self.advance()
            e = Binary(op.value, e, self.parse_additive(), op.loc)
        return e

    # additive ::= multiplicative (('+' | '-') multiplicative)*
    def parse_additive(self) -> Expr:
        e = self.parse_multiplicative()
        while self.cur().kind == "OP" and self.cur().value in ("+", "-"):
            op = self.advance()
            e = Binary(op.value, e, self.parse_multiplicative(), op.loc)
        return e

    # multiplicative ::= unary (('*' | '/' | '%') unary)*
    def parse_multiplicative(self) -> Expr:
        e = self.parse_unary()
        while self.cur().kind == "OP" and self.cur().value in ("*", "/", "%"):
            op = self.advance()
            e = Binary(op.value, e, self.parse_unary(), op.loc)
        return e

    # unary ::= ('-' | '!') unary | postfix
    def parse_unary(self) -> Expr:
        if self.cur().kind == "OP" and self.cur().value in ("-", "!"):
            op = self.advance()
            return Unary(op.value, self.parse_unary(), op.loc)
        return self.parse_postfix()

    # postfix ::= primary ('[' expression ']' | '.' ID)*
    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while True:
            if self.at("OP", "["):
                loc = self.advance().loc
                idx = self.parse_expr()
                self.expect("OP", "]")
                if not isinstance(e, Name):
                    raise FrontendError("only named arrays can be indexed", loc)
                e = Index(e, idx, loc)
            elif self.at("OP", "."):
                loc = self.advance().loc
                fieldname = self.expect("ID").value
                if not isinstance(e, Name):
                    raise FrontendError(
                        "field access applies to named struct variables", loc
                    )
                e = FieldAccess(e, fieldname, loc)
            else:
                return e

    # primary ::= INT | FLOAT | ID | ID '(' args ')' | '(' expression ')'
    def parse_primary(self) -> Expr:
        t = self.cur()
        if t.kind == "INT":
            self.advance()
            return IntLit(int(t.value), t.loc)
        if t.kind == "FLOAT":
            self.advance()
            return FloatLit(float(t.value.rstrip("fF")), t.loc)
        if self.contract_mode and t.kind == "KW" and t.value == "return":
            self.advance()
            return ReturnVal(t.loc)
        if t.kind == "ID":
            self.advance()
            if self.at("OP", "("):
                self.advance()
                args: list[Expr] = []
                if not self.at("OP", ")"):
                    args.append(self.parse_expr())
                    while self.at("OP", ","):
                        self.advance()
                        args.append(self.parse_expr())
                self.expect("OP", ")")
                if self.contract_mode and t.value == "length":
                    if len(args) != 1 or not isinstance(args[0], Name):
                        raise FrontendError(
                            "length() takes exactly one pointer parameter name",
                            t.loc,
                        )
                    return LengthOf(args[0].ident, t.loc)
                return Call(t.value, tuple(args), t.loc)
            return Name(t.value, t.loc)
        if self.at("OP", "("):
            self.advance()
            e = self.parse_expr()
            self.expect("OP", ")")
            return e
        raise FrontendError(f"expected an expression, found {t.value!r}", t.loc)

    # -- statements ----------------------------------------------------------

    # block ::= '{' statement* '}'
    def parse_block(self) -> Block:
        open_tok = self.expect("OP", "{")
        stmts: list[Stmt] = []
        while not self.at("OP", "}"):
            stmts.append(self.parse_stmt())
        self.expect("OP", "}")
        return Block(tuple(stmts), open_tok.loc)

    def parse_stmt(self) -> Stmt:
        t = self.cur()
        if self.at("OP", "{"):
            return self.parse_block()
        if t.kind == "KW":
            if t.value == "if":
                return self.parse_if()
            if t.value == "while":
                return self.parse_while()
            if t.value == "for":
                return self.parse_for()
            if t.value == "switch":
                return self.parse_switch()
            if t.value == "return":
                self.advance()
                value = None if self.at("OP", ";") else self.parse_expr()
                self.expect("OP", ";")
                return Return(value, t.loc)
            if t.value == "break":
                self.advance()
                self.expect("OP", ";")
                return Break(t.loc)
            if t.value in _TYPE_START:
                return self.parse_local_decl()
        if t.kind == "ID" and t.value in DIRECTIVE_NAMES:
            return self.parse_directive()
        # assignment or expression statement
        e = self.parse_expr()
        if self.at("OP", "="):
            loc = self.advance().loc
            self._check_lvalue(e, loc)
            value = self.parse_expr()
            self.expect("OP", ";")
            return Assign(e, value, loc)
        self.expect("OP", ";")
        return ExprStmt(e, t.loc)

    @staticmethod
    def _check_lvalue(e: Expr, loc: Loc) -> None:
        if not isinstance(e, (Name, Index, FieldAccess)):
            raise FrontendError("assignment target must be a variable, "
                                "array cell or struct field", loc)

    # local_decl ::= type ID ('[' INT ']')? ('=' (expression | '{' '0' '}'))? ';'
    def parse_local_decl(self) -> VarDecl:
        ty = self.parse_type()
        name_tok = self.expect("ID")
        ty = self._parse_array_suffix(ty)
        init = self._parse_initializer(ty)
        self.expect("OP", ";")
        return VarDecl(name_tok.value, ty, init, name_tok.loc)

    def _parse_array_suffix(self, ty: Type) -> Type:
        if self.at("OP", "["):
            loc = self.advance().loc
            size_tok = self.expect("INT")
            size = int(size_tok.value)
            if size <= 0:
                raise FrontendError("array size must be positive", loc)
            self.expect("OP", "]")
            return ArrayType(ty, size)
        return ty

    def _parse_initializer(self, ty: Type):
        if not self.at("OP", "="):
            return None
        self.advance()
        if self.at("OP", "{"):
            loc = self.advance().loc
            self.expect("INT", "0")
            self.expect("OP", "}")
            if not isinstance(ty, ArrayType):
                raise FrontendError("{0} initializer applies to arrays", loc)
            return ZERO_FILL
        return self.parse_expr()

    # if_statement ::= 'if' '(' expression ')' block ('else' (if | block))?
    def parse_if(self) -> If:
        t = self.expect("KW", "if")
        self.expect("OP", "(")
        cond = self.parse_expr()
        self.expect("OP", ")")
        then = self._stmt_as_block()
        orelse = None
        if self.at("KW", "else"):
            self.advance()
            if self.at("KW", "if"):
                nested = self.parse_if()
                orelse = Block((nested,), nested.loc)
            else:
                orelse = self._stmt_as_block()
        return If(cond, then, orelse, t.loc)

    def _stmt_as_block(self) -> Block:
        if self.at("OP", "{"):
            return self.parse_block()
        s = self.parse_stmt()
        return Block((s,), _stmt_loc(s))

    # while_statement ::= 'while' '(' expression ')' block
    def parse_while(self) -> While:
        t = self.expect("KW", "while")
        self.expect("OP", "(")
        cond = self.parse_expr()
        self.expect("OP", ")")
        return While(cond, self._stmt_as_block(), t.loc)

    # for_statement ::= 'for' '(' assign? ';' expr? ';' assign? ')' block
    def parse_for(self) -> For:
        t = self.expect("KW", "for")
        self.expect("OP", "(")
        init = None if self.at("OP", ";") else self._parse_plain_assign()
        self.expect("OP", ";")
        cond = None if self.at("OP", ";") else self.parse_expr()
        self.expect("OP", ";")
        step = None if self.at("OP", ")") else self._parse_plain_assign()
        self.expect("OP", ")")
        return For(init, cond, step, self._stmt_as_block(), t.loc)

    def _parse_plain_assign(self) -> Assign:
        e = self.parse_expr()
        loc = self.expect("OP", "=").loc
        self._check_lvalue(e, loc)
        return Assign(e, self.parse_expr(), loc)

    # switch ::= 'switch' '(' expr ')' '{' case* default? '}'
    # case   ::= 'case' const ':' statement*
    def parse_switch(self) -> Switch:
        t = self.expect("KW", "switch")
        self.expect("OP", "(")
        subject = self.parse_expr()
        self.expect("OP", ")")
        self.expect("OP", "{")
        cases: list[Case] = []
        default: tuple[Stmt, ...] | None = None
        while not self.at("OP", "}"):
            if self.at("KW", "case"):
                ct = self.advance()
                value = self._parse_case_value()
                self.expect("OP", ":")
                cases.append(Case(value, self._parse_case_body(), ct.loc))
            elif self.at("KW", "default"):
                dt = self.advance()
                if default is not None:
                    raise FrontendError("duplicate default label", dt.loc)
                self.expect("OP", ":")
                default = self._parse_case_body()
            else:
                raise FrontendError(
                    f"expected 'case' or 'default', found {self.cur().value!r}",
                    self.cur().loc,
                )
        self.expect("OP", "}")
        return Switch(subject, tuple(cases), default, t.loc)

    def _parse_case_value(self) -> Expr:
        t = self.cur()
        if t.kind == "INT":
            self.advance()
            return IntLit(int(t.value), t.loc)
        if t.kind == "OP" and t.value == "-":
            self.advance()
            lit = self.expect("INT")
            return IntLit(-int(lit.value), t.loc)
        if t.kind == "ID":
            self.advance()
            return Name(t.value, t.loc)
        raise FrontendError("case label must be an integer or enum constant",
                            t.loc)

    def _parse_case_body(self) -> tuple[Stmt, ...]:
        body: list[Stmt] = []
        while not (self.at("OP", "}") or self.at("KW", "case")
                   or self.at("KW", "default")):
            body.append(self.parse_stmt())
        return tuple(body)

    # directive ::= '__modify_full_range' '(' lvalue ')' ';'
    #             | '__assert' '(' expression ')' ';'
    #             | '__known_fact' '(' expression ')' ';'
    #             | '__global_assert' '(' lvalue ',' expression ')' ';'
    def parse_directive(self) -> Stmt:
        t = self.advance()
        self.expect("OP", "(")
        if t.value == "__modify_full_range":
            target = self.parse_postfix()
            self._check_havoc_target(target, t.loc)
            self.expect("OP", ")")
            self.expect("OP", ";")
            return ModifyFullRange(target, t.loc)
        if t.value == "__global_assert":
            target = self.parse_postfix()
            self._check_havoc_target(target, t.loc)
            self.expect("OP", ",")
            cond = self.parse_expr()
            self.expect("OP", ")")
            self.expect("OP", ";")
            return GlobalAssert(target, cond, t.loc)
        cond = self.parse_expr()
        self.expect("OP", ")")
        self.expect("OP", ";")
        if t.value == "__assert":
            return AssertStmt(cond, t.loc)
        return KnownFact(cond, t.loc)

    @staticmethod
    def _check_havoc_target(e: Expr, loc: Loc) -> None:
        if not isinstance(e, (Name, FieldAccess)):
            raise FrontendError(
                "directive target must be a variable or struct field", loc
            )


# ---------------------------------------------------------------------------
# contract comments
# ---------------------------------------------------------------------------

def parse_contract_text(inner: str, loc: Loc, origin: str = "manual"):
    """Parse the `kind: body` text found between [[ and ]].

    Returns (kind, expr-or-None, seq_tag-or-None).
    """
    kind, colon, body = inner.partition(":")
    kind = kind.strip()
    body = body.strip()
    if not colon or kind not in KINDS:
        raise FrontendError(
            f"unknown contract kind {kind!r} (expected one of {', '.join(KINDS)})",
            loc,
        )
    if kind == "sequence":
        if body not in ("init", "cyclic"):
            raise FrontendError(
                f"unknown sequence tag {body!r} (expected init or cyclic)", loc
            )
        return kind, None, body
    toks = tokenize(body, loc.file)
    sub = Parser(toks, contract_mode=True)
    expr = sub.parse_expr()
    if not sub.at("EOF"):
        raise FrontendError(
            f"trailing tokens in contract expression: {sub.cur().value!r}", loc
        )
    validate_contract_expr(kind, expr, loc)
    return kind, expr, None


def _contract_from_comment(tok: Token) -> tuple | None:
    """Return (kind, expr, seq_tag, loc) for a `/// [[ ... ]]` comment."""
    text = tok.value[3:].strip()
    if not (text.startswith("[[") and text.endswith("]]")):
        return None  # plain documentation comment
    inner = text[2:-2].strip()
    kind, expr, seq_tag = parse_contract_text(inner, tok.loc)
    return kind, expr, seq_tag, tok.loc


# ---------------------------------------------------------------------------
# module parsing
# ---------------------------------------------------------------------------

class _ModuleParser(Parser):
    def __init__(self, tokens: list[Token], name: str, filename: str):
        super().__init__(tokens)
        self.module = Module(name=name, file=filename, decls=[],
                             contracts=ContractSet())
        self.pending: list[tuple] = []  # contracts awaiting a declaration

    def parse(self) -> Module:
        while not self.at("EOF"):
            if self.at("CONTRACT"):
                parsed = _contract_from_comment(self.advance())
                if parsed is not None:
                    self.pending.append(parsed)
                continue
            self.parse_topdecl()
        if self.pending:
            raise FrontendError("contract is not attached to any declaration",
                                self.pending[0][3])
        _validate_module(self.module)
        return self.module

    # topdecl ::= struct_decl | enum_decl | global_decl | function
    def parse_topdecl(self) -> None:
        if self.at("KW", "struct") and self.peek(2).value == "{":
            self.parse_struct_decl()
            return
        if self.at("KW", "enum") and self.peek(2).value == "{":
            self.parse_enum_decl()
            return
        if self.at("KW", "void"):
            self.parse_function(ret=None)
            return
        ty = self.parse_type()
        name_tok = self.expect("ID")
        if self.at("OP", "("):
            self.parse_function_rest(ty, name_tok)
            return
        full_ty = self._parse_array_suffix(ty)
        init = self._parse_initializer(full_ty)
        self.expect("OP", ";")
        decl = GlobalDecl(name_tok.value, full_ty, init, name_tok.loc)
        self.module.decls.append(decl)
        self._attach_pending(decl.name, is_function=False)

    # struct_decl ::= 'struct' ID '{' (contract* field)* '}' ';'
    def parse_struct_decl(self) -> None:
        self.expect("KW", "struct")
        name_tok = self.expect("ID")
        self.expect("OP", "{")
        self._attach_pending(name_tok.value, is_function=False, forbid=True)
        fields: list[StructField] = []
        while not self.at("OP", "}"):
            while self.at("CONTRACT"):
                parsed = _contract_from_comment(self.advance())
                if parsed is not None:
                    self.pending.append(parsed)
            fty = self.parse_type()
            if not isinstance(fty, (IntType, UCharType, FloatType, EnumType)):
                raise FrontendError("struct fields must be scalars",
                                    self.cur().loc)
            f_tok = self.expect("ID")
            self.expect("OP", ";")
            fields.append(StructField(f_tok.value, fty, f_tok.loc))
            self._attach_pending(f"{name_tok.value}.{f_tok.value}",
                                 is_function=False)
        self.expect("OP", "}")
        self.expect("OP", ";")
        if not fields:
            raise FrontendError("struct has no fields", name_tok.loc)
        self.module.decls.append(
            StructDecl(name_tok.value, tuple(fields), name_tok.loc)
        )

    # enum_decl ::= 'enum' ID '{' ID (',' ID)* '}' ';'
    def parse_enum_decl(self) -> None:
        self.expect("KW", "enum")
        name_tok = self.expect("ID")
        self.expect("OP", "{")
        members = [self.expect("ID").value]
        while self.at("OP", ","):
            self.advance()
            members.append(self.expect("ID").value)
        self.expect("OP", "}")
        self.expect("OP", ";")
        self._attach_pending(name_tok.value, is_function=False, forbid=True)
        self.module.decls.append(
            EnumDecl(name_tok.value, tuple(members), name_tok.loc)
        )

    def parse_function(self, ret: Type | None) -> None:
        if ret is None:
            self.expect("KW", "void")
        name_tok = self.expect("ID")
        self.parse_function_rest(ret, name_tok)

    # function ::= rettype ID '(' params ')' (';' | block)
    def parse_function_rest(self, ret: Type | None, name_tok: Token) -> None:
        self.expect("OP", "(")
        params: list[Param] = []
        if self.at("KW", "void") and self.peek().value == ")":
            self.advance()
        elif not self.at("OP", ")"):
            params.append(self._parse_param())
            while self.at("OP", ","):
                self.advance()
                params.append(self._parse_param())
        self.expect("OP", ")")
        sig = FunctionSig(name_tok.value, tuple(params), ret, name_tok.loc)
        if self.at("OP", ";"):
            self.advance()
            self.module.decls.append(sig)
        else:
            body = self.parse_block()
            self.module.decls.append(FunctionDef(sig, body, name_tok.loc))
        self._attach_pending(sig.name, is_function=True)

    # param ::= type '*'? ID
    def _parse_param(self) -> Param:
        ty = self.parse_type()
        if self.at("OP", "*"):
            self.advance()
            ty = PointerType(ty)
        t = self.expect("ID")
        return Param(t.value, ty, t.loc)

    def _attach_pending(self, subject: str, is_function: bool,
                        forbid: bool = False) -> None:
        if not self.pending:
            return
        if forbid:
            raise FrontendError(
                f"contracts cannot be attached to {subject!r}",
                self.pending[0][3],
            )
        for kind, expr, seq_tag, loc in self.pending:
            if is_function and kind not in FUNC_KINDS:
                raise FrontendError(
                    f"{kind} contracts attach to variables, not functions", loc
                )
            if not is_function and kind in FUNC_KINDS:
                raise FrontendError(
                    f"{kind} contracts attach to functions, not variables", loc
                )
            self.module.contracts.add(
                Contract(kind, subject, expr, seq_tag, "manual", loc)
            )
        self.pending = []


def _validate_module(mod: Module) -> None:
    """Duplicate-name and contract-reference checks local to one module."""
    seen: dict[str, Loc] = {}

    def claim(name: str, loc: Loc) -> None:
        if name in seen:
            raise FrontendError(
                f"duplicate symbol {name!r} (first declared at {seen[name]})",
                loc,
            )
        seen[name] = loc

    protos: dict[str, FunctionSig] = {}
    defs: dict[str, FunctionDef] = {}
    for d in mod.decls:
        if isinstance(d, GlobalDecl):
            claim(d.name, d.loc)
        elif isinstance(d, StructDecl):
            claim(f"struct {d.name}", d.loc)
        elif isinstance(d, EnumDecl):
            claim(f"enum {d.name}", d.loc)
            for m in d.members:
                claim(m, d.loc)
        elif isinstance(d, FunctionSig):
            if d.name in protos or d.name in defs:
                raise FrontendError(f"duplicate declaration of {d.name!r}",
                                    d.loc)
            protos[d.name] = d
        elif isinstance(d, FunctionDef):
            if d.sig.name in defs:
                raise FrontendError(
                    f"duplicate definition of {d.sig.name!r}", d.loc
                )
            if d.sig.name in protos and not _sig_compatible(protos[d.sig.name],
                                                            d.sig):
                raise FrontendError(
                    f"definition of {d.sig.name!r} conflicts with its "
                    f"prototype", d.loc,
                )
            defs[d.sig.name] = d
    for name in set(protos) | set(defs):
        claim(name, (defs.get(name) or protos[name]).loc)

    _validate_contract_refs(mod)


def _sig_compatible(a: FunctionSig, b: FunctionSig) -> bool:
    return (a.ret == b.ret
            and tuple(p.ty for p in a.params) == tuple(p.ty for p in b.params))


def _validate_contract_refs(mod: Module) -> None:
    cs: ContractSet = mod.contracts
    sigs = {**mod.prototypes(), **{n: f.sig for n, f in mod.functions().items()}}
    globals_ = mod.globals()
    enum_members = {m for e in mod.enums().values() for m in e.members}
    structs = mod.structs()

    for fname, contracts in cs.func.items():
        sig = sigs.get(fname)
        if sig is None:
            raise FrontendError(
                f"contract references undeclared function {fname!r}",
                contracts[0].loc,
            )
        params = {p.name: p for p in sig.params}
        for c in contracts:
            if c.kind == "sequence":
                continue
            for e in _contract_names(c.expr):
                if isinstance(e, LengthOf):
                    p = params.get(e.ident)
                    if p is None or not isinstance(p.ty, PointerType):
                        raise FrontendError(
                            f"length() in the contract for {fname!r} must name "
                            f"a pointer parameter", c.loc,
                        )
                elif isinstance(e, Name):
                    if (e.ident not in params and e.ident not in globals_
                            and e.ident not in enum_members):
                        raise FrontendError(
                            f"contract for {fname!r} references undeclared "
                            f"symbol {e.ident!r}", c.loc,
                        )

    for path, contracts in cs.var.items():
        if "." in path:
            sname, fieldname = path.split(".", 1)
            sd = structs.get(sname)
            if sd is None or fieldname not in {f.name for f in sd.fields}:
                raise FrontendError(
                    f"invariant references unknown struct field {path!r}",
                    contracts[0].loc,
                )
            allowed = {f.name for f in sd.fields} | set(globals_) | enum_members
        else:
            if path not in globals_:
                raise FrontendError(
                    f"invariant references undeclared global {path!r}",
                    contracts[0].loc,
                )
            allowed = set(globals_) | enum_members
        for c in contracts:
            for e in _contract_names(c.expr):
                if isinstance(e, Name) and e.ident not in allowed:
                    raise FrontendError(
                        f"invariant for {path!r} references undeclared symbol "
                        f"{e.ident!r}", c.loc,
                    )


def _contract_names(e: Expr | None):
    from .nodes import walk_exprs

    if e is None:
        return
    for sub in walk_exprs(e):
        if isinstance(sub, (Name, LengthOf)):
            yield sub


def module_name_for(path: str) -> str:
    base = os.path.basename(path)
    return base.rsplit(".", 1)[0] if "." in base else base


def parse_module(text: str, filename: str) -> Module:
    """Parse one Mini-C source file into a Module."""
    tokens = tokenize(text, filename)
    return _ModuleParser(tokens, module_name_for(filename), filename).parse()


def _stmt_loc(s: Stmt) -> Loc:
    return getattr(s, "loc")
