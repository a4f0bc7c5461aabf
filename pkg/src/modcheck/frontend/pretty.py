"""Canonical Mini-C printer.

print_module(parse_module(text)) parses back to a structurally equal module;
the analyzer relies on this for emitted harness sources and .contracts files.
"""
from __future__ import annotations

from .contracts import Contract, ContractSet, format_expr
from .nodes import (
    ArrayType, Assign, AssertStmt, Block, Break, Case, EnumDecl, Expr,
    ExprStmt, FieldAccess, For, FunctionDef, FunctionSig, GlobalAssert,
    GlobalDecl, If, Index, IntLit, KnownFact, ModifyFullRange, Module, Name,
    Param, PointerType, Return, Stmt, StructDecl, Switch, Type, VarDecl,
    While, ZERO_FILL, type_name,
)

INDENT = "    "


def type_text(ty: Type | None) -> str:
    return type_name(ty)


def contract_line(c: Contract, indent: str = "") -> str:
    return f"{indent}/// [[ {c.text()} ]]"


def _decl_text(name: str, ty: Type) -> str:
    if isinstance(ty, ArrayType):
        return f"{type_text(ty.elem)} {name}[{ty.size}]"
    if isinstance(ty, PointerType):
        return f"{type_text(ty.elem)} *{name}"
    return f"{type_text(ty)} {name}"


def print_stmt(s: Stmt, indent: str = "") -> str:
    if isinstance(s, Block):
        return print_block(s, indent)
    if isinstance(s, VarDecl):
        base = indent + _decl_text(s.name, s.ty)
        if s.init is ZERO_FILL:
            return base + " = {0};"
        if s.init is not None:
            return f"{base} = {format_expr(s.init)};"
        return base + ";"
    if isinstance(s, Assign):
        return f"{indent}{format_expr(s.target)} = {format_expr(s.value)};"
    if isinstance(s, If):
        out = (f"{indent}if ({format_expr(s.cond)}) "
               + print_block(s.then, indent).lstrip())
        if s.orelse is not None:
            if _is_elif(s.orelse):
                nested = print_stmt(s.orelse.stmts[0], indent).lstrip()
                out += f" else {nested}"
            else:
                out += " else " + print_block(s.orelse, indent).lstrip()
        return out
    if isinstance(s, While):
        return (f"{indent}while ({format_expr(s.cond)}) "
                + print_block(s.body, indent).lstrip())
    if isinstance(s, For):
        init = _assign_text(s.init)
        cond = format_expr(s.cond) if s.cond is not None else ""
        step = _assign_text(s.step)
        return (f"{indent}for ({init}; {cond}; {step}) "
                + print_block(s.body, indent).lstrip())
    if isinstance(s, Switch):
        lines = [f"{indent}switch ({format_expr(s.subject)}) {{"]
        for case in s.cases:
            lines.append(f"{indent}case {format_expr(case.value)}:")
            for sub in case.body:
                lines.append(print_stmt(sub, indent + INDENT))
        if s.default is not None:
            lines.append(f"{indent}default:")
            for sub in s.default:
                lines.append(print_stmt(sub, indent + INDENT))
        lines.append(indent + "}")
        return "\n".join(lines)
    if isinstance(s, Return):
        if s.value is None:
            return indent + "return;"
        return f"{indent}return {format_expr(s.value)};"
    if isinstance(s, Break):
        return indent + "break;"
    if isinstance(s, ExprStmt):
        return f"{indent}{format_expr(s.expr)};"
    if isinstance(s, ModifyFullRange):
        return f"{indent}__modify_full_range({format_expr(s.target)});"
    if isinstance(s, AssertStmt):
        return f"{indent}__assert({format_expr(s.cond)});"
    if isinstance(s, KnownFact):
        return f"{indent}__known_fact({format_expr(s.cond)});"
    if isinstance(s, GlobalAssert):
        return (f"{indent}__global_assert({format_expr(s.target)}, "
                f"{format_expr(s.cond)});")
    raise TypeError(f"cannot print statement {s!r}")


def _is_elif(orelse: Block) -> bool:
    return len(orelse.stmts) == 1 and isinstance(orelse.stmts[0], If)


def _assign_text(a: Assign | None) -> str:
    if a is None:
        return ""
    return f"{format_expr(a.target)} = {format_expr(a.value)}"


def print_block(b: Block, indent: str = "") -> str:
    lines = [indent + "{"]
    for s in b.stmts:
        lines.append(print_stmt(s, indent + INDENT))
    lines.append(indent + "}")
    return "\n".join(lines)


def _sig_text(sig: FunctionSig) -> str:
    ret = type_text(sig.ret) if sig.ret is not None else "void"
    if not sig.params:
        params = "void"
    else:
        params = ", ".join(_decl_text(p.name, p.ty) for p in sig.params)
    return f"{ret} {sig.name}({params})"


def print_module(mod: Module) -> str:
    cs: ContractSet = mod.contracts
    chunks: list[str] = []
    emitted_fn: set[str] = set()  # proto + def pairs share one contract block
    for d in mod.decls:
        lines: list[str] = []
        if isinstance(d, StructDecl):
            lines.append(f"struct {d.name} {{")
            for f in d.fields:
                for c in cs.for_var(f"{d.name}.{f.name}"):
                    lines.append(contract_line(c, INDENT))
                lines.append(f"{INDENT}{type_text(f.ty)} {f.name};")
            lines.append("};")
        elif isinstance(d, EnumDecl):
            lines.append(f"enum {d.name} {{ " + ", ".join(d.members) + " };")
        elif isinstance(d, GlobalDecl):
            for c in cs.for_var(d.name):
                lines.append(contract_line(c))
            base = _decl_text(d.name, d.ty)
            if d.init is ZERO_FILL:
                lines.append(base + " = {0};")
            elif d.init is not None:
                lines.append(f"{base} = {format_expr(d.init)};")
            else:
                lines.append(base + ";")
        elif isinstance(d, FunctionSig):
            if d.name not in emitted_fn:
                emitted_fn.add(d.name)
                for c in cs.for_function(d.name):
                    lines.append(contract_line(c))
            lines.append(_sig_text(d) + ";")
        elif isinstance(d, FunctionDef):
            if d.sig.name not in emitted_fn:
                emitted_fn.add(d.sig.name)
                for c in cs.for_function(d.sig.name):
                    lines.append(contract_line(c))
            lines.append(_sig_text(d.sig) + " "
                         + print_block(d.body).lstrip())
        else:
            raise TypeError(f"cannot print declaration {d!r}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"
