"""Mini-C frontend: lexer, parser, contract comments, printer, resolver."""
from __future__ import annotations

from .contracts import (
    Contract, ContractSet, format_expr, merge, validate_contract_expr,
)
from .lexer import FrontendError, Token, tokenize
from .nodes import (
    ARITH_OPS, ArrayType, Assign, AssertStmt, Binary, Block, Break, Call,
    Case, CMP_OPS, EnumDecl, EnumType, Expr, ExprStmt, ExternalRef,
    FieldAccess, FLOAT, FloatLit, FloatType, For, FunctionDef, FunctionSig,
    GlobalAssert, GlobalDecl, If, INT, Index, IntLit, IntType, KnownFact,
    LengthOf, Loc, LOGIC_OPS, ModifyFullRange, Module, Name, NOWHERE, Param,
    PointerType, Program, Return, ReturnVal, Stmt, StructDecl, StructField,
    StructType, Switch, Type, UCHAR, UCharType, Unary, VarDecl, While,
    ZERO_FILL, count_statements, walk_exprs, walk_stmts,
)
from .parser import parse_contract_text, parse_module
from .pretty import contract_line, print_block, print_module, print_stmt
from .resolve import resolve_project

__all__ = [
    "ARITH_OPS", "ArrayType", "Assign", "AssertStmt", "Binary", "Block",
    "Break", "CMP_OPS", "Call", "Case", "Contract", "ContractSet", "EnumDecl",
    "EnumType", "Expr", "ExprStmt", "ExternalRef", "FLOAT", "FieldAccess",
    "FloatLit", "FloatType", "For", "FrontendError", "FunctionDef",
    "FunctionSig", "GlobalAssert", "GlobalDecl", "INT", "If", "Index",
    "IntLit", "IntType", "KnownFact", "LOGIC_OPS", "LengthOf", "Loc",
    "ModifyFullRange", "Module", "NOWHERE", "Name", "Param", "PointerType",
    "Program", "Return", "ReturnVal", "Stmt", "StructDecl", "StructField",
    "StructType", "Switch", "Token", "Type", "UCHAR", "UCharType", "Unary",
    "VarDecl", "While", "ZERO_FILL", "contract_line", "count_statements",
    "format_expr", "merge", "parse_contract_text", "parse_module",
    "print_block", "print_module", "print_stmt", "resolve_project",
    "tokenize", "validate_contract_expr", "walk_exprs", "walk_stmts",
]
