"""Tokenizer for Mini-C source text.

Contract comments (`/// [[ kind: expr ]]`) are kept in the token stream so the
parser can attach them to the following declaration; plain `//` comments are
dropped.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import Loc


class FrontendError(Exception):
    """Syntax or contract error with a source position."""

    def __init__(self, message: str, loc: Loc):
        super().__init__(f"{loc}: {message}")
        self.message = message
        self.loc = loc


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    loc: Loc


KEYWORDS = {
    "int", "unsigned", "char", "float", "void", "enum", "struct",
    "if", "else", "while", "for", "switch", "case", "default",
    "break", "return",
}

# Longest-match-first token table.
TOKEN_SPEC = [
    ("CONTRACT", r"///[^\n]*"),
    ("COMMENT", r"//[^\n]*"),
    ("FLOAT", r"(?:\d+\.\d*|\d+(?=[eE]))(?:[eE][+-]?\d+)?[fF]?"),
    ("INT", r"\d+"),
    ("ID", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("OP", r"<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%<>=!(){}\[\];,.:&]"),
    ("NEWLINE", r"\n"),
    ("WS", r"[ \t\r]+"),
    ("BAD", r"."),
]

MASTER = re.compile("|".join(f"(?P<{k}>{p})" for k, p in TOKEN_SPEC))


def tokenize(text: str, filename: str) -> list[Token]:
    """Turn source text into a token list, ending with an EOF token."""
    tokens: list[Token] = []
    line = 1
    line_start = 0
    for m in MASTER.finditer(text):
        kind = m.lastgroup
        value = m.group()
        col = m.start() - line_start + 1
        loc = Loc(filename, line, col)
        if kind == "NEWLINE":
            line += 1
            line_start = m.end()
            continue
        if kind in ("WS", "COMMENT"):
            continue
        if kind == "BAD":
            raise FrontendError(f"unexpected character {value!r}", loc)
        if kind == "ID" and value in KEYWORDS:
            kind = "KW"
        tokens.append(Token(kind, value, loc))
    tokens.append(Token("EOF", "", Loc(filename, line, 1)))
    return tokens
