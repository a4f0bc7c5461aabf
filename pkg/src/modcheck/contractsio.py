"""Detached contract files.

Contracts normally live next to the declaration they describe, inside
``/// [[ ... ]]`` comments in the module source.  A detached ``.contracts``
file carries the same bracket syntax but names its subject explicitly, so
contracts can be reviewed, versioned, and fed to the analyzer without
touching the sources:

    function scale
    /// [[ requires: v >= 0 && v <= 100 ]]
    /// [[ ensures: return >= 0 ]]

    var mode
    /// [[ invariant: mode <= 3 ]]

Subject headers are ``function <name>`` or ``var <path>`` where a path is a
global name, ``global.field``, or ``Struct.field``.  Blank lines and ``//``
comments are ignored.  Export is deterministic: subjects sorted, contracts
within a subject ordered by kind then text.
"""

from __future__ import annotations

from pathlib import Path

from .frontend.contracts import (
    KINDS,
    VAR_KINDS,
    Contract,
    ContractSet,
)
from .frontend.lexer import FrontendError
from .frontend.nodes import Loc
from .frontend.parser import parse_contract_text

_BRACKET_OPEN = "/// [["
_BRACKET_CLOSE = "]]"


def contracts_to_text(cs: ContractSet) -> str:
    """Render a contract set as deterministic ``.contracts`` file text."""
    lines: list[str] = []

    def emit(header: str, items: list[Contract]) -> None:
        lines.append(header)
        for c in sorted(items, key=lambda c: (KINDS.index(c.kind), c.text())):
            lines.append(f"/// [[ {c.text()} ]]")
        lines.append("")

    for name in sorted(cs.func):
        emit(f"function {name}", cs.func[name])
    for path in sorted(cs.var):
        emit(f"var {path}", cs.var[path])
    return "\n".join(lines)


def parse_contracts_text(text: str, file: str = "<contracts>",
                         origin: str = "manual") -> ContractSet:
    out = ContractSet()
    subject: str | None = None
    is_function = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        loc = Loc(file, lineno, 1)
        if not line:
            continue
        if line.startswith(_BRACKET_OPEN):
            if not line.endswith(_BRACKET_CLOSE):
                raise FrontendError("unterminated contract bracket", loc)
            if subject is None:
                raise FrontendError(
                    "contract appears before any 'function' or 'var' header", loc)
            inner = line[len(_BRACKET_OPEN):-len(_BRACKET_CLOSE)].strip()
            kind, expr, seq_tag = parse_contract_text(inner, loc, origin)
            if is_function and kind in VAR_KINDS:
                raise FrontendError(
                    f"{kind} contracts attach to variables, not functions", loc)
            if not is_function and kind not in VAR_KINDS:
                raise FrontendError(
                    f"{kind} contracts attach to functions, not variables", loc)
            out.add(Contract(kind, subject, expr, seq_tag, origin, loc))
            continue
        if line.startswith("//"):
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head in ("function", "var") and rest and " " not in rest:
            subject = rest
            is_function = head == "function"
            continue
        raise FrontendError(f"cannot parse contracts line: {line!r}", loc)
    return out


def load_contracts(path: str | Path, origin: str = "manual") -> ContractSet:
    p = Path(path)
    return parse_contracts_text(p.read_text(encoding="utf-8"), str(p), origin)


def save_contracts(cs: ContractSet, path: str | Path) -> None:
    Path(path).write_text(contracts_to_text(cs), encoding="utf-8")
