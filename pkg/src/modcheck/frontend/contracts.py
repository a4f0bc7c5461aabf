"""Contract model: kinds, origins, the checkable expression fragment.

A contract is written as a comment line immediately before the declaration it
constrains::

    /// [[ requires: x >= 0.0 ]]
    /// [[ ensures: return >= 0.0 ]]
    float sqrt_approx(float x);

Kinds and what they may mention:

==========  ====================================================
requires    precondition over parameters and globals
ensures     postcondition; may mention ``return``
invariant   range constraint on a global variable or struct field
arrayspec   minimal pointed-to length: ``length(p) >= expr``
sequence    call-order tag, ``init`` or ``cyclic``
==========  ====================================================

The checkable fragment is a conjunction/disjunction of comparisons between
simple terms (variables, ``return``, ``length()``, numeric constants, and
``var + const`` / ``var - const``).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .lexer import FrontendError
from .nodes import (
    Binary, Call, Expr, FieldAccess, FloatLit, Index, IntLit, LengthOf, Loc,
    Name, ReturnVal, Unary,
)

KINDS = ("requires", "ensures", "invariant", "arrayspec", "sequence")
ORIGINS = ("manual", "interface", "inferred")

# Function-attached kinds vs variable-attached kinds.
FUNC_KINDS = ("requires", "ensures", "arrayspec", "sequence")
VAR_KINDS = ("invariant",)


@dataclass(frozen=True)
class Contract:
    kind: str
    subject: str  # function name, global name, or Struct.field path
    expr: Expr | None  # None only for sequence contracts
    seq_tag: str | None  # 'init' | 'cyclic', sequence contracts only
    origin: str
    loc: Loc

    @property
    def cid(self) -> str:
        """Stable identifier used for alarm attribution."""
        body = self.seq_tag if self.kind == "sequence" else format_expr(self.expr)
        return f"{self.subject}:{self.kind}:{body}"

    def text(self) -> str:
        """The canonical `kind: body` text between the [[ ]] brackets."""
        if self.kind == "sequence":
            return f"sequence: {self.seq_tag}"
        return f"{self.kind}: {format_expr(self.expr)}"

    def with_origin(self, origin: str) -> "Contract":
        return replace(self, origin=origin)


@dataclass
class ContractSet:
    """Contracts grouped by attachment point.

    ``func`` maps a function name to its contracts; ``var`` maps a global
    variable name or ``Struct.field`` path to its invariants.
    """

    func: dict[str, list[Contract]] = field(default_factory=dict)
    var: dict[str, list[Contract]] = field(default_factory=dict)

    def add(self, c: Contract) -> None:
        table = self.func if c.kind in FUNC_KINDS else self.var
        table.setdefault(c.subject, []).append(c)

    def for_function(self, name: str, kind: str | None = None) -> list[Contract]:
        out = self.func.get(name, [])
        if kind is None:
            return list(out)
        return [c for c in out if c.kind == kind]

    def for_var(self, path: str) -> list[Contract]:
        return list(self.var.get(path, []))

    def all_contracts(self) -> list[Contract]:
        out: list[Contract] = []
        for key in sorted(self.func):
            out.extend(self.func[key])
        for key in sorted(self.var):
            out.extend(self.var[key])
        return out

    def sequence_tag(self, fn: str) -> str | None:
        for c in self.func.get(fn, []):
            if c.kind == "sequence":
                return c.seq_tag
        return None

    def is_empty(self) -> bool:
        return not self.func and not self.var

    def canonical(self) -> tuple:
        """Deterministic fingerprint used for fixpoint convergence checks."""
        return tuple(
            (c.kind, c.subject, c.text())
            for c in self.all_contracts()
        )

    def copy(self) -> "ContractSet":
        out = ContractSet()
        for c in self.all_contracts():
            out.add(c)
        return out


def merge(base: ContractSet, extra: ContractSet) -> ContractSet:
    """Left-biased contract union.

    A contract from ``extra`` is added only when ``base`` holds no contract of
    the same kind constraining the same subject path; ``base`` entries always
    survive unchanged.  The subject path of a requires contract includes the
    parameter(s) it mentions, so a manual ``requires`` on ``f.x`` blocks an
    inferred one on ``f.x`` but not one on ``f.y``.
    """
    out = base.copy()
    claimed: set[tuple[str, str, str]] = set()
    for c in base.all_contracts():
        for path in subject_paths(c):
            claimed.add((c.kind, c.subject, path))
    for c in extra.all_contracts():
        keys = {(c.kind, c.subject, p) for p in subject_paths(c)}
        if keys & claimed:
            continue
        out.add(c)
        claimed |= keys
    return out


def subject_paths(c: Contract) -> set[str]:
    """The variable paths a contract constrains, for merge conflict checks."""
    if c.kind == "sequence":
        return {"<sequence>"}
    if c.kind == "ensures":
        paths = {"return"}
    else:
        paths = set()
    if c.expr is not None:
        paths |= _mentioned_paths(c.expr)
    return paths or {"<const>"}


def _mentioned_paths(e: Expr) -> set[str]:
    if isinstance(e, Name):
        return {e.ident}
    if isinstance(e, FieldAccess):
        return {f"{e.base.ident}.{e.fieldname}"}
    if isinstance(e, LengthOf):
        return {f"length({e.ident})"}
    if isinstance(e, ReturnVal):
        return {"return"}
    if isinstance(e, Unary):
        return _mentioned_paths(e.operand)
    if isinstance(e, Binary):
        return _mentioned_paths(e.left) | _mentioned_paths(e.right)
    return set()


# ---------------------------------------------------------------------------
# checkable fragment validation
# ---------------------------------------------------------------------------

_CMP = ("<", "<=", ">", ">=", "==", "!=")


def _is_simple_term(e: Expr, kind: str) -> bool:
    if isinstance(e, (IntLit, FloatLit)):
        return True
    if isinstance(e, Unary) and e.op == "-" and isinstance(e.operand, (IntLit, FloatLit)):
        return True
    if isinstance(e, (Name, FieldAccess)):
        return True
    if isinstance(e, ReturnVal):
        return kind == "ensures"
    if isinstance(e, LengthOf):
        return kind == "arrayspec"
    if isinstance(e, Binary) and e.op in ("+", "-"):
        base_ok = isinstance(e.left, (Name, FieldAccess))
        const_ok = isinstance(e.right, IntLit) or (
            isinstance(e.right, Unary)
            and e.right.op == "-"
            and isinstance(e.right.operand, IntLit)
        )
        return base_ok and const_ok
    return False


def validate_contract_expr(kind: str, e: Expr, loc: Loc) -> None:
    """Reject expressions outside the checkable fragment."""
    if isinstance(e, Binary) and e.op in ("&&", "||"):
        validate_contract_expr(kind, e.left, loc)
        validate_contract_expr(kind, e.right, loc)
        return
    if isinstance(e, Binary) and e.op in _CMP:
        for side in (e.left, e.right):
            if not _is_simple_term(side, kind):
                raise FrontendError(
                    f"contract expression outside the checkable fragment: "
                    f"comparison side must be a variable, constant or "
                    f"var+const term in a {kind} contract",
                    loc,
                )
        if kind == "arrayspec":
            if not (e.op == ">=" and isinstance(e.left, LengthOf)):
                raise FrontendError(
                    "arrayspec contracts must have the form "
                    "length(p) >= expr",
                    loc,
                )
        return
    raise FrontendError(
        "contract expression outside the checkable fragment: expected a "
        "conjunction/disjunction of comparisons",
        loc,
    )


# ---------------------------------------------------------------------------
# canonical expression text (shared with the pretty-printer)
# ---------------------------------------------------------------------------

_PREC = {
    "||": 1, "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "<<": 5, ">>": 5,
    "+": 6, "-": 6,
    "*": 7, "/": 7, "%": 7,
}
_UNARY_PREC = 8


def format_float(v: float) -> str:
    return repr(v)


def format_expr(e: Expr | None, parent_prec: int = 0) -> str:
    if e is None:
        return ""
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, FloatLit):
        return format_float(e.value)
    if isinstance(e, Name):
        return e.ident
    if isinstance(e, ReturnVal):
        return "return"
    if isinstance(e, LengthOf):
        return f"length({e.ident})"
    if isinstance(e, Index):
        return f"{format_expr(e.base)}[{format_expr(e.index)}]"
    if isinstance(e, FieldAccess):
        return f"{e.base.ident}.{e.fieldname}"
    if isinstance(e, Call):
        args = ", ".join(format_expr(a) for a in e.args)
        return f"{e.callee}({args})"
    if isinstance(e, Unary):
        inner = format_expr(e.operand, _UNARY_PREC)
        text = f"{e.op}{inner}"
        return text if _UNARY_PREC >= parent_prec else f"({text})"
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        left = format_expr(e.left, prec)
        # Right side gets prec+1 so that left-associative chains reparse
        # identically: a - b - c prints without parens, a - (b - c) keeps them.
        right = format_expr(e.right, prec + 1)
        text = f"{left} {e.op} {right}"
        return text if prec >= parent_prec else f"({text})"
    raise TypeError(f"cannot format {e!r}")
