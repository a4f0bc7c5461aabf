"""Value-range import from XML interface descriptions.

Embedded projects often carry machine-readable interface descriptions in
which every exchanged quantity declares its physical limits.  Those limits
are contracts in all but name, so this module turns a small XML dialect of
such descriptions into requires/ensures/invariant/arrayspec contracts with
origin ``interface``.

The dialect:

    <INTERFACE>
      <DATA-CONSTR>
        <SHORT-NAME>RangeX</SHORT-NAME>
        <PHYS-CONSTRS>
          <LOWER-LIMIT INTERVAL-TYPE="CLOSED">0.0</LOWER-LIMIT>
          <UPPER-LIMIT INTERVAL-TYPE="CLOSED">32000.0</UPPER-LIMIT>
        </PHYS-CONSTRS>
      </DATA-CONSTR>
      <BINDING>
        <CONSTR>RangeX</CONSTR>
        <SYMBOL>f.x</SYMBOL>
        <ROLE>param</ROLE>
      </BINDING>
    </INTERFACE>

A ``DATA-CONSTR`` only defines a named range; ``BINDING`` elements attach it
to program symbols.  Roles: ``param`` binds to ``function.parameter`` and
becomes a requires contract (or, with a ``LENGTH`` child on a pointer
parameter, an arrayspec); ``return`` binds to a function name and becomes an
ensures on ``return``; ``global`` binds to a global name or ``global.field``
path and becomes an invariant.  CLOSED limits compare inclusively, OPEN
limits strictly.  Limit literals are preserved exactly as written, so an
imported ``0.0`` stays ``0.0`` in the produced contract text.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from .frontend.contracts import Contract, ContractSet
from .frontend.nodes import (
    ArrayType,
    Loc,
    Module,
    PointerType,
    StructType,
)
from .frontend.parser import parse_contract_text

ROLES = ("param", "return", "global")


class IfaceError(Exception):
    pass


@dataclass(frozen=True)
class Limit:
    """One bound: the literal text as written plus its parsed value."""

    text: str
    value: float
    closed: bool


@dataclass(frozen=True)
class Binding:
    constr: str
    symbol: str
    role: str
    length: int | None
    loc: Loc


@dataclass
class RangeConstraint:
    name: str
    lower: Limit
    upper: Limit
    bindings: list[Binding] = field(default_factory=list)
    loc: Loc = Loc("<interface>", 0, 0)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _text_of(elem: ET.Element | None) -> str:
    return (elem.text or "").strip() if elem is not None else ""


def _parse_limit(elem: ET.Element | None, what: str, cname: str) -> Limit:
    if elem is None:
        raise IfaceError(f"constraint {cname!r} is missing its {what}")
    text = _text_of(elem)
    try:
        value = float(text)
    except ValueError:
        raise IfaceError(f"constraint {cname!r} has a malformed {what}: {text!r}")
    itype = elem.get("INTERVAL-TYPE", "CLOSED")
    if itype not in ("CLOSED", "OPEN"):
        raise IfaceError(f"constraint {cname!r}: unknown INTERVAL-TYPE {itype!r}")
    return Limit(text=text, value=value, closed=itype == "CLOSED")


def parse_interface(xml_text: str, file: str = "<interface>") -> list[RangeConstraint]:
    """Parse interface XML into bound range constraints, in document order."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as e:
        raise IfaceError(f"malformed interface XML: {e}") from None

    constraints: list[RangeConstraint] = []
    by_name: dict[str, RangeConstraint] = {}
    loc = Loc(file, 0, 0)

    for dc in root.iter("DATA-CONSTR"):
        name = _text_of(dc.find("SHORT-NAME"))
        if not name:
            raise IfaceError("DATA-CONSTR without a SHORT-NAME")
        phys = dc.find("PHYS-CONSTRS")
        if phys is None:
            continue  # no limits, nothing to import
        lower = _parse_limit(phys.find("LOWER-LIMIT"), "LOWER-LIMIT", name)
        upper = _parse_limit(phys.find("UPPER-LIMIT"), "UPPER-LIMIT", name)
        if lower.value > upper.value:
            raise IfaceError(
                f"constraint {name!r}: lower limit {lower.text} exceeds "
                f"upper limit {upper.text}")
        if name in by_name:
            raise IfaceError(f"duplicate constraint name {name!r}")
        rc = RangeConstraint(name=name, lower=lower, upper=upper, loc=loc)
        constraints.append(rc)
        by_name[name] = rc

    for b in root.iter("BINDING"):
        cname = _text_of(b.find("CONSTR"))
        symbol = _text_of(b.find("SYMBOL"))
        role = _text_of(b.find("ROLE"))
        length_text = _text_of(b.find("LENGTH"))
        rc = by_name.get(cname)
        if rc is None:
            raise IfaceError(f"binding references unknown constraint {cname!r}")
        if not symbol:
            raise IfaceError(f"binding for {cname!r} has no SYMBOL")
        if role not in ROLES:
            raise IfaceError(f"binding for {cname!r} has unknown role {role!r}")
        length = None
        if length_text:
            try:
                length = int(length_text)
            except ValueError:
                raise IfaceError(
                    f"binding for {cname!r} has a malformed LENGTH: {length_text!r}")
            if length < 1:
                raise IfaceError(f"binding for {cname!r}: LENGTH must be >= 1")
        rc.bindings.append(Binding(cname, symbol, role, length, loc))

    return constraints


def constraints_to_xml(constraints: list[RangeConstraint]) -> str:
    """Re-serialize constraints; limits come back exactly as imported."""
    lines = ["<INTERFACE>"]
    for rc in constraints:
        lines += [
            "  <DATA-CONSTR>",
            f"    <SHORT-NAME>{rc.name}</SHORT-NAME>",
            "    <PHYS-CONSTRS>",
            f'      <LOWER-LIMIT INTERVAL-TYPE="'
            f'{"CLOSED" if rc.lower.closed else "OPEN"}">{rc.lower.text}</LOWER-LIMIT>',
            f'      <UPPER-LIMIT INTERVAL-TYPE="'
            f'{"CLOSED" if rc.upper.closed else "OPEN"}">{rc.upper.text}</UPPER-LIMIT>',
            "    </PHYS-CONSTRS>",
            "  </DATA-CONSTR>",
        ]
    for rc in constraints:
        for b in rc.bindings:
            lines.append("  <BINDING>")
            lines.append(f"    <CONSTR>{b.constr}</CONSTR>")
            lines.append(f"    <SYMBOL>{b.symbol}</SYMBOL>")
            lines.append(f"    <ROLE>{b.role}</ROLE>")
            if b.length is not None:
                lines.append(f"    <LENGTH>{b.length}</LENGTH>")
            lines.append("  </BINDING>")
    lines.append("</INTERFACE>")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# contract synthesis
# ---------------------------------------------------------------------------

def _range_body(var: str, rc: RangeConstraint) -> str:
    lo_op = ">=" if rc.lower.closed else ">"
    hi_op = "<=" if rc.upper.closed else "<"
    return f"{var} {lo_op} {rc.lower.text} && {var} {hi_op} {rc.upper.text}"


def _make(kind: str, subject: str, body: str, loc: Loc) -> Contract:
    k, expr, tag = parse_contract_text(f"{kind}: {body}", loc, origin="interface")
    return Contract(kind=k, subject=subject, expr=expr, seq_tag=tag,
                    origin="interface", loc=loc)


class _Symbols:
    """Project symbol tables the bindings are checked against."""

    def __init__(self, modules: list[Module]):
        self.functions: dict = {}
        self.globals: dict = {}
        self.struct_fields: set = set()
        for mod in modules:
            for name, fd in mod.functions().items():
                self.functions.setdefault(name, fd.sig)
            for name, sig in mod.prototypes().items():
                self.functions.setdefault(name, sig)
            for name, gd in mod.globals().items():
                self.globals.setdefault(name, gd.ty)
            for sname, sd in mod.structs().items():
                for f in sd.fields:
                    self.struct_fields.add(f"{sname}.{f.name}")

    def global_path_ok(self, path: str) -> bool:
        name, dot, fld = path.partition(".")
        ty = self.globals.get(name)
        if ty is None:
            # may be a type-level Struct.field subject
            return bool(dot) and path in self.struct_fields
        if not dot:
            return True
        if not isinstance(ty, StructType):
            return False
        return f"{ty.name}.{fld}" in self.struct_fields


def constraints_to_contracts(constraints: list[RangeConstraint],
                             modules: list[Module]) -> tuple[ContractSet, list[str]]:
    """Turn bound constraints into interface contracts.

    Returns the contract set plus human-readable warnings for constraints
    that were skipped (no bindings, or a range on an array where element
    ranges cannot be expressed).  A binding naming an unknown symbol is an
    error: a silently dropped constraint would weaken the analysis.
    """
    syms = _Symbols(modules)
    out = ContractSet()
    warnings: list[str] = []

    for rc in constraints:
        if not rc.bindings:
            warnings.append(f"constraint {rc.name!r} is not bound to any symbol")
            continue
        for b in rc.bindings:
            if b.role == "param":
                fname, dot, pname = b.symbol.partition(".")
                sig = syms.functions.get(fname)
                if not dot or sig is None:
                    raise IfaceError(
                        f"binding for {rc.name!r}: unknown parameter {b.symbol!r}")
                param = next((p for p in sig.params if p.name == pname), None)
                if param is None:
                    raise IfaceError(
                        f"binding for {rc.name!r}: function {fname!r} has no "
                        f"parameter {pname!r}")
                if isinstance(param.ty, PointerType):
                    if b.length is None:
                        warnings.append(
                            f"constraint {rc.name!r} on pointer parameter "
                            f"{b.symbol!r} needs a LENGTH to become an "
                            f"arrayspec; skipped")
                        continue
                    out.add(_make("arrayspec", fname,
                                  f"length({pname}) >= {b.length}", b.loc))
                    continue
                if b.length is not None:
                    raise IfaceError(
                        f"binding for {rc.name!r}: LENGTH given for scalar "
                        f"parameter {b.symbol!r}")
                out.add(_make("requires", fname, _range_body(pname, rc), b.loc))
            elif b.role == "return":
                sig = syms.functions.get(b.symbol)
                if sig is None:
                    raise IfaceError(
                        f"binding for {rc.name!r}: unknown function {b.symbol!r}")
                if sig.ret is None:
                    raise IfaceError(
                        f"binding for {rc.name!r}: function {b.symbol!r} "
                        f"returns void")
                out.add(_make("ensures", b.symbol, _range_body("return", rc), b.loc))
            else:  # global
                if not syms.global_path_ok(b.symbol):
                    raise IfaceError(
                        f"binding for {rc.name!r}: unknown global {b.symbol!r}")
                base = b.symbol.partition(".")[0]
                ty = syms.globals.get(base)
                if isinstance(ty, ArrayType):
                    # curve/map style data: keep a reviewable invariant on
                    # the array; the harness treats it as informative only
                    warnings.append(
                        f"constraint {rc.name!r} on array {b.symbol!r} is "
                        f"recorded but not enforced elementwise")
                out.add(_make("invariant", b.symbol, _range_body(b.symbol, rc), b.loc))

    return out, warnings


def load_interface(path) -> list[RangeConstraint]:
    from pathlib import Path

    p = Path(path)
    return parse_interface(p.read_text(encoding="utf-8"), str(p))
