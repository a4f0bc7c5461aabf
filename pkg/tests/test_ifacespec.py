"""Interface XML import and detached contract files."""

import pytest

from modcheck.analyzer import AnalysisConfig
from modcheck.contractsio import (
    contracts_to_text,
    load_contracts,
    parse_contracts_text,
    save_contracts,
)
from modcheck.frontend.contracts import ContractSet
from modcheck.frontend.lexer import FrontendError
from modcheck.frontend.parser import parse_module
from modcheck.ifacespec import (
    IfaceError,
    constraints_to_contracts,
    constraints_to_xml,
    parse_interface,
)
from modcheck.inference import analyze_module


def iface(body: str) -> str:
    return f"<INTERFACE>{body}</INTERFACE>"


def constr(name: str, lo: str, hi: str, lo_type="CLOSED", hi_type="CLOSED") -> str:
    return f"""
    <DATA-CONSTR>
      <SHORT-NAME>{name}</SHORT-NAME>
      <PHYS-CONSTRS>
        <LOWER-LIMIT INTERVAL-TYPE="{lo_type}">{lo}</LOWER-LIMIT>
        <UPPER-LIMIT INTERVAL-TYPE="{hi_type}">{hi}</UPPER-LIMIT>
      </PHYS-CONSTRS>
    </DATA-CONSTR>
    """


def binding(cname: str, symbol: str, role: str, length: int | None = None) -> str:
    extra = f"<LENGTH>{length}</LENGTH>" if length is not None else ""
    return (f"<BINDING><CONSTR>{cname}</CONSTR><SYMBOL>{symbol}</SYMBOL>"
            f"<ROLE>{role}</ROLE>{extra}</BINDING>")


class TestParsing:
    def test_limits_and_interval_types(self):
        [rc] = parse_interface(iface(constr("R", "0.0", "32000.0")))
        assert rc.name == "R"
        assert (rc.lower.text, rc.lower.value, rc.lower.closed) == ("0.0", 0.0, True)
        assert (rc.upper.text, rc.upper.value, rc.upper.closed) == ("32000.0", 32000.0, True)

    def test_open_limits(self):
        [rc] = parse_interface(iface(constr("R", "0", "10", lo_type="OPEN")))
        assert not rc.lower.closed
        assert rc.upper.closed

    def test_constraint_without_limits_is_skipped(self):
        xml = iface("<DATA-CONSTR><SHORT-NAME>Doc</SHORT-NAME></DATA-CONSTR>")
        assert parse_interface(xml) == []

    def test_missing_upper_limit_rejected(self):
        xml = iface("""
        <DATA-CONSTR><SHORT-NAME>R</SHORT-NAME>
          <PHYS-CONSTRS>
            <LOWER-LIMIT INTERVAL-TYPE="CLOSED">0</LOWER-LIMIT>
          </PHYS-CONSTRS>
        </DATA-CONSTR>""")
        with pytest.raises(IfaceError, match="UPPER-LIMIT"):
            parse_interface(xml)

    def test_malformed_number_rejected(self):
        with pytest.raises(IfaceError, match="malformed"):
            parse_interface(iface(constr("R", "zero", "10")))

    def test_inverted_bounds_rejected(self):
        with pytest.raises(IfaceError, match="exceeds"):
            parse_interface(iface(constr("R", "10", "0")))

    def test_dangling_binding_rejected(self):
        xml = iface(constr("R", "0", "1") + binding("Ghost", "f.x", "param"))
        with pytest.raises(IfaceError, match="unknown constraint"):
            parse_interface(xml)

    def test_unknown_role_rejected(self):
        xml = iface(constr("R", "0", "1") + binding("R", "f.x", "input"))
        with pytest.raises(IfaceError, match="unknown role"):
            parse_interface(xml)

    def test_bad_xml_rejected(self):
        with pytest.raises(IfaceError, match="malformed interface XML"):
            parse_interface("<INTERFACE>")

    def test_reserialization_is_lossless(self):
        xml = iface(constr("R", "0.50", "1e3", hi_type="OPEN")
                    + binding("R", "f.x", "param"))
        cons = parse_interface(xml)
        again = parse_interface(constraints_to_xml(cons))
        assert [(c.name, c.lower, c.upper) for c in again] == \
               [(c.name, c.lower, c.upper) for c in cons]
        # literal text survives even where float formatting would differ
        assert again[0].upper.text == "1e3"


MOD_SRC = """
struct point { int x; int y; };
struct point pos;
int mode;
int curve[10];
float f(float x) {
    return x;
}
int idx(int i) {
    return curve[i];
}
void sink(int *p, int n) {
    p[0] = n;
}
void quiet(void) {
}
"""


def mods():
    return [parse_module(MOD_SRC, "m.mc")]


class TestContracts:
    def test_param_binding_becomes_requires(self):
        cons = parse_interface(iface(constr("R", "0.0", "32000.0")
                                     + binding("R", "f.x", "param")))
        cs, warns = constraints_to_contracts(cons, mods())
        [c] = cs.for_function("f", "requires")
        assert c.text() == "requires: x >= 0.0 && x <= 32000.0"
        assert c.origin == "interface"
        assert warns == []

    def test_byte_exact_contracts_export(self):
        cons = parse_interface(iface(constr("RangeX", "0.0", "32000.0")
                                     + binding("RangeX", "f.x", "param")))
        cs, _ = constraints_to_contracts(cons, mods())
        assert "/// [[ requires: x >= 0.0 && x <= 32000.0 ]]" in contracts_to_text(cs)

    def test_return_binding_becomes_ensures(self):
        cons = parse_interface(iface(constr("R", "0", "100")
                                     + binding("R", "idx", "return")))
        cs, _ = constraints_to_contracts(cons, mods())
        [c] = cs.for_function("idx", "ensures")
        assert c.text() == "ensures: return >= 0 && return <= 100"

    def test_global_binding_becomes_invariant(self):
        cons = parse_interface(iface(constr("R", "0", "3")
                                     + binding("R", "mode", "global")))
        cs, _ = constraints_to_contracts(cons, mods())
        [c] = cs.for_var("mode")
        assert c.text() == "invariant: mode >= 0 && mode <= 3"

    def test_struct_field_paths(self):
        cons = parse_interface(iface(constr("R", "0", "5")
                                     + binding("R", "pos.x", "global")
                                     + binding("R", "point.y", "global")))
        cs, _ = constraints_to_contracts(cons, mods())
        assert cs.for_var("pos.x")[0].subject == "pos.x"
        assert cs.for_var("point.y")[0].subject == "point.y"

    def test_open_limits_use_strict_comparisons(self):
        cons = parse_interface(iface(constr("R", "0.0", "1.0",
                                            lo_type="OPEN", hi_type="OPEN")
                                     + binding("R", "f.x", "param")))
        cs, _ = constraints_to_contracts(cons, mods())
        [c] = cs.for_function("f", "requires")
        assert c.text() == "requires: x > 0.0 && x < 1.0"

    def test_pointer_param_with_length_becomes_arrayspec(self):
        cons = parse_interface(iface(constr("R", "0", "255")
                                     + binding("R", "sink.p", "param", length=8)))
        cs, _ = constraints_to_contracts(cons, mods())
        [c] = cs.for_function("sink", "arrayspec")
        assert c.text() == "arrayspec: length(p) >= 8"

    def test_pointer_param_without_length_warns(self):
        cons = parse_interface(iface(constr("R", "0", "255")
                                     + binding("R", "sink.p", "param")))
        cs, warns = constraints_to_contracts(cons, mods())
        assert cs.all_contracts() == []
        assert any("LENGTH" in w for w in warns)

    def test_length_on_scalar_param_rejected(self):
        cons = parse_interface(iface(constr("R", "0", "255")
                                     + binding("R", "sink.n", "param", length=8)))
        with pytest.raises(IfaceError, match="scalar"):
            constraints_to_contracts(cons, mods())

    def test_array_global_binding_warns_but_imports(self):
        cons = parse_interface(iface(constr("R", "0", "9")
                                     + binding("R", "curve", "global")))
        cs, warns = constraints_to_contracts(cons, mods())
        [c] = cs.for_var("curve")
        assert c.text() == "invariant: curve >= 0 && curve <= 9"
        assert any("not enforced" in w for w in warns)

    def test_unknown_symbol_rejected(self):
        for sym, role in [("ghost.x", "param"), ("f.nope", "param"),
                          ("ghost", "return"), ("ghost", "global")]:
            cons = parse_interface(iface(constr("R", "0", "1")
                                         + binding("R", sym, role)))
            with pytest.raises(IfaceError):
                constraints_to_contracts(cons, mods())

    def test_void_return_binding_rejected(self):
        cons = parse_interface(iface(constr("R", "0", "1")
                                     + binding("R", "quiet", "return")))
        with pytest.raises(IfaceError, match="void"):
            constraints_to_contracts(cons, mods())

    def test_unbound_constraint_warns(self):
        cons = parse_interface(iface(constr("R", "0", "1")))
        cs, warns = constraints_to_contracts(cons, mods())
        assert cs.all_contracts() == []
        assert any("not bound" in w for w in warns)

    def test_imported_requires_narrows_the_analysis(self):
        # without the interface range a full-range index reaches the array
        [mod] = mods()
        _, out = analyze_module(mod, ContractSet(), AnalysisConfig())
        assert any(a.cls == "IPA" for a in out.alarms)

        cons = parse_interface(iface(constr("R", "0", "9")
                                     + binding("R", "idx.i", "param")))
        cs, _ = constraints_to_contracts(cons, mods())
        _, out2 = analyze_module(mod, cs, AnalysisConfig())
        assert not any(a.cls == "IPA" for a in out2.alarms)


class TestContractsFiles:
    def test_round_trip(self, tmp_path):
        text = (
            "function scale\n"
            "/// [[ requires: v >= 0 && v <= 100 ]]\n"
            "/// [[ ensures: return >= 0 ]]\n"
            "\n"
            "var mode\n"
            "/// [[ invariant: mode <= 3 ]]\n"
        )
        cs = parse_contracts_text(text)
        assert len(cs.for_function("scale")) == 2
        assert len(cs.for_var("mode")) == 1
        path = tmp_path / "x.contracts"
        save_contracts(cs, path)
        assert load_contracts(path).canonical() == cs.canonical()

    def test_export_is_deterministic(self):
        a, b = ContractSet(), ContractSet()
        texts = [("function z", "requires: v >= 1"),
                 ("function a", "ensures: return >= 0")]
        for header, inner in texts:
            a = parse_contracts_text(f"{header}\n/// [[ {inner} ]]\n")
        combined = ("function z\n/// [[ requires: v >= 1 ]]\n"
                    "function a\n/// [[ ensures: return >= 0 ]]\n")
        cs = parse_contracts_text(combined)
        out = contracts_to_text(cs)
        assert out.index("function a") < out.index("function z")
        assert contracts_to_text(parse_contracts_text(out)) == out

    def test_comments_and_blanks_ignored(self):
        text = ("// reviewed 2024-11-02\n\nfunction f\n"
                "// the clamp bound\n/// [[ requires: x <= 10 ]]\n")
        cs = parse_contracts_text(text)
        assert len(cs.for_function("f", "requires")) == 1

    def test_contract_before_header_rejected(self):
        with pytest.raises(FrontendError, match="before any"):
            parse_contracts_text("/// [[ requires: x >= 0 ]]\n")

    def test_kind_subject_mismatch_rejected(self):
        with pytest.raises(FrontendError, match="attach to variables"):
            parse_contracts_text("function f\n/// [[ invariant: g >= 0 ]]\n")
        with pytest.raises(FrontendError, match="attach to functions"):
            parse_contracts_text("var g\n/// [[ requires: x >= 0 ]]\n")

    def test_junk_line_rejected(self):
        with pytest.raises(FrontendError, match="cannot parse"):
            parse_contracts_text("contract f requires x\n")

    def test_origin_is_preserved(self):
        cs = parse_contracts_text("function f\n/// [[ requires: x >= 0 ]]\n",
                                  origin="interface")
        assert cs.for_function("f")[0].origin == "interface"
