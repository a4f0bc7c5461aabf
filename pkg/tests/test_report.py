"""Report assembly, rendering, and diffing."""

import pytest

from modcheck.analyzer import AnalysisConfig, analyze_program
from modcheck.frontend.contracts import ContractSet
from modcheck.frontend.parser import parse_module
from modcheck.frontend.resolve import resolve_project
from modcheck.inference import analyze_module
from modcheck.report import (
    ReportError,
    build_report,
    diff_reports,
    diff_text,
    report_table,
    report_to_json,
    strip_timing,
)

SRC = """
int div10(int n) {
    return 10 / n;
}
int pick(int i) {
    int box[4];
    box[0] = 1;
    return box[i];
}
"""


def harness_doc(stage=1):
    mod = parse_module(SRC, "m.mc")
    _h, out = analyze_module(mod, ContractSet(), AnalysisConfig())
    return build_report(stage, [mod], {"m": out})


class TestBuild:
    def test_counts_sum_to_total(self):
        doc = harness_doc()
        [row] = doc["modules"]
        assert row["total"] == sum(row["alarms"].values())
        assert doc["totals"]["total"] == row["total"]
        assert row["alarms"]["DMZ"] == 1
        assert row["alarms"]["IPA"] == 1

    def test_findings_carry_location_and_message(self):
        doc = harness_doc()
        [row] = doc["modules"]
        dmz = [f for f in row["findings"] if f["class"] == "DMZ"]
        assert dmz and dmz[0]["file"] == "m.mc"
        assert dmz[0]["line"] == 3
        assert "zero" in dmz[0]["message"]

    def test_harness_file_alarms_attributed_to_module(self):
        src = """
        /// [[ requires: v >= 0 ]]
        void ext(int v);
        void go(int x) {
            ext(x);
        }
        """
        mod = parse_module(src, "m.mc")
        _h, out = analyze_module(mod, mod.contracts, AnalysisConfig())
        doc = build_report(3, [mod], {"m": out})
        [row] = doc["modules"]
        asr = [f for f in row["findings"] if f["class"] == "ASR"]
        assert asr and asr[0]["file"] == "m.harness.mc"

    def test_coverage_percent(self):
        doc = harness_doc()
        cov = doc["modules"][0]["coverage"]
        assert cov["statements"] > 0
        assert 0.0 <= cov["percent"] <= 100.0

    def test_stage_zero_shares_one_output(self):
        src_a = "int main(void) { return helper(); }\nint helper(void);"
        src_b = "int helper(void) { return 4; }"
        mods = [parse_module(src_a, "a.mc"), parse_module(src_b, "b.mc")]
        prog = resolve_project(mods, entry="main", zero_init_globals=True)
        out = analyze_program(prog, "main",
                              AnalysisConfig(zero_init_globals=True))
        doc = build_report(0, mods, {m.name: out for m in mods}, entry="main")
        assert doc["entry"] == "main"
        assert len(doc["modules"]) == 2
        # the shared wall time is only counted once
        assert len(doc["timing"]["seconds"]) == 1

    def test_json_text_is_stable(self):
        doc = harness_doc()
        assert report_to_json(doc) == report_to_json(doc)
        assert "timing" not in strip_timing(doc)


class TestTable:
    def test_table_shape(self):
        text = report_table(harness_doc())
        assert "module" in text and "TOTAL" in text
        for cls in ("IPA", "ISA", "IRO", "DMZ", "UIV", "UFC", "ASR"):
            assert cls in text
        assert "cov%" in text and "time[s]" in text
        assert "median" in text

    def test_rows_are_fixed_width(self):
        text = report_table(harness_doc())
        rows = [l for l in text.splitlines() if l.startswith(("m ", "TOTAL"))]
        assert len({len(r) for r in rows}) == 1


class TestDiff:
    def test_identical_reports_empty_delta(self):
        doc = harness_doc()
        delta = diff_reports(doc, doc)
        assert delta["added"] == [] and delta["removed"] == []
        assert delta["identical"]
        assert "identical" in diff_text(delta)

    def test_removed_alarm_listed(self):
        doc1 = harness_doc(stage=1)
        mod = parse_module(SRC, "m.mc")
        cs = ContractSet()
        from modcheck.frontend.contracts import Contract
        from modcheck.frontend.nodes import Loc
        from modcheck.frontend.parser import parse_contract_text
        k, e, t = parse_contract_text("requires: n >= 1 && n <= 9",
                                      Loc("x", 1, 1))
        cs.add(Contract(k, "div10", e, t, "manual", Loc("x", 1, 1)))
        k, e, t = parse_contract_text("requires: i >= 0 && i <= 3",
                                      Loc("x", 1, 1))
        cs.add(Contract(k, "pick", e, t, "manual", Loc("x", 1, 1)))
        _h, out = analyze_module(mod, cs, AnalysisConfig())
        doc3 = build_report(3, [mod], {"m": out})

        delta = diff_reports(doc1, doc3)
        assert delta["class_delta"]["DMZ"] == -1
        removed_classes = {k[0] for k in map(tuple, delta["removed"])}
        assert "DMZ" in removed_classes and "IPA" in removed_classes
        assert delta["added"] == []

    def test_schema_mismatch_rejected(self):
        doc = harness_doc()
        with pytest.raises(ReportError, match="schema"):
            diff_reports({"schema_version": 99}, doc)
