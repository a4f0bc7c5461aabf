"""Summary database and cross-module contract inference."""

import json

import pytest

from modcheck.analyzer import AnalysisConfig
from modcheck.database import (
    DatabaseError,
    FunctionSummary,
    ModuleRecord,
    Observation,
    SummaryDatabase,
)
from modcheck.domains import FMAX, FloatInterval, IntInterval, IntSet
from modcheck.frontend.contracts import ContractSet, merge
from modcheck.frontend.parser import parse_contract_text, parse_module
from modcheck.frontend.nodes import Loc
from modcheck.inference import (
    analyze_module,
    bounds_text,
    external_refs_of,
    extract_summary,
    run_fixpoint,
    synthesize_contracts,
)


def record(module, functions=None, calls=None, externals=()):
    return ModuleRecord(module=module, functions=functions or {},
                        calls=calls or {}, externals=tuple(externals))


class TestDatabase:
    def test_round_trip(self, tmp_path):
        db = SummaryDatabase(tmp_path / "db")
        rec = record(
            "core",
            functions={
                "clamp": FunctionSummary(
                    returns=Observation("int", IntInterval(0, 50)),
                    globals={"state": Observation("enum:4", IntSet.make([1, 2]))},
                ),
            },
            calls={"ext": {"v": Observation("float", FloatInterval(0.0, 1.5))}},
            externals=("ext",),
        )
        db.write(rec)
        back = db.read("core")
        assert back is not None
        assert back.functions["clamp"].returns == Observation("int", IntInterval(0, 50))
        assert back.functions["clamp"].globals["state"].value == IntSet.make([1, 2])
        assert back.calls["ext"]["v"].value == FloatInterval(0.0, 1.5)
        assert back.externals == ("ext",)
        assert back.canonical() == rec.canonical()

    def test_index_lists_modules_sorted(self, tmp_path):
        db = SummaryDatabase(tmp_path / "db")
        db.write_many([record("zeta"), record("alpha")])
        db.write(record("mid"))
        assert db.module_names() == ["alpha", "mid", "zeta"]
        idx = json.loads((tmp_path / "db" / "index.json").read_text())
        assert idx["schema_version"] == 1

    def test_missing_module_reads_none(self, tmp_path):
        db = SummaryDatabase(tmp_path / "db")
        assert db.read("ghost") is None
        assert db.read_all() == {}

    def test_rejects_foreign_schema_version(self, tmp_path):
        db = SummaryDatabase(tmp_path / "db")
        path = tmp_path / "db" / "modules" / "bad.json"
        path.write_text(json.dumps({"schema_version": 99, "module": "bad"}))
        with pytest.raises(DatabaseError):
            ModuleRecord.from_json(json.loads(path.read_text()))

    def test_rewrite_replaces_record(self, tmp_path):
        db = SummaryDatabase(tmp_path / "db")
        db.write(record("m", externals=("a",)))
        db.write(record("m", externals=("b",)))
        assert db.read("m").externals == ("b",)
        assert db.module_names() == ["m"]

    def test_two_handles_share_state(self, tmp_path):
        a = SummaryDatabase(tmp_path / "db")
        a.write(record("m"))
        b = SummaryDatabase(tmp_path / "db")
        assert b.module_names() == ["m"]
        assert b.read("m").module == "m"

    def test_no_temp_files_left_behind(self, tmp_path):
        db = SummaryDatabase(tmp_path / "db")
        db.write_many([record("a"), record("b")])
        leftovers = list((tmp_path / "db").rglob("*.tmp"))
        assert leftovers == []


class TestBoundsText:
    def test_full_int_range_is_trivial(self):
        obs = Observation("int", IntInterval(-(1 << 31), (1 << 31) - 1))
        assert bounds_text("x", obs, 32) is None

    def test_one_sided_bounds(self):
        assert bounds_text("x", Observation("int", IntInterval(0, (1 << 31) - 1)), 32) == "x >= 0"
        assert bounds_text("x", Observation("int", IntInterval(-(1 << 31), 9)), 32) == "x <= 9"

    def test_two_sided_bounds(self):
        obs = Observation("int", IntInterval(-5, 10))
        assert bounds_text("n", obs, 32) == "n >= -5 && n <= 10"

    def test_uchar_trivial_range(self):
        assert bounds_text("c", Observation("uchar", IntInterval(0, 255)), 32) is None
        assert bounds_text("c", Observation("uchar", IntInterval(0, 7)), 32) == "c <= 7"

    def test_enum_trivial_range_uses_member_count(self):
        assert bounds_text("m", Observation("enum:3", IntInterval(0, 2)), 32) is None
        assert bounds_text("m", Observation("enum:3", IntInterval(0, 1)), 32) == "m <= 1"

    def test_float_trivial_range(self):
        assert bounds_text("f", Observation("float", FloatInterval(-FMAX, FMAX)), 32) is None
        assert bounds_text("f", Observation("float", FloatInterval(0.0, FMAX)), 32) == "f >= 0.0"

    def test_float_text_round_trips_through_parser(self):
        obs = Observation("float", FloatInterval(-3.5e-07, 1.25))
        text = bounds_text("v", obs, 32)
        kind, expr, _ = parse_contract_text(f"requires: {text}", Loc("<t>", 0, 0))
        assert kind == "requires"
        assert expr is not None

    def test_set_becomes_equality_chain(self):
        obs = Observation("int", IntSet.make([4, 8]))
        assert bounds_text("n", obs, 32) == "n == 4 || n == 8"

    def test_set_covering_enum_range_is_trivial(self):
        obs = Observation("enum:3", IntSet.make([0, 1, 2]))
        assert bounds_text("m", obs, 32) is None

    def test_width_changes_trivial_bounds(self):
        obs = Observation("int", IntInterval(-128, 100))
        assert bounds_text("x", obs, 8) == "x <= 100"
        assert bounds_text("x", obs, 32) == "x >= -128 && x <= 100"


class TestSynthesis:
    def test_return_becomes_ensures(self):
        recs = {"m": record("m", functions={
            "f": FunctionSummary(returns=Observation("int", IntInterval(0, 9))),
        })}
        cs = synthesize_contracts(recs, 32)
        [c] = cs.for_function("f", "ensures")
        assert c.text() == "ensures: return >= 0 && return <= 9"
        assert c.origin == "inferred"

    def test_globals_join_across_modules_into_invariant(self):
        recs = {
            "a": record("a", functions={"f": FunctionSummary(
                globals={"g": Observation("int", IntInterval(0, 5))})}),
            "b": record("b", functions={"h": FunctionSummary(
                globals={"g": Observation("int", IntInterval(3, 9))})}),
        }
        cs = synthesize_contracts(recs, 32)
        [c] = cs.for_var("g")
        assert c.text() == "invariant: g >= 0 && g <= 9"

    def test_struct_field_invariant_keeps_path_subject(self):
        recs = {"m": record("m", functions={"f": FunctionSummary(
            globals={"pt.x": Observation("int", IntInterval(1, 2))})})}
        cs = synthesize_contracts(recs, 32)
        [c] = cs.for_var("pt.x")
        assert c.subject == "pt.x"
        assert c.text() == "invariant: pt.x >= 1 && pt.x <= 2"

    def test_requires_joins_call_sites(self):
        recs = {
            "a": record("a", calls={"f": {"x": Observation("int", IntSet.make([4]))}},
                        externals=("f",)),
            "b": record("b", calls={"f": {"x": Observation("int", IntSet.make([8]))}},
                        externals=("f",)),
        }
        cs = synthesize_contracts(recs, 32)
        [c] = cs.for_function("f", "requires")
        assert c.text() == "requires: x == 4 || x == 8"

    def test_requires_gated_on_referencing_modules(self):
        recs = {"a": record("a", calls={"f": {"x": Observation("int", IntInterval(0, 5))}},
                            externals=("f",))}
        refs = {"f": {"a", "b"}}  # module b also declares f but has no record
        assert synthesize_contracts(recs, 32, refs).for_function("f", "requires") == []
        refs = {"f": {"a"}}
        assert len(synthesize_contracts(recs, 32, refs).for_function("f", "requires")) == 1

    def test_trivial_observation_emits_nothing(self):
        recs = {"m": record("m", functions={"f": FunctionSummary(
            returns=Observation("int", IntInterval(-(1 << 31), (1 << 31) - 1)))})}
        assert synthesize_contracts(recs, 32).all_contracts() == []

    def test_manual_contract_blocks_inferred_twin(self):
        recs = {"m": record("m", functions={
            "f": FunctionSummary(returns=Observation("int", IntInterval(0, 9))),
        })}
        inferred = synthesize_contracts(recs, 32)
        kind, expr, tag = parse_contract_text("ensures: return >= -1",
                                              Loc("man.mc", 1, 1))
        from modcheck.frontend.contracts import Contract
        manual = ContractSet()
        manual.add(Contract(kind, "f", expr, tag, "manual", Loc("man.mc", 1, 1)))
        merged = merge(manual, inferred)
        [c] = merged.for_function("f", "ensures")
        assert c.origin == "manual"
        assert c.text() == "ensures: return >= -1"


CALLER_SRC = """
int use(int raw) {
    int x;
    int r;
    x = raw;
    if (x < 0) { x = 0; }
    if (x > 100) { x = 100; }
    r = scale(x);
    return r;
}
int scale(int v);
"""

CALLEE_SRC = """
int lut[101];
int scale(int v) {
    return lut[v] + 1;
}
"""


def project():
    return [parse_module(CALLER_SRC, "caller.mc"),
            parse_module(CALLEE_SRC, "callee.mc")]


class TestExtraction:
    def test_summary_contents(self):
        mods = project()
        caller = mods[0]
        h, out = analyze_module(caller, ContractSet(), AnalysisConfig())
        rec = extract_summary(caller, h, out)
        assert rec.module == "caller"
        assert rec.externals == ("scale",)
        assert set(rec.functions) == {"use"}
        # the argument is clamped into [0, 100] before the call
        assert rec.calls["scale"]["v"].kind == "int"
        assert rec.calls["scale"]["v"].value == IntInterval(0, 100)

    def test_enum_and_float_kinds(self):
        src = """
        enum mode { OFF, LOW, HIGH };
        enum mode cur;
        float level;
        void set(enum mode m, float f) {
            cur = m;
            level = f;
        }
        """
        mod = parse_module(src, "m.mc")
        h, out = analyze_module(mod, ContractSet(), AnalysisConfig())
        rec = extract_summary(mod, h, out)
        assert rec.functions["set"].globals["cur"].kind == "enum:3"
        assert rec.functions["set"].globals["level"].kind == "float"
        assert rec.functions["set"].returns is None

    def test_external_refs_map(self):
        refs = external_refs_of(project())
        assert refs == {"scale": {"caller"}}


class TestFixpoint:
    def test_cold_start_converges_and_narrows(self, tmp_path):
        mods = project()
        cfg = AnalysisConfig()

        # without contracts the callee sees a full-range index
        h, out = analyze_module(mods[1], ContractSet(), cfg)
        assert any(a.cls == "IPA" for a in out.alarms)

        db = SummaryDatabase(tmp_path / "db")
        res = run_fixpoint(mods, db, ContractSet(), cfg)
        assert res.converged
        assert res.passes >= 2
        [req] = res.inferred.for_function("scale", "requires")
        assert req.text() == "requires: v >= 0 && v <= 100"
        # the inferred requires removes the out-of-bounds access
        final = res.runs["callee"].output.alarms
        assert not any(a.cls == "IPA" for a in final)

    def test_warm_start_confirms_in_one_pass(self, tmp_path):
        mods = project()
        cfg = AnalysisConfig()
        db = SummaryDatabase(tmp_path / "db")
        first = run_fixpoint(mods, db, ContractSet(), cfg)
        again = run_fixpoint(mods, SummaryDatabase(tmp_path / "db"),
                             ContractSet(), cfg)
        assert again.converged
        assert again.passes == 1
        assert again.inferred.canonical() == first.inferred.canonical()

    def test_pass_cap_reports_no_convergence(self, tmp_path):
        mods = project()
        db = SummaryDatabase(tmp_path / "db")
        res = run_fixpoint(mods, db, ContractSet(), AnalysisConfig(), max_passes=1)
        assert not res.converged
        assert res.passes == 1

    def test_parallel_matches_serial(self, tmp_path):
        mods = project()
        cfg = AnalysisConfig()
        serial = run_fixpoint(mods, SummaryDatabase(tmp_path / "s"), ContractSet(), cfg, jobs=1)
        para = run_fixpoint(mods, SummaryDatabase(tmp_path / "p"), ContractSet(), cfg, jobs=4)
        assert serial.inferred.canonical() == para.inferred.canonical()
        assert serial.passes == para.passes

    def test_manual_contract_survives_every_pass(self, tmp_path):
        mods = project()
        kind, expr, tag = parse_contract_text("requires: v >= 10 && v <= 20",
                                              Loc("man.mc", 1, 1))
        from modcheck.frontend.contracts import Contract
        base = ContractSet()
        base.add(Contract(kind, "scale", expr, tag, "manual", Loc("man.mc", 1, 1)))
        db = SummaryDatabase(tmp_path / "db")
        res = run_fixpoint(mods, db, base, AnalysisConfig())
        assert res.converged
        # the inferred set never overrides the manual requires after merge
        merged = merge(base, res.inferred)
        [c] = merged.for_function("scale", "requires")
        assert c.origin == "manual"
