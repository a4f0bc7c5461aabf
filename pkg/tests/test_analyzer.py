"""Abstract interpreter tests.

Ground truth for every alarm expectation here is the concrete executor in
modcheck.concrete: whenever a test pins an alarm class and line, a concrete
run that reaches the error is cross-checked to fail with the same class at
the same location, and clean claims are cross-checked to run clean.  The
two implementations share nothing but the AST, so agreement is meaningful.
"""
from __future__ import annotations

import pytest

from modcheck.analyzer import (
    AnalysisConfig, AnalysisError, ExtractionPlan, analyze_program,
)
from modcheck.concrete import run_concrete
from modcheck.domains import IntInterval
from modcheck.frontend import parse_module, resolve_project
from modcheck.frontend.nodes import (
    Block, Break, Call, Case, ExprStmt, For, If, Return, Switch, VarDecl,
    While,
)


def build(src: str, entry: str = "main"):
    return resolve_project([parse_module(src, "m.mc")], entry=entry)


def analyze(src: str, entry: str = "main", **cfg):
    cfg.setdefault("zero_init_globals", True)
    return analyze_program(build(src, entry), entry, AnalysisConfig(**cfg))


def alarms(out):
    """(class, definite, line) triples, in report order."""
    return [(a.cls, a.definite, a.loc.line) for a in out.alarms]


def first_concrete_error(src: str, *args, entry: str = "main", **kw):
    r = run_concrete(build(src, entry), entry, args, **kw)
    if r.error is None:
        return None
    cls, loc = r.error
    return (cls, loc.line)


# ---------------------------------------------------------------------------
# straight-line code and arithmetic alarms
# ---------------------------------------------------------------------------

class TestArithmeticAlarms:
    def test_clean_straight_line(self):
        src = """
        int main() {
            int a = 3;
            int b = a * 7 - 1;
            __assert(b == 20);
            return b;
        }
        """
        assert alarms(analyze(src)) == []
        assert first_concrete_error(src) is None

    def test_definite_division_by_zero_aborts_path(self):
        # the UIV read after the definite DMZ must not be reported
        src = """
        int main() {
            int z = 0;
            int q = 1 / z;
            int u;
            return u;
        }
        """
        assert alarms(analyze(src)) == [("DMZ", True, 4)]
        assert first_concrete_error(src) == ("DMZ", 4)

    def test_possible_division_by_zero_continues(self):
        src = """
        int main(int n) {
            int q = 10 / n;
            return q;
        }
        """
        out = analyze(src)
        assert alarms(out) == [("DMZ", False, 3)]
        prog = build(src)
        assert run_concrete(prog, "main", (0,)).error[0] == "DMZ"
        assert run_concrete(prog, "main", (5,)).error is None

    def test_int_min_division_overflow(self):
        src = """
        int main() {
            int m = -2147483648;
            int d = -1;
            return m / d;
        }
        """
        assert alarms(analyze(src)) == [("IRO", True, 5)]
        assert first_concrete_error(src) == ("IRO", 5)

    def test_shift_amount_out_of_range(self):
        src = """
        int main() {
            int a = 1 << 40;
            return a;
        }
        """
        assert alarms(analyze(src)) == [("ISA", True, 3)]
        assert first_concrete_error(src) == ("ISA", 3)

    def test_signed_overflow_definite(self):
        src = """
        int main() {
            int x = 2147483647;
            x = x + 1;
            return x;
        }
        """
        assert alarms(analyze(src)) == [("IRO", True, 4)]
        assert first_concrete_error(src) == ("IRO", 4)

    def test_unsigned_char_wraps_and_continues(self):
        # wrap is defined behavior: flagged as possible, value is exact
        src = """
        int main() {
            unsigned char c = 255;
            c = c + 1;
            __assert(c == 0);
            return c;
        }
        """
        assert alarms(analyze(src)) == [("IRO", False, 4)]
        r = run_concrete(build(src), "main", ())
        assert r.error is None and r.returned == 0

    def test_float_overflow_definite(self):
        src = """
        float main() {
            float x = 3.0e38;
            float y = x * 2.0;
            return y;
        }
        """
        assert alarms(analyze(src)) == [("IRO", True, 4)]
        assert first_concrete_error(src) == ("IRO", 4)

    def test_float_interval_corners_are_exact(self):
        src = """
        int main() {
            float f = 0.0;
            __modify_full_range(f);
            __known_fact(f >= 0.0 && f <= 2.0);
            float g = f * f;
            __assert(g <= 4.0);
            return 0;
        }
        """
        assert alarms(analyze(src)) == []


# ---------------------------------------------------------------------------
# initialization tracking
# ---------------------------------------------------------------------------

class TestInitialization:
    def test_definite_uninitialized_read(self):
        src = """
        int main() {
            int u;
            return u;
        }
        """
        assert alarms(analyze(src)) == [("UIV", True, 4)]
        assert first_concrete_error(src) == ("UIV", 4)

    def test_branch_dependent_init_is_possible(self):
        src = """
        int main(int n) {
            int v;
            if (n > 0) {
                v = 1;
            }
            return v;
        }
        """
        assert alarms(analyze(src)) == [("UIV", False, 7)]
        prog = build(src)
        assert run_concrete(prog, "main", (1,)).error is None
        assert run_concrete(prog, "main", (0,)).error[0] == "UIV"

    def test_array_reads_past_written_prefix(self):
        src = """
        int main() {
            int a[8];
            int i;
            for (i = 0; i < 2; i = i + 1) {
                a[i] = i;
            }
            return a[3];
        }
        """
        assert alarms(analyze(src)) == [("UIV", True, 8)]
        assert first_concrete_error(src) == ("UIV", 8)

    def test_array_read_inside_prefix_is_clean(self):
        src = """
        int main() {
            int a[8];
            int i;
            for (i = 0; i < 2; i = i + 1) {
                a[i] = i;
            }
            return a[1];
        }
        """
        assert alarms(analyze(src)) == []
        assert run_concrete(build(src), "main", ()).returned == 1

    def test_zero_fill_initializer_covers_whole_array(self):
        src = """
        int main() {
            int a[4] = {0};
            return a[3];
        }
        """
        assert alarms(analyze(src)) == []
        assert run_concrete(build(src), "main", ()).returned == 0

    def test_globals_uninitialized_without_zero_init(self):
        src = """
        int g;
        int main() {
            return g;
        }
        """
        assert alarms(analyze(src, zero_init_globals=False)) == \
            [("UIV", True, 4)]
        assert alarms(analyze(src, zero_init_globals=True)) == []

    def test_struct_fields_track_independently(self):
        src = """
        struct pt { int x; int y; };
        struct pt g;
        int main() {
            g.x = 3;
            return g.x + g.y;
        }
        """
        assert alarms(analyze(src, zero_init_globals=False)) == \
            [("UIV", True, 6)]
        out = analyze(src, zero_init_globals=True)
        assert alarms(out) == []
        assert run_concrete(build(src), "main", ()).returned == 3


# ---------------------------------------------------------------------------
# loops: unrolling, widening, narrowing
# ---------------------------------------------------------------------------

class TestLoops:
    def test_short_loop_is_exact_via_unrolling(self):
        src = """
        int main() {
            int s = 0;
            int i = 0;
            while (i < 3) {
                s = s + i;
                i = i + 1;
            }
            __assert(s == 3);
            return s;
        }
        """
        assert alarms(analyze(src)) == []
        assert run_concrete(build(src), "main", ()).returned == 3

    def test_counted_loop_narrows_to_exact_exit(self):
        # 10 iterations exceed the unroll bound: widening jumps to the
        # program-constant threshold and narrowing pins the exit to i == 10
        src = """
        int main() {
            int i = 0;
            while (i < 10) {
                i = i + 1;
            }
            __assert(i == 10);
            return i;
        }
        """
        assert alarms(analyze(src)) == []
        assert run_concrete(build(src), "main", ()).returned == 10

    def test_assert_contradicting_invariant_is_definite(self):
        src = """
        int main() {
            int i = 0;
            while (i < 10) {
                i = i + 1;
            }
            __assert(i != 10);
            return i;
        }
        """
        assert alarms(analyze(src)) == [("ASR", True, 7)]
        assert first_concrete_error(src) == ("ASR", 7)

    def test_overflow_inside_widened_loop_is_reported(self):
        src = """
        int main() {
            int p = 1;
            int i = 0;
            while (i < 40) {
                p = p * 3;
                i = i + 1;
            }
            return p;
        }
        """
        out = analyze(src)
        assert ("IRO", False, 6) in alarms(out)
        assert first_concrete_error(src) == ("IRO", 6)

    def test_break_joins_loop_exits(self):
        src = """
        int main(int n) {
            int i = 0;
            while (i < 100) {
                if (i == n) {
                    break;
                }
                i = i + 1;
            }
            return i;
        }
        """
        assert alarms(analyze(src)) == []
        assert run_concrete(build(src), "main", (7,)).returned == 7

    def test_for_loop_desugars_like_while(self):
        src = """
        int main() {
            int s = 0;
            int i;
            for (i = 0; i < 4; i = i + 1) {
                s = s + 2;
            }
            __assert(s == 8);
            return s;
        }
        """
        assert alarms(analyze(src)) == []
        assert run_concrete(build(src), "main", ()).returned == 8

    def test_condition_false_on_entry_skips_body(self):
        src = """
        int main() {
            int i = 5;
            int u;
            while (i < 5) {
                u = 0;
            }
            return i;
        }
        """
        assert alarms(analyze(src)) == []
        assert run_concrete(build(src), "main", ()).returned == 5


# ---------------------------------------------------------------------------
# switch
# ---------------------------------------------------------------------------

class TestSwitch:
    SRC = """
    int sw(int n) {
        int r = 0;
        switch (n) {
        case 1:
            r = r + 10;
        case 2:
            r = r + 1;
            break;
        default:
            r = 99;
        }
        return r;
    }

    int main() {
        int a = sw(1);
        __assert(a == 11);
        int b = sw(2);
        __assert(b == 1);
        int c = sw(5);
        __assert(c == 99);
        return a + b + c;
    }
    """

    def test_fall_through_values_are_exact(self):
        assert alarms(analyze(self.SRC)) == []

    def test_concrete_agrees_on_every_arm(self):
        prog = build(self.SRC)
        r = run_concrete(prog, "main", ())
        assert r.error is None and r.returned == 11 + 1 + 99

    def test_unmatched_subject_takes_default(self):
        prog = build(self.SRC, entry="sw")
        assert run_concrete(prog, "sw", (-3,)).returned == 99

    def test_enum_constants_as_case_labels(self):
        src = """
        enum mode { OFF, STANDBY, ON };
        int main(int m) {
            int r;
            switch (m) {
            case OFF:
                r = 10;
                break;
            case ON:
                r = 20;
                break;
            default:
                r = 0;
            }
            return r;
        }
        """
        assert alarms(analyze(src)) == []
        prog = build(src)
        assert run_concrete(prog, "main", (2,)).returned == 20


# ---------------------------------------------------------------------------
# directives
# ---------------------------------------------------------------------------

class TestDirectives:
    def test_modify_then_fact_bounds_a_value(self):
        src = """
        int main() {
            int v = 0;
            __modify_full_range(v);
            __known_fact(v >= 2 && v <= 9);
            __assert(v >= 2);
            __assert(v >= 5);
            return v;
        }
        """
        # first assert holds, second is only possible
        assert alarms(analyze(src)) == [("ASR", False, 7)]

    def test_modify_makes_scalar_initialized(self):
        src = """
        int main() {
            int v;
            __modify_full_range(v);
            return v;
        }
        """
        assert alarms(analyze(src)) == []

    def test_modify_array_leaves_coverage_unknown(self):
        # an external writer may have written some cells, not all
        src = """
        int main() {
            int a[4];
            __modify_full_range(a);
            return a[2];
        }
        """
        assert alarms(analyze(src)) == [("UIV", False, 5)]

    def test_false_fact_makes_rest_unreachable(self):
        src = """
        int main() {
            int u;
            __known_fact(0);
            return u;
        }
        """
        assert alarms(analyze(src)) == []
        r = run_concrete(build(src), "main", ())
        assert r.vacuous and r.error is None

    def test_watch_fires_on_violating_write(self):
        src = """
        int mode;

        void setup() {
            __global_assert(mode, mode >= 0 && mode <= 3);
        }

        void bump() {
            mode = 9;
        }

        int main() {
            setup();
            mode = 1;
            bump();
            return mode;
        }
        """
        out = analyze(src)
        assert alarms(out) == [("ASR", True, 9)]
        # the alarm carries the call path to the writing function
        assert [l.line for l in out.alarms[0].stack] == [15]
        assert first_concrete_error(src) == ("ASR", 9)

    def test_watch_ignores_environment_havoc(self):
        # havoc models an external writer who honors the invariant; the
        # following fact restores the range, so the watch must stay silent
        src = """
        int mode;

        int main() {
            mode = 1;
            __global_assert(mode, mode >= 0 && mode <= 3);
            __modify_full_range(mode);
            __known_fact(mode >= 0 && mode <= 3);
            return mode;
        }
        """
        assert alarms(analyze(src)) == []
        r = run_concrete(build(src), "main", (), inputs=(99,))
        assert r.vacuous and r.error is None

    def test_watch_tolerates_conforming_writes(self):
        src = """
        int mode;

        void setup() {
            __global_assert(mode, mode >= 0 && mode <= 3);
        }

        int main() {
            setup();
            mode = 2;
            return mode;
        }
        """
        assert alarms(analyze(src)) == []
        assert run_concrete(build(src), "main", ()).error is None


# ---------------------------------------------------------------------------
# calls: inlining, stack attribution, unknown callees, summaries
# ---------------------------------------------------------------------------

class TestCalls:
    def test_pointer_parameters_write_through(self):
        src = """
        int acc;

        void fill(int *p, int n) {
            int i;
            for (i = 0; i < n; i = i + 1) {
                p[i] = i;
            }
        }

        int main() {
            int buf[4];
            fill(buf, 4);
            acc = buf[2];
            return acc;
        }
        """
        assert alarms(analyze(src)) == []
        assert run_concrete(build(src), "main", ()).returned == 2

    def test_alarm_stack_keeps_last_three_call_sites(self):
        src = """
        int f3() { int u; return u; }
        int f2() { return f3(); }
        int f1() { return f2(); }
        int main() { return f1(); }
        """
        out = analyze(src)
        assert alarms(out) == [("UIV", True, 2)]
        assert [l.line for l in out.alarms[0].stack] == [5, 4, 3]

    def test_unknown_origin_call_havocs_globals(self):
        src = """
        int ext();
        int g;

        int main() {
            g = 5;
            int r = ext();
            __assert(g == 5);
            return r;
        }
        """
        assert alarms(analyze(src)) == \
            [("UFC", False, 7), ("ASR", False, 8)]

    def test_summary_call_checks_requires(self):
        src = """
        /// [[ requires: x >= 0 && x <= 10 ]]
        int dbl(int x) {
            return x * 2;
        }

        int main(int n) {
            return dbl(n);
        }
        """
        prog = build(src)
        cfg = AnalysisConfig(zero_init_globals=True, inline_depth=0,
                             contracts=prog.manual_contracts)
        out = analyze_program(prog, "main", cfg)
        assert alarms(out) == [("ASR", False, 8)]
        assert out.alarms[0].contract_id == "dbl:requires:x >= 0 && x <= 10"

    def test_summary_call_requires_guarded_is_clean(self):
        src = """
        /// [[ requires: x >= 0 && x <= 10 ]]
        int dbl(int x) {
            return x * 2;
        }

        int main(int n) {
            if (n >= 0) {
                if (n <= 10) {
                    return dbl(n);
                }
            }
            return 0;
        }
        """
        prog = build(src)
        cfg = AnalysisConfig(zero_init_globals=True, inline_depth=0,
                             contracts=prog.manual_contracts)
        assert alarms(analyze_program(prog, "main", cfg)) == []

    def test_summary_call_applies_ensures_to_result(self):
        src = """
        /// [[ requires: x >= 0 && x <= 10 ]]
        /// [[ ensures: return >= 0 && return <= 20 ]]
        int dbl(int x) {
            return x * 2;
        }

        int main() {
            int r = dbl(4);
            __assert(r >= 0);
            __assert(r <= 20);
            return r;
        }
        """
        prog = build(src)
        cfg = AnalysisConfig(zero_init_globals=True, inline_depth=0,
                             contracts=prog.manual_contracts)
        assert alarms(analyze_program(prog, "main", cfg)) == []

    def test_summary_call_rejects_short_array(self):
        src = """
        /// [[ arrayspec: length(p) >= n ]]
        void fill(int *p, int n) {
            int i;
            for (i = 0; i < n; i = i + 1) {
                p[i] = i;
            }
        }

        int main() {
            int small[2];
            fill(small, 4);
            return small[0];
        }
        """
        prog = build(src)
        cfg = AnalysisConfig(zero_init_globals=True, inline_depth=0,
                             contracts=prog.manual_contracts)
        assert alarms(analyze_program(prog, "main", cfg)) == \
            [("IPA", True, 12)]
        # inlining instead finds the overrun inside the callee,
        # exactly where the concrete run fails
        out = analyze_program(prog, "main",
                              AnalysisConfig(zero_init_globals=True))
        assert alarms(out) == [("IPA", True, 6)]
        assert first_concrete_error(src) == ("IPA", 6)


# ---------------------------------------------------------------------------
# extraction for contract inference
# ---------------------------------------------------------------------------

def _collect(stmts, pred, acc):
    for s in stmts:
        if pred(s):
            acc.append(s)
        if isinstance(s, Block):
            _collect(s.stmts, pred, acc)
        elif isinstance(s, If):
            _collect(s.then.stmts, pred, acc)
            if s.orelse is not None:
                _collect(s.orelse.stmts, pred, acc)
        elif isinstance(s, (While, For)):
            _collect(s.body.stmts, pred, acc)
        elif isinstance(s, Switch):
            for c in s.cases:
                _collect(c.body, pred, acc)
            if s.default is not None:
                _collect(s.default, pred, acc)
    return acc


class TestExtraction:
    DRIVER = """
    int state;

    int step(int x) {
        if (x < 0) {
            x = 0;
        }
        state = x + 1;
        return x * 2;
    }

    void __driver_main() {
        __modify_full_range(state);
        unsigned char decision = 0;
        while (1) {
            __modify_full_range(decision);
            switch (decision) {
            case 0:
                int step__x = 0;
                __modify_full_range(step__x);
                __known_fact(step__x >= -5 && step__x <= 5);
                int step__res = step(step__x);
                break;
            default:
                break;
            }
        }
    }
    """

    def _plan_and_prog(self):
        prog = build(self.DRIVER, entry="__driver_main")
        body = prog.functions["__driver_main"][1].body.stmts
        breaks = _collect(body, lambda s: isinstance(s, Break), [])
        decls = _collect(
            body,
            lambda s: isinstance(s, VarDecl) and isinstance(s.init, Call),
            [])
        assert len(decls) == 1
        call_loc = decls[0].init.loc
        plan = ExtractionPlan(
            stub_names=frozenset({"step"}),
            case_break_locs={breaks[0].loc: "step"},
            case_call_locs={call_loc: "step"},
            result_vars={"step": "step__res"},
        )
        return prog, plan

    def test_return_and_global_ranges_are_recorded(self):
        prog, plan = self._plan_and_prog()
        out = analyze_program(
            prog, "__driver_main",
            AnalysisConfig(zero_init_globals=False), plan=plan)
        assert alarms(out) == []
        # x in [-5,5] clamps to [0,5]: result doubles, state adds one
        assert out.extraction.returns["step"] == IntInterval(0, 10)
        assert out.extraction.globals_after[("step", "state")] == \
            IntInterval(1, 6)
        assert out.extraction.params[("step", "x")] == IntInterval(-5, 5)
        assert out.extraction.called_stubs == {"step"}

    def test_driver_covers_whole_module(self):
        prog, plan = self._plan_and_prog()
        out = analyze_program(
            prog, "__driver_main",
            AnalysisConfig(zero_init_globals=False), plan=plan)
        reached, total = out.coverage["m"]
        assert reached == total

    def test_without_plan_nothing_is_recorded(self):
        prog, _ = self._plan_and_prog()
        out = analyze_program(
            prog, "__driver_main", AnalysisConfig(zero_init_globals=False))
        assert out.extraction.returns == {}
        assert out.extraction.globals_after == {}
        assert out.extraction.params == {}


# ---------------------------------------------------------------------------
# resource limits, coverage, basic outputs
# ---------------------------------------------------------------------------

class TestLimitsAndCoverage:
    def test_budget_exhaustion_is_a_tool_error(self):
        src = """
        int main() {
            int i = 0;
            int s = 0;
            while (i < 1000) {
                i = i + 1;
                s = s + i;
            }
            return s;
        }
        """
        with pytest.raises(AnalysisError):
            analyze_program(build(src), "main", AnalysisConfig(budget=20))

    def test_unreached_function_lowers_coverage(self):
        src = """
        int helper(int n) {
            return n + 1;
        }

        int dead() {
            return 42;
        }

        int main() {
            return helper(1);
        }
        """
        out = analyze(src)
        reached, total = out.coverage["m"]
        assert reached < total
        assert reached > 0

    def test_full_coverage_when_everything_runs(self):
        src = """
        int main() {
            int a = 1;
            int b = a + 2;
            return b;
        }
        """
        out = analyze(src)
        assert out.coverage["m"][0] == out.coverage["m"][1]
        assert out.visits >= 3
        assert out.seconds >= 0.0

    def test_entry_with_pointer_params_is_rejected(self):
        src = """
        int main(int *p) {
            return p[0];
        }
        """
        with pytest.raises(AnalysisError):
            analyze(src)

    def test_alarms_deduplicate_by_class_and_site(self):
        # the same division is reached twice through inlining: one alarm
        src = """
        int half(int n) {
            return 10 / n;
        }

        int main(int a, int b) {
            return half(a) + half(b);
        }
        """
        out = analyze(src)
        assert alarms(out) == [("DMZ", False, 3)]
