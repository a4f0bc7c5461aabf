"""Analysis reports: a versioned JSON document, a text table, and diffs.

One analysis run produces a single report document.  Everything in it is a
pure function of the sources and flags except the ``timing`` object, which
holds the timestamp and wall-clock seconds; consumers comparing runs for
determinism or regressions must ignore exactly that one field, and
`diff_reports` does.

The text rendering is a fixed-width table, one row per module with per-class
alarm counts, the definite-alarm count, statement coverage, and wall time,
followed by totals and a timing summary (median/average/max/sum plus any
modules whose time is a Tukey outlier at k = 1.5).
"""

from __future__ import annotations

import json
import statistics
from datetime import datetime, timezone

from .analyzer import ALARM_CLASSES, Alarm, AnalysisOutput
from .frontend.nodes import Loc, Module

REPORT_SCHEMA_VERSION = 1


class ReportError(Exception):
    pass


# ---------------------------------------------------------------------------
# building
# ---------------------------------------------------------------------------

def _loc_str(loc: Loc) -> str:
    return f"{loc.file}:{loc.line}:{loc.col}"


def _finding(a: Alarm) -> dict:
    out = {
        "class": a.cls,
        "definite": a.definite,
        "file": a.loc.file,
        "line": a.loc.line,
        "col": a.loc.col,
        "message": a.message,
        "stack": [_loc_str(l) for l in a.stack],
    }
    if a.contract_id is not None:
        out["contract"] = a.contract_id
    return out


def _coverage(pair: tuple | None) -> dict:
    reached, total = pair if pair else (0, 0)
    pct = 100.0 if total == 0 else round(100.0 * reached / total, 1)
    return {"reached": reached, "statements": total, "percent": pct}


def _zero_counts() -> dict:
    return {cls: 0 for cls in ALARM_CLASSES}


def build_report(stage: int, modules: list[Module],
                 outputs: dict[str, AnalysisOutput],
                 entry: str | None = None) -> dict:
    """Assemble the JSON report document.

    ``outputs`` maps a module name to its analysis; for module-level stages
    that is one harness analysis per module, for stage 0 every module maps
    to the single integration analysis.  Alarms are attributed to a module
    when they sit in its source file or in its generated harness.
    """
    by_file: dict[str, str] = {}
    for mod in modules:
        by_file[mod.file] = mod.name
        by_file[f"{mod.name}.harness.mc"] = mod.name

    rows = []
    total_counts = _zero_counts()
    total_definite = 0
    total_reached = 0
    total_stmts = 0
    seconds: dict[str, float] = {}
    seen_outputs: set[int] = set()

    for mod in sorted(modules, key=lambda m: m.name):
        out = outputs.get(mod.name)
        if out is None:
            raise ReportError(f"no analysis output for module {mod.name!r}")
        findings = [
            _finding(a) for a in out.alarms
            if by_file.get(a.loc.file) == mod.name
        ]
        findings.sort(key=lambda f: (f["file"], f["line"], f["col"],
                                     f["class"], f["message"]))
        counts = _zero_counts()
        for f in findings:
            counts[f["class"]] += 1
        definite = sum(1 for f in findings if f["definite"])
        cov = _coverage(out.coverage.get(mod.name))

        rows.append({
            "name": mod.name,
            "file": mod.file,
            "alarms": counts,
            "total": len(findings),
            "definite": definite,
            "coverage": cov,
            "findings": findings,
        })
        for cls in ALARM_CLASSES:
            total_counts[cls] += counts[cls]
        total_definite += definite
        total_reached += cov["reached"]
        total_stmts += cov["statements"]
        # the integration stage shares one output across all modules; count
        # its wall time once
        if id(out) not in seen_outputs:
            seen_outputs.add(id(out))
            seconds[mod.name] = round(out.seconds, 6)

    totals_cov_pct = 100.0 if total_stmts == 0 else \
        round(100.0 * total_reached / total_stmts, 1)
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool": "modcheck",
        "stage": stage,
        "entry": entry,
        "modules": rows,
        "totals": {
            "alarms": total_counts,
            "total": sum(total_counts.values()),
            "definite": total_definite,
            "coverage": {"reached": total_reached, "statements": total_stmts,
                         "percent": totals_cov_pct},
        },
        "timing": {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "seconds": seconds,
            "total_seconds": round(sum(seconds.values()), 6),
        },
    }


def report_to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def strip_timing(doc: dict) -> dict:
    """The deterministic part of a report: everything but ``timing``."""
    return {k: v for k, v in doc.items() if k != "timing"}


# ---------------------------------------------------------------------------
# text table
# ---------------------------------------------------------------------------

def _tukey_outliers(times: dict[str, float]) -> list[str]:
    if len(times) < 4:
        return []
    vals = sorted(times.values())
    q1, _, q3 = statistics.quantiles(vals, n=4)
    fence = q3 + 1.5 * (q3 - q1)
    return sorted(name for name, t in times.items() if t > fence)


def report_table(doc: dict) -> str:
    name_w = max([len("module"), len("TOTAL")]
                 + [len(m["name"]) for m in doc["modules"]])
    cols = list(ALARM_CLASSES) + ["total", "def"]
    header = (f"{'module':<{name_w}}  "
              + "  ".join(f"{c:>5}" for c in cols)
              + "  " + f"{'cov%':>6}" + "  " + f"{'time[s]':>8}")
    sep = "-" * len(header)
    lines = [f"stage {doc['stage']} report", sep, header, sep]

    seconds = doc["timing"]["seconds"]
    for m in doc["modules"]:
        cells = [m["alarms"][c] for c in ALARM_CLASSES] + [m["total"], m["definite"]]
        t = seconds.get(m["name"])
        t_text = f"{t:>8.3f}" if t is not None else f"{'-':>8}"
        lines.append(f"{m['name']:<{name_w}}  "
                     + "  ".join(f"{v:>5}" for v in cells)
                     + f"  {m['coverage']['percent']:>6.1f}  {t_text}")
    tot = doc["totals"]
    cells = [tot["alarms"][c] for c in ALARM_CLASSES] + [tot["total"], tot["definite"]]
    lines.append(sep)
    lines.append(f"{'TOTAL':<{name_w}}  "
                 + "  ".join(f"{v:>5}" for v in cells)
                 + f"  {tot['coverage']['percent']:>6.1f}"
                 + f"  {doc['timing']['total_seconds']:>8.3f}")
    lines.append(sep)

    if seconds:
        vals = list(seconds.values())
        lines.append(
            "time per module: "
            f"median {statistics.median(vals):.3f}s  "
            f"avg {statistics.fmean(vals):.3f}s  "
            f"max {max(vals):.3f}s  "
            f"sum {sum(vals):.3f}s")
        outliers = _tukey_outliers(seconds)
        if outliers:
            lines.append("timing outliers: " + ", ".join(
                f"{n} ({seconds[n]:.3f}s)" for n in outliers))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# report diffing
# ---------------------------------------------------------------------------

def _finding_key(mod_name: str, f: dict) -> tuple:
    return (f["class"], f["file"], f["line"], f["col"])


def _all_findings(doc: dict) -> dict:
    out = {}
    for m in doc["modules"]:
        for f in m["findings"]:
            out.setdefault(_finding_key(m["name"], f), []).append((m["name"], f))
    return out


def diff_reports(a: dict, b: dict) -> dict:
    """Alarm delta from report ``a`` to report ``b``.

    Alarms are keyed by (class, file, line, col); ``timing`` never takes
    part.  The result lists per-class count deltas plus added and removed
    alarm keys.
    """
    for doc, label in ((a, "first"), (b, "second")):
        if doc.get("schema_version") != REPORT_SCHEMA_VERSION:
            raise ReportError(
                f"{label} report has schema version "
                f"{doc.get('schema_version')!r}, expected {REPORT_SCHEMA_VERSION}")

    fa, fb = _all_findings(a), _all_findings(b)
    added = sorted(k for k in fb if k not in fa)
    removed = sorted(k for k in fa if k not in fb)
    per_class = {
        cls: b["totals"]["alarms"][cls] - a["totals"]["alarms"][cls]
        for cls in ALARM_CLASSES
    }
    return {
        "stages": [a["stage"], b["stage"]],
        "class_delta": per_class,
        "total_delta": b["totals"]["total"] - a["totals"]["total"],
        "added": [list(k) for k in added],
        "removed": [list(k) for k in removed],
        "identical": not added and not removed
        and strip_timing(a) == strip_timing(b),
    }


def diff_text(delta: dict) -> str:
    lines = [f"stage {delta['stages'][0]} -> stage {delta['stages'][1]}"]
    changed = {c: d for c, d in delta["class_delta"].items() if d}
    if changed:
        lines.append("class deltas: " + ", ".join(
            f"{c} {d:+d}" for c, d in sorted(changed.items())))
    else:
        lines.append("class deltas: none")
    for label, keys in (("added", delta["added"]), ("removed", delta["removed"])):
        for cls, file, line, col in keys:
            lines.append(f"  {label}: {cls} at {file}:{line}:{col}")
    if delta["identical"]:
        lines.append("reports are identical")
    return "\n".join(lines) + "\n"
