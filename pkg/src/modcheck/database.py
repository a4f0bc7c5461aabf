"""On-disk store for per-module analysis summaries.

Each analyzed module leaves behind one JSON record describing what its
harness run observed: the value range every exported function may return,
the ranges it may leave in the globals it writes, and the argument ranges
it passes to the external functions it calls.  Records from different
modules are combined later to infer contracts, so the store has to survive
concurrent writers (parallel analyses, or two CLI invocations racing on the
same directory).  A file lock serializes mutations and every file is
replaced atomically, so readers never observe a half-written record.

Layout under the database root:

    index.json           {"schema_version": 1, "modules": [...]}
    modules/<name>.json  one record per module
    .lock                lock file guarding mutations
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from filelock import FileLock

from .domains import value_from_json, value_to_json

SCHEMA_VERSION = 1

# Kinds an observation can carry.  The kind pins down the trivial bounds of
# the observed variable so contract synthesis can drop tautological
# conjuncts: "int", "uchar", "float", or "enum:<member count>".
SCALAR_KINDS = ("int", "uchar", "float")


class DatabaseError(Exception):
    pass


@dataclass(frozen=True)
class Observation:
    """One observed value range together with the subject's type kind."""

    kind: str
    value: object  # IntInterval | IntSet | FloatInterval

    def to_json(self) -> dict:
        return {"kind": self.kind, "value": value_to_json(self.value)}

    @staticmethod
    def from_json(d: dict) -> "Observation":
        return Observation(kind=d["kind"], value=value_from_json(d["value"]))


@dataclass
class FunctionSummary:
    """What one defined function was seen to do in its module's harness."""

    returns: Observation | None = None
    globals: dict[str, Observation] = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict = {"globals": {k: v.to_json() for k, v in sorted(self.globals.items())}}
        if self.returns is not None:
            out["return"] = self.returns.to_json()
        return out

    @staticmethod
    def from_json(d: dict) -> "FunctionSummary":
        ret = d.get("return")
        return FunctionSummary(
            returns=Observation.from_json(ret) if ret is not None else None,
            globals={k: Observation.from_json(v) for k, v in d.get("globals", {}).items()},
        )


@dataclass
class ModuleRecord:
    """Complete summary of one module's most recent harness analysis.

    ``functions`` covers the module's defined functions; ``calls`` maps each
    external callee to the scalar argument ranges this module passes it;
    ``externals`` lists every function the module declares but does not
    define, whether or not it was actually called.
    """

    module: str
    functions: dict[str, FunctionSummary] = field(default_factory=dict)
    calls: dict[str, dict[str, Observation]] = field(default_factory=dict)
    externals: tuple[str, ...] = ()
    analyzed_at: str = ""  # UTC ISO timestamp of the producing run
    contracts_fingerprint: str = ""  # hash of the contract set that run used

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "module": self.module,
            "functions": {k: v.to_json() for k, v in sorted(self.functions.items())},
            "calls": {
                fn: {p: o.to_json() for p, o in sorted(params.items())}
                for fn, params in sorted(self.calls.items())
            },
            "externals": sorted(self.externals),
            "analyzed_at": self.analyzed_at,
            "contracts_fingerprint": self.contracts_fingerprint,
        }

    @staticmethod
    def from_json(d: dict) -> "ModuleRecord":
        ver = d.get("schema_version")
        if ver != SCHEMA_VERSION:
            raise DatabaseError(f"unsupported record schema version {ver!r}")
        return ModuleRecord(
            module=d["module"],
            functions={k: FunctionSummary.from_json(v) for k, v in d.get("functions", {}).items()},
            calls={
                fn: {p: Observation.from_json(o) for p, o in params.items()}
                for fn, params in d.get("calls", {}).items()
            },
            externals=tuple(d.get("externals", [])),
            analyzed_at=d.get("analyzed_at", ""),
            contracts_fingerprint=d.get("contracts_fingerprint", ""),
        )

    def canonical(self) -> str:
        """Deterministic serialized form, used to detect unchanged records.

        The run timestamp is excluded: re-analyzing an unchanged module must
        yield the same canonical record even though the timestamp refreshes.
        """
        doc = self.to_json()
        doc.pop("analyzed_at", None)
        return json.dumps(doc, sort_keys=True)


def _atomic_write(path: Path, payload: dict) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    os.replace(tmp, path)


class SummaryDatabase:
    """Record store rooted at one directory, safe across processes."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.modules_dir = self.root / "modules"
        self.index_path = self.root / "index.json"
        self.modules_dir.mkdir(parents=True, exist_ok=True)
        self._lock = FileLock(str(self.root / ".lock"))
        if not self.index_path.exists():
            with self._lock:
                if not self.index_path.exists():
                    _atomic_write(self.index_path, {"schema_version": SCHEMA_VERSION, "modules": []})

    # -- reads ------------------------------------------------------------

    def module_names(self) -> list[str]:
        try:
            idx = json.loads(self.index_path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return []
        if idx.get("schema_version") != SCHEMA_VERSION:
            raise DatabaseError(f"unsupported index schema version {idx.get('schema_version')!r}")
        return list(idx.get("modules", []))

    def read(self, name: str) -> ModuleRecord | None:
        path = self.modules_dir / f"{name}.json"
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            return None
        return ModuleRecord.from_json(data)

    def read_all(self) -> dict[str, ModuleRecord]:
        out: dict[str, ModuleRecord] = {}
        for name in self.module_names():
            rec = self.read(name)
            if rec is not None:
                out[name] = rec
        return out

    # -- writes -----------------------------------------------------------

    def write(self, record: ModuleRecord) -> None:
        self.write_many([record])

    def write_many(self, records) -> None:
        records = list(records)
        if not records:
            return
        with self._lock:
            names = set(self.module_names())
            for rec in records:
                _atomic_write(self.modules_dir / f"{rec.module}.json", rec.to_json())
                names.add(rec.module)
            _atomic_write(
                self.index_path,
                {"schema_version": SCHEMA_VERSION, "modules": sorted(names)},
            )
