"""Abstract value domains and the abstract arithmetic used by the analyzer.

Scalar values come in two families:

  int family    IntInterval or IntSet (small finite sets of ints; a set
                wider than SET_CARD_MAX collapses to its hull interval)
  float family  FloatInterval, bounded to [-FMAX, FMAX], NaN excluded

Joins may mix the two int representations; joining across families is a
programming error and raises DomainError.  The Zero domain below is the
minimal sign-of-zero lattice; it is exercised by the test suite and handy
for experiments, the analyzer itself runs on the interval/set domains.

Arithmetic transfer functions return (result, alarms) where each OpAlarm
carries an alarm class and whether it fires on every execution reaching
the operation.  A definite alarm comes with a bottom result exactly when
the operation aborts all paths; unsigned char wrap-around is defined
behavior, so uchar range overflows are reported as possible and execution
continues with the wrapped value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

FMAX = 3.4028e38
SET_CARD_MAX = 16


class DomainError(Exception):
    """Raised on meaningless domain operations (e.g. int joined with float)."""


def int_min(width: int) -> int:
    return -(1 << (width - 1))


def int_max(width: int) -> int:
    return (1 << (width - 1)) - 1


# ---------------------------------------------------------------------------
# Zero domain
# ---------------------------------------------------------------------------

_ZERO_ORDER = {"bot": 0, "zero": 1, "nonzero": 1, "top": 2}

# addition on the zero lattice, all 16 cells spelled out; note the bottom
# row and column are not strict: bot + x = x
_ZERO_ADD = {
    ("bot", "bot"): "bot",
    ("bot", "zero"): "zero",
    ("bot", "nonzero"): "nonzero",
    ("bot", "top"): "top",
    ("zero", "bot"): "zero",
    ("zero", "zero"): "zero",
    ("zero", "nonzero"): "nonzero",
    ("zero", "top"): "top",
    ("nonzero", "bot"): "nonzero",
    ("nonzero", "zero"): "nonzero",
    ("nonzero", "nonzero"): "top",
    ("nonzero", "top"): "top",
    ("top", "bot"): "top",
    ("top", "zero"): "top",
    ("top", "nonzero"): "top",
    ("top", "top"): "top",
}


@dataclass(frozen=True)
class Zero:
    """Four-point lattice: bot < {zero, nonzero} < top."""

    tag: str

    def join(self, other: "Zero") -> "Zero":
        if self.tag == other.tag:
            return self
        if self.tag == "bot":
            return other
        if other.tag == "bot":
            return self
        return ZERO_TOP

    def meet(self, other: "Zero") -> "Zero":
        if self.tag == other.tag:
            return self
        if self.tag == "top":
            return other
        if other.tag == "top":
            return self
        return ZERO_BOT

    def leq(self, other: "Zero") -> bool:
        if self.tag == "bot" or other.tag == "top":
            return True
        return self.tag == other.tag

    def add(self, other: "Zero") -> "Zero":
        return Zero(_ZERO_ADD[(self.tag, other.tag)])

    @staticmethod
    def from_int(n: int) -> "Zero":
        return ZERO_ZERO if n == 0 else ZERO_NONZERO

    def __repr__(self) -> str:
        return {"bot": "Zero(bot)", "zero": "Zero(=0)",
                "nonzero": "Zero(!=0)", "top": "Zero(top)"}[self.tag]


ZERO_BOT = Zero("bot")
ZERO_ZERO = Zero("zero")
ZERO_NONZERO = Zero("nonzero")
ZERO_TOP = Zero("top")


# ---------------------------------------------------------------------------
# int intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntInterval:
    lo: int
    hi: int

    @staticmethod
    def make(lo: int, hi: int) -> "IntInterval":
        if lo > hi:
            return INT_BOT
        return IntInterval(lo, hi)

    @staticmethod
    def const(n: int) -> "IntInterval":
        return IntInterval(n, n)

    @staticmethod
    def full(width: int) -> "IntInterval":
        return IntInterval(int_min(width), int_max(width))

    def is_bottom(self) -> bool:
        return self.lo > self.hi

    def contains(self, n: int) -> bool:
        return self.lo <= n <= self.hi

    def join(self, other: "IntInterval") -> "IntInterval":
        if self.is_bottom():
            return other
        if other.is_bottom():
            return self
        return IntInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def meet(self, other: "IntInterval") -> "IntInterval":
        if self.is_bottom() or other.is_bottom():
            return INT_BOT
        return IntInterval.make(max(self.lo, other.lo), min(self.hi, other.hi))

    def leq(self, other: "IntInterval") -> bool:
        if self.is_bottom():
            return True
        if other.is_bottom():
            return False
        return other.lo <= self.lo and self.hi <= other.hi

    def widen(self, other: "IntInterval", thresholds: tuple[int, ...],
              width: int) -> "IntInterval":
        """Jump each unstable bound to the nearest enclosing threshold."""
        if self.is_bottom():
            return other
        if other.is_bottom():
            return self
        lo, hi = self.lo, self.hi
        if other.lo < lo:
            below = [t for t in thresholds if t <= other.lo]
            lo = max(below) if below else int_min(width)
        if other.hi > hi:
            above = [t for t in thresholds if t >= other.hi]
            hi = min(above) if above else int_max(width)
        return IntInterval(lo, hi)

    def narrow(self, other: "IntInterval", width: int) -> "IntInterval":
        """Pull back bounds that widening pushed to the type extremes."""
        if self.is_bottom() or other.is_bottom():
            return other
        lo = other.lo if self.lo == int_min(width) else self.lo
        hi = other.hi if self.hi == int_max(width) else self.hi
        return IntInterval.make(lo, hi)

    def __repr__(self) -> str:
        if self.is_bottom():
            return "Int(bot)"
        return f"Int[{self.lo}, {self.hi}]"


INT_BOT = IntInterval(0, -1)


# ---------------------------------------------------------------------------
# small int sets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntSet:
    """Nonempty sorted tuple of at most SET_CARD_MAX ints."""

    vals: tuple[int, ...]

    @staticmethod
    def make(values) -> "IntSet | IntInterval":
        vs = sorted(set(values))
        if not vs:
            return INT_BOT
        if len(vs) > SET_CARD_MAX:
            return IntInterval(vs[0], vs[-1])
        return IntSet(tuple(vs))

    @staticmethod
    def const(n: int) -> "IntSet":
        return IntSet((n,))

    def is_bottom(self) -> bool:
        return False

    def contains(self, n: int) -> bool:
        return n in self.vals

    def to_interval(self) -> IntInterval:
        return IntInterval(self.vals[0], self.vals[-1])

    def __repr__(self) -> str:
        return "Int{" + ", ".join(str(v) for v in self.vals) + "}"


# ---------------------------------------------------------------------------
# float intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FloatInterval:
    lo: float
    hi: float

    @staticmethod
    def make(lo: float, hi: float) -> "FloatInterval":
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            return FLOAT_BOT
        return FloatInterval(lo, hi)

    @staticmethod
    def const(x: float) -> "FloatInterval":
        return FloatInterval(x, x)

    @staticmethod
    def full() -> "FloatInterval":
        return FloatInterval(-FMAX, FMAX)

    def is_bottom(self) -> bool:
        return self.lo > self.hi

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def join(self, other: "FloatInterval") -> "FloatInterval":
        if self.is_bottom():
            return other
        if other.is_bottom():
            return self
        return FloatInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def meet(self, other: "FloatInterval") -> "FloatInterval":
        if self.is_bottom() or other.is_bottom():
            return FLOAT_BOT
        return FloatInterval.make(max(self.lo, other.lo),
                                  min(self.hi, other.hi))

    def leq(self, other: "FloatInterval") -> bool:
        if self.is_bottom():
            return True
        if other.is_bottom():
            return False
        return other.lo <= self.lo and self.hi <= other.hi

    def widen(self, other: "FloatInterval",
              thresholds: tuple[float, ...]) -> "FloatInterval":
        if self.is_bottom():
            return other
        if other.is_bottom():
            return self
        lo, hi = self.lo, self.hi
        if other.lo < lo:
            below = [t for t in thresholds if t <= other.lo]
            lo = max(below) if below else -FMAX
        if other.hi > hi:
            above = [t for t in thresholds if t >= other.hi]
            hi = min(above) if above else FMAX
        return FloatInterval(lo, hi)

    def narrow(self, other: "FloatInterval") -> "FloatInterval":
        if self.is_bottom() or other.is_bottom():
            return other
        lo = other.lo if self.lo == -FMAX else self.lo
        hi = other.hi if self.hi == FMAX else self.hi
        return FloatInterval.make(lo, hi)

    def __repr__(self) -> str:
        if self.is_bottom():
            return "Float(bot)"
        return f"Float[{self.lo!r}, {self.hi!r}]"


FLOAT_BOT = FloatInterval(0.0, -1.0)

Value = "IntInterval | IntSet | FloatInterval"


# ---------------------------------------------------------------------------
# family helpers
# ---------------------------------------------------------------------------

def is_int_value(v) -> bool:
    return isinstance(v, (IntInterval, IntSet))


def is_float_value(v) -> bool:
    return isinstance(v, FloatInterval)


def int_hull(v) -> IntInterval:
    if isinstance(v, IntInterval):
        return v
    if isinstance(v, IntSet):
        return v.to_interval()
    raise DomainError(f"not an int value: {v!r}")


def float_hull(v) -> FloatInterval:
    """Promote either family to a float interval (ints embed exactly)."""
    if isinstance(v, FloatInterval):
        return v
    iv = int_hull(v)
    if iv.is_bottom():
        return FLOAT_BOT
    return FloatInterval(float(iv.lo), float(iv.hi))


def join_value(a, b):
    if is_int_value(a) and is_int_value(b):
        if isinstance(a, IntSet) and isinstance(b, IntSet):
            return IntSet.make(a.vals + b.vals)
        if isinstance(a, IntSet) and int_hull(b).is_bottom():
            return a
        if isinstance(b, IntSet) and int_hull(a).is_bottom():
            return b
        return int_hull(a).join(int_hull(b))
    if is_float_value(a) and is_float_value(b):
        return a.join(b)
    raise DomainError(f"cannot join {a!r} with {b!r}")


def meet_value(a, b):
    if is_int_value(a) and is_int_value(b):
        if isinstance(a, IntSet) and isinstance(b, IntSet):
            return IntSet.make(set(a.vals) & set(b.vals))
        if isinstance(a, IntSet):
            return IntSet.make(v for v in a.vals if b.contains(v))
        if isinstance(b, IntSet):
            return IntSet.make(v for v in b.vals if a.contains(v))
        return a.meet(b)
    if is_float_value(a) and is_float_value(b):
        return a.meet(b)
    raise DomainError(f"cannot meet {a!r} with {b!r}")


def value_leq(a, b) -> bool:
    if is_int_value(a) and is_int_value(b):
        if a.is_bottom():
            return True
        if b.is_bottom():
            return False
        if isinstance(a, IntSet) and isinstance(b, IntSet):
            return set(a.vals) <= set(b.vals)
        if isinstance(a, IntSet):
            return all(b.contains(v) for v in a.vals)
        if isinstance(b, IntSet):
            span = a.hi - a.lo + 1
            if span > SET_CARD_MAX:
                return False
            return all(b.contains(v) for v in range(a.lo, a.hi + 1))
        return a.leq(b)
    if is_float_value(a) and is_float_value(b):
        return a.leq(b)
    raise DomainError(f"cannot compare {a!r} with {b!r}")


def value_eq(a, b) -> bool:
    return value_leq(a, b) and value_leq(b, a)


def widen_value(a, b, int_thresholds: tuple[int, ...],
                float_thresholds: tuple[float, ...], width: int):
    if value_leq(b, a):
        return a
    if is_int_value(a) and is_int_value(b):
        return int_hull(a).widen(int_hull(b), int_thresholds, width)
    if is_float_value(a) and is_float_value(b):
        return a.widen(b, float_thresholds)
    raise DomainError(f"cannot widen {a!r} by {b!r}")


def narrow_value(a, b, width: int):
    if is_int_value(a) and is_int_value(b):
        if isinstance(a, IntSet):
            return a
        return a.narrow(int_hull(b), width)
    if is_float_value(a) and is_float_value(b):
        return a.narrow(b)
    raise DomainError(f"cannot narrow {a!r} by {b!r}")


def bottom_like(v):
    return FLOAT_BOT if is_float_value(v) else INT_BOT


def default_int_thresholds(width: int, extra=()) -> tuple[int, ...]:
    base = {int_min(width), -1, 0, 1, int_max(width)}
    return tuple(sorted(base | set(extra)))


def default_float_thresholds(extra=()) -> tuple[float, ...]:
    base = {-FMAX, -1.0, 0.0, 1.0, FMAX}
    return tuple(sorted(base | set(extra)))


# ---------------------------------------------------------------------------
# alarms raised by transfer functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OpAlarm:
    cls: str  # 'IRO', 'DMZ' or 'ISA'
    definite: bool


def _cdiv(a: int, b: int) -> int:
    """C integer division, truncation toward zero."""
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _cmod(a: int, b: int) -> int:
    """C remainder: sign follows the dividend."""
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


# ---------------------------------------------------------------------------
# unary operators
# ---------------------------------------------------------------------------

def abs_unop(op: str, v, width: int):
    """Return (result, alarms) for -v or !v."""
    alarms: list[OpAlarm] = []
    if v.is_bottom():
        return bottom_like(v), alarms
    if op == "-":
        if is_float_value(v):
            return FloatInterval(-v.hi, -v.lo), alarms
        if isinstance(v, IntSet):
            res = IntSet.make(-x for x in v.vals)
            return _int_range_filter(res, width, alarms)
        cand = IntInterval(-v.hi, -v.lo)
        return _int_range_clamp(cand, width, alarms)
    if op == "!":
        t = truth(v)
        if t == "true":
            return IntSet.const(0), alarms
        if t == "false":
            return IntSet.const(1), alarms
        return IntSet.make((0, 1)), alarms
    raise DomainError(f"unknown unary operator {op!r}")


def truth(v) -> str:
    """'true' if v is definitely nonzero, 'false' if definitely 0."""
    if is_float_value(v):
        if v.lo == 0.0 and v.hi == 0.0:
            return "false"
        if v.lo > 0.0 or v.hi < 0.0:
            return "true"
        return "maybe"
    if isinstance(v, IntSet):
        if v.vals == (0,):
            return "false"
        if 0 not in v.vals:
            return "true"
        return "maybe"
    if v.lo == 0 and v.hi == 0:
        return "false"
    if not v.contains(0):
        return "true"
    return "maybe"


# ---------------------------------------------------------------------------
# binary operators
# ---------------------------------------------------------------------------

def abs_binop(op: str, a, b, width: int):
    """Abstract a op b; returns (result, [OpAlarm...]).

    Promotion: if either side is a float the operation runs on float
    intervals, otherwise on the int family.  % << >> require int operands.
    """
    if a.is_bottom() or b.is_bottom():
        fam_float = is_float_value(a) or is_float_value(b)
        return (FLOAT_BOT if fam_float and op not in ("%", "<<", ">>")
                else INT_BOT), []
    if is_float_value(a) or is_float_value(b):
        if op in ("%", "<<", ">>"):
            raise DomainError(f"operator {op!r} needs int operands")
        return _float_binop(op, float_hull(a), float_hull(b))
    if isinstance(a, IntSet) and isinstance(b, IntSet):
        return _set_binop(op, a, b, width)
    return _interval_binop(op, int_hull(a), int_hull(b), width)


def _int_range_clamp(cand: IntInterval, width: int, alarms: list[OpAlarm]):
    lo_r, hi_r = int_min(width), int_max(width)
    if cand.is_bottom():
        return INT_BOT, alarms
    if cand.hi < lo_r or cand.lo > hi_r:
        alarms.append(OpAlarm("IRO", True))
        return INT_BOT, alarms
    if cand.lo < lo_r or cand.hi > hi_r:
        alarms.append(OpAlarm("IRO", False))
        return IntInterval(max(cand.lo, lo_r), min(cand.hi, hi_r)), alarms
    return cand, alarms


def _int_range_filter(res, width: int, alarms: list[OpAlarm]):
    """Set analogue of clamping: drop out-of-range elements."""
    if isinstance(res, IntInterval):
        return _int_range_clamp(res, width, alarms)
    lo_r, hi_r = int_min(width), int_max(width)
    inside = [v for v in res.vals if lo_r <= v <= hi_r]
    if len(inside) == len(res.vals):
        return res, alarms
    if not inside:
        alarms.append(OpAlarm("IRO", True))
        return INT_BOT, alarms
    alarms.append(OpAlarm("IRO", False))
    return IntSet.make(inside), alarms


def _interval_binop(op: str, a: IntInterval, b: IntInterval, width: int):
    alarms: list[OpAlarm] = []
    if op == "+":
        cand = IntInterval(a.lo + b.lo, a.hi + b.hi)
    elif op == "-":
        cand = IntInterval(a.lo - b.hi, a.hi - b.lo)
    elif op == "*":
        corners = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi]
        cand = IntInterval(min(corners), max(corners))
    elif op == "/":
        parts, alarms, aborted = _nonzero_parts(b, alarms)
        if aborted:
            return INT_BOT, alarms
        corners = [_cdiv(x, y) for part in parts
                   for x in (a.lo, a.hi) for y in (part.lo, part.hi)]
        cand = IntInterval(min(corners), max(corners))
    elif op == "%":
        parts, alarms, aborted = _nonzero_parts(b, alarms)
        if aborted:
            return INT_BOT, alarms
        if a.contains(int_min(width)) and b.contains(-1):
            # hardware divide fault on INT_MIN % -1
            definite = (a.lo == a.hi == int_min(width)
                        and all(p.lo == p.hi == -1 for p in parts))
            alarms.append(OpAlarm("IRO", definite))
            if definite:
                return INT_BOT, alarms
        if a.lo == a.hi and b.lo == b.hi:
            cand = IntInterval.const(_cmod(a.lo, b.lo))
        else:
            mag = max(max(abs(p.lo), abs(p.hi)) for p in parts) - 1
            lo = 0 if a.lo > 0 else max(-mag, a.lo)
            hi = 0 if a.hi < 0 else min(mag, a.hi)
            cand = IntInterval(lo, hi)
    elif op in ("<<", ">>"):
        legal = b.meet(IntInterval(0, width - 1))
        if legal.is_bottom():
            alarms.append(OpAlarm("ISA", True))
            return INT_BOT, alarms
        if not b.leq(IntInterval(0, width - 1)):
            alarms.append(OpAlarm("ISA", False))
        shift = (lambda x, c: x << c) if op == "<<" else (lambda x, c: x >> c)
        corners = [shift(x, c) for x in (a.lo, a.hi)
                   for c in (legal.lo, legal.hi)]
        cand = IntInterval(min(corners), max(corners))
    else:
        raise DomainError(f"unknown int operator {op!r}")
    return _int_range_clamp(cand, width, alarms)


def _nonzero_parts(b: IntInterval, alarms: list[OpAlarm]):
    """Split a divisor into sign-pure parts; flags DMZ when 0 is inside."""
    if b.contains(0):
        definite = b.lo == 0 and b.hi == 0
        alarms.append(OpAlarm("DMZ", definite))
        if definite:
            return [], alarms, True
    parts = []
    if b.lo <= -1:
        parts.append(IntInterval(b.lo, min(b.hi, -1)))
    if b.hi >= 1:
        parts.append(IntInterval(max(b.lo, 1), b.hi))
    return parts, alarms, False


def _set_binop(op: str, a: IntSet, b: IntSet, width: int):
    alarms: list[OpAlarm] = []
    bvals = b.vals
    if op in ("/", "%"):
        if 0 in bvals:
            definite = bvals == (0,)
            alarms.append(OpAlarm("DMZ", definite))
            if definite:
                return INT_BOT, alarms
            bvals = tuple(v for v in bvals if v != 0)
        if op == "%" and int_min(width) in a.vals and -1 in bvals:
            definite = a.vals == (int_min(width),) and bvals == (-1,)
            alarms.append(OpAlarm("IRO", definite))
            if definite:
                return INT_BOT, alarms
    elif op in ("<<", ">>"):
        legal = tuple(v for v in bvals if 0 <= v <= width - 1)
        if len(legal) != len(bvals):
            alarms.append(OpAlarm("ISA", not legal))
            if not legal:
                return INT_BOT, alarms
        bvals = legal
    fn = {
        "+": lambda x, y: x + y,
        "-": lambda x, y: x - y,
        "*": lambda x, y: x * y,
        "/": _cdiv,
        "%": lambda x, y: 0 if y == -1 else _cmod(x, y),
        "<<": lambda x, y: x << y,
        ">>": lambda x, y: x >> y,
    }[op]
    res = IntSet.make(fn(x, y) for x, y in product(a.vals, bvals))
    return _int_range_filter(res, width, alarms)


_TINY = 5e-324  # smallest positive float, splits divisor ranges at zero


def _float_binop(op: str, a: FloatInterval, b: FloatInterval):
    alarms: list[OpAlarm] = []
    if op == "+":
        corners = [a.lo + b.lo, a.hi + b.hi]
    elif op == "-":
        corners = [a.lo - b.hi, a.hi - b.lo]
    elif op == "*":
        corners = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi]
    elif op == "/":
        if b.lo <= 0.0 <= b.hi:
            definite = b.lo == 0.0 and b.hi == 0.0
            alarms.append(OpAlarm("DMZ", definite))
            if definite:
                return FLOAT_BOT, alarms
        parts = []
        if b.lo < 0.0:
            parts.append((b.lo, min(b.hi, -_TINY)))
        if b.hi > 0.0:
            parts.append((max(b.lo, _TINY), b.hi))
        corners = [x / y for plo, phi in parts
                   for x in (a.lo, a.hi) for y in (plo, phi)]
    else:
        raise DomainError(f"unknown float operator {op!r}")
    return _float_range_clamp(min(corners), max(corners), alarms)


def _float_range_clamp(lo: float, hi: float, alarms: list[OpAlarm]):
    if hi < -FMAX or lo > FMAX:
        alarms.append(OpAlarm("IRO", True))
        return FLOAT_BOT, alarms
    if lo < -FMAX or hi > FMAX:
        alarms.append(OpAlarm("IRO", False))
        return FloatInterval(max(lo, -FMAX), min(hi, FMAX)), alarms
    return FloatInterval(lo, hi), alarms


# ---------------------------------------------------------------------------
# comparisons and refinement
# ---------------------------------------------------------------------------

def compare(op: str, a, b) -> str:
    """'true' / 'false' when provable for all concretizations, else 'maybe'."""
    if a.is_bottom() or b.is_bottom():
        return "maybe"  # vacuous; callers prune bottom operands themselves
    if isinstance(a, IntSet) and isinstance(b, IntSet):
        fn = _CMP_FN[op]
        results = {fn(x, y) for x, y in product(a.vals, b.vals)}
        if results == {True}:
            return "true"
        if results == {False}:
            return "false"
        return "maybe"
    fa, fb = _cmp_hulls(a, b)
    lo1, hi1, lo2, hi2 = fa.lo, fa.hi, fb.lo, fb.hi
    if op == "<":
        if hi1 < lo2:
            return "true"
        if lo1 >= hi2:
            return "false"
    elif op == "<=":
        if hi1 <= lo2:
            return "true"
        if lo1 > hi2:
            return "false"
    elif op == ">":
        if lo1 > hi2:
            return "true"
        if hi1 <= lo2:
            return "false"
    elif op == ">=":
        if lo1 >= hi2:
            return "true"
        if hi1 < lo2:
            return "false"
    elif op == "==":
        if lo1 == hi1 == lo2 == hi2:
            return "true"
        if hi1 < lo2 or lo1 > hi2:
            return "false"
        if _disjoint_setwise(a, b):
            return "false"
    elif op == "!=":
        inner = compare("==", a, b)
        if inner == "true":
            return "false"
        if inner == "false":
            return "true"
    else:
        raise DomainError(f"unknown comparison {op!r}")
    return "maybe"


_CMP_FN = {
    "<": lambda x, y: x < y,
    "<=": lambda x, y: x <= y,
    ">": lambda x, y: x > y,
    ">=": lambda x, y: x >= y,
    "==": lambda x, y: x == y,
    "!=": lambda x, y: x != y,
}


def _cmp_hulls(a, b):
    if is_float_value(a) or is_float_value(b):
        return float_hull(a), float_hull(b)
    return int_hull(a), int_hull(b)


def _disjoint_setwise(a, b) -> bool:
    if isinstance(a, IntSet) and isinstance(b, IntSet):
        return not set(a.vals) & set(b.vals)
    if isinstance(a, IntSet) and isinstance(b, IntInterval):
        return all(not b.contains(v) for v in a.vals)
    if isinstance(b, IntSet) and isinstance(a, IntInterval):
        return all(not a.contains(v) for v in b.vals)
    return False


def refine(v, op: str, other, width: int):
    """Strongest value below v assuming `v op other` holds.

    Mixed-family comparisons refine on the float hull and then intersect
    back, which keeps an int value in the int family.
    """
    if v.is_bottom():
        return v
    if other.is_bottom():
        return v
    if is_float_value(v) or is_float_value(other):
        fo = float_hull(other)
        if op == "<":
            bound = FloatInterval(-FMAX, math.nextafter(fo.hi, -math.inf))
        elif op == "<=":
            bound = FloatInterval(-FMAX, fo.hi)
        elif op == ">":
            bound = FloatInterval(math.nextafter(fo.lo, math.inf), FMAX)
        elif op == ">=":
            bound = FloatInterval(fo.lo, FMAX)
        elif op == "==":
            bound = fo
        elif op == "!=":
            return _exclude_float_point(v, fo) if is_float_value(v) else v
        else:
            raise DomainError(f"unknown comparison {op!r}")
        if is_float_value(v):
            return v.meet(bound)
        # int value constrained by a float bound: narrow to covered ints
        lo = math.ceil(max(bound.lo, float(int_min(width))))
        hi = math.floor(min(bound.hi, float(int_max(width))))
        return meet_value(v, IntInterval.make(lo, hi))
    io = int_hull(other)
    if op == "<":
        bound = IntInterval.make(int_min(width), io.hi - 1)
    elif op == "<=":
        bound = IntInterval.make(int_min(width), io.hi)
    elif op == ">":
        bound = IntInterval.make(io.lo + 1, int_max(width))
    elif op == ">=":
        bound = IntInterval.make(io.lo, int_max(width))
    elif op == "==":
        return meet_value(v, other)
    elif op == "!=":
        return _exclude_int_point(v, other)
    else:
        raise DomainError(f"unknown comparison {op!r}")
    return meet_value(v, bound)


def _exclude_int_point(v, other):
    """Drop `other` from v when other is a single int."""
    pt = None
    io = int_hull(other)
    if io.lo == io.hi:
        pt = io.lo
    if pt is None:
        return v
    if isinstance(v, IntSet):
        return IntSet.make(x for x in v.vals if x != pt)
    if v.lo == pt == v.hi:
        return INT_BOT
    if v.lo == pt:
        return IntInterval(pt + 1, v.hi)
    if v.hi == pt:
        return IntInterval(v.lo, pt - 1)
    return v


def _exclude_float_point(v: FloatInterval, other: FloatInterval):
    if other.lo != other.hi:
        return v
    pt = other.lo
    if v.lo == pt == v.hi:
        return FLOAT_BOT
    if v.lo == pt:
        return FloatInterval(math.nextafter(pt, math.inf), v.hi)
    if v.hi == pt:
        return FloatInterval(v.lo, math.nextafter(pt, -math.inf))
    return v


def exclude_zero(v):
    """Refinement for a value known to be nonzero (used by conditions)."""
    if is_float_value(v):
        return _exclude_float_point(v, FloatInterval.const(0.0))
    return _exclude_int_point(v, IntSet.const(0))


# ---------------------------------------------------------------------------
# store conversions
# ---------------------------------------------------------------------------

def convert(v, target: str, width: int):
    """Convert a value for storing into an 'int', 'uchar' or 'float' slot.

    Returns (value, alarms).  Float to int truncates toward zero.  An
    unsigned char store wraps modulo 256; the wrap itself never aborts, so
    its range alarm is always reported as possible.
    """
    alarms: list[OpAlarm] = []
    if v.is_bottom():
        return (FLOAT_BOT if target == "float" else INT_BOT), alarms
    if target == "float":
        return float_hull(v), alarms
    if is_float_value(v):
        iv = IntInterval.make(math.trunc(v.lo), math.trunc(v.hi))
        if target == "uchar":
            return _wrap_uchar_interval(iv, alarms)
        return _int_range_clamp(iv, width, alarms)
    if target == "uchar":
        if isinstance(v, IntSet):
            if all(0 <= x <= 255 for x in v.vals):
                return v, alarms
            alarms.append(OpAlarm("IRO", False))
            return IntSet.make(x % 256 for x in v.vals), alarms
        return _wrap_uchar_interval(v, alarms)
    if target == "int":
        if isinstance(v, IntSet):
            return _int_range_filter(v, width, alarms)
        return _int_range_clamp(v, width, alarms)
    raise DomainError(f"unknown store target {target!r}")


def _wrap_uchar_interval(v: IntInterval, alarms: list[OpAlarm]):
    if v.is_bottom():
        return INT_BOT, alarms
    if 0 <= v.lo and v.hi <= 255:
        return v, alarms
    alarms.append(OpAlarm("IRO", False))
    if v.hi - v.lo >= 255:
        return IntInterval(0, 255), alarms
    lo, hi = v.lo % 256, v.hi % 256
    if lo <= hi:
        return IntInterval(lo, hi), alarms
    return IntInterval(0, 255), alarms


def top_for(target: str, width: int):
    if target == "int":
        return IntInterval.full(width)
    if target == "uchar":
        return IntInterval(0, 255)
    if target == "float":
        return FloatInterval.full()
    raise DomainError(f"unknown scalar kind {target!r}")


def zero_for(target: str):
    if target == "float":
        return FloatInterval.const(0.0)
    return IntSet.const(0)


# ---------------------------------------------------------------------------
# JSON encoding (used by the summary database)
# ---------------------------------------------------------------------------

def value_to_json(v) -> dict:
    if isinstance(v, IntSet):
        return {"k": "iset", "vals": list(v.vals)}
    if isinstance(v, IntInterval):
        if v.is_bottom():
            return {"k": "int-bot"}
        return {"k": "int", "lo": v.lo, "hi": v.hi}
    if isinstance(v, FloatInterval):
        if v.is_bottom():
            return {"k": "float-bot"}
        return {"k": "float", "lo": v.lo, "hi": v.hi}
    raise DomainError(f"cannot serialize {v!r}")


def value_from_json(d: dict):
    k = d.get("k")
    if k == "iset":
        return IntSet.make(int(x) for x in d["vals"])
    if k == "int-bot":
        return INT_BOT
    if k == "int":
        return IntInterval(int(d["lo"]), int(d["hi"]))
    if k == "float-bot":
        return FLOAT_BOT
    if k == "float":
        return FloatInterval(float(d["lo"]), float(d["hi"]))
    raise DomainError(f"cannot deserialize {d!r}")
