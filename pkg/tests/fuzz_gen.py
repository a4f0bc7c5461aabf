"""Random Mini-C program generator for soundness fuzzing.

Emits small single-module programs with one `int main(int x)` entry whose
only nondeterminism is the entry argument, so a concrete sweep over every
8-bit argument value covers the whole input space.  Loops are strictly
counter-driven with bounds <= 8 (counters are never reassigned in the
body), so every generated program terminates.

The statement mix is tuned to produce plenty of error sites (division and
modulo by data-dependent values, shifts with arbitrary counts, array
indexing with computed indices, reads of possibly-uninitialized locals,
8-bit overflow) next to ordinary clean arithmetic.
"""
from __future__ import annotations

import random

ARR_NAME = "garr"

# (op, weight); division/modulo/shifts deliberately common enough that a
# decent share of programs can fail
_OPS = (("+", 5), ("-", 5), ("*", 3), ("/", 2), ("%", 2), ("<<", 1), (">>", 1))
_CMPS = ("<", "<=", ">", ">=", "==", "!=")
_CONSTS = (-128, -9, -8, -2, -1, 0, 1, 2, 3, 4, 7, 8, 9, 100, 126, 127)


class _Gen:
    def __init__(self, seed: int):
        self.r = random.Random(seed)
        self.n_tmp = 0
        self.arr_size = self.r.choice((4, 8))
        self.scalars = ["g0", "g1"]  # globals, zero-initialized
        self.has_helper = self.r.random() < 0.5

    # -- expressions --------------------------------------------------------

    def _const(self) -> str:
        if self.r.random() < 0.8:
            return str(self.r.choice(_CONSTS))
        return str(self.r.randint(-128, 127))

    def _op(self) -> str:
        total = sum(w for _, w in _OPS)
        pick = self.r.uniform(0, total)
        for op, w in _OPS:
            pick -= w
            if pick <= 0:
                return op
        return "+"

    def expr(self, depth: int, scope: list[str], calls_ok: bool) -> str:
        roll = self.r.random()
        if depth <= 0 or roll < 0.30:
            if scope and self.r.random() < 0.65:
                return self.r.choice(scope)
            return self._const()
        if roll < 0.42:
            idx = self.expr(depth - 1, scope, calls_ok) \
                if self.r.random() < 0.4 else self._small_index(scope)
            return f"{ARR_NAME}[{idx}]"
        if roll < 0.50:
            return f"(-{self.expr(depth - 1, scope, calls_ok)})"
        if roll < 0.56 and calls_ok and self.has_helper:
            return f"helper({self.expr(depth - 1, scope, False)})"
        a = self.expr(depth - 1, scope, calls_ok)
        b = self.expr(depth - 1, scope, calls_ok)
        return f"({a} {self._op()} {b})"

    def _small_index(self, scope: list[str]) -> str:
        if scope and self.r.random() < 0.5:
            return self.r.choice(scope)
        return str(self.r.randint(0, self.arr_size - 1))

    def cond(self, scope: list[str]) -> str:
        a = self.expr(1, scope, True)
        b = self.expr(1, scope, True)
        c = f"{a} {self.r.choice(_CMPS)} {b}"
        if self.r.random() < 0.25:
            d = f"{self.expr(1, scope, True)} {self.r.choice(_CMPS)} {self._const()}"
            c = f"{c} {self.r.choice(('&&', '||'))} {d}"
        return c

    # -- statements ----------------------------------------------------------

    def _fresh(self, prefix: str) -> str:
        self.n_tmp += 1
        return f"{prefix}{self.n_tmp}"

    def stmts(self, n: int, scope: list[str], mut: list[str], indent: str,
              loop_depth: int) -> list[str]:
        out: list[str] = []
        for _ in range(n):
            out.extend(self.stmt(scope, mut, indent, loop_depth))
        return out

    def stmt(self, scope: list[str], mut: list[str], indent: str,
             loop_depth: int) -> list[str]:
        # `scope` lists readable locals; `mut` the assignable subset (loop
        # counters are readable but never reassigned, so loops terminate)
        roll = self.r.random()
        if roll < 0.14:
            # new local, sometimes deliberately left uninitialized
            name = self._fresh("v")
            if self.r.random() < 0.35:
                line = f"{indent}int {name};"
            else:
                line = f"{indent}int {name} = {self.expr(1, scope, True)};"
            scope.append(name)
            mut.append(name)
            return [line]
        if roll < 0.44:
            tgt = self.r.choice(mut) if mut and self.r.random() < 0.6 \
                else self.r.choice(self.scalars)
            return [f"{indent}{tgt} = {self.expr(2, scope, True)};"]
        if roll < 0.58:
            idx = self.expr(1, scope, True) if self.r.random() < 0.4 \
                else self._small_index(scope)
            return [f"{indent}{ARR_NAME}[{idx}] = {self.expr(1, scope, True)};"]
        if roll < 0.80 and loop_depth < 2:
            inner = self.stmts(self.r.randint(1, 3), list(scope), list(mut),
                               indent + "    ", loop_depth)
            out = [f"{indent}if ({self.cond(scope)}) {{", *inner]
            if self.r.random() < 0.5:
                els = self.stmts(self.r.randint(1, 2), list(scope), list(mut),
                                 indent + "    ", loop_depth)
                out += [f"{indent}}} else {{", *els]
            out.append(f"{indent}}}")
            return out
        if loop_depth < 2:
            c = self._fresh("c")
            bound = self.r.randint(1, 8)
            body = self.stmts(self.r.randint(1, 3), list(scope) + [c],
                              list(mut), indent + "    ", loop_depth + 1)
            return [
                f"{indent}int {c} = 0;",
                f"{indent}while ({c} < {bound}) {{",
                *body,
                f"{indent}    {c} = {c} + 1;",
                f"{indent}}}",
            ]
        return [f"{indent}g0 = {self.expr(2, scope, True)};"]

    # -- whole programs --------------------------------------------------------

    def helper_fn(self) -> list[str]:
        scope = ["a"]
        lines = [f"int helper(int a) {{"]
        for _ in range(self.r.randint(1, 3)):
            name = self._fresh("h")
            lines.append(f"    int {name} = {self.expr(2, scope, False)};")
            scope.append(name)
        lines.append(f"    return {self.expr(2, scope, False)};")
        lines.append("}")
        return lines

    def program(self) -> str:
        lines = ["int g0;", "int g1;", f"int {ARR_NAME}[{self.arr_size}];", ""]
        if self.has_helper:
            lines += self.helper_fn()
            lines.append("")
        scope = ["x"]
        lines.append("int main(int x) {")
        lines += self.stmts(self.r.randint(4, 9), scope, list(scope), "    ", 0)
        lines.append(f"    return {self.expr(2, scope, True)};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def generate_program(seed: int) -> str:
    """One deterministic random program per seed."""
    return _Gen(seed).program()


if __name__ == "__main__":
    import sys

    for s in [int(a) for a in sys.argv[1:]] or [0]:
        print(f"// seed {s}")
        print(generate_program(s))
