"""Closed-form stable Calabi-Yau dimensions for self-injective algebras of finite type.

Every finite answer is the minimal solution of one linear congruence over an
explicit interval, so each result carries enough data to be re-checked.
"""

from __future__ import annotations

import ast
import itertools
import operator
from dataclasses import dataclass, field
from math import gcd
from typing import Callable, Iterable, Mapping, Optional

from .algebra import AlgebraError
from .exactlin import NoSolution
from .families import AsashibaType, BadParameters, parse_type


class InadmissibleType(AlgebraError):
    pass


def m_delta(tree: str, index: int) -> int:
    if tree == "A":
        return index
    if tree == "D":
        return 2 * index - 3
    if tree == "E":
        return {6: 11, 7: 17, 8: 29}[index]
    raise InadmissibleType(f"no m_Delta for tree class {tree!r}")


@dataclass(frozen=True)
class CongruenceProblem:
    """Find l in [lo, hi] (ends optionally open) with modulus | a*l - b."""

    a: int
    b: int
    modulus: int
    lo: int
    hi: int
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        if self.modulus <= 0:
            raise ValueError("modulus must be positive")

    @property
    def first(self) -> int:
        return self.lo + 1 if self.lo_open else self.lo

    @property
    def last(self) -> int:
        return self.hi - 1 if self.hi_open else self.hi

    def holds(self, l: int) -> bool:
        return (self.a * l - self.b) % self.modulus == 0

    def in_range(self, l: int) -> bool:
        return self.first <= l <= self.last

    def describe(self) -> str:
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{self.modulus} | {self.a}*l - {self.b}, l in {left}{self.lo}, {self.hi}{right}"


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def solve_min_congruence(p: CongruenceProblem) -> int:
    """Minimal admissible l; raises NoSolution when none exists."""
    m = p.modulus
    g, x, _ = _ext_gcd(p.a % m, m)
    if p.b % g:
        raise NoSolution(f"gcd({p.a}, {m}) = {g} does not divide {p.b}")
    step = m // g
    l0 = (x * (p.b // g)) % step
    # smallest l >= first with l = l0 mod step
    l = p.first + ((l0 - p.first) % step)
    if l > p.last:
        raise NoSolution(f"no solution of {p.describe()}")
    return l


@dataclass
class CYResult:
    value: Optional[int]  # None means infinite
    row: str
    solution_l: Optional[int] = None
    problem: Optional[CongruenceProblem] = None
    formula: str = ""
    flags: list[str] = field(default_factory=list)

    @property
    def finite(self) -> bool:
        return self.value is not None

    def describe(self) -> str:
        return f"Finite({self.value})" if self.finite else "Infinite"

    def to_json(self) -> dict:
        out = {"result": self.describe(), "value": self.value, "row": self.row, "l": self.solution_l,
               "formula": self.formula, "flags": list(self.flags)}
        if self.problem is not None:
            out["congruence"] = self.problem.describe()
        return out


# formula evaluators keyed by row id; used both to produce and to re-check values
def _row_value(row: str, t: AsashibaType, l: int) -> int:
    if row == "1a":
        return l
    if row in ("1b", "2"):
        return 1 + 2 * l
    if row == "3":
        n = (t.index - 1) // 2
        return l * (2 * n + 1) - 1
    if row == "4":
        return 2 * l
    if row == "5":
        return l * (2 * t.index - 3) - 1
    if row == "8":
        return 2 * l
    raise KeyError(row)


def _finite(row: str, t: AsashibaType, prob: CongruenceProblem, formula: str, flags) -> CYResult:
    l = solve_min_congruence(prob)
    return CYResult(_row_value(row, t, l), row, l, prob, formula, list(flags))


def _normalized_r(t: AsashibaType, m: int) -> tuple[int, list[str]]:
    r = t.frequency * m
    if r.denominator != 1:
        raise InadmissibleType(f"{t}: frequency times m_Delta = {r} is not an integer")
    flags = []
    if t.tree == "D" and t.frequency.denominator == 3:
        flags.append("assumed-normalization")
    return int(r), flags


def scydim(t: AsashibaType, char_p: int) -> CYResult:
    """Stable Calabi-Yau dimension of an algebra of type ``t`` over a field of characteristic ``char_p``.

    ``char_p`` = 0 stands for the rationals and is treated as a characteristic other than 2.
    """
    if t.tree == "trunc":
        raise InadmissibleType("k[t]/t^n is not one of the tabulated types; use the brute force")
    p2 = char_p == 2
    n, tor = t.index, t.torsion

    if not t.standard:
        k = n // 3
        return CYResult(4 * k - 3, "9", None, None, "4n - 3", [])

    if tor == 1:
        m = m_delta(t.tree, n)
        r, flags = _normalized_r(t, m)
        if (t.tree, n) == ("A", 1) or t.tree == "D" and n % 2 == 0 or (t.tree, n) in (("E", 7), ("E", 8)):
            h = (m + 1) // 2
            if gcd(h, r) != 1:
                return CYResult(None, "1", flags=flags, formula=f"gcd({h}, {r}) != 1")
            if r % 2 == 0 or p2:
                prob = CongruenceProblem(h, h - 1, r, 0, r, lo_open=True)  # r | (l-1)h + 1
                return _finite("1a", t, prob, "l", flags)
            prob = CongruenceProblem(m + 1, -1, r, 0, r, hi_open=True)
            return _finite("1b", t, prob, "1 + 2l", flags)
        if gcd(m + 1, r) != 1:
            return CYResult(None, "2", flags=flags, formula=f"gcd({m + 1}, {r}) != 1")
        prob = CongruenceProblem(m + 1, -1, r, 0, r, hi_open=True)
        return _finite("2", t, prob, "1 + 2l", flags)

    r = t.r
    if r < 1:
        raise InadmissibleType(f"{t}: torsion {tor} needs an integral frequency")
    flags = []
    if tor == 2 and t.tree == "A":
        k = (n - 1) // 2
        if k % 2 == 1:
            flags.append("odd-n-not-cross-checked")
        if gcd(r + k + 1, 2 * r) != 1:
            return CYResult(None, "3", flags=flags, formula=f"gcd({r + k + 1}, {2 * r}) != 1")
        prob = CongruenceProblem(r + k + 1, 1, 2 * r, 0, 2 * r, lo_open=True)
        return _finite("3", t, prob, f"l*{2 * k + 1} - 1", flags)
    if tor == 2 and t.tree == "D":
        if r % 2 == 1:
            if gcd(n - 1, r) != 1:
                return CYResult(None, "4", formula=f"gcd({n - 1}, {r}) != 1")
            mod = r * (2 * n - 3)
            prob = CongruenceProblem(2 * n - 2, n - 2, mod, 0, mod, lo_open=True, hi_open=True)
            return _finite("4", t, prob, "2l", flags)
        if gcd(n - 1, r) != 1 or not p2:
            why = f"gcd({n - 1}, {r}) != 1" if gcd(n - 1, r) != 1 else "p != 2"
            return CYResult(None, "5", formula=why)
        prob = CongruenceProblem(n - 1, 1, 2 * r, 0, 2 * r, lo_open=True)
        return _finite("5", t, prob, f"l*{2 * n - 3} - 1", flags)
    if tor == 3:
        return CYResult(None, "6", formula="always infinite")
    if tor == 2 and t.tree == "E":
        if gcd(6, r) != 1:
            return CYResult(None, "8", formula=f"gcd(6, {r}) != 1")
        prob = CongruenceProblem(12, 5, 11 * r, 0, 11 * r, lo_open=True, hi_open=True)
        return _finite("8", t, prob, "2l", flags)
    raise InadmissibleType(f"{t} is not covered")


def recheck(t: AsashibaType, res: CYResult) -> list[str]:
    """Audit a finite result: the witness solves its congruence minimally and reproduces the value."""
    problems = []
    if not res.finite or res.problem is None:
        return problems
    prob, l = res.problem, res.solution_l
    if not (prob.in_range(l) and prob.holds(l)):
        problems.append(f"l = {l} does not solve {prob.describe()}")
    smaller = [x for x in range(prob.first, l) if prob.holds(x)]
    if smaller:
        problems.append(f"l = {smaller[0]} < {l} also solves {prob.describe()}")
    if _row_value(res.row, t, l) != res.value:
        problems.append("row formula does not reproduce the value")
    return problems


# -- sweeps --------------------------------------------------------------------------

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.FloorDiv: operator.floordiv}


def _eval_int(expr: str, env: Mapping[str, int]) -> int:
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return node.value
        if isinstance(node, ast.Name):
            return env[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"unsupported expression {expr!r}")

    return ev(ast.parse(expr, mode="eval"))


def instantiate(pattern: str, env: Mapping[str, int]) -> str:
    """Fill ``{expr}`` holes, e.g. ``A{2*n+1}:r={r}:t=2``."""
    out, i = [], 0
    while i < len(pattern):
        j = pattern.find("{", i)
        if j < 0:
            out.append(pattern[i:])
            break
        k = pattern.index("}", j)
        out.append(pattern[i:j])
        out.append(str(_eval_int(pattern[j + 1:k], env)))
        i = k + 1
    return "".join(out)


@dataclass
class SweepCell:
    params: dict
    char: int
    type_text: str
    result: Optional[CYResult]
    error: str = ""
    audit: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {"params": self.params, "char": self.char, "type": self.type_text}
        if self.result is not None:
            out.update(self.result.to_json())
        else:
            out["error"] = self.error
        out["audit"] = self.audit
        return out


def sweep(pattern: str | Callable[..., AsashibaType], ranges: Mapping[str, Iterable[int]],
          chars: Iterable[int]) -> list[SweepCell]:
    """Evaluate ``scydim`` on the grid ranges x chars; inadmissible cells are kept with an error."""
    names = list(ranges)
    grids = [list(ranges[k]) for k in names]
    chars = list(chars)
    cells = []
    for values in itertools.product(*grids):
        env = dict(zip(names, values))
        for p in chars:
            text = ""
            try:
                if callable(pattern):
                    t = pattern(**env)
                    text = str(t)
                else:
                    text = instantiate(pattern, env)
                    t = parse_type(text)
                res = scydim(t, p)
            except (BadParameters, InadmissibleType) as exc:
                cells.append(SweepCell(env, p, text, None, str(exc)))
                continue
            cells.append(SweepCell(env, p, text, res, audit=recheck(t, res)))
    return cells


def parse_range(text: str) -> dict[str, range]:
    """``"n=1..4,r=1..6"`` -> {'n': range(1, 5), 'r': range(1, 7)}."""
    out = {}
    for part in filter(None, (s.strip() for s in text.split(","))):
        name, _, span = part.partition("=")
        lo, _, hi = span.partition("..")
        if not name or not lo:
            raise ValueError(f"bad range {part!r}")
        out[name.strip()] = range(int(lo), int(hi or lo) + 1)
    return out
