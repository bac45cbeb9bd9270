"""Concrete self-injective algebras of finite type with their companion data.

Supported shapes: (A_{2n+1}, r, 2), (D_n, r, 2), the nonstandard
(D_{3n}, 1/3, 1) series and the truncated polynomial rings k[t]/t^n.
Vertex labels: ``"i"`` for a vertex i, ``"h<i>,<j>"`` for (î, j),
``"<i>,<j>"`` for (i, j) and ``"h<i>"`` for î.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Callable

import numpy as np

from .algebra import (AlgebraError, BoundQuiverAlgebra, FrobeniusForm, Path, Quiver, Relation,
                      build_with_retry, find_frobenius_form, nakayama_automorphism, verify_frobenius)
from .exactlin import Field
from .morph import AlgebraMorphism, conjugation


class UnsupportedType(AlgebraError):
    pass


class WrongCharacteristic(AlgebraError):
    pass


class BadParameters(AlgebraError):
    pass


TREE_CLASSES = ("A", "D", "E")


@dataclass(frozen=True)
class AsashibaType:
    """Type (tree class, frequency, torsion order); ``trunc`` marks k[t]/t^n."""

    tree: str  # "A", "D", "E" or "trunc"
    index: int
    frequency: Fraction
    torsion: int
    standard: bool = True

    def __post_init__(self):
        if self.tree == "trunc":
            if self.index < 1:
                raise BadParameters("k[t]/t^n needs n >= 1")
            return
        if self.tree not in TREE_CLASSES:
            raise BadParameters(f"unknown tree class {self.tree!r}")
        if self.tree == "A" and self.index < 1 or self.tree == "D" and self.index < 4:
            raise BadParameters(f"{self.tree}_{self.index} is not a tree class")
        if self.tree == "E" and self.index not in (6, 7, 8):
            raise BadParameters(f"E_{self.index} is not a tree class")
        if self.torsion not in (1, 2, 3):
            raise BadParameters("torsion order must be 1, 2 or 3")
        if self.frequency <= 0:
            raise BadParameters("frequency must be positive")
        if not self.standard:
            if not (self.tree == "D" and self.index % 3 == 0 and self.index >= 6
                    and self.frequency == Fraction(1, 3) and self.torsion == 1):
                raise BadParameters("nonstandard types are (D_{3n}, 1/3, 1) with n >= 2")
            return
        if not self._admissible():
            raise BadParameters(f"{self} is not an admissible type")

    def _admissible(self) -> bool:
        t, n, f, tor = self.tree, self.index, self.frequency, self.torsion
        if tor == 1:
            # (A_n, s/n, 1), (D_n, s, 1), (D_{3m}, s/3, 1), (E_n, s, 1)
            if t == "A":
                return (f * n).denominator == 1
            if t == "D":
                return f.denominator == 1 or (n % 3 == 0 and n >= 6 and (3 * f).denominator == 1)
            return f.denominator == 1
        if tor == 2:
            return f.denominator == 1 and (t == "A" and n % 2 == 1 and n >= 3 or t == "D" or t == "E" and n == 6)
        return t == "D" and n == 4 and f.denominator == 1

    @property
    def r(self) -> int:
        return int(self.frequency) if self.frequency.denominator == 1 else 0

    @property
    def family(self) -> str:
        """Constructible family tag, or '' when only the classifier covers the type."""
        if self.tree == "trunc":
            return "trunc"
        if not self.standard:
            return "nonstd"
        if self.torsion == 2 and self.tree == "A":
            return "A2"
        if self.torsion == 2 and self.tree == "D":
            return "D2"
        return ""

    def __str__(self):
        if self.tree == "trunc":
            return f"trunc:{self.index}"
        if not self.standard:
            return f"D{self.index}:nonstd"
        return f"{self.tree}{self.index}:r={self.frequency}:t={self.torsion}"


_SHORT_RE = re.compile(r"^([ADE])(\d+):(?:r=(\d+(?:/\d+)?):t=(\d)|(nonstd))$")


def parse_type(text: str) -> AsashibaType:
    """Parse ``A5:r=2:t=2``, ``D6:nonstd``, ``trunc:4``."""
    text = text.strip()
    if text.startswith("trunc:"):
        try:
            return AsashibaType("trunc", int(text[6:]), Fraction(1), 1)
        except ValueError as exc:
            raise BadParameters(f"bad shorthand {text!r}") from exc
    m = _SHORT_RE.match(text)
    if not m:
        raise BadParameters(f"bad type shorthand {text!r}")
    tree, idx = m.group(1), int(m.group(2))
    if m.group(5):
        return AsashibaType(tree, idx, Fraction(1, 3), 1, standard=False)
    return AsashibaType(tree, idx, Fraction(m.group(3)), int(m.group(4)))


# -- bundles -------------------------------------------------------------------------

@dataclass
class FamilyBundle:
    type: AsashibaType
    algebra: BoundQuiverAlgebra
    sigma: AlgebraMorphism
    eps: FrobeniusForm
    period: int
    vertex_index: dict[str, str]
    nakayama: AlgebraMorphism
    notes: list[str] = dc_field(default_factory=list)

    @property
    def field(self) -> Field:
        return self.algebra.field


def _ring(i: int, m: int) -> int:
    """Canonical residue of i modulo m in [1, m]."""
    return (i - 1) % m + 1


def _element(A: BoundQuiverAlgebra, terms) -> np.ndarray:
    f = A.field
    out = A.zero()
    for c, labels in terms:
        out = out + f(c) * A.normal_form(A.quiver.written_path(labels))
    return f.reduce(out) if f.p else out


def _finish(t: AsashibaType, A: BoundQuiverAlgebra, sigma_images: dict, eps: FrobeniusForm, period: int,
            names: dict[str, str]) -> FamilyBundle:
    sigma = AlgebraMorphism.from_generators(A, sigma_images)
    if sigma.vertex_permutation() is None or not sigma.is_automorphism():
        raise AlgebraError("sigma is not an automorphism permuting the vertices")
    verify_frobenius(A, eps)
    nu = nakayama_automorphism(A, eps)
    return FamilyBundle(t, A, sigma, eps, period, names, nu)


def construct_family(t: AsashibaType, field: Field) -> FamilyBundle:
    fam = t.family
    if fam == "trunc":
        return _trunc(t, field)
    if fam == "nonstd":
        if field.characteristic != 2:
            raise WrongCharacteristic("nonstandard algebras exist only in characteristic 2")
        return _nonstandard(t, field)
    if fam == "A2":
        return _type_a(t, field)
    if fam == "D2":
        return _type_d(t, field)
    raise UnsupportedType(f"no construction for {t}")


def _trunc(t: AsashibaType, field: Field) -> FamilyBundle:
    n = t.index
    Q = Quiver(["0"], [("t", "0", "0")])
    rels = [Relation([(1, ("t",) * n)])] if n >= 2 else []
    if n == 1:
        # k itself: no arrow
        Q = Quiver(["0"], [])
        rels = []
    A = build_with_retry(Q, rels, field, max(n, 2))
    eps = FrobeniusForm.from_path_rule(A, lambda p: 1 if p.length == n - 1 else 0)
    images = {a: A.arrow(a) for a in A.quiver.arrows}
    return _finish(t, A, images, eps, 1, {"0": "0"})


def _type_a(t: AsashibaType, field: Field) -> FamilyBundle:
    n = (t.index - 1) // 2
    r = t.r
    if r < 1 or n < 1:
        raise UnsupportedType(f"{t} needs r >= 1 and n >= 1")
    R2 = 2 * r

    def v(i):
        return str(_ring(i, r))

    def vh(i, j):
        return f"h{_ring(i, R2)},{j}"

    def a(i, j):
        return f"a_h{_ring(i, R2)}_{j}"

    vertices = [str(i) for i in range(1, r + 1)] + [vh(i, j) for i in range(1, R2 + 1) for j in range(1, n + 1)]
    arrows = []
    for i in range(1, R2 + 1):
        arrows.append((a(i, 0), v(i), vh(i, 1)))
        for j in range(1, n):
            arrows.append((a(i, j), vh(i, j), vh(i, j + 1)))
        arrows.append((a(i, n), vh(i, n), v(i + 1)))
    Q = Quiver(vertices, arrows)

    def branch(i, hi, lo):
        """alpha_{î,hi} ... alpha_{î,lo} in written order."""
        return [a(i, j) for j in range(hi, lo - 1, -1)]

    rels = []
    for i in range(1, R2 + 1):
        rels.append(Relation.written((1, [a(i + r + 1, 0), a(i, n)])))
        rels.append(Relation.written((1, branch(i, n, 0)), (1, branch(i + r, n, 0))))
        for j in range(1, n):
            rels.append(Relation.written((1, branch(i + 1, j, 0) + branch(i, n, j))))
    A = build_with_retry(Q, rels, field, n + 3)

    minus = {_ring(i, R2) for i in range(-1, r - 1)}  # -1 <= i <= r-2

    def eps_rule(p: Path):
        if p.length != n + 1:
            return 0
        if p.arrows == tuple(reversed(branch(_branch_index(p), n, 0))) and _branch_index(p) in minus:
            return -1
        return 1

    def _branch_index(p: Path) -> int:
        m = re.match(r"a_h(\d+)_0$", p.arrows[0])
        return int(m.group(1)) if m else 0

    eps = FrobeniusForm.from_path_rule(A, eps_rule)

    s = r + n + 1
    neg0 = {_ring(i, R2) for i in range(0, r)}       # 0 <= i <= r-1
    negn = {_ring(i, R2) for i in range(-1, r - 1)}  # -1 <= i <= r-2
    images = {}
    for i in range(1, r + 1):
        images[v(i)] = A.idempotent(v(i + n + 1))
    for i in range(1, R2 + 1):
        for j in range(1, n + 1):
            images[vh(i, j)] = A.idempotent(vh(i + s, j))
        for j in range(0, n + 1):
            sign = -1 if (j == 0 and i in neg0) or (j == n and i in negn) else 1
            images[a(i, j)] = field.reduce(field(sign) * A.arrow(a(i + s, j))) if field.p else field(sign) * A.arrow(a(i + s, j))
    names = {str(i): v(i) for i in range(1, r + 1)}
    names.update({f"({i}^,{j})": vh(i, j) for i in range(1, R2 + 1) for j in range(1, n + 1)})
    bundle = _finish(t, A, images, eps, 2 * n + 1, names)
    bundle.notes.append("sign ranges -1 <= i <= r-2 read as residues mod 2r")
    return bundle


def _type_d(t: AsashibaType, field: Field) -> FamilyBundle:
    n = t.index
    r = t.r
    if r < 1:
        raise UnsupportedType(f"{t} needs integral r >= 1")
    R2 = 2 * r

    def vij(i, j):
        return f"{_ring(i, r)},{j}"

    def vh(i):
        return f"h{_ring(i, R2)}"

    def al(i, j):
        return f"a_{_ring(i, r)}_{j}"

    def be(i):
        return f"b_h{_ring(i, R2)}"

    def ga(i):
        return f"g_h{_ring(i, R2)}"

    vertices = [vij(i, j) for i in range(1, r + 1) for j in range(1, n - 1)] + [vh(i) for i in range(1, R2 + 1)]
    arrows = []
    for i in range(1, R2 + 1):
        arrows.append((ga(i), vij(i, n - 2), vh(i)))
        arrows.append((be(i), vh(i), vij(i + 1, 1)))
    for i in range(1, r + 1):
        for j in range(1, n - 2):
            arrows.append((al(i, j), vij(i, j), vij(i, j + 1)))
    Q = Quiver(vertices, arrows)

    def chain(i, hi, lo):
        return [al(i, j) for j in range(hi, lo - 1, -1)]

    rels = []
    for i in range(1, R2 + 1):
        rels.append(Relation.written((1, [ga(i + r)] + chain(i, n - 3, 1) + [be(i - 1)])))
        rels.append(Relation.written((1, [be(i), ga(i)]), (-1, [be(i + r), ga(i + r)])))
    for i in range(1, r + 1):
        for j in range(1, n - 2):
            rels.append(Relation.written((1, chain(i + 1, j, 1) + [be(i), ga(i)] + chain(i, n - 3, j))))
    A = build_with_retry(Q, rels, field, n + 1)
    eps = FrobeniusForm.from_path_rule(A, lambda p: 1 if p.length == n - 1 else 0)

    s = n - 1
    sh = n - 1 + r * n
    images = {}
    for i in range(1, r + 1):
        for j in range(1, n - 1):
            images[vij(i, j)] = A.idempotent(vij(i + s, j))
        for j in range(1, n - 2):
            images[al(i, j)] = A.arrow(al(i + s, j))
    for i in range(1, R2 + 1):
        images[vh(i)] = A.idempotent(vh(i + sh))
        images[be(i)] = A.arrow(be(i + sh))
        sign = 1 if i % r == 0 else -1
        images[ga(i)] = field.reduce(field(sign) * A.arrow(ga(i + sh))) if field.p else field(sign) * A.arrow(ga(i + sh))
    names = {f"({i},{j})": vij(i, j) for i in range(1, r + 1) for j in range(1, n - 1)}
    names.update({f"{i}^": vh(i) for i in range(1, R2 + 1)})
    return _finish(t, A, images, eps, 2 * n - 3, names)


def nonstandard_relations(n: int) -> list[Relation]:
    """Relations of the nonstandard (D_{3n}, 1/3, 1) algebra.

    The length-(n+1) zero relations run from i to i+1 through 0
    (``mu_{i+1} nu_i`` for 1 <= i <= n-2); there are none when n = 2.
    """
    def a(i):
        return f"alpha{i % n}"

    def nu(i):  # alpha_{n-1} ... alpha_i
        return [a(j) for j in range(n - 1, i - 1, -1)]

    def mu(i):  # alpha_{i-1} ... alpha_0
        return [a(j) for j in range(i - 1, -1, -1)]

    rels = [Relation.written((1, [a(0), a(n - 1)]), (1, [a(0), "beta", a(n - 1)])),
            Relation.written((1, ["beta", "beta"]), (-1, nu(0)))]
    for i in range(1, n - 1):
        rels.append(Relation.written((1, mu(i + 1) + nu(i))))
    return rels


def _nonstandard(t: AsashibaType, field: Field) -> FamilyBundle:
    n = t.index // 3
    vertices = [str(i) for i in range(n)]
    arrows = [("beta", "0", "0")] + [(f"alpha{i}", str(i), str((i + 1) % n)) for i in range(n)]
    Q = Quiver(vertices, arrows)
    A = build_with_retry(Q, nonstandard_relations(n), field, n + 3)
    eps = find_frobenius_form(A, symmetric=True)
    images = {f"alpha{i}": A.arrow(f"alpha{i}") for i in range(n)}
    images["beta"] = _element(A, [(1, ["beta"]), (1, ["beta", "beta"]), (1, ["beta", "beta", "beta"])])
    names = {str(i): str(i) for i in range(n)}
    bundle = _finish(t, A, images, eps, 4 * n - 2, names)
    if not bundle.nakayama.is_identity():
        raise AlgebraError("internal: symmetric form gave a nontrivial Nakayama automorphism")
    return bundle


# -- expected resolution terms ------------------------------------------------------------

def _pattern_a(n: int, r: int, d: int) -> Counter:
    R2 = 2 * r

    def v(i):
        return str(_ring(i, r))

    def vh(i, j):
        return f"h{_ring(i, R2)},{j}"

    out = Counter()
    if d % 2 == 0:
        m = d // 2
        for i in range(1, r + 1):
            out[(v(i + m), v(i))] += 1
        for i in range(1, R2 + 1):
            for j in range(1, n - m + 1):
                out[(vh(i + m, j + m), vh(i, j))] += 1
            for j in range(n - m + 1, n + 1):
                out[(vh(i + r + m, j + m - n), vh(i, j))] += 1
    else:
        m = (d - 1) // 2
        for i in range(1, R2 + 1):
            out[(vh(i + m, m + 1), v(i))] += 1
            for j in range(1, n - m):
                out[(vh(i + m, j + m + 1), vh(i, j))] += 1
            out[(v(i + m + 1), vh(i, n - m))] += 1
            for j in range(n - m + 1, n + 1):
                out[(vh(i + r + m + 1, j + m - n), vh(i, j))] += 1
    return out


def _pattern_d(n: int, r: int, d: int) -> Counter:
    R2 = 2 * r

    def vij(i, j):
        return f"{_ring(i, r)},{j}"

    def vh(i):
        return f"h{_ring(i, R2)}"

    out = Counter()
    if d % 2 == 0:
        m = d // 2
        for i in range(1, r + 1):
            for j in range(1, n - 1 - m):
                out[(vij(i + m, j + m), vij(i, j))] += 1
            for j in range(n - 1 - m, n - 1):
                out[(vij(i + m, j + m - (n - 2)), vij(i, j))] += 1
        for i in range(1, R2 + 1):
            out[(vh(i + m * (r + 1)), vh(i))] += 1
    else:
        m = (d - 1) // 2
        for i in range(1, r + 1):
            for j in range(1, n - 2 - m):
                out[(vij(i + m, j + m + 1), vij(i, j))] += 1
            for j in range(n - 1 - m, n - 1):
                out[(vij(i + m + 1, j + m - (n - 2)), vij(i, j))] += 1
        for i in range(1, R2 + 1):
            out[(vh(i + m), vij(i, n - 2 - m))] += 1
            out[(vij(i + m + 1, m + 1), vh(i))] += 1
    return out


def _t_even(n: int, m: int) -> Counter:
    out = Counter({("0", "0"): 1})
    for i in range(1, n - m):
        out[(str(i + m), str(i))] += 1
    for i in range(n - m, n):
        out[(str(i + m - (n - 1)), str(i))] += 1
    return out


def _t_odd_prime(n: int, m: int) -> Counter:
    out = Counter()
    for i in range(0, n - 1 - m):
        out[(str(i + m + 1), str(i))] += 1
    for i in range(n - 1 - m, n):
        out[(str(i + m - (n - 1)), str(i))] += 1
    return out


def _t_odd(n: int, m: int) -> Counter:
    return _t_odd_prime(n, m) + Counter({("0", "0"): 1})


def _pattern_nonstd(n: int, d: int) -> Counter:
    if n % 2 == 0:
        t = d % (2 * n - 1)
        if t % 2 == 0:
            return _t_even(n, t // 2)
        return _t_odd(n, t // 2) if t % 4 == 1 else _t_odd_prime(n, t // 2)
    t = d % (4 * n - 2)
    if t <= 2 * n - 2:
        if t % 2 == 0:
            return _t_even(n, t // 2)
        return _t_odd(n, t // 2) if t % 4 == 1 else _t_odd_prime(n, t // 2)
    u = t - (2 * n - 1)
    if u % 2 == 0:
        return _t_even(n, u // 2)
    return _t_odd_prime(n, u // 2) if u % 4 == 1 else _t_odd(n, u // 2)


def expected_resolution_term(t: AsashibaType, degree: int, sigma_vertices: dict[str, str] | None = None) -> Counter:
    """Multiset of vertex pairs ``(v, u)``, one per summand P_[v][u] of Q_degree.

    ``sigma_vertices`` is the vertex permutation of sigma; it is derived from
    the index shifts when omitted.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    fam = t.family
    if fam == "nonstd":
        return _pattern_nonstd(t.index // 3, degree)
    if fam == "trunc":
        n = t.index
        if n == 1:
            return Counter({("0", "0"): 1}) if degree == 0 else Counter()
        return Counter({("0", "0"): 1})
    if fam == "A2":
        n = (t.index - 1) // 2
        r = t.r
        if n % 2:
            raise UnsupportedType("resolution terms are known only for even n")
        period = 2 * n + 1
        base = lambda d: _pattern_a(n, r, d)
        perm = sigma_vertices or _sigma_vertices_a(n, r)
    elif fam == "D2":
        n = t.index
        r = t.r
        if r % 2:
            raise UnsupportedType("resolution terms are known only for even r")
        period = 2 * n - 3
        base = lambda d: _pattern_d(n, r, d)
        perm = sigma_vertices or _sigma_vertices_d(n, r)
    else:
        raise UnsupportedType(f"no resolution data for {t}")
    l, rem = divmod(degree, period)
    pat = base(rem)
    for _ in range(l):
        pat = Counter({(perm[v], u): c for (v, u), c in pat.items()})
    return pat


def _sigma_vertices_a(n: int, r: int) -> dict[str, str]:
    R2 = 2 * r
    out = {str(i): str(_ring(i + n + 1, r)) for i in range(1, r + 1)}
    for i in range(1, R2 + 1):
        for j in range(1, n + 1):
            out[f"h{i},{j}"] = f"h{_ring(i + r + n + 1, R2)},{j}"
    return out


def _sigma_vertices_d(n: int, r: int) -> dict[str, str]:
    R2 = 2 * r
    out = {f"{i},{j}": f"{_ring(i + n - 1, r)},{j}" for i in range(1, r + 1) for j in range(1, n - 1)}
    for i in range(1, R2 + 1):
        out[f"h{i}"] = f"h{_ring(i + n - 1 + r * n, R2)}"
    return out


# -- the explicit inner witness for (A_{2n+1}, r, 2) -----------------------------------------

def p_l(q: int, l: int, r: int, n: int) -> int:
    return sum(1 for s in range(l + 1) if (q + s * (r + n + 1)) % (2 * r) == 0)


def witness_inner_element(bundle: FamilyBundle, l: int) -> np.ndarray:
    """The unit a with nu sigma^l (x) = a^{-1} x a, checked on every basis element."""
    t = bundle.type
    if t.family != "A2":
        raise BadParameters("the witness is defined for (A_{2n+1}, r, 2) only")
    n = (t.index - 1) // 2
    r = t.r
    if l <= 0 or l % 2 == 0 or (l * (r + n + 1) - 1) % (2 * r):
        raise BadParameters(f"l = {l} does not satisfy 2r | l(r+n+1) - 1 with l odd")
    A = bundle.algebra
    f = A.field
    a = A.zero()
    for v, idx in A.vertex_index.items():
        if v.startswith("h"):
            a[idx] = f(1)
        else:
            i = int(v)
            e = sum(p_l(q, l, r, n) for q in range(i - r + 1, i + 1))
            a[idx] = f((-1) ** e)
    target = bundle.nakayama.compose(bundle.sigma.power(l))
    conj = conjugation(A, a)
    if not np.array_equal(conj.matrix, target.matrix):
        raise AlgebraError("conjugation by the witness does not reproduce nu sigma^l")
    return a
