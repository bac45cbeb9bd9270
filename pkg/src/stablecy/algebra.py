"""Bound quiver algebras kQ/I built by exact linear algebra.

Products follow composition order: for paths ``p`` and ``q`` the product
``p * q`` means "traverse q, then p", matching the way relations are written
(``a_k ... a_1``).  Internally a path is stored in traversal order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .exactlin import Field, NoSolution, Subspace, inverse, kernel_basis, rank, rref


class AlgebraError(ValueError):
    pass


class NotAdmissible(AlgebraError):
    pass


class BoundTooSmall(AlgebraError):
    def __init__(self, bound: int, witness=None):
        super().__init__(f"length bound {bound} too small: some path of that length survives")
        self.bound = bound
        self.witness = witness


class Degenerate(AlgebraError):
    """The Gram matrix of a candidate Frobenius form is singular."""


class NotMultiplicative(AlgebraError):
    pass


class ParseError(AlgebraError):
    def __init__(self, message: str, line: int | None = None):
        loc = f"line {line}: " if line is not None else ""
        super().__init__(loc + message)
        self.line = line


# -- quivers and paths ------------------------------------------------------

@dataclass(frozen=True)
class Arrow:
    label: str
    source: str
    target: str


class Path(NamedTuple):
    """A path in traversal order; ``arrows == ()`` is the trivial path at ``source``."""

    source: str
    target: str
    arrows: tuple[str, ...]

    def __len__(self):  # path length, not tuple length
        return len(self.arrows)

    @property
    def length(self) -> int:
        return len(self.arrows)

    def written(self) -> str:
        """Composition notation, last arrow first."""
        if not self.arrows:
            return f"e_{self.source}"
        return " ".join(reversed(self.arrows))


class Quiver:
    def __init__(self, vertices: Iterable[str], arrows: Iterable[tuple[str, str, str]]):
        self.vertices: list[str] = [str(v) for v in vertices]
        if len(set(self.vertices)) != len(self.vertices):
            raise AlgebraError("duplicate vertex labels")
        vs = set(self.vertices)
        self.arrows: dict[str, Arrow] = {}
        for label, s, t in arrows:
            if label in self.arrows:
                raise AlgebraError(f"duplicate arrow label {label!r}")
            if s not in vs or t not in vs:
                raise AlgebraError(f"arrow {label!r} uses an undeclared vertex")
            self.arrows[label] = Arrow(label, s, t)
        self.out_arrows = {v: [a for a in self.arrows.values() if a.source == v] for v in self.vertices}
        self.in_arrows = {v: [a for a in self.arrows.values() if a.target == v] for v in self.vertices}

    def trivial(self, v: str) -> Path:
        return Path(v, v, ())

    def path(self, arrows: Sequence[str]) -> Path:
        """Path from arrow labels in traversal order (first arrow first)."""
        arrows = tuple(arrows)
        if not arrows:
            raise AlgebraError("use trivial() for trivial paths")
        cur = self.arrows[arrows[0]].source
        for a in arrows:
            arr = self.arrows.get(a)
            if arr is None:
                raise AlgebraError(f"unknown arrow {a!r}")
            if arr.source != cur:
                raise AlgebraError(f"arrows {arrows} are not composable")
            cur = arr.target
        return Path(self.arrows[arrows[0]].source, cur, arrows)

    def written_path(self, labels: Sequence[str]) -> Path:
        """Path from composition notation ``a_k ... a_1``."""
        return self.path(tuple(reversed(tuple(labels))))

    def paths_up_to(self, length: int) -> list[Path]:
        out = [self.trivial(v) for v in self.vertices]
        frontier = [p for p in out]
        for _ in range(length):
            nxt = []
            for p in frontier:
                for a in self.out_arrows[p.target]:
                    nxt.append(Path(p.source, a.target, p.arrows + (a.label,)))
            out.extend(nxt)
            frontier = nxt
        return out


@dataclass
class Relation:
    """Linear combination of parallel paths (each given in traversal order)."""

    terms: list[tuple[object, tuple[str, ...]]]

    @classmethod
    def written(cls, *terms: tuple[object, str | Sequence[str]]) -> "Relation":
        """Terms in composition notation, e.g. ``(1, "b b"), (-1, "a1 a0")``."""
        out = []
        for c, w in terms:
            labels = w.split() if isinstance(w, str) else list(w)
            out.append((c, tuple(reversed(labels))))
        return cls(out)

    def validate(self, quiver: Quiver) -> list[tuple[object, Path]]:
        if not self.terms:
            raise AlgebraError("empty relation")
        paths = []
        for c, arrows in self.terms:
            if len(arrows) < 2:
                raise NotAdmissible(f"relation term {' '.join(reversed(arrows)) or '<trivial>'} has length < 2")
            paths.append((c, quiver.path(arrows)))
        ends = {(p.source, p.target) for _, p in paths}
        if len(ends) != 1:
            raise AlgebraError("relation paths are not parallel")
        return paths


# -- finite-dimensional algebras ----------------------------------------------

class FDAlgebra:
    """Finite-dimensional algebra given by structure constants.

    ``struct[i, j, k]`` is the coefficient of ``b_k`` in ``b_i * b_j``.
    ``degree[i]`` is the radical filtration degree of ``b_i`` (basis elements of
    degree >= m span rad^m) and ``vertex_index`` lists the coordinates of the
    primitive idempotents, which form a basis modulo the radical.
    """

    def __init__(self, field: Field, struct: np.ndarray, degree: Sequence[int], vertex_index: dict[str, int],
                 names: Sequence[str] | None = None):
        self.field = field
        self.struct = struct
        self.dim = struct.shape[0]
        self.degree = list(degree)
        self.vertex_index = dict(vertex_index)
        self.names = list(names) if names is not None else [f"b{i}" for i in range(self.dim)]
        d = self.dim
        self._left_flat = struct.reshape(d, d * d)
        self._right_flat = np.ascontiguousarray(struct.transpose(1, 0, 2)).reshape(d, d * d)

    # elements
    def zero(self) -> np.ndarray:
        return self.field.zeros(self.dim)

    def basis_vector(self, i: int) -> np.ndarray:
        v = self.zero()
        v[i] = self.field(1)
        return v

    def one(self) -> np.ndarray:
        v = self.zero()
        for i in self.vertex_index.values():
            v[i] = self.field(1)
        return v

    def idempotent(self, v: str) -> np.ndarray:
        return self.basis_vector(self.vertex_index[v])

    @property
    def vertices(self) -> list[str]:
        return list(self.vertex_index)

    def mul(self, x, y) -> np.ndarray:
        f = self.field
        return f.matmul(y, f.matmul(x, self._left_flat).reshape(self.dim, self.dim))

    def lmat(self, x) -> np.ndarray:
        """Matrix of ``y -> x*y`` acting on column vectors."""
        return self.field.matmul(x, self._left_flat).reshape(self.dim, self.dim).T.copy()

    def rmat(self, y) -> np.ndarray:
        """Matrix of ``x -> x*y`` acting on column vectors."""
        return self.field.matmul(y, self._right_flat).reshape(self.dim, self.dim).T.copy()

    @property
    def loewy_length(self) -> int:
        return max(self.degree) + 1 if self.dim else 0

    def radical_power(self, m: int) -> Subspace:
        f = self.field
        rows = [self.basis_vector(i) for i in range(self.dim) if self.degree[i] >= m]
        return Subspace(f, self.dim, rows)

    def radical_generators(self) -> list[np.ndarray]:
        """Elements generating rad(A) as a two-sided ideal (degree-one basis elements)."""
        return [self.basis_vector(i) for i in range(self.dim) if self.degree[i] == 1]

    def socle(self, side: str = "left") -> Subspace:
        """``{x : rad*x = 0}`` (left) or ``{x : x*rad = 0}`` (right)."""
        return self.socle_power(1, side)

    def socle_power(self, m: int, side: str = "left") -> Subspace:
        """m-th socle of the regular module: kernel of multiplication by rad^m."""
        f = self.field
        gens = [self.basis_vector(i) for i in range(self.dim) if self.degree[i] >= m]
        if not gens:
            return Subspace.full(f, self.dim)
        if side == "left":
            mats = [self.lmat(g) for g in gens]
        elif side == "right":
            mats = [self.rmat(g) for g in gens]
        else:
            raise ValueError("side must be 'left' or 'right'")
        ker = kernel_basis(np.concatenate(mats, axis=0), f)
        return Subspace(f, self.dim, ker)

    def is_associative(self) -> bool:
        f = self.field
        c = self.struct
        lhs = f.reduce(np.einsum("ijl,lkm->ijkm", c, c))  # (b_i b_j) b_k
        rhs = f.reduce(np.einsum("jkl,ilm->ijkm", c, c))  # b_i (b_j b_k)
        return np.array_equal(lhs, rhs)

    def is_unit(self, x) -> bool:
        return rank(self.lmat(x), self.field) == self.dim

    def inverse_element(self, x) -> np.ndarray:
        sol = _solve_square(self.lmat(x), self.one(), self.field)
        return sol

    def gram(self, eps) -> np.ndarray:
        """Gram matrix ``G[i, j] = eps(b_i b_j)``."""
        f = self.field
        eps = f.array(eps)
        return f.matmul(self.struct.reshape(self.dim * self.dim, self.dim), eps).reshape(self.dim, self.dim)

    def format_element(self, x) -> str:
        f = self.field
        x = f.array(x)
        parts = []
        for i in np.flatnonzero(x != 0):
            c = x[i]
            parts.append(self.names[i] if c == 1 else f"{f.to_json(c)}*{self.names[i]}")
        return " + ".join(parts) if parts else "0"


def _solve_square(m, b, f: Field):
    from .exactlin import solve
    x, _ = solve(m, b, f)
    return x


# -- bound quiver algebras ------------------------------------------------------

def _order_key(p: Path, vorder: dict[str, int]):
    return (p.length, p.arrows, vorder[p.source])


class BoundQuiverAlgebra(FDAlgebra):
    """kQ/I with a path basis.

    The basis consists of the paths that are not leading terms of the ideal,
    where shorter paths count as *larger* (so the basis is filtered by the
    radical: basis paths of length >= m span rad^m) and ties are broken by
    preferring the lexicographically smaller arrow sequence.
    """

    def __init__(self, quiver: Quiver, relations: list[Relation], field: Field, length_bound: int,
                 paths: list[Path], closure: dict, basis: list[Path], nf: dict[Path, np.ndarray], struct: np.ndarray):
        self.quiver = quiver
        self.relations = relations
        self.length_bound = length_bound
        self.all_paths = paths
        self._closure = closure
        self.basis = basis
        self.index = {p: i for i, p in enumerate(basis)}
        self._nf = nf
        vertex_index = {v: self.index[quiver.trivial(v)] for v in quiver.vertices}
        super().__init__(field, struct, [p.length for p in basis], vertex_index, [p.written() for p in basis])
        self.arrow_index = {a: self.index[quiver.path((a,))] for a in quiver.arrows}
        self.source = [p.source for p in basis]
        self.target = [p.target for p in basis]

    def normal_form(self, path: Path | Sequence[str]) -> np.ndarray:
        if not isinstance(path, Path):
            path = self.quiver.path(tuple(path))
        if path.length >= self.length_bound:
            return self.zero()
        return self._nf[path].copy()

    def element(self, terms: Iterable[tuple[object, Sequence[str] | str]]) -> np.ndarray:
        """Element from ``(coeff, written path)`` pairs; a vertex label stands for its idempotent."""
        f = self.field
        out = self.zero()
        for c, w in terms:
            labels = w.split() if isinstance(w, str) else list(w)
            if len(labels) == 1 and labels[0] in self.vertex_index and labels[0] not in self.quiver.arrows:
                vec = self.idempotent(labels[0])
            else:
                vec = self.normal_form(self.quiver.written_path(labels))
            out = f.reduce(out + f(c) * vec) if f.p else out + f(c) * vec
        return out

    def arrow(self, label: str) -> np.ndarray:
        return self.basis_vector(self.arrow_index[label])

    def in_ideal(self, terms: Iterable[tuple[object, Path]]) -> bool:
        """Membership of a path combination (paths of length <= bound) in the ideal closure."""
        f = self.field
        out = self.zero()
        for c, p in terms:
            out = out + f(c) * self.normal_form(p)
        return f.is_zero(f.reduce(out))

    def block_basis(self, source: str, target: str) -> list[int]:
        return [i for i, p in enumerate(self.basis) if p.source == source and p.target == target]

    def dims_by_length(self) -> list[int]:
        counts = [0] * self.loewy_length
        for p in self.basis:
            counts[p.length] += 1
        return counts

    def describe(self) -> str:
        return f"BoundQuiverAlgebra(dim={self.dim}, vertices={len(self.quiver.vertices)}, field={self.field})"


def build_algebra(quiver: Quiver, relations: list[Relation], field: Field, length_bound: int) -> BoundQuiverAlgebra:
    """Construct kQ/I for an admissible ideal I generated by ``relations``.

    The ideal is saturated inside the span of paths of length <= ``length_bound``
    (products longer than the bound are dropped) and every path of length exactly
    ``length_bound`` must end up in it, which certifies rad^bound = 0.
    """
    if length_bound < 2:
        raise AlgebraError("length_bound must be at least 2")
    rels = [r.validate(quiver) for r in relations]
    for terms in rels:
        for _, p in terms:
            if p.length > length_bound:
                raise BoundTooSmall(length_bound, p)
    vorder = {v: i for i, v in enumerate(quiver.vertices)}
    paths = quiver.paths_up_to(length_bound)

    # Per (source, target) block: column order puts larger paths first, so
    # pivots are leading terms.  Larger = shorter, then lexicographically larger.
    blocks: dict[tuple[str, str], list[Path]] = {}
    for p in paths:
        blocks.setdefault((p.source, p.target), []).append(p)
    for key, ps in blocks.items():
        ps.sort(key=lambda p: (p.length, tuple(_neg_str(a) for a in p.arrows), -vorder[p.source]))
    col = {key: {p: i for i, p in enumerate(ps)} for key, ps in blocks.items()}

    f = field
    spaces: dict[tuple[str, str], Subspace] = {key: Subspace(f, len(ps)) for key, ps in blocks.items()}
    pending: dict[tuple[str, str], list[np.ndarray]] = {}
    for terms in rels:
        key = (terms[0][1].source, terms[0][1].target)
        v = f.zeros(len(blocks[key]))
        for c, p in terms:
            v[col[key][p]] = f(v[col[key][p]] + f(c))
        pending.setdefault(key, []).append(v)

    # left multiplication by arrow a (a after p) and right multiplication (p after a)
    def left_mult(key, vecs, a: Arrow):
        s, t = key
        nkey = (s, a.target)
        ps = blocks[key]
        out = f.zeros((vecs.shape[0], len(blocks.get(nkey, ()))))
        if nkey not in blocks:
            return nkey, out
        for i, p in enumerate(ps):
            if p.length + 1 > length_bound:
                continue
            q = Path(p.source, a.target, p.arrows + (a.label,))
            out[:, col[nkey][q]] = vecs[:, i]
        return nkey, out

    def right_mult(key, vecs, a: Arrow):
        s, t = key
        nkey = (a.source, t)
        ps = blocks[key]
        if nkey not in blocks:
            return nkey, f.zeros((vecs.shape[0], 0))
        out = f.zeros((vecs.shape[0], len(blocks[nkey])))
        for i, p in enumerate(ps):
            if p.length + 1 > length_bound:
                continue
            q = Path(a.source, p.target, (a.label,) + p.arrows)
            out[:, col[nkey][q]] = vecs[:, i]
        return nkey, out

    while pending:
        new: dict[tuple[str, str], np.ndarray] = {}
        for key, vecs in pending.items():
            sp = spaces[key]
            vecs = np.stack(vecs) if isinstance(vecs, list) else vecs
            rem = sp.reduce(vecs)
            if f.is_zero(rem):
                continue
            added = Subspace(f, sp.n, rem)
            spaces[key] = sp.sum(added)
            new[key] = added.basis
        pending = {}
        for key, vecs in new.items():
            s, t = key
            for a in quiver.out_arrows[t]:
                nkey, prod = left_mult(key, vecs, a)
                if prod.shape[1] and not f.is_zero(prod):
                    pending.setdefault(nkey, []).extend(list(prod))
            for a in quiver.in_arrows[s]:
                nkey, prod = right_mult(key, vecs, a)
                if prod.shape[1] and not f.is_zero(prod):
                    pending.setdefault(nkey, []).extend(list(prod))

    # normal forms
    nf_local: dict[Path, tuple[tuple[str, str], np.ndarray]] = {}
    basis: list[Path] = []
    for key, ps in blocks.items():
        sp = spaces[key]
        pivset = set(sp.pivots)
        for i, p in enumerate(ps):
            if i not in pivset:
                basis.append(p)
    pivot_sets = {key: set(sp.pivots) for key, sp in spaces.items()}
    for p in paths:
        if p.length == length_bound and col[(p.source, p.target)][p] not in pivot_sets[(p.source, p.target)]:
            raise BoundTooSmall(length_bound, p)
    basis.sort(key=lambda p: _order_key(p, vorder))
    index = {p: i for i, p in enumerate(basis)}
    d = len(basis)
    nf: dict[Path, np.ndarray] = {}
    for key, ps in blocks.items():
        sp = spaces[key]
        row_of = {pc: r for r, pc in enumerate(sp.pivots)}
        for i, p in enumerate(ps):
            v = f.zeros(d)
            if i in row_of:
                row = sp.basis[row_of[i]]
                for j in np.flatnonzero(row != 0):
                    if j == i:
                        continue
                    v[index[ps[j]]] = f.neg(row[j])
            else:
                v[index[p]] = f(1)
            nf[p] = v

    struct = f.zeros((d, d, d))
    for i, bi in enumerate(basis):
        for j, bj in enumerate(basis):
            if bj.target != bi.source:
                continue
            length = bi.length + bj.length
            if length >= length_bound:
                continue
            prod = Path(bj.source, bi.target, bj.arrows + bi.arrows)
            struct[i, j] = nf[prod]
    return BoundQuiverAlgebra(quiver, relations, field, length_bound, paths, spaces, basis, nf, struct)


def _neg_str(s: str):
    # sort key making lexicographically larger labels come first
    return tuple(-ord(ch) for ch in s) + (1,)


def build_with_retry(quiver: Quiver, relations: list[Relation], field: Field, length_bound: int,
                     max_bound: int = 64) -> BoundQuiverAlgebra:
    """``build_algebra`` doubling the bound on :class:`BoundTooSmall`."""
    bound = length_bound
    while True:
        try:
            return build_algebra(quiver, relations, field, bound)
        except BoundTooSmall:
            if bound * 2 > max_bound:
                raise
            bound *= 2


# -- Frobenius forms and the Nakayama automorphism --------------------------------

@dataclass
class FrobeniusForm:
    """Values of a linear functional on the basis of an algebra."""

    values: np.ndarray

    @classmethod
    def from_path_rule(cls, A: BoundQuiverAlgebra, rule: Callable[[Path], object]) -> "FrobeniusForm":
        """Functional given by its values on paths.

        The rule is read on the basis paths and must agree with the resulting
        functional on every path that is nonzero in ``A`` (paths lying in the
        ideal are not constrained).
        """
        f = A.field
        vals = f.zeros(A.dim)
        for i, p in enumerate(A.basis):
            vals[i] = f(rule(p))
        for p in A.all_paths:
            if p.length >= A.length_bound:
                continue
            nf = A.normal_form(p)
            if f.is_zero(nf):
                continue
            if f(f.matmul(nf, vals)) != f(rule(p)):
                raise AlgebraError(f"functional not well defined on {p.written()}")
        return cls(vals)

    def __call__(self, x):
        return x @ self.values


def verify_frobenius(A: FDAlgebra, eps: FrobeniusForm) -> np.ndarray:
    g = A.gram(eps.values)
    if rank(g, A.field) != A.dim:
        raise Degenerate("Gram matrix is singular")
    return g


def is_symmetric_form(A: FDAlgebra, eps: FrobeniusForm) -> bool:
    g = A.gram(eps.values)
    return np.array_equal(g, g.T)


def nakayama_automorphism(A: FDAlgebra, eps: FrobeniusForm):
    """The automorphism nu with eps(a b) = eps(b nu(a)), verified multiplicative."""
    from .morph import AlgebraMorphism

    f = A.field
    g = verify_frobenius(A, eps)
    mat = f.matmul(inverse(g, f), g.T)
    try:
        return AlgebraMorphism(A, mat)
    except AlgebraError as exc:
        raise NotMultiplicative(str(exc)) from exc


def find_frobenius_form(A: FDAlgebra, symmetric: bool = False, seed: int = 0, tries: int = 200) -> FrobeniusForm:
    """Search the (symmetric) functionals for a nondegenerate one.

    Candidates are tried in a fixed order: the solution-space basis vectors in
    row-reduced order, their sum, then seeded random combinations.
    """
    f = A.field
    d = A.dim
    if symmetric:
        c = A.struct
        # eps(b_i b_j) - eps(b_j b_i) = 0 for all i < j
        rows = f.reduce(c - c.transpose(1, 0, 2)).reshape(d * d, d)
        space = kernel_basis(rows, f)
    else:
        space = f.eye(d)
    if len(space) == 0:
        raise Degenerate("no candidate functionals")
    space, _ = rref(space, f)
    cands = [space[i] for i in range(len(space))]
    cands.append(f.reduce(space.sum(axis=0)) if f.p else space.sum(axis=0))
    rng = np.random.default_rng(seed)
    for cand in cands:
        if rank(A.gram(cand), f) == d:
            return FrobeniusForm(cand)
    for _ in range(tries):
        coeff = f.random(rng, len(space))
        cand = f.matmul(coeff, space)
        if rank(A.gram(cand), f) == d:
            return FrobeniusForm(cand)
    raise Degenerate("no nondegenerate functional found")


# -- text format ------------------------------------------------------------------

_ARROW_RE = re.compile(r"^arrow\s+(\S+?)\s*:\s*(\S+)\s*->\s*(\S+)$")


def parse_algebra_text(text: str, field: Field | None = None):
    """Parse the line-oriented algebra description.

    Returns ``(quiver, relations, field, bound)``.  The ``field`` argument, when
    given, overrides the file's ``field`` line.
    """
    vertices: list[str] = []
    arrows: list[tuple[str, str, str]] = []
    rel_lines: list[tuple[int, str]] = []
    file_field = None
    bound = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("field"):
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("expected 'field <p|Q>'", lineno)
            try:
                file_field = Field(0 if parts[1] in ("Q", "0") else int(parts[1]))
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from exc
        elif line.startswith("vertex"):
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("expected 'vertex <label>'", lineno)
            vertices.append(parts[1])
        elif line.startswith("arrow"):
            m = _ARROW_RE.match(line)
            if not m:
                raise ParseError("expected 'arrow <label>: <src> -> <tgt>'", lineno)
            arrows.append((m.group(1), m.group(2), m.group(3)))
        elif line.startswith("relation"):
            body = line[len("relation"):].lstrip()
            if not body.startswith(":"):
                raise ParseError("expected 'relation: <terms>'", lineno)
            rel_lines.append((lineno, body[1:].strip()))
        elif line.startswith("bound"):
            parts = line.split()
            try:
                bound = int(parts[1])
            except (IndexError, ValueError) as exc:
                raise ParseError("expected 'bound <L>'", lineno) from exc
        else:
            raise ParseError(f"unrecognised line {line!r}", lineno)
    fld = field or file_field or Field(2)
    try:
        quiver = Quiver(vertices, arrows)
    except AlgebraError as exc:
        raise ParseError(str(exc)) from exc
    relations = []
    for lineno, body in rel_lines:
        try:
            rel = parse_relation(body, fld)
            rel.validate(quiver)
        except (AlgebraError, KeyError, ValueError) as exc:
            raise ParseError(f"bad relation: {exc}", lineno) from exc
        relations.append(rel)
    if bound is None:
        longest = max((len(a) for r in relations for _, a in r.terms), default=1)
        bound = longest + 2
    return quiver, relations, fld, bound


_TERM_RE = re.compile(r"^(?:([+-]?\s*\d+(?:/\d+)?)\s*\*\s*)?<\s*([^<>]*?)\s*>$")


def parse_relation(body: str, field: Field) -> Relation:
    """Terms like ``1*<b b> + -1*<a1 a0>`` (paths in composition order)."""
    if not body:
        raise ParseError("empty relation")
    # split on '+' that is outside angle brackets
    pieces, depth, cur = [], 0, ""
    for ch in body:
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
        if ch == "+" and depth == 0:
            pieces.append(cur)
            cur = ""
        else:
            cur += ch
    pieces.append(cur)
    terms = []
    for piece in pieces:
        piece = piece.strip()
        sign = 1
        while piece.startswith("-") and "*" not in piece.split("<", 1)[0]:
            sign = -sign
            piece = piece[1:].strip()
        m = _TERM_RE.match(piece)
        if not m:
            raise ParseError(f"cannot parse term {piece!r}")
        coeff = m.group(1)
        from fractions import Fraction
        c = Fraction(coeff.replace(" ", "")) if coeff else Fraction(1)
        labels = m.group(2).split()
        terms.append((field(sign * c), tuple(reversed(labels))))
    return Relation(terms)
