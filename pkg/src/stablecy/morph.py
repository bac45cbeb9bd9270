"""Algebra morphisms and certificates for (stably) inner automorphisms."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Sequence

import numpy as np

from .algebra import AlgebraError, BoundQuiverAlgebra, FDAlgebra, NotMultiplicative
from .exactlin import Field, NoSolution, Subspace, inverse, kernel_basis, rank, rref, solve


class NotInvertible(AlgebraError):
    pass


class NotTruncatedPoly(AlgebraError):
    pass


class AlgebraMorphism:
    """Unital algebra endomorphism given by its matrix (column i = image of b_i)."""

    def __init__(self, algebra: FDAlgebra, matrix, check: bool = True):
        self.algebra = algebra
        f = algebra.field
        self.matrix = f.array(matrix)
        if self.matrix.shape != (algebra.dim, algebra.dim):
            raise AlgebraError("morphism matrix has the wrong shape")
        if check:
            self._check()

    def _check(self):
        A = self.algebra
        f = A.field
        M = self.matrix
        if not np.array_equal(f.matmul(M, A.one()), A.one()):
            raise NotMultiplicative("map is not unital")
        c = A.struct
        # phi(b_i b_j) against phi(b_i) phi(b_j)
        lhs = f.matmul(c, M.T)
        t = f.reduce(np.tensordot(M, c, axes=([0], [0])))  # (i, b, k)
        rhs = f.reduce(np.tensordot(t, M, axes=([1], [0])))  # (i, k, j)
        rhs = rhs.transpose(0, 2, 1)
        if not np.array_equal(lhs, rhs):
            raise NotMultiplicative("map is not multiplicative")

    @classmethod
    def identity(cls, A: FDAlgebra) -> "AlgebraMorphism":
        return cls(A, A.field.eye(A.dim), check=False)

    @classmethod
    def from_generators(cls, A: BoundQuiverAlgebra, images: dict[str, np.ndarray], check: bool = True) -> "AlgebraMorphism":
        """Extend images of vertex idempotents and arrows multiplicatively.

        Vertices missing from ``images`` are fixed; every arrow must be given.
        """
        f = A.field
        img = {}
        for v in A.quiver.vertices:
            img[v] = f.array(images[v]) if v in images else A.idempotent(v)
        for a in A.quiver.arrows:
            if a not in images:
                raise AlgebraError(f"no image given for arrow {a!r}")
            img[a] = f.array(images[a])
        cols = []
        for p in A.basis:
            if not p.arrows:
                cols.append(img[p.source])
                continue
            x = img[p.arrows[0]]
            for a in p.arrows[1:]:
                x = A.mul(img[a], x)
            cols.append(x)
        return cls(A, np.stack(cols, axis=1), check=check)

    def __call__(self, x) -> np.ndarray:
        return self.algebra.field.matmul(self.matrix, self.algebra.field.array(x))

    def __eq__(self, other):
        return isinstance(other, AlgebraMorphism) and other.algebra is self.algebra and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())

    def compose(self, other: "AlgebraMorphism") -> "AlgebraMorphism":
        """``self o other``."""
        if other.algebra is not self.algebra:
            raise AlgebraError("morphisms live on different algebras")
        return AlgebraMorphism(self.algebra, self.algebra.field.matmul(self.matrix, other.matrix))

    def __matmul__(self, other):
        return self.compose(other)

    def power(self, k: int) -> "AlgebraMorphism":
        if k < 0:
            return self.inverse().power(-k)
        out = AlgebraMorphism.identity(self.algebra)
        base = self
        while k:
            if k & 1:
                out = AlgebraMorphism(self.algebra, self.algebra.field.matmul(out.matrix, base.matrix), check=False)
            base = AlgebraMorphism(self.algebra, self.algebra.field.matmul(base.matrix, base.matrix), check=False)
            k >>= 1
        return out

    def is_automorphism(self) -> bool:
        return rank(self.matrix, self.algebra.field) == self.algebra.dim

    def inverse(self) -> "AlgebraMorphism":
        try:
            inv = inverse(self.matrix, self.algebra.field)
        except ZeroDivisionError as exc:
            raise NotInvertible("morphism is not bijective") from exc
        return AlgebraMorphism(self.algebra, inv)

    def is_identity(self) -> bool:
        return np.array_equal(self.matrix, self.algebra.field.eye(self.algebra.dim))

    def vertex_permutation(self) -> dict[str, str] | None:
        """``v -> w`` when phi(e_v) = e_w for every vertex, else None."""
        A = self.algebra
        out = {}
        col_of = {i: v for v, i in A.vertex_index.items()}
        for v, i in A.vertex_index.items():
            col = self.matrix[:, i]
            nz = np.flatnonzero(col != 0)
            if len(nz) != 1 or nz[0] not in col_of or col[nz[0]] != 1:
                return None
            out[v] = col_of[nz[0]]
        return out

    def generator_images(self) -> dict[str, str]:
        A = self.algebra
        if not isinstance(A, BoundQuiverAlgebra):
            return {A.names[i]: A.format_element(self.matrix[:, i]) for i in range(A.dim)}
        out = {}
        for v, i in A.vertex_index.items():
            out[f"e_{v}"] = A.format_element(self.matrix[:, i])
        for a, i in A.arrow_index.items():
            out[a] = A.format_element(self.matrix[:, i])
        return out


def generator_indices(A: FDAlgebra) -> list[int]:
    """Basis indices of a generating set: vertices and arrows for a bound quiver algebra."""
    if isinstance(A, BoundQuiverAlgebra):
        return list(A.vertex_index.values()) + list(A.arrow_index.values())
    return list(range(A.dim))


def conjugation(A: FDAlgebra, a) -> AlgebraMorphism:
    """The inner automorphism x -> a^{-1} x a."""
    f = A.field
    a = f.array(a)
    ainv = A.inverse_element(a)
    mat = f.matmul(A.lmat(ainv), A.rmat(a))
    return AlgebraMorphism(A, mat)


# -- verdicts ---------------------------------------------------------------------

class Status(str, Enum):
    CONFIRMED_INNER = "ConfirmedInner"
    CONFIRMED_INNER_MOD_SOCLE = "ConfirmedInnerModuloSocle"
    CONFIRMED_TRUNC = "ConfirmedByTruncatedPolyCriterion"
    REFUTED_LOOP = "RefutedByLoopTest"
    REFUTED_TRUNC = "RefutedByTruncatedPolyCriterion"
    INCONCLUSIVE = "Inconclusive"

    @property
    def confirmed(self) -> bool:
        return self.value.startswith("Confirmed")

    @property
    def refuted(self) -> bool:
        return self.value.startswith("Refuted")


@dataclass
class Verdict:
    status: Status
    witness: object = None
    details: dict = dc_field(default_factory=dict)

    def to_json(self, field: Field) -> dict:
        w = self.witness
        if isinstance(w, np.ndarray):
            w = [field.to_json(x) for x in w]
        elif isinstance(w, dict):
            w = {k: field.to_json(v) if not isinstance(v, (str, list)) else v for k, v in w.items()}
        return {"status": self.status.value, "witness": w, "details": self.details}


@dataclass
class InnerResult:
    """Outcome of :func:`is_inner`: ``kind`` is 'inner', 'not_inner' or 'inconclusive'."""

    kind: str
    witness: np.ndarray | None = None
    reason: str = ""

    def __bool__(self):
        return self.kind == "inner"


def _conjugator_space(A: FDAlgebra, phi_matrix) -> np.ndarray:
    """Basis of {a : a phi(g) = g a for all generators g}."""
    f = A.field
    blocks = []
    for i in generator_indices(A):
        img = phi_matrix[:, i]
        blocks.append(f.reduce(A.rmat(img) - A.lmat(A.basis_vector(i))))
    return kernel_basis(np.concatenate(blocks, axis=0), f)


def _find_nonvanishing(field: Field, rows: np.ndarray, rng, enum_limit: int = 1 << 16, samples: int = 10_000):
    """Coefficients c with every entry of c @ rows nonzero.

    Returns (c, proof_of_absence).  ``c`` is None when none was found; the
    boolean tells whether absence is proven.
    """
    f = field
    k, s = rows.shape
    if s == 0:
        return f.zeros(k), False
    for j in range(s):
        if f.is_zero(rows[:, j]):
            return None, True
    if f.p == 2:
        try:
            c, _ = solve(rows.T, np.ones(s, dtype=np.int64), f)
            return c, False
        except NoSolution:
            return None, True
    if f.p == 0:
        for _ in range(64):
            c = f.random(rng, k, bound=10 * (s + 1))
            if np.all(f.matmul(c, rows) != 0):
                return c, False
        return None, False
    # F_p: work in the row space, which has dimension <= s
    basis, piv = rref(rows, f)
    basis = basis[: len(piv)]
    r = len(piv)
    if f.p ** r <= enum_limit:
        for coeffs in itertools.product(range(f.p), repeat=r):
            w = f.matmul(np.array(coeffs, dtype=np.int64), basis)
            if np.all(w != 0):
                c, _ = solve(rows.T, w, f)
                return c, False
        return None, True
    for _ in range(samples):
        coeffs = f.random(rng, r)
        w = f.matmul(coeffs, basis)
        if np.all(w != 0):
            c, _ = solve(rows.T, w, f)
            return c, False
    return None, False


def is_inner(phi: AlgebraMorphism, seed: int = 0) -> InnerResult:
    """Search for a unit ``a`` with phi(x) = a^{-1} x a.

    An element is a unit iff its image in A/rad, spanned by the vertex
    coordinates, has no zero coordinate; so the search is over the projection
    of the solution space onto the vertex coordinates.
    """
    A = phi.algebra
    f = A.field
    if phi.is_identity():
        return InnerResult("inner", A.one())
    space = _conjugator_space(A, phi.matrix)
    if len(space) == 0:
        return InnerResult("not_inner", reason="no nonzero intertwiner")
    vidx = list(A.vertex_index.values())
    proj = space[:, vidx]
    rng = np.random.default_rng(seed)
    c, proven = _find_nonvanishing(f, proj, rng)
    if c is None:
        if proven:
            return InnerResult("not_inner", reason="every intertwiner is a non-unit")
        return InnerResult("inconclusive", reason="sampling found no unit intertwiner")
    a = f.matmul(c, space)
    if not A.is_unit(a):
        return InnerResult("inconclusive", reason="candidate failed the unit check")
    # a phi(x) = x a for all x, i.e. phi = conjugation by a
    conj = conjugation(A, a)
    if not np.array_equal(conj.matrix, phi.matrix):
        raise AlgebraError("internal: conjugation check failed")
    return InnerResult("inner", a)


# -- inner modulo socle --------------------------------------------------------------

class QuotientAlgebra(FDAlgebra):
    """A / I for a two-sided ideal I; basis = complement coordinates of I."""

    def __init__(self, A: FDAlgebra, ideal: Subspace):
        f = A.field
        # reduce with low-degree pivots so that the complement is radical-filtered
        order = sorted(range(A.dim), key=lambda i: (A.degree[i], i))
        perm_basis = ideal.basis[:, order] if ideal.dim else f.zeros((0, A.dim))
        sp = Subspace(f, A.dim, perm_basis)
        pivots = [order[c] for c in sp.pivots]
        self.ideal = ideal
        # reduction data in original coordinates
        self._pivots = pivots
        self._rows = sp.basis[:, np.argsort(order)] if ideal.dim else f.zeros((0, A.dim))
        self.comp = [i for i in range(A.dim) if i not in set(pivots)]
        self.parent = A
        n = len(self.comp)
        struct = f.zeros((n, n, n))
        for a, i in enumerate(self.comp):
            for b, j in enumerate(self.comp):
                struct[a, b] = self.project(A.struct[i, j])
        vindex = {v: self.comp.index(i) for v, i in A.vertex_index.items() if i in self.comp}
        super().__init__(f, struct, [A.degree[i] for i in self.comp], vindex, [A.names[i] for i in self.comp])

    def project(self, x) -> np.ndarray:
        f = self.parent.field
        x = f.array(x)
        if self._pivots:
            coeff = x[..., self._pivots]
            x = f.reduce(x - f.matmul(coeff, self._rows))
        return x[..., self.comp]

    def push(self, phi: AlgebraMorphism) -> AlgebraMorphism:
        img = self.project(phi.matrix[:, self.comp].T).T
        return AlgebraMorphism(self, img)


def is_inner_modulo_socle(phi: AlgebraMorphism, seed: int = 0) -> Verdict:
    A = phi.algebra
    if phi.is_identity():
        return Verdict(Status.CONFIRMED_INNER, A.one())
    soc = A.socle("left")
    Qa = QuotientAlgebra(A, soc)
    res = is_inner(Qa.push(phi), seed=seed)
    if res.kind == "inner":
        return Verdict(Status.CONFIRMED_INNER_MOD_SOCLE, res.witness,
                       {"quotient_dim": Qa.dim, "witness_in_quotient": True})
    return Verdict(Status.INCONCLUSIVE, None, {"inner_mod_socle": res.kind, "reason": res.reason})


# -- loop-coefficient refuter ------------------------------------------------------

def loop_coefficient_test(phi: AlgebraMorphism) -> Verdict:
    """Necessary condition for stably inner, valid when soc^2 of _AA lies in rad^2.

    Passing returns Inconclusive with the coefficient family d_v as witness.
    """
    A = phi.algebra
    f = A.field
    if not isinstance(A, BoundQuiverAlgebra):
        return Verdict(Status.INCONCLUSIVE, None, {"loop_test": "skipped: not a bound quiver algebra"})
    soc2 = A.socle_power(2, "left")
    if not A.radical_power(2).contains_space(soc2):
        return Verdict(Status.INCONCLUSIVE, None, {"loop_test": "skipped: soc^2 not inside rad^2"})
    M = phi.matrix
    vidx = A.vertex_index
    for v, i in vidx.items():
        col = M[:, i]
        for w, j in vidx.items():
            want = 1 if w == v else 0
            if col[j] != want:
                return Verdict(Status.REFUTED_LOOP, None, {"vertex": v, "reason": "phi(e_v) differs from e_v modulo rad"})
    coeff = {}
    for a, i in A.arrow_index.items():
        col = M[:, i]
        for b, j in A.arrow_index.items():
            if b != a and col[j] != 0:
                return Verdict(Status.REFUTED_LOOP, None, {"arrow": a, "reason": f"phi({a}) involves {b} modulo rad^2"})
        if col[i] == 0:
            return Verdict(Status.REFUTED_LOOP, None, {"arrow": a, "reason": "zero leading coefficient"})
        coeff[a] = col[i]
    # d_t = c_a * d_s along a spanning forest, then every remaining arrow is a cycle check
    d: dict[str, object] = {}
    adj: dict[str, list] = {v: [] for v in A.quiver.vertices}
    for a, arr in A.quiver.arrows.items():
        adj[arr.source].append((a, arr.target, True))
        adj[arr.target].append((a, arr.source, False))
    for root in A.quiver.vertices:
        if root in d:
            continue
        d[root] = f(1)
        stack = [root]
        while stack:
            v = stack.pop()
            for a, w, forward in adj[v]:
                if w in d:
                    continue
                d[w] = f(d[v] * coeff[a]) if forward else f(d[v] * f.inv(coeff[a]))
                stack.append(w)
    for a, arr in A.quiver.arrows.items():
        if f(d[arr.target]) != f(coeff[a] * d[arr.source]):
            return Verdict(Status.REFUTED_LOOP, {a: coeff[a]},
                           {"arrow": a, "reason": "coefficient product around a cycle is not 1"})
    return Verdict(Status.INCONCLUSIVE, d, {"loop_test": "passed"})


# -- truncated polynomial algebras ---------------------------------------------------

def truncation_degree(A: FDAlgebra) -> int:
    """n when A is k[t]/t^n presented by one loop, else raise NotTruncatedPoly."""
    if (not isinstance(A, BoundQuiverAlgebra) or len(A.quiver.vertices) != 1 or len(A.quiver.arrows) != 1
            or A.dim != A.loewy_length):
        raise NotTruncatedPoly("algebra is not k[t]/t^n")
    return A.dim


def stably_inner_truncated_poly(phi: AlgebraMorphism) -> Verdict:
    """Decisive criterion on k[t]/t^n: phi(t) = t modulo t^s with s = ceil(n/2)."""
    A = phi.algebra
    n = truncation_degree(A)
    t = next(iter(A.arrow_index.values()))
    img = phi.matrix[:, t]
    # basis is 1, t, ..., t^{n-1} in order of length
    coeffs = {A.basis[i].length: img[i] for i in range(A.dim)}
    s = math.ceil(n / 2)
    bad = [k for k in range(1, s) if coeffs[k] != (1 if k == 1 else 0)]
    data = {"n": n, "s": s, "coefficients": {str(k): A.field.to_json(coeffs[k]) for k in range(1, n)}}
    if bad:
        data["violated"] = bad
        return Verdict(Status.REFUTED_TRUNC, None, data)
    return Verdict(Status.CONFIRMED_TRUNC, None, data)


def stably_inner_certificate(phi: AlgebraMorphism, seed: int = 0) -> Verdict:
    """Strongest available verdict from the certificate ladder."""
    A = phi.algebra
    try:
        truncation_degree(A)
        return stably_inner_truncated_poly(phi)
    except NotTruncatedPoly:
        pass
    res = is_inner(phi, seed=seed)
    if res.kind == "inner":
        return Verdict(Status.CONFIRMED_INNER, res.witness)
    v = is_inner_modulo_socle(phi, seed=seed)
    if v.status.confirmed:
        return v
    loop = loop_coefficient_test(phi)
    if loop.status.refuted:
        return loop
    details = {"inner": res.kind, "inner_mod_socle": v.details.get("inner_mod_socle"),
               "loop_test": loop.details.get("loop_test")}
    return Verdict(Status.INCONCLUSIVE, None, details)


# -- right ideals and stable homs between cyclic modules ------------------------------

class RightIdeal:
    """Right ideal generated by ``generators``; span held in row-reduced form."""

    def __init__(self, A: FDAlgebra, generators: Sequence[np.ndarray]):
        f = A.field
        self.algebra = A
        self.generators = [f.array(g) for g in generators]
        cols = [A.lmat(g) for g in self.generators]  # columns of lmat(g) are g*b_j
        vecs = np.concatenate([c.T for c in cols], axis=0) if cols else f.zeros((0, A.dim))
        self.span = Subspace(f, A.dim, vecs)

    @classmethod
    def from_subspace(cls, A: FDAlgebra, sp: Subspace) -> "RightIdeal":
        return cls(A, list(sp.basis))

    def __eq__(self, other):
        return isinstance(other, RightIdeal) and self.span == other.span

    @property
    def dim(self):
        return self.span.dim

    def is_closed(self) -> bool:
        A = self.algebra
        f = A.field
        return all(self.span.contains(f.matmul(self.span.basis, A.rmat(A.basis_vector(i)).T))
                   for i in range(A.dim)) if self.dim else True


def transporter(A: FDAlgebra, I: RightIdeal, J: RightIdeal) -> Subspace:
    """(J:I) = {a : a I in J}."""
    f = A.field
    if I.dim == 0:
        return Subspace.full(f, A.dim)
    blocks = []
    for g in I.span.basis:
        m = A.rmat(g)  # a -> a*g
        blocks.append(J.span.reduce(m.T).T if J.span.dim else m)
    ker = kernel_basis(np.concatenate(blocks, axis=0), f)
    return Subspace(f, A.dim, ker)


def left_annihilator(A: FDAlgebra, I: RightIdeal) -> Subspace:
    """(0:I) = {a : a I = 0}."""
    return transporter(A, I, RightIdeal(A, []))


@dataclass
class StableHom:
    dim: int
    representatives: np.ndarray


def stable_hom_cyclic(A: FDAlgebra, I: RightIdeal, J: RightIdeal) -> StableHom:
    """Stable homs A/I -> A/J as (J:I) / ((0:I) + J); representatives act by left multiplication."""
    f = A.field
    T = transporter(A, I, J)
    N = left_annihilator(A, I).sum(J.span)
    if not T.contains_space(N):
        raise AlgebraError("internal: (0:I)+J not inside (J:I)")
    reps = N.reduce(T.basis) if T.dim else f.zeros((0, A.dim))
    sp = Subspace(f, A.dim, reps)
    return StableHom(T.dim - N.dim, sp.basis)
