"""Bimodules over a bound quiver algebra, minimal projective covers and syzygies.

A bimodule M is stored in block form: ``M = sum_{x,y} e_x M e_y`` with the left
action of each arrow a as maps ``e_{s(a)} M e_y -> e_{t(a)} M e_y`` and the
right action of each arrow b as maps ``e_x M e_{t(b)} -> e_x M e_{s(b)}``.
The projective ``P[v][u] = A e_v (x) e_u A`` has the pairs (p, q) of basis
paths as basis, p starting at v and q ending at u.
"""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .algebra import AlgebraError, BoundQuiverAlgebra, Path
from .exactlin import Field, Subspace, inverse, kernel_basis, rank, row_basis
from .morph import AlgebraMorphism, NotInvertible, Verdict, is_inner, stably_inner_certificate


class ResourceLimit(RuntimeError):
    def __init__(self, message: str, degree: int | None = None):
        super().__init__(message)
        self.degree = degree


class NotATwist(AlgebraError):
    pass


class BimoduleError(AlgebraError):
    pass


Block = tuple[str, str]


def _kron(a: np.ndarray, b: np.ndarray, f: Field) -> np.ndarray:
    if a.size == 0 or b.size == 0:
        return f.zeros((a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]))
    return f.reduce(np.kron(a, b))


class _PathTables:
    """Per-algebra tables of one-sided projective modules A e_v and e_u A."""

    def __init__(self, A: BoundQuiverAlgebra):
        self.A = A
        V = A.quiver.vertices
        self.paths = {(v, x): [i for i, p in enumerate(A.basis) if p.source == v and p.target == x] for v in V for x in V}
        self._lcache: dict = {}
        self._rcache: dict = {}

    def left(self, v: str, a: str) -> np.ndarray:
        """a * p for p: v -> s(a), as a matrix onto paths v -> t(a)."""
        key = (v, a)
        if key not in self._lcache:
            A = self.A
            arr = A.quiver.arrows[a]
            src = self.paths[(v, arr.source)]
            dst = self.paths[(v, arr.target)]
            ai = A.arrow_index[a]
            m = A.struct[ai][np.ix_(src, dst)].T if src and dst else A.field.zeros((len(dst), len(src)))
            self._lcache[key] = np.ascontiguousarray(m)
        return self._lcache[key]

    def right(self, u: str, b: str) -> np.ndarray:
        """q * b for q: t(b) -> u, as a matrix onto paths s(b) -> u."""
        key = (u, b)
        if key not in self._rcache:
            A = self.A
            arr = A.quiver.arrows[b]
            src = self.paths[(arr.target, u)]
            dst = self.paths[(arr.source, u)]
            bi = A.arrow_index[b]
            m = A.struct[:, bi, :][np.ix_(src, dst)].T if src and dst else A.field.zeros((len(dst), len(src)))
            self._rcache[key] = np.ascontiguousarray(m)
        return self._rcache[key]


_TABLES: dict[int, _PathTables] = {}


def _tables(A: BoundQuiverAlgebra) -> _PathTables:
    t = _TABLES.get(id(A))
    if t is None or t.A is not A:
        t = _PathTables(A)
        _TABLES[id(A)] = t
    return t


class Bimodule:
    def __init__(self, A: BoundQuiverAlgebra, dims: dict[Block, int], lmap: dict, rmap: dict, name: str = ""):
        self.algebra = A
        self.field = A.field
        V = A.quiver.vertices
        self.blocks: list[Block] = [(x, y) for x in V for y in V]
        self.dims = {b: int(dims.get(b, 0)) for b in self.blocks}
        self.offset = {}
        o = 0
        for b in self.blocks:
            self.offset[b] = o
            o += self.dims[b]
        self.dim = o
        self.lmap = lmap
        self.rmap = rmap
        self.name = name

    # -- actions ---------------------------------------------------------------
    def lmat(self, a: str, y: str) -> np.ndarray:
        arr = self.algebra.quiver.arrows[a]
        m = self.lmap.get((a, y))
        if m is None:
            return self.field.zeros((self.dims[(arr.target, y)], self.dims[(arr.source, y)]))
        return m

    def rmat(self, b: str, x: str) -> np.ndarray:
        arr = self.algebra.quiver.arrows[b]
        m = self.rmap.get((b, x))
        if m is None:
            return self.field.zeros((self.dims[(x, arr.source)], self.dims[(x, arr.target)]))
        return m

    def block_of(self, vec: np.ndarray, b: Block) -> np.ndarray:
        o = self.offset[b]
        return vec[o:o + self.dims[b]]

    def left_path(self, p: Path, vec: np.ndarray) -> np.ndarray:
        """p * m for a basis path p."""
        f = self.field
        out = f.zeros(self.dim)
        for y in self.algebra.quiver.vertices:
            x = self.block_of(vec, (p.source, y))
            for a in p.arrows:
                x = f.matmul(self.lmat(a, y), x)
            o = self.offset[(p.target, y)]
            out[o:o + len(x)] = x
        return out

    def right_path(self, p: Path, vec: np.ndarray) -> np.ndarray:
        """m * p for a basis path p."""
        f = self.field
        out = f.zeros(self.dim)
        for x in self.algebra.quiver.vertices:
            v = self.block_of(vec, (x, p.target))
            for b in reversed(p.arrows):
                v = f.matmul(self.rmat(b, x), v)
            o = self.offset[(x, p.source)]
            out[o:o + len(v)] = v
        return out

    def left_element(self, a: np.ndarray, vec: np.ndarray) -> np.ndarray:
        f = self.field
        out = f.zeros(self.dim)
        for i in np.flatnonzero(np.asarray(a) != 0):
            out = out + f(a[i]) * self.left_path(self.algebra.basis[i], vec)
        return f.reduce(out)

    def right_element(self, a: np.ndarray, vec: np.ndarray) -> np.ndarray:
        f = self.field
        out = f.zeros(self.dim)
        for i in np.flatnonzero(np.asarray(a) != 0):
            out = out + f(a[i]) * self.right_path(self.algebra.basis[i], vec)
        return f.reduce(out)

    def dense_left(self, a: np.ndarray) -> np.ndarray:
        f = self.field
        cols = [self.left_element(a, self.field.eye(self.dim)[k]) for k in range(self.dim)]
        return np.stack(cols, axis=1) if cols else f.zeros((0, 0))

    def dense_right(self, a: np.ndarray) -> np.ndarray:
        f = self.field
        cols = [self.right_element(a, self.field.eye(self.dim)[k]) for k in range(self.dim)]
        return np.stack(cols, axis=1) if cols else f.zeros((0, 0))

    # -- checks ------------------------------------------------------------------
    def verify(self) -> None:
        """Relations act by zero on both sides and the two actions commute."""
        A = self.algebra
        f = self.field
        V = A.quiver.vertices
        for rel in A.relations:
            terms = rel.validate(A.quiver)
            s, t = terms[0][1].source, terms[0][1].target
            for y in V:
                acc = f.zeros((self.dims[(t, y)], self.dims[(s, y)]))
                for c, p in terms:
                    m = f.eye(self.dims[(s, y)])
                    for a in p.arrows:
                        m = f.matmul(self.lmat(a, y), m)
                    acc = f.reduce(acc + f(c) * m)
                if not f.is_zero(acc):
                    raise BimoduleError("left action violates a relation")
            for x in V:
                acc = f.zeros((self.dims[(x, s)], self.dims[(x, t)]))
                for c, p in terms:
                    m = f.eye(self.dims[(x, t)])
                    for b in reversed(p.arrows):
                        m = f.matmul(self.rmat(b, x), m)
                    acc = f.reduce(acc + f(c) * m)
                if not f.is_zero(acc):
                    raise BimoduleError("right action violates a relation")
        for a, arr in A.quiver.arrows.items():
            for b, brr in A.quiver.arrows.items():
                # block (s(a), t(b)) -> (t(a), s(b))
                lhs = f.matmul(self.rmat(b, arr.target), self.lmat(a, brr.target))
                rhs = f.matmul(self.lmat(a, brr.source), self.rmat(b, arr.source))
                if not np.array_equal(lhs, rhs):
                    raise BimoduleError("left and right actions do not commute")

    # -- constructors --------------------------------------------------------------
    @classmethod
    def from_dense(cls, A: BoundQuiverAlgebra, left: Callable[[np.ndarray], np.ndarray],
                   right: Callable[[np.ndarray], np.ndarray], dim: int, name: str = "") -> "Bimodule":
        """Bimodule from dense action matrices ``left(a)``, ``right(a)`` (column convention)."""
        f = A.field
        V = A.quiver.vertices
        el = {v: left(A.idempotent(v)) for v in V}
        er = {v: right(A.idempotent(v)) for v in V}
        bases = {}
        cols = []
        for x in V:
            for y in V:
                proj = f.matmul(el[x], er[y])
                b = row_basis(proj.T, f)
                bases[(x, y)] = b
                cols.extend(list(b))
        S = np.stack(cols, axis=1) if cols else f.zeros((dim, 0))
        if S.shape[1] != dim:
            raise BimoduleError("idempotent decomposition does not span the module")
        Sinv = inverse(S, f)
        dims = {k: len(b) for k, b in bases.items()}
        offs, o = {}, 0
        for x in V:
            for y in V:
                offs[(x, y)] = o
                o += dims[(x, y)]
        lmap, rmap = {}, {}
        for a, arr in A.quiver.arrows.items():
            C = f.matmul(Sinv, f.matmul(left(A.arrow(a)), S))
            D = f.matmul(Sinv, f.matmul(right(A.arrow(a)), S))
            for y in V:
                src, dst = (arr.source, y), (arr.target, y)
                lmap[(a, y)] = C[offs[dst]:offs[dst] + dims[dst], offs[src]:offs[src] + dims[src]]
            for x in V:
                src, dst = (x, arr.target), (x, arr.source)
                rmap[(a, x)] = D[offs[dst]:offs[dst] + dims[dst], offs[src]:offs[src] + dims[src]]
        return cls(A, dims, lmap, rmap, name)


def regular_bimodule(A: BoundQuiverAlgebra) -> Bimodule:
    """A as an A-bimodule, blocks e_x A e_y spanned by basis paths y -> x."""
    f = A.field
    V = A.quiver.vertices
    tab = _tables(A)
    dims = {(x, y): len(tab.paths[(y, x)]) for x in V for y in V}
    lmap, rmap = {}, {}
    for a, arr in A.quiver.arrows.items():
        for y in V:
            lmap[(a, y)] = tab.left(y, a)
        for x in V:
            rmap[(a, x)] = tab.right(x, a)
    return Bimodule(A, dims, lmap, rmap, "A")


def twisted_bimodule(A: BoundQuiverAlgebra, phi: AlgebraMorphism) -> Bimodule:
    """A_phi: left action unchanged, right action x * a = x phi(a)."""
    if phi.is_identity():
        return regular_bimodule(A)
    return Bimodule.from_dense(A, A.lmat, lambda a: A.rmat(phi(a)), A.dim, "A_phi")


def dual_bimodule(A: BoundQuiverAlgebra) -> Bimodule:
    """D(A) with (a f b)(x) = f(b x a) on the dual basis."""
    return Bimodule.from_dense(A, lambda a: A.rmat(a).T.copy(), lambda b: A.lmat(b).T.copy(), A.dim, "D(A)")


def inverse_dual(A: BoundQuiverAlgebra, nakayama: AlgebraMorphism) -> Bimodule:
    """A^vee realised as the twist by the inverse Nakayama automorphism."""
    return twisted_bimodule(A, nakayama.inverse())


def projective_bimodule(A: BoundQuiverAlgebra, v: str, u: str) -> Bimodule:
    """P[v][u] = A e_v (x) e_u A."""
    f = A.field
    V = A.quiver.vertices
    tab = _tables(A)
    dims = {(x, y): len(tab.paths[(v, x)]) * len(tab.paths[(y, u)]) for x in V for y in V}
    lmap, rmap = {}, {}
    for a, arr in A.quiver.arrows.items():
        for y in V:
            lmap[(a, y)] = _kron(tab.left(v, a), f.eye(len(tab.paths[(y, u)])), f)
        for x in V:
            rmap[(a, x)] = _kron(f.eye(len(tab.paths[(v, x)])), tab.right(u, a), f)
    return Bimodule(A, dims, lmap, rmap, f"P[{v}][{u}]")


def tensor_over_A(M: Bimodule, N: Bimodule) -> Bimodule:
    """M (x)_A N: sum_z M e_z (x) e_z N modulo m a (x) n - m (x) a n."""
    A = M.algebra
    f = A.field
    V = A.quiver.vertices
    spaces, comps, segs, dims = {}, {}, {}, {}
    for x in V:
        for y in V:
            seg, o = {}, 0
            for z in V:
                seg[z] = o
                o += M.dims[(x, z)] * N.dims[(z, y)]
            total = o
            rels = []
            for a, arr in A.quiver.arrows.items():
                mt, ns = M.dims[(x, arr.target)], N.dims[(arr.source, y)]
                if mt == 0 or ns == 0:
                    continue
                R = f.zeros((total, mt * ns))
                left = _kron(M.rmat(a, x), f.eye(ns), f)  # (m a) (x) n, lands in z = s(a)
                so = seg[arr.source]
                R[so:so + left.shape[0], :] = left
                right = _kron(f.eye(mt), N.lmat(a, y), f)  # m (x) (a n), lands in z = t(a)
                to = seg[arr.target]
                R[to:to + right.shape[0], :] = f.reduce(R[to:to + right.shape[0], :] - right)
                rels.append(R.T)
            sp = Subspace(f, total, np.concatenate(rels, axis=0) if rels else None)
            spaces[(x, y)] = sp
            comps[(x, y)] = sp.complement_coordinates()
            segs[(x, y)] = seg
            dims[(x, y)] = len(comps[(x, y)])

    def quotient_coords(block, vecs):
        return spaces[block].reduce(vecs)[..., comps[block]]

    def embed(block, k):
        v = f.zeros(sum(M.dims[(block[0], z)] * N.dims[(z, block[1])] for z in V))
        v[comps[block][k]] = f(1)
        return v

    lmap, rmap = {}, {}
    for a, arr in A.quiver.arrows.items():
        for y in V:
            src, dst = (arr.source, y), (arr.target, y)
            tot_dst = sum(M.dims[(arr.target, z)] * N.dims[(z, y)] for z in V)
            cols = []
            for k in range(dims[src]):
                v = embed(src, k)
                out = f.zeros(tot_dst)
                for z in V:
                    nd = N.dims[(z, y)]
                    blk = v[segs[src][z]:segs[src][z] + M.dims[(arr.source, z)] * nd]
                    img = f.matmul(_kron(M.lmat(a, z), f.eye(nd), f), blk)
                    o = segs[dst][z]
                    out[o:o + len(img)] = img
                cols.append(quotient_coords(dst, out))
            lmap[(a, y)] = np.stack(cols, axis=1) if cols else f.zeros((dims[dst], 0))
        for x in V:
            src, dst = (x, arr.target), (x, arr.source)
            tot_dst = sum(M.dims[(x, z)] * N.dims[(z, arr.source)] for z in V)
            cols = []
            for k in range(dims[src]):
                v = embed(src, k)
                out = f.zeros(tot_dst)
                for z in V:
                    md = M.dims[(x, z)]
                    blk = v[segs[src][z]:segs[src][z] + md * N.dims[(z, arr.target)]]
                    img = f.matmul(_kron(f.eye(md), N.rmat(a, z), f), blk)
                    o = segs[dst][z]
                    out[o:o + len(img)] = img
                cols.append(quotient_coords(dst, out))
            rmap[(a, x)] = np.stack(cols, axis=1) if cols else f.zeros((dims[dst], 0))
    return Bimodule(A, dims, lmap, rmap, f"{M.name} (x) {N.name}")


# -- covers and syzygies --------------------------------------------------------------

@dataclass
class Cover:
    """Minimal projective cover: generators (block, coordinate) and the kernel."""

    pattern: Counter
    generators: list[tuple[Block, int]]
    dim: int
    kernel: Bimodule


def _top_complements(M: Bimodule) -> dict[Block, list[int]]:
    A = M.algebra
    f = M.field
    out = {}
    for (x, y) in M.blocks:
        d = M.dims[(x, y)]
        if d == 0:
            out[(x, y)] = []
            continue
        imgs = []
        for a in A.quiver.in_arrows[x]:
            m = M.lmat(a.label, y)
            if m.size:
                imgs.append(m.T)
        for b in A.quiver.out_arrows[y]:
            m = M.rmat(b.label, x)
            if m.size:
                imgs.append(m.T)
        sp = Subspace(f, d, np.concatenate(imgs, axis=0) if imgs else None)
        out[(x, y)] = sp.complement_coordinates()
    return out


def projective_cover(M: Bimodule, dim_cap: int | None = None, degree: int | None = None) -> Cover:
    """Minimal cover ``sum P[x][y] -> M`` and its kernel, with minimality and surjectivity audits."""
    A = M.algebra
    f = M.field
    V = A.quiver.vertices
    tab = _tables(A)
    tops = _top_complements(M)
    gens = [((x, y), k) for (x, y) in M.blocks for k in tops[(x, y)]]
    pattern = Counter(b for b, _ in gens)
    # cover layout: per target block, concatenation over generators of (p, q) pairs
    cdims = {}
    for (x1, y1) in M.blocks:
        cdims[(x1, y1)] = sum(len(tab.paths[(x, x1)]) * len(tab.paths[(y1, y)]) for (x, y), _ in gens)
    total = sum(cdims.values())
    if dim_cap is not None and total > dim_cap:
        raise ResourceLimit(f"cover dimension {total} exceeds cap {dim_cap}", degree)

    # images p * g for basis paths p starting at the generator's left vertex
    left_img: dict = {}
    for gi, ((x, y), k) in enumerate(gens):
        base = f.zeros(M.dims[(x, y)])
        base[k] = f(1)
        for idx in sorted((i for i, p in enumerate(A.basis) if p.source == x), key=lambda i: A.basis[i].length):
            p = A.basis[idx]
            if not p.arrows:
                left_img[(gi, idx)] = base
            else:
                prev = A.index[Path(p.source, A.quiver.arrows[p.arrows[-1]].source, p.arrows[:-1])]
                left_img[(gi, idx)] = f.matmul(M.lmat(p.arrows[-1], y), left_img[(gi, prev)])

    parts: dict[Block, list[np.ndarray]] = {b: [] for b in M.blocks}
    by_target = {y: sorted((i for i, p in enumerate(A.basis) if p.target == y), key=lambda i: A.basis[i].length)
                 for y in V}
    for gi, ((x, y), k) in enumerate(gens):
        for x1 in V:
            ps = tab.paths[(x, x1)]
            if not ps:
                continue
            P = np.stack([left_img[(gi, i)] for i in ps], axis=1)  # p g, in block (x1, y)
            # (p g) q for every basis path q ending at y: m (b_k ... b_1) = (m (b_k ... b_2)) b_1
            memo = {}
            for qi in by_target[y]:
                q = A.basis[qi]
                if not q.arrows:
                    memo[qi] = P
                    continue
                rest = Path(A.quiver.arrows[q.arrows[0]].target, q.target, q.arrows[1:])
                memo[qi] = f.matmul(M.rmat(q.arrows[0], x1), memo[A.index[rest]])
            for y1 in V:
                qs = tab.paths[(y1, y)]
                if not qs:
                    continue
                block = np.empty((M.dims[(x1, y1)], len(ps) * len(qs)), dtype=f.dtype)
                for jq, qi in enumerate(qs):
                    block[:, jq::len(qs)] = memo[qi]
                parts[(x1, y1)].append(block)
    kernels = {}
    for (x1, y1) in M.blocks:
        pi = np.concatenate(parts[(x1, y1)], axis=1) if parts[(x1, y1)] else f.zeros((M.dims[(x1, y1)], 0))
        if rank(pi, f) != M.dims[(x1, y1)]:
            raise BimoduleError("cover map is not surjective")
        kernels[(x1, y1)] = Subspace(f, cdims[(x1, y1)], kernel_basis(pi, f) if pi.shape[1] else None)

    # top coordinates of each generator inside its own block: (e_x, e_y) pair
    offs = {}
    for (x1, y1) in M.blocks:
        o, table = 0, []
        for gi, ((x, y), k) in enumerate(gens):
            table.append(o)
            o += len(tab.paths[(x, x1)]) * len(tab.paths[(y1, y)])
        offs[(x1, y1)] = table
    for gi, ((x, y), k) in enumerate(gens):
        ker = kernels[(x, y)]
        ps, qs = tab.paths[(x, x)], tab.paths[(y, y)]
        pos = offs[(x, y)][gi] + ps.index(A.vertex_index[x]) * len(qs) + qs.index(A.vertex_index[y])
        if ker.dim and not f.is_zero(ker.basis[:, pos]):
            raise BimoduleError("cover is not minimal: kernel meets the top")

    # restricted actions on the kernel
    lmap, rmap = {}, {}
    for a, arr in A.quiver.arrows.items():
        for y1 in V:
            src, dst = (arr.source, y1), (arr.target, y1)
            K = kernels[src]
            if K.dim == 0 or kernels[dst].dim == 0:
                continue
            mats = []
            for gi, ((x, y), k) in enumerate(gens):
                mats.append(_kron(tab.left(x, a), f.eye(len(tab.paths[(y1, y)])), f))
            img = _block_diag_apply(mats, K.basis.T, f)
            lmap[(a, y1)] = kernels[dst].coordinates(img.T).T
        for x1 in V:
            src, dst = (x1, arr.target), (x1, arr.source)
            K = kernels[src]
            if K.dim == 0 or kernels[dst].dim == 0:
                continue
            mats = []
            for gi, ((x, y), k) in enumerate(gens):
                mats.append(_kron(f.eye(len(tab.paths[(x, x1)])), tab.right(y, a), f))
            img = _block_diag_apply(mats, K.basis.T, f)
            rmap[(a, x1)] = kernels[dst].coordinates(img.T).T
    kdims = {b: kernels[b].dim for b in M.blocks}
    kernel = Bimodule(A, kdims, lmap, rmap, f"Omega({M.name})")
    if kernel.dim != total - M.dim:
        raise BimoduleError("rank-nullity audit failed")
    return Cover(pattern, gens, total, kernel)


def _block_diag_apply(mats: list[np.ndarray], X: np.ndarray, f: Field) -> np.ndarray:
    out, ro, co = [], 0, 0
    for m in mats:
        r, c = m.shape
        out.append(f.matmul(m, X[co:co + c]) if c else f.zeros((r, X.shape[1])))
        co += c
    return np.concatenate(out, axis=0) if out else f.zeros((0, X.shape[1]))


def syzygy(M: Bimodule, dim_cap: int | None = None, degree: int | None = None) -> Bimodule:
    return projective_cover(M, dim_cap, degree).kernel


def syzygy_power(A: BoundQuiverAlgebra, m: int, dim_cap: int | None = None) -> Bimodule:
    M = regular_bimodule(A)
    for d in range(m):
        M = syzygy(M, dim_cap, d + 1)
    return M


# -- twist recognition -----------------------------------------------------------------

def recognize_twist(M: Bimodule) -> AlgebraMorphism:
    """phi with M isomorphic to A_phi, or NotATwist.

    With dim M = dim A and one-dimensional left tops at every vertex, M is free
    of rank one as a left module, generated by any lift m of its top.  Then
    phi(b) = tau^{-1}(m b) with tau(a) = a m; when M is a twist every left
    generator also generates on the right, so a non-bijective phi disproves it.
    """
    A = M.algebra
    f = M.field
    V = A.quiver.vertices
    if M.dim != A.dim:
        raise NotATwist(f"dimension {M.dim} differs from dim A = {A.dim}")
    left_top = {x: 0 for x in V}
    right_top = {y: 0 for y in V}
    lifts = {}
    for (x, y) in M.blocks:
        d = M.dims[(x, y)]
        if d == 0:
            continue
        limgs = [M.lmat(a.label, y).T for a in A.quiver.in_arrows[x] if M.lmat(a.label, y).size]
        lsp = Subspace(f, d, np.concatenate(limgs, axis=0) if limgs else None)
        comp = lsp.complement_coordinates()
        left_top[x] += len(comp)
        if comp:
            lifts[x] = ((x, y), comp[0])
        rimgs = [M.rmat(b.label, x).T for b in A.quiver.out_arrows[y] if M.rmat(b.label, x).size]
        rsp = Subspace(f, d, np.concatenate(rimgs, axis=0) if rimgs else None)
        right_top[y] += len(rsp.complement_coordinates())
    if any(c != 1 for c in left_top.values()):
        raise NotATwist(f"left top multiplicities {left_top} are not those of A")
    if any(c != 1 for c in right_top.values()):
        raise NotATwist(f"right top multiplicities {right_top} are not those of A")
    m = f.zeros(M.dim)
    for x, (blk, k) in lifts.items():
        m[M.offset[blk] + k] = f(1)
    T = np.stack([M.left_path(p, m) for p in A.basis], axis=1)
    try:
        Tinv = inverse(T, f)
    except ZeroDivisionError as exc:
        raise NotATwist("the top lift does not generate M freely") from exc
    R = np.stack([M.right_path(p, m) for p in A.basis], axis=1)
    phi_mat = f.matmul(Tinv, R)
    if rank(phi_mat, f) != A.dim:
        raise NotATwist("induced endomorphism is not bijective")
    phi = AlgebraMorphism(A, phi_mat)
    # T intertwines A_phi with M on generators
    for a in A.quiver.arrows:
        av = A.arrow(a)
        if not np.array_equal(f.matmul(T, A.lmat(av)), f.matmul(M.dense_left(av), T)):
            raise BimoduleError("internal: left actions do not intertwine")
        if not np.array_equal(f.matmul(T, A.rmat(phi(av))), f.matmul(M.dense_right(av), T)):
            raise BimoduleError("internal: right actions do not intertwine")
    return phi


# -- brute-force stable Calabi-Yau search ---------------------------------------------------

@dataclass
class DegreeReport:
    degree: int               # candidate dimension m; Omega^{m+1} is tested
    cover_pattern: Counter    # top pattern of Omega^m, i.e. Q_m
    syzygy_dim: int           # dim Omega^{m+1}
    twist: AlgebraMorphism | None
    verdict: Verdict | None
    note: str = ""

    def to_json(self, field: Field, include_matrix: bool = True) -> dict:
        return {
            "degree": self.degree,
            "cover_pattern": [[v, u, c] for (v, u), c in sorted(self.cover_pattern.items())],
            "syzygy_dim": self.syzygy_dim,
            "twist": ([[field.to_json(x) for x in row] for row in self.twist.matrix] if include_matrix
                      else self.twist.generator_images()) if self.twist is not None else None,
            "verdict": self.verdict.to_json(field) if self.verdict is not None else None,
            "note": self.note,
        }


@dataclass
class BruteForceResult:
    reports: list[DegreeReport]
    value: int | None
    proven: bool
    inconclusive_degrees: list[int]
    seconds: float = 0.0

    def summary(self) -> dict:
        return {"value": self.value, "proven": self.proven, "inconclusive_degrees": self.inconclusive_degrees}


def bruteforce_scydim(bundle, max_degree: int, dim_cap: int = 20000, seed: int = 0,
                      on_degree: Callable[[DegreeReport], None] | None = None) -> BruteForceResult:
    """Search m = 0..max_degree for Omega^{m+1} = A_psi with nu psi stably inner."""
    A = bundle.algebra
    nu = bundle.nakayama
    t0 = time.perf_counter()
    M = regular_bimodule(A)
    reports = []
    value, inconclusive = None, []
    for m in range(max_degree + 1):
        cov = projective_cover(M, dim_cap, m + 1)
        M = cov.kernel
        if M.dim > dim_cap:
            raise ResourceLimit(f"syzygy dimension {M.dim} exceeds cap {dim_cap}", m + 1)
        try:
            psi = recognize_twist(M)
        except NotATwist as exc:
            rep = DegreeReport(m, cov.pattern, M.dim, None, None, str(exc))
        else:
            verdict = stably_inner_certificate(nu.compose(psi), seed=seed)
            rep = DegreeReport(m, cov.pattern, M.dim, psi, verdict)
            if verdict.status.confirmed and value is None:
                value = m
            elif verdict.status.value == "Inconclusive" and value is None:
                inconclusive.append(m)
        reports.append(rep)
        if on_degree:
            on_degree(rep)
    proven = value is not None and not inconclusive
    return BruteForceResult(reports, value, proven, inconclusive, time.perf_counter() - t0)
