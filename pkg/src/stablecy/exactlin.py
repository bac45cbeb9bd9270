"""Exact scalar arithmetic over F_p and Q, and dense row reduction.

Matrices are plain numpy arrays: ``int64`` residues in ``[0, p)`` for a prime
field, ``object`` arrays of :class:`fractions.Fraction` for the rationals.
Every routine takes the :class:`Field` explicitly and never mutates its inputs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

# p**2 * (inner dimension) must stay below 2**63 in int64 matmul.
MAX_PRIME = 46337


class NoSolution(ValueError):
    """The right-hand side is outside the column space."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


class Field:
    """Prime field F_p (``characteristic = p``) or the rationals (``characteristic = 0``)."""

    __slots__ = ("p",)

    def __init__(self, characteristic: int = 0):
        characteristic = int(characteristic)
        if characteristic != 0 and not _is_prime(characteristic):
            raise ValueError(f"characteristic must be 0 or a prime, got {characteristic}")
        if characteristic > MAX_PRIME:
            raise ValueError(f"primes above {MAX_PRIME} are not supported")
        self.p = characteristic

    @property
    def characteristic(self) -> int:
        return self.p

    @property
    def is_rational(self) -> bool:
        return self.p == 0

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(("Field", self.p))

    def __repr__(self):
        return "Field(Q)" if self.p == 0 else f"Field(F_{self.p})"

    def __str__(self):
        return "Q" if self.p == 0 else f"F_{self.p}"

    # -- scalars ---------------------------------------------------------
    def __call__(self, x):
        """Canonical representative of ``x``."""
        if self.p == 0:
            return Fraction(x)
        if isinstance(x, Fraction):
            return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
        return int(x) % self.p

    def inv(self, x):
        x = self(x)
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.p == 0:
            return 1 / x
        return pow(int(x), -1, self.p)

    def neg(self, x):
        return self(-x)

    def elements(self):
        """All field elements (prime fields only)."""
        if self.p == 0:
            raise ValueError("the rationals are infinite")
        return range(self.p)

    def to_json(self, x):
        x = self(x)
        if self.p == 0:
            return str(x)
        return int(x)

    # -- arrays ----------------------------------------------------------
    @property
    def dtype(self):
        return object if self.p == 0 else np.int64

    def array(self, data) -> np.ndarray:
        if self.p == 0:
            arr = np.array(data, dtype=object)
            flat = arr.reshape(-1)
            for i, v in enumerate(flat):
                flat[i] = Fraction(v)
            return arr
        arr = np.array(data)
        if arr.dtype == object:
            return np.vectorize(self, otypes=[np.int64])(arr) if arr.size else arr.astype(np.int64)
        return np.mod(arr.astype(np.int64), self.p)

    def zeros(self, shape) -> np.ndarray:
        if self.p == 0:
            arr = np.empty(shape, dtype=object)
            arr.fill(Fraction(0))
            return arr
        return np.zeros(shape, dtype=np.int64)

    def eye(self, n: int) -> np.ndarray:
        out = self.zeros((n, n))
        for i in range(n):
            out[i, i] = self(1)
        return out

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        if self.p == 0:
            return arr
        return np.mod(arr, self.p)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.p == 0:
            return np.dot(a, b)
        return np.mod(a @ b, self.p)

    def random(self, rng: np.random.Generator, shape, bound: int = 7) -> np.ndarray:
        """Uniform over F_p; small random integers over Q."""
        if self.p == 0:
            return self.array(rng.integers(-bound, bound + 1, size=shape))
        return rng.integers(0, self.p, size=shape).astype(np.int64)

    def is_zero(self, arr) -> bool:
        return not np.any(np.asarray(arr) != 0)


F2 = Field(2)
Q = Field(0)


# -- row reduction ---------------------------------------------------------

def _rref_gf2(m: np.ndarray):
    rows, cols = m.shape
    if rows == 0 or cols == 0:
        return m.copy(), []
    packed = np.packbits(m.astype(np.uint8), axis=1, bitorder="little")
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        byte, bit = c >> 3, np.uint8(1 << (c & 7))
        colbits = (packed[r:, byte] & bit) != 0
        nz = np.flatnonzero(colbits)
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            packed[[r, k]] = packed[[k, r]]
        hit = np.flatnonzero((packed[:, byte] & bit) != 0)
        hit = hit[hit != r]
        if hit.size:
            packed[hit] ^= packed[r]
        pivots.append(c)
        r += 1
    out = np.unpackbits(packed, axis=1, count=cols, bitorder="little").astype(np.int64)
    return out, pivots


def _rref_modp(m: np.ndarray, p: int):
    a = m.copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            a[[r, k]] = a[[k, r]]
        inv = pow(int(a[r, c]), -1, p)
        if inv != 1:
            a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            a[hit] = (a[hit] - np.outer(col[hit], a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def _rref_q(m: np.ndarray):
    a = m.copy()
    rows, cols = a.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        k = next((i for i in range(r, rows) if a[i, c] != 0), None)
        if k is None:
            continue
        if k != r:
            a[[r, k]] = a[[k, r]]
        piv = a[r, c]
        if piv != 1:
            a[r] = a[r] / piv
        for i in range(rows):
            if i != r and a[i, c] != 0:
                a[i] = a[i] - a[i, c] * a[r]
        pivots.append(c)
        r += 1
    return a, pivots


def rref(m, field: Field):
    """Reduced row-echelon form and the ordered pivot columns."""
    m = field.array(m)
    if m.ndim != 2:
        raise ValueError("rref expects a 2-D matrix")
    if field.p == 2:
        return _rref_gf2(m)
    if field.p == 0:
        return _rref_q(m)
    return _rref_modp(m, field.p)


def rank(m, field: Field) -> int:
    return len(rref(m, field)[1])


def row_basis(m, field: Field) -> np.ndarray:
    """Row-reduced basis of the row space (rows of the result)."""
    r, piv = rref(m, field)
    return r[: len(piv)]


def kernel_basis(m, field: Field) -> np.ndarray:
    """Basis of ``{x : m x = 0}``, returned as the rows of a ``(nullity, cols)`` array."""
    m = field.array(m)
    rows, cols = m.shape
    r, piv = rref(m, field)
    free = [c for c in range(cols) if c not in set(piv)]
    out = field.zeros((len(free), cols))
    for i, f in enumerate(free):
        out[i, f] = field(1)
        for k, pc in enumerate(piv):
            out[i, pc] = field.neg(r[k, f])
    return out


def solve(m, b, field: Field):
    """Solve ``m x = b``: returns ``(particular, kernel)`` or raises :class:`NoSolution`."""
    m = field.array(m)
    b = field.array(b)
    rows, cols = m.shape
    if b.shape != (rows,):
        raise ValueError(f"right-hand side must have length {rows}")
    aug = np.concatenate([m, b.reshape(rows, 1)], axis=1)
    r, piv = rref(aug, field)
    if piv and piv[-1] == cols:
        raise NoSolution("inconsistent system")
    x = field.zeros(cols)
    for k, pc in enumerate(piv):
        x[pc] = r[k, cols]
    return x, kernel_basis(m, field)


def solve_many(m, bs, field: Field) -> np.ndarray:
    """Particular solutions of ``m X = B`` column by column (``bs`` has shape rows x k)."""
    m = field.array(m)
    bs = field.array(bs)
    rows, cols = m.shape
    aug = np.concatenate([m, bs], axis=1)
    r, piv = rref(aug, field)
    if piv and piv[-1] >= cols:
        raise NoSolution("inconsistent system")
    x = field.zeros((cols, bs.shape[1]))
    for k, pc in enumerate(piv):
        x[pc] = r[k, cols:]
    return x


def inverse(m, field: Field) -> np.ndarray:
    m = field.array(m)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("inverse of a non-square matrix")
    aug = np.concatenate([m, field.eye(n)], axis=1)
    r, piv = rref(aug, field)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ZeroDivisionError("singular matrix")
    return r[:, n:]


def is_invertible(m, field: Field) -> bool:
    m = field.array(m)
    return m.shape[0] == m.shape[1] and rank(m, field) == m.shape[0]


class Subspace:
    """A subspace of ``field^n`` held as a reduced row-echelon basis.

    Coordinates of a member vector with respect to the basis are its entries at
    the pivot columns, which makes membership and coordinate extraction cheap.
    """

    def __init__(self, field: Field, n: int, vectors=None):
        self.field = field
        self.n = n
        if vectors is None or len(vectors) == 0 or n == 0:
            self.basis = field.zeros((0, n))
            self.pivots: list[int] = []
        else:
            r, piv = rref(np.asarray(vectors).reshape(-1, n), field)
            self.basis = r[: len(piv)]
            self.pivots = list(piv)

    @classmethod
    def full(cls, field: Field, n: int) -> "Subspace":
        return cls(field, n, field.eye(n))

    @property
    def dim(self) -> int:
        return len(self.pivots)

    def __len__(self):
        return self.dim

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and other.n == self.n
            and other.pivots == self.pivots
            and np.array_equal(other.basis, self.basis)
        )

    def reduce(self, v) -> np.ndarray:
        """Remainder of ``v`` after eliminating the pivot columns (rows allowed)."""
        f = self.field
        v = f.array(v)
        if self.dim == 0:
            return v
        coeff = v[..., self.pivots]
        return f.reduce(v - f.matmul(coeff, self.basis))

    def contains(self, v) -> bool:
        r = self.reduce(v)
        return not np.any(r != 0)

    def contains_space(self, other: "Subspace") -> bool:
        return other.dim == 0 or self.contains(other.basis)

    def coordinates(self, v) -> np.ndarray:
        v = self.field.array(v)
        if not self.contains(v):
            raise NoSolution("vector not in subspace")
        return v[..., self.pivots]

    def sum(self, other: "Subspace") -> "Subspace":
        return Subspace(self.field, self.n, np.concatenate([self.basis, other.basis]))

    def intersect(self, other: "Subspace") -> "Subspace":
        f = self.field
        if self.dim == 0 or other.dim == 0:
            return Subspace(f, self.n)
        stacked = np.concatenate([self.basis, other.basis]).T
        ker = kernel_basis(stacked, f)
        if len(ker) == 0:
            return Subspace(f, self.n)
        vecs = f.matmul(ker[:, : self.dim], self.basis)
        return Subspace(f, self.n, vecs)

    def complement_coordinates(self) -> list[int]:
        """Standard coordinates spanning a complement (the non-pivot columns)."""
        piv = set(self.pivots)
        return [c for c in range(self.n) if c not in piv]


def stack(vectors: Sequence[np.ndarray] | Iterable[np.ndarray], n: int, field: Field) -> np.ndarray:
    vecs = list(vectors)
    if not vecs:
        return field.zeros((0, n))
    return np.stack([field.array(v) for v in vecs])
