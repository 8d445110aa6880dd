"""Dense matrices and vectors over GF(q).

Entries are stored as canonical residues in read-only int64 arrays.  All
matrices in this package are small (a few dozen rows at most), so plain
Gaussian elimination is used throughout.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .gf import FieldCtx, FieldElement, FieldMismatchError


class DimensionError(ValueError):
    pass


def _as_array(data, q: int) -> np.ndarray:
    if isinstance(data, np.ndarray):
        arr = data.astype(np.int64, copy=True)
    else:
        arr = np.array(
            [[int(x) for x in row] for row in data], dtype=np.int64
        ) if len(data) else np.zeros((0, 0), dtype=np.int64)
    arr %= q
    arr.setflags(write=False)
    return arr


def _ro(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class GfVector:
    """A row or column vector over a prime field."""

    __slots__ = ("field", "data", "orientation")

    def __init__(self, field: FieldCtx, data: Iterable, orientation: str = "col"):
        if orientation not in ("row", "col"):
            raise ValueError(f"orientation must be 'row' or 'col', got {orientation!r}")
        arr = np.array([int(x) for x in data], dtype=np.int64) % field.q
        self.field = field
        self.data = _ro(arr)
        self.orientation = orientation

    @classmethod
    def zeros(cls, field: FieldCtx, size: int, orientation: str = "col") -> GfVector:
        return cls(field, [0] * size, orientation)

    def __len__(self) -> int:
        return len(self.data)

    def __getitem__(self, i: int) -> int:
        return int(self.data[i])

    def __iter__(self):
        return (int(x) for x in self.data)

    def element(self, i: int) -> FieldElement:
        return FieldElement(int(self.data[i]), self.field)

    def tolist(self) -> list[int]:
        return [int(x) for x in self.data]

    @property
    def T(self) -> GfVector:
        return GfVector(self.field, self.data, "row" if self.orientation == "col" else "col")

    def as_matrix(self) -> GfMatrix:
        shape = (len(self), 1) if self.orientation == "col" else (1, len(self))
        return GfMatrix(self.field, self.data.reshape(shape))

    def weight(self) -> int:
        return int(np.count_nonzero(self.data))

    def is_zero(self) -> bool:
        return not self.data.any()

    def _check(self, other: GfVector) -> None:
        if other.field != self.field:
            raise FieldMismatchError(f"{self.field} vs {other.field}")
        if len(other) != len(self):
            raise DimensionError(f"length {len(self)} vs {len(other)}")

    def __add__(self, other: GfVector) -> GfVector:
        self._check(other)
        return GfVector(self.field, self.data + other.data, self.orientation)

    def __sub__(self, other: GfVector) -> GfVector:
        self._check(other)
        return GfVector(self.field, self.data - other.data, self.orientation)

    def __neg__(self) -> GfVector:
        return GfVector(self.field, -self.data, self.orientation)

    def scale(self, c: int | FieldElement) -> GfVector:
        return GfVector(self.field, self.data * (int(c) % self.field.q), self.orientation)

    def dot(self, other: GfVector) -> int:
        self._check(other)
        return int(np.dot(self.data, other.data) % self.field.q)

    def __matmul__(self, other: GfMatrix) -> GfVector:
        if not isinstance(other, GfMatrix):
            return NotImplemented
        return mat_mul(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GfVector):
            return NotImplemented
        return (
            self.field == other.field
            and self.orientation == other.orientation
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self) -> int:
        return hash((self.field.q, self.orientation, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"GfVector({self.tolist()}, {self.orientation}, {self.field})"


class GfMatrix:
    """Immutable dense matrix over GF(q)."""

    __slots__ = ("field", "data")

    def __init__(self, field: FieldCtx, data):
        arr = _as_array(data, field.q)
        if arr.ndim != 2:
            raise DimensionError(f"expected a 2-d array, got shape {arr.shape}")
        self.field = field
        self.data = arr

    @classmethod
    def zeros(cls, field: FieldCtx, rows: int, cols: int) -> GfMatrix:
        return cls(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, field: FieldCtx, size: int) -> GfMatrix:
        return cls(field, np.eye(size, dtype=np.int64))

    @classmethod
    def from_rows(cls, field: FieldCtx, rows: Sequence[GfVector], cols: int | None = None) -> GfMatrix:
        if not rows:
            return cls.zeros(field, 0, cols or 0)
        return cls(field, np.stack([r.data for r in rows]))

    @classmethod
    def from_columns(cls, field: FieldCtx, cols: Sequence[GfVector]) -> GfMatrix:
        return cls(field, np.stack([c.data for c in cols], axis=1))

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __getitem__(self, idx: tuple[int, int]) -> int:
        return int(self.data[idx])

    def entry(self, i: int, j: int) -> FieldElement:
        return FieldElement(int(self.data[i, j]), self.field)

    def row(self, i: int) -> GfVector:
        return GfVector(self.field, self.data[i], "row")

    def col(self, j: int) -> GfVector:
        return GfVector(self.field, self.data[:, j], "col")

    def select_columns(self, cols: Sequence[int]) -> GfMatrix:
        return GfMatrix(self.field, self.data[:, list(cols)])

    def select_rows(self, rows: Sequence[int]) -> GfMatrix:
        return GfMatrix(self.field, self.data[list(rows), :])

    def with_entry(self, i: int, j: int, value: int) -> GfMatrix:
        arr = self.data.copy()
        arr[i, j] = value
        return GfMatrix(self.field, arr)

    def tolist(self) -> list[list[int]]:
        return self.data.tolist()

    @property
    def T(self) -> GfMatrix:
        return GfMatrix(self.field, self.data.T)

    def is_zero(self) -> bool:
        return not self.data.any()

    def nonzero_rows(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.data.any(axis=1))]

    def _check(self, other: GfMatrix) -> None:
        if other.field != self.field:
            raise FieldMismatchError(f"{self.field} vs {other.field}")
        if other.shape != self.shape:
            raise DimensionError(f"shape {self.shape} vs {other.shape}")

    def __add__(self, other: GfMatrix) -> GfMatrix:
        self._check(other)
        return GfMatrix(self.field, self.data + other.data)

    def __sub__(self, other: GfMatrix) -> GfMatrix:
        self._check(other)
        return GfMatrix(self.field, self.data - other.data)

    def __neg__(self) -> GfMatrix:
        return GfMatrix(self.field, -self.data)

    def scale(self, c: int | FieldElement) -> GfMatrix:
        return GfMatrix(self.field, self.data * (int(c) % self.field.q))

    def __matmul__(self, other):
        if not isinstance(other, (GfMatrix, GfVector)):
            return NotImplemented
        return mat_mul(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GfMatrix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash((self.field.q, self.shape, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"GfMatrix({self.tolist()}, {self.field})"


def mat_mul(a, b):
    """Product over GF(q).  Accepts matrices and suitably oriented vectors."""
    if a.field != b.field:
        raise FieldMismatchError(f"{a.field} vs {b.field}")
    q = a.field.q
    if isinstance(a, GfMatrix) and isinstance(b, GfVector):
        if b.orientation != "col":
            raise DimensionError("matrix @ vector needs a column vector")
        if a.cols != len(b):
            raise DimensionError(f"{a.shape} @ ({len(b)},)")
        return GfVector(a.field, (a.data @ b.data) % q, "col")
    if isinstance(a, GfVector) and isinstance(b, GfMatrix):
        if a.orientation != "row":
            raise DimensionError("vector @ matrix needs a row vector")
        if len(a) != b.rows:
            raise DimensionError(f"({len(a)},) @ {b.shape}")
        return GfVector(a.field, (a.data @ b.data) % q, "row")
    if isinstance(a, GfMatrix) and isinstance(b, GfMatrix):
        if a.cols != b.rows:
            raise DimensionError(f"{a.shape} @ {b.shape}")
        return GfMatrix(a.field, (a.data @ b.data) % q)
    raise TypeError(f"cannot multiply {type(a).__name__} by {type(b).__name__}")


def rref_array(arr: np.ndarray, q: int, max_pivot_col: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of a residue array, and its pivot columns.

    Pivots are taken as the first nonzero entry at or below the current row,
    scanning columns left to right.  With ``max_pivot_col`` set, columns at or
    beyond it are carried along but never pivoted on (used for augmented
    systems).
    """
    m = np.array(arr, dtype=np.int64) % q
    nrows, ncols = m.shape
    limit = ncols if max_pivot_col is None else max_pivot_col
    pivots: list[int] = []
    r = 0
    for c in range(limit):
        if r == nrows:
            break
        nz = np.flatnonzero(m[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            m[[r, p]] = m[[p, r]]
        m[r] = (m[r] * pow(int(m[r, c]), -1, q)) % q
        factors = m[:, c].copy()
        factors[r] = 0
        if factors.any():
            m = (m - np.outer(factors, m[r])) % q
        pivots.append(c)
        r += 1
    return m, pivots


def rref(a: GfMatrix) -> tuple[GfMatrix, list[int]]:
    m, pivots = rref_array(a.data, a.field.q)
    return GfMatrix(a.field, m), pivots


def rank(a: GfMatrix) -> int:
    if a.rows == 0 or a.cols == 0:
        return 0
    return len(rref_array(a.data, a.field.q)[1])


def row_space_basis(a: GfMatrix) -> GfMatrix:
    """Canonical basis of the row space: the nonzero rows of the RREF."""
    m, pivots = rref_array(a.data, a.field.q)
    return GfMatrix(a.field, m[: len(pivots)].reshape(len(pivots), a.cols))


def kernel_basis(a: GfMatrix) -> list[GfVector]:
    """Basis of {x : a x = 0}, one vector per free column of the RREF."""
    q = a.field.q
    m, pivots = rref_array(a.data, q)
    pivot_set = set(pivots)
    basis = []
    for free in range(a.cols):
        if free in pivot_set:
            continue
        v = np.zeros(a.cols, dtype=np.int64)
        v[free] = 1
        for r, c in enumerate(pivots):
            v[c] = (-m[r, free]) % q
        basis.append(GfVector(a.field, v, "col"))
    return basis


def solve(a: GfMatrix, b: GfVector) -> GfVector | None:
    """One solution of a x = b, or None if the system is inconsistent.

    Free variables are set to zero, so the returned solution is a fixed
    function of (a, b).
    """
    if a.field != b.field:
        raise FieldMismatchError(f"{a.field} vs {b.field}")
    if len(b) != a.rows:
        raise DimensionError(f"rhs length {len(b)} for {a.shape} system")
    q = a.field.q
    aug = np.concatenate([a.data, b.data.reshape(-1, 1)], axis=1)
    m, pivots = rref_array(aug, q, max_pivot_col=a.cols)
    r = len(pivots)
    if m[r:, -1].any():
        return None
    x = np.zeros(a.cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = m[i, -1]
    return GfVector(a.field, x, "col")


def inverse(a: GfMatrix) -> GfMatrix:
    if a.rows != a.cols:
        raise DimensionError(f"cannot invert {a.shape} matrix")
    n = a.rows
    aug = np.concatenate([a.data, np.eye(n, dtype=np.int64)], axis=1)
    m, pivots = rref_array(aug, a.field.q, max_pivot_col=n)
    if len(pivots) < n:
        raise ZeroDivisionError("matrix is singular")
    return GfMatrix(a.field, m[:, n:])


def span_contains(basis_rref: GfMatrix, v: GfVector) -> bool:
    stacked = np.vstack([basis_rref.data, v.data.reshape(1, -1)])
    return len(rref_array(stacked, basis_rref.field.q)[1]) == basis_rref.rows


def hstack(mats: Sequence[GfMatrix]) -> GfMatrix:
    return GfMatrix(mats[0].field, np.hstack([m.data for m in mats]))


def vstack(mats: Sequence[GfMatrix]) -> GfMatrix:
    return GfMatrix(mats[0].field, np.vstack([m.data for m in mats]))
