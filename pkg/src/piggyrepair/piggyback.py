"""Piggybacking and linebacking array codes built on a scalar MDS base code.

A message is t chunks a_0..a_{t-1} of k symbols each.  Substripe i of the
codeword is

    (a_0 P(0,i) + ... + a_{i-1} P(i-1,i) + a_i F)^T

so node r stores row r of the resulting n x t matrix.  A linebacking code
only has nonzero piggyback matrices targeting the last substripe.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .base_code import BaseCode
from .errors import InconsistentRowsError, ParameterError, ShapeError
from .gf import FieldCtx
from .linalg import GfMatrix, GfVector, inverse, solve

PIGGYBACK = "piggyback"
LINEBACK = "lineback"


@dataclass(frozen=True, eq=False)
class PiggybackCode:
    base: BaseCode
    t: int
    piggy: Mapping[tuple[int, int], GfMatrix] = field(default_factory=dict)
    kind: str = PIGGYBACK

    def __post_init__(self) -> None:
        n, k, t = self.base.n, self.base.k, self.t
        if self.kind not in (PIGGYBACK, LINEBACK):
            raise ParameterError(f"kind must be {PIGGYBACK!r} or {LINEBACK!r}, got {self.kind!r}")
        if not 2 <= t <= n - k:
            raise ParameterError(f"need 2 <= t <= n-k = {n - k}, got t={t}")
        full = {}
        for (i, j), mat in self.piggy.items():
            if not 0 <= i < j <= t - 1:
                raise ParameterError(f"piggyback index ({i},{j}) outside 0 <= i < j <= {t - 1}")
            if mat.field != self.base.field or mat.shape != (k, n):
                raise ShapeError(f"piggyback matrix ({i},{j}) must be {k}x{n} over {self.base.field}")
            if self.kind == LINEBACK and j != t - 1 and not mat.is_zero():
                raise ParameterError(f"linebacking code has a nonzero piggyback into substripe {j}")
            full[(i, j)] = mat
        zero = GfMatrix.zeros(self.base.field, k, n)
        for i, j in itertools.combinations(range(t), 2):
            full.setdefault((i, j), zero)
        object.__setattr__(self, "piggy", MappingProxyType(dict(sorted(full.items()))))

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def k(self) -> int:
        return self.base.k

    @property
    def q(self) -> int:
        return self.base.q

    @property
    def field(self) -> FieldCtx:
        return self.base.field

    @property
    def F(self) -> GfMatrix:
        return self.base.generator

    def P(self, i: int, j: int) -> GfMatrix:
        return self.piggy[(i, j)]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PiggybackCode):
            return NotImplemented
        return (
            self.t == other.t
            and self.kind == other.kind
            and self.base == other.base
            and dict(self.piggy) == dict(other.piggy)
        )

    def __hash__(self) -> int:
        return hash((self.base, self.t, self.kind))

    @cached_property
    def generator_matrix(self) -> GfMatrix:
        """The kt x nt matrix G with vec(C) = a G.

        Rows are ordered chunk-major (a_0 then a_1 ...); columns are ordered
        substripe-major, then node, so codeword entry (node r, substripe i)
        sits in column i*n + r.  Block (l, i) is F on the diagonal and
        P(l, i) above it.
        """
        n, k, t = self.n, self.k, self.t
        g = np.zeros((k * t, n * t), dtype=np.int64)
        for l in range(t):
            g[l * k:(l + 1) * k, l * n:(l + 1) * n] = self.F.data
            for i in range(l + 1, t):
                g[l * k:(l + 1) * k, i * n:(i + 1) * n] = self.piggy[(l, i)].data
        return GfMatrix(self.field, g)

    def is_systematic(self) -> bool:
        k = self.k
        if not self.base.is_systematic():
            return False
        return all(not m.data[:, :k].any() for m in self.piggy.values())


@dataclass(frozen=True, eq=False)
class Message:
    """t chunks of k symbols, each a row vector."""

    chunks: tuple[GfVector, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "chunks", tuple(GfVector(c.field, c.data, "row") for c in self.chunks))
        if not self.chunks:
            raise ShapeError("a message needs at least one chunk")
        if len({len(c) for c in self.chunks}) != 1:
            raise ShapeError("message chunks have unequal lengths")

    @classmethod
    def from_symbols(cls, field_: FieldCtx, symbols: Sequence[int], k: int, t: int) -> Message:
        if len(symbols) != k * t:
            raise ShapeError(f"expected {k * t} symbols, got {len(symbols)}")
        return cls(tuple(GfVector(field_, symbols[i * k:(i + 1) * k], "row") for i in range(t)))

    @classmethod
    def zeros(cls, code: PiggybackCode) -> Message:
        return cls.from_symbols(code.field, [0] * (code.k * code.t), code.k, code.t)

    @classmethod
    def random(cls, code: PiggybackCode, rng: np.random.Generator) -> Message:
        return cls.from_symbols(code.field, rng.integers(0, code.q, code.k * code.t).tolist(), code.k, code.t)

    @property
    def t(self) -> int:
        return len(self.chunks)

    @property
    def k(self) -> int:
        return len(self.chunks[0])

    @property
    def field(self) -> FieldCtx:
        return self.chunks[0].field

    def symbols(self) -> list[int]:
        return [s for c in self.chunks for s in c]

    def __add__(self, other: Message) -> Message:
        return Message(tuple(a + b for a, b in zip(self.chunks, other.chunks, strict=True)))

    def scale(self, c: int) -> Message:
        return Message(tuple(a.scale(c) for a in self.chunks))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Message):
            return NotImplemented
        return self.chunks == other.chunks

    def __hash__(self) -> int:
        return hash(self.chunks)


@dataclass(frozen=True, eq=False)
class Codeword:
    """An n x t matrix; row r is what node r stores."""

    mat: GfMatrix

    @property
    def n(self) -> int:
        return self.mat.rows

    @property
    def t(self) -> int:
        return self.mat.cols

    def row(self, node: int) -> GfVector:
        return self.mat.row(node)

    def __add__(self, other: Codeword) -> Codeword:
        return Codeword(self.mat + other.mat)

    def scale(self, c: int) -> Codeword:
        return Codeword(self.mat.scale(c))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Codeword):
            return NotImplemented
        return self.mat == other.mat

    def __hash__(self) -> int:
        return hash(self.mat)


def encode(code: PiggybackCode, msg: Message) -> Codeword:
    if msg.t != code.t or msg.k != code.k:
        raise ShapeError(f"message is {msg.t}x{msg.k}, code expects {code.t}x{code.k}")
    if msg.field != code.field:
        raise ShapeError(f"message over {msg.field}, code over {code.field}")
    q = code.q
    cols = []
    for i in range(code.t):
        acc = msg.chunks[i].data @ code.F.data
        for l in range(i):
            acc = acc + msg.chunks[l].data @ code.P(l, i).data
        cols.append(acc % q)
    return Codeword(GfMatrix(code.field, np.stack(cols, axis=1)))


def _node_columns(code: PiggybackCode, nodes: Sequence[int]) -> list[int]:
    # Columns of the generator matrix holding (node, substripe) for the given nodes,
    # ordered node-major to match the stacked node rows.
    return [i * code.n + r for r in nodes for i in range(code.t)]


def decode_from_k_nodes(code: PiggybackCode, nodes: Iterable[int], rows: Sequence[GfVector]) -> Message:
    """Recover the message from the contents of at least k nodes.

    With exactly k nodes the answer always exists (the code is MDS); extra
    nodes over-determine the system, so corrupted contents are detected and
    raise InconsistentRowsError.
    """
    nodes = list(nodes)
    if len(nodes) != len(rows):
        raise ShapeError(f"{len(nodes)} node indices but {len(rows)} rows")
    if len(set(nodes)) != len(nodes) or len(nodes) < code.k:
        raise ShapeError(f"need at least k={code.k} distinct nodes, got {nodes}")
    if any(not 0 <= r < code.n for r in nodes):
        raise ShapeError(f"node index out of range in {nodes}")
    if any(len(r) != code.t for r in rows):
        raise ShapeError(f"each node row must have t={code.t} symbols")
    g = code.generator_matrix
    a = g.select_columns(_node_columns(code, nodes)).T
    rhs = GfVector(code.field, np.concatenate([r.data for r in rows]), "col")
    sol = solve(a, rhs)
    if sol is None:
        raise InconsistentRowsError(f"no message matches the contents of nodes {nodes}")
    return Message.from_symbols(code.field, sol.tolist(), code.k, code.t)


def remap_systematic(code: PiggybackCode) -> PiggybackCode:
    """Equivalent code (same codeword set) whose first k nodes store a_i in substripe i.

    The encoding map restricted to the first k nodes is a kt x kt block
    upper-triangular matrix M; left-multiplying the generator by M^-1 keeps
    the piggyback block structure and makes those nodes systematic.
    """
    if code.is_systematic():
        return code
    n, k, t = code.n, code.k, code.t
    g = code.generator_matrix
    m = g.select_columns([i * n + r for i in range(t) for r in range(k)])
    g2 = (inverse(m) @ g).data
    new_f = GfMatrix(code.field, g2[:k, :n])
    piggy = {}
    for l, i in itertools.combinations(range(t), 2):
        block = g2[l * k:(l + 1) * k, i * n:(i + 1) * n]
        if block.any():
            piggy[(l, i)] = GfMatrix(code.field, block)
    return PiggybackCode(BaseCode(new_f), t, piggy, code.kind)


def random_piggyback(base: BaseCode, t: int, rng: np.random.Generator, kind: str = PIGGYBACK) -> PiggybackCode:
    """Uniformly random piggyback matrices (only into substripe t-1 for linebacking)."""
    k, n, q = base.k, base.n, base.q
    piggy = {}
    for i, j in itertools.combinations(range(t), 2):
        if kind == LINEBACK and j != t - 1:
            continue
        piggy[(i, j)] = GfMatrix(base.field, rng.integers(0, q, (k, n)))
    return PiggybackCode(base, t, piggy, kind)
