"""Scalar MDS base codes."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from math import comb
from typing import Iterator

import numpy as np

from .errors import ParameterError
from .gf import FieldCtx
from .linalg import DimensionError, GfMatrix, GfVector, kernel_basis, rank, rref_array

# Above this length the MDS check samples minors instead of enumerating them.
EXHAUSTIVE_MDS_MAX_N = 12
SAMPLED_MINORS = 2000


class SingularPrefixError(ValueError):
    """The leading k columns of a generator are not independent."""


def _minors_full_rank(g: GfMatrix, subsets) -> bool:
    q = g.field.q
    k = g.rows
    for cols in subsets:
        if len(rref_array(g.data[:, list(cols)], q)[1]) < k:
            return False
    return True


def is_mds(code: BaseCode | GfMatrix, seed: int = 0) -> bool:
    """True iff every k columns of the generator are linearly independent.

    Exhaustive for n <= 12; larger codes are checked on a random sample of
    minors.
    """
    g = code.generator if isinstance(code, BaseCode) else code
    k, n = g.shape
    if k > n or rank(g) < k:
        return False
    if n <= EXHAUSTIVE_MDS_MAX_N or comb(n, k) <= SAMPLED_MINORS:
        return _minors_full_rank(g, itertools.combinations(range(n), k))
    rng = random.Random(seed)
    sample = (sorted(rng.sample(range(n), k)) for _ in range(SAMPLED_MINORS))
    return _minors_full_rank(g, sample)


@dataclass(frozen=True, eq=False)
class BaseCode:
    """An (n, k) scalar MDS code given by a k x n generator matrix."""

    generator: GfMatrix

    def __post_init__(self) -> None:
        k, n = self.generator.shape
        if not 1 <= k <= n:
            raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
        if not is_mds(self.generator):
            raise ParameterError("generator does not define an MDS code")

    @property
    def n(self) -> int:
        return self.generator.cols

    @property
    def k(self) -> int:
        return self.generator.rows

    @property
    def field(self) -> FieldCtx:
        return self.generator.field

    @property
    def q(self) -> int:
        return self.generator.field.q

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BaseCode):
            return NotImplemented
        return self.generator == other.generator

    def __hash__(self) -> int:
        return hash(self.generator)

    def dual_basis(self) -> list[GfVector]:
        return kernel_basis(self.generator)

    def is_systematic(self) -> bool:
        k = self.k
        return np.array_equal(self.generator.data[:, :k], np.eye(k, dtype=np.int64))


def vandermonde(n: int, k: int, field: FieldCtx) -> GfMatrix:
    """k x n Vandermonde matrix on the points 0..n-1 (with 0**0 == 1)."""
    q = field.q
    return GfMatrix(field, [[pow(x, r, q) for x in range(n)] for r in range(k)])


def systematize(generator: GfMatrix) -> GfMatrix:
    """Row-reduce a generator so that its first k columns are the identity."""
    k = generator.rows
    if generator.cols < k:
        raise DimensionError(f"generator {generator.shape} has fewer columns than rows")
    _, pivots = rref_array(generator.data[:, :k], generator.field.q)
    if len(pivots) < k:
        raise SingularPrefixError("first k columns of the generator are rank-deficient")
    m, _ = rref_array(generator.data, generator.field.q)
    return GfMatrix(generator.field, m)


def make_rs_base(n: int, k: int, field: FieldCtx) -> BaseCode:
    """Systematic Reed-Solomon code evaluated on the points 0..n-1."""
    if not 1 <= k <= n:
        raise ParameterError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n > field.q:
        raise ParameterError(
            f"Reed-Solomon base needs n <= q distinct points, got n={n} > q={field.q}"
        )
    return BaseCode(systematize(vandermonde(n, k, field)))


def make_grs_base(n: int, k: int, field: FieldCtx, multipliers) -> BaseCode:
    """Generalized RS: column j of the Vandermonde matrix scaled by multipliers[j]."""
    if n > field.q:
        raise ParameterError(
            f"Reed-Solomon base needs n <= q distinct points, got n={n} > q={field.q}"
        )
    v = vandermonde(n, k, field).data * np.array([int(m) for m in multipliers], dtype=np.int64)
    if not all(int(m) % field.q for m in multipliers):
        raise ParameterError("GRS column multipliers must be nonzero")
    return BaseCode(systematize(GfMatrix(field, v)))


def in_base_dual(code: BaseCode, x: GfVector) -> bool:
    if len(x) != code.n:
        raise DimensionError(f"vector of length {len(x)} for a length-{code.n} code")
    return (code.generator @ GfVector(code.field, x.data, "col")).is_zero()


def iter_systematic_mds(n: int, k: int, field: FieldCtx) -> Iterator[GfMatrix]:
    """Every systematic generator [I_k | A] over GF(q) that is MDS.

    Any MDS code has such a generator, so an empty iteration certifies that
    no (n, k) MDS code exists over this field.  Cost is q**(k*(n-k)).
    """
    q = field.q
    r = n - k
    eye = np.eye(k, dtype=np.int64)
    for entries in itertools.product(range(1, q), repeat=k * r):
        # MDS forces every entry of A to be nonzero.
        a = np.array(entries, dtype=np.int64).reshape(k, r)
        g = GfMatrix(field, np.hstack([eye, a]))
        if is_mds(g):
            yield g
