"""Dual codewords of piggybacking codes.

X (n x t) is dual to the code iff <X, C> = 0 for every codeword C.  For a
piggybacking code this reduces to one k-row condition per substripe i:

    F x_i + P(i,i+1) x_{i+1} + ... + P(i,t-1) x_{t-1} = 0

``in_dual`` evaluates those residuals directly; ``frobenius_check`` tests
the inner product against actual encodings and serves as an independent
oracle for it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, ShapeError
from .linalg import GfMatrix, GfVector, kernel_basis, rank
from .piggyback import LINEBACK, Message, PiggybackCode, encode

DEFAULT_ENUMERATION_BUDGET = 10**6


@dataclass(frozen=True, eq=False)
class DualWitness:
    code: PiggybackCode
    x: GfMatrix
    residuals: tuple[GfVector, ...]

    @property
    def is_member(self) -> bool:
        return all(r.is_zero() for r in self.residuals)

    def __bool__(self) -> bool:
        return self.is_member

    def first_violation(self) -> tuple[int, int] | None:
        """(equation, substripe) of the first nonzero residual entry."""
        for i, r in enumerate(self.residuals):
            nz = np.flatnonzero(r.data)
            if nz.size:
                return int(nz[0]), i
        return None


def _check_shape(code: PiggybackCode, x: GfMatrix) -> None:
    if x.shape != (code.n, code.t) or x.field != code.field:
        raise ShapeError(f"expected an {code.n}x{code.t} matrix over {code.field}, got {x.shape} over {x.field}")


def in_dual(code: PiggybackCode, x: GfMatrix) -> DualWitness:
    _check_shape(code, x)
    q, t = code.q, code.t
    f = code.F.data
    xs = x.data
    residuals = []
    if code.kind == LINEBACK:
        last = xs[:, t - 1]
        for i in range(t - 1):
            residuals.append((f @ xs[:, i] + code.P(i, t - 1).data @ last) % q)
        residuals.append((f @ last) % q)
    else:
        for i in range(t):
            acc = f @ xs[:, i]
            for j in range(i + 1, t):
                acc = acc + code.P(i, j).data @ xs[:, j]
            residuals.append(acc % q)
    return DualWitness(code, x, tuple(GfVector(code.field, r, "col") for r in residuals))


def frobenius(x: GfMatrix, c: GfMatrix) -> int:
    return int((x.data * c.data).sum() % x.field.q)


def frobenius_check(code: PiggybackCode, x: GfMatrix, trials: int = 0, seed: int = 0) -> bool:
    """<x, encode(a)> == 0 for every basis message and ``trials`` random ones.

    The basis messages alone make the check exact; the random messages are
    a redundant second look through the encoder.
    """
    _check_shape(code, x)
    kt = code.k * code.t
    for s in range(kt):
        e = [0] * kt
        e[s] = 1
        if frobenius(x, encode(code, Message.from_symbols(code.field, e, code.k, code.t)).mat):
            return False
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        if frobenius(x, encode(code, Message.random(code, rng)).mat):
            return False
    return True


def vec_to_matrix(code: PiggybackCode, v) -> GfMatrix:
    """Map a length-nt vector (substripe-major, then node) to an n x t matrix."""
    data = v.data if isinstance(v, GfVector) else np.asarray(v)
    return GfMatrix(code.field, data.reshape(code.t, code.n).T)


def matrix_to_vec(x: GfMatrix) -> np.ndarray:
    return x.data.T.reshape(-1)


def dual_basis(code: PiggybackCode) -> list[GfMatrix]:
    """Basis of the dual: the kernel of the kt x nt constraint system."""
    return [vec_to_matrix(code, v) for v in kernel_basis(code.generator_matrix)]


def dual_dimension(code: PiggybackCode) -> int:
    return code.n * code.t - rank(code.generator_matrix)


def enumerate_dual(code: PiggybackCode, budget: int = DEFAULT_ENUMERATION_BUDGET) -> list[GfMatrix]:
    """All dual codewords, in lexicographic order of their basis coefficients."""
    basis = dual_basis(code)
    size = code.q ** len(basis)
    if size > budget:
        raise BudgetExceeded(f"dual has {code.q}^{len(basis)} = {size} elements, budget {budget}")
    q = code.q
    stacked = np.stack([matrix_to_vec(b) for b in basis]) if basis else np.zeros((0, code.n * code.t), dtype=np.int64)
    out = []
    for coeffs in itertools.product(range(q), repeat=len(basis)):
        v = (np.asarray(coeffs, dtype=np.int64) @ stacked) % q if basis else np.zeros(code.n * code.t, dtype=np.int64)
        out.append(vec_to_matrix(code, v))
    return out


def rightmost_nonzero_column(x: GfMatrix) -> int | None:
    nz = np.flatnonzero(x.data.any(axis=0))
    return int(nz[-1]) if nz.size else None
