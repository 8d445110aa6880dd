"""Linear repair schemes given as sets of repair matrices.

A scheme for failed node i* from helper set S is t dual codewords
W(0)..W(t-1), each zero outside S and i*, whose rows at i* span GF(q)^t.
Helper i sends one symbol per basis vector of span{W(j)_i}, so the repair
bandwidth is the sum of those row-span dimensions.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .dual import in_dual, rightmost_nonzero_column
from .errors import SchemeError, ShapeError
from .linalg import GfMatrix, GfVector, inverse, rank, rref_array
from .piggyback import LINEBACK, Codeword, PiggybackCode


def perfect_bandwidth(code: PiggybackCode) -> int:
    return code.k + code.t - 1


def cut_set_bound(k: int, t: int, d: int) -> Fraction:
    """Minimum download t*d/(d-k+1) for repair from d helpers."""
    if d < k:
        raise ValueError(f"need d >= k, got d={d}, k={k}")
    return Fraction(t * d, d - k + 1)


@dataclass(frozen=True, eq=False)
class RepairScheme:
    code: PiggybackCode
    failed: int
    repair_set: frozenset[int]
    matrices: tuple[GfMatrix, ...]

    def __post_init__(self) -> None:
        n, t = self.code.n, self.code.t
        object.__setattr__(self, "repair_set", frozenset(int(i) for i in self.repair_set))
        object.__setattr__(self, "matrices", tuple(self.matrices))
        if not 0 <= self.failed < n:
            raise ShapeError(f"failed node {self.failed} out of range 0..{n - 1}")
        if self.failed in self.repair_set:
            raise ShapeError(f"failed node {self.failed} is in its own repair set")
        if any(not 0 <= i < n for i in self.repair_set):
            raise ShapeError(f"repair set {sorted(self.repair_set)} has nodes outside 0..{n - 1}")
        if len(self.matrices) != t:
            raise ShapeError(f"need t={t} repair matrices, got {len(self.matrices)}")
        for w in self.matrices:
            if w.shape != (n, t) or w.field != self.code.field:
                raise ShapeError(f"repair matrices must be {n}x{t} over {self.code.field}")

    @classmethod
    def from_matrices(cls, code: PiggybackCode, failed: int, matrices: Sequence[GfMatrix]) -> RepairScheme:
        """Build a scheme whose repair set is every other nonzero row."""
        support = set()
        for w in matrices:
            support.update(w.nonzero_rows())
        support.discard(failed)
        return cls(code, failed, frozenset(support), tuple(matrices))

    @property
    def t(self) -> int:
        return len(self.matrices)

    def node_rows(self, node: int) -> GfMatrix:
        """t x t matrix whose row j is W(j) restricted to ``node``."""
        return GfMatrix(self.code.field, np.stack([w.data[node] for w in self.matrices]))

    def support(self) -> set[int]:
        rows = set()
        for w in self.matrices:
            rows.update(w.nonzero_rows())
        return rows

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RepairScheme):
            return NotImplemented
        return (
            self.code == other.code
            and self.failed == other.failed
            and self.repair_set == other.repair_set
            and self.matrices == other.matrices
        )

    def __hash__(self) -> int:
        return hash((self.failed, self.repair_set, self.matrices))


@dataclass(frozen=True)
class QueryPlan:
    """Per-helper query bases; node i downloads one symbol per row of queries[i]."""

    failed: int
    queries: Mapping[int, GfMatrix]

    @property
    def bandwidth(self) -> int:
        return sum(m.rows for m in self.queries.values())

    def dims(self) -> dict[int, int]:
        return {i: m.rows for i, m in self.queries.items()}

    def helpers(self) -> list[int]:
        return sorted(i for i, m in self.queries.items() if m.rows)


def _span_basis(rows: GfMatrix) -> GfMatrix:
    m, pivots = rref_array(rows.data, rows.field.q)
    return GfMatrix(rows.field, m[: len(pivots)].reshape(len(pivots), rows.cols))


def row_spans(scheme: RepairScheme) -> dict[int, GfMatrix]:
    """Canonical (RREF) basis of span{W(j)_i} for every node i."""
    return {i: _span_basis(scheme.node_rows(i)) for i in range(scheme.code.n)}


def verify_scheme(scheme: RepairScheme) -> QueryPlan:
    """Check the repair-matrix conditions and return the query plan.

    Raises SchemeError naming the first failed condition: rows outside
    S and i* must vanish (``support-violation``), every matrix must be a dual
    codeword (``not-dual``), and the rows at i* must have rank t
    (``rank-deficient-at-i*``).
    """
    code, i_star = scheme.code, scheme.failed
    allowed = scheme.repair_set | {i_star}
    for j, w in enumerate(scheme.matrices):
        bad = [r for r in w.nonzero_rows() if r not in allowed]
        if bad:
            raise SchemeError("support-violation", f"matrix {j} is nonzero on row {bad[0]} outside S and i*")
    for j, w in enumerate(scheme.matrices):
        witness = in_dual(code, w)
        if not witness:
            eq, sub = witness.first_violation()
            raise SchemeError("not-dual", f"not-dual at (row={eq}, col={sub}, matrix={j})")
    r = rank(scheme.node_rows(i_star))
    if r != code.t:
        raise SchemeError("rank-deficient-at-i*", f"rows at node {i_star} have rank {r} < t={code.t}")
    spans = row_spans(scheme)
    return QueryPlan(i_star, {i: spans[i] for i in range(code.n) if i != i_star})


def repair_decoder(scheme: RepairScheme, plan: QueryPlan) -> GfMatrix:
    """t x b matrix D with c_{i*} = D r, where r concatenates the helper answers.

    Helpers are taken in increasing node order and each answer lists
    q . c_i for the rows q of that helper's query basis.
    """
    q = scheme.code.field.q
    t = scheme.t
    coef_blocks = []
    for i in sorted(plan.queries):
        basis = plan.queries[i]
        if basis.rows == 0:
            continue
        if rank(basis) != basis.rows:
            raise SchemeError("inflated-queries", f"queries for node {i} are not linearly independent")
        rows = scheme.node_rows(i).data
        m, pivots = rref_array(basis.data, q)
        if not np.array_equal(m[: basis.rows], basis.data):
            raise SchemeError("inflated-queries", f"queries for node {i} are not in canonical form")
        coef = rows[:, pivots]
        if not np.array_equal((coef @ basis.data) % q, rows):
            raise SchemeError("inflated-queries", f"rows of node {i} are outside its query span")
        coef_blocks.append(coef)
    coef_all = np.hstack(coef_blocks) if coef_blocks else np.zeros((t, 0), dtype=np.int64)
    r_inv = inverse(scheme.node_rows(scheme.failed))
    return GfMatrix(scheme.code.field, (-(r_inv.data @ coef_all)) % q)


def answer_queries(plan: QueryPlan, contents: Mapping[int, GfVector]) -> dict[int, GfVector]:
    """What each helper sends: its query basis applied to its stored row."""
    out = {}
    for i in plan.helpers():
        basis = plan.queries[i]
        row = contents[i]
        out[i] = GfVector(basis.field, (basis.data @ row.data) % basis.field.q, "col")
    return out


def reconstruct(scheme: RepairScheme, plan: QueryPlan, responses: Mapping[int, GfVector],
                decoder: GfMatrix | None = None) -> GfVector:
    if decoder is None:
        decoder = repair_decoder(scheme, plan)
    helpers = plan.helpers()
    if sorted(responses) != helpers:
        raise ShapeError(f"responses from {sorted(responses)}, plan expects {helpers}")
    if helpers:
        r = np.concatenate([responses[i].data for i in helpers])
    else:
        r = np.zeros(0, dtype=np.int64)
    return GfVector(scheme.code.field, (decoder.data @ r) % scheme.code.q, "row")


def execute_repair(scheme: RepairScheme, codeword: Codeword, plan: QueryPlan | None = None) -> GfVector:
    """Rebuild row i* of ``codeword`` from exactly plan.bandwidth downloaded symbols."""
    if plan is None:
        plan, decoder = _verified_decoder(scheme)
    else:
        decoder = repair_decoder(scheme, plan)
    contents = {i: codeword.row(i) for i in plan.helpers()}
    return reconstruct(scheme, plan, answer_queries(plan, contents), decoder)


@lru_cache(maxsize=256)
def _verified_decoder(scheme: RepairScheme) -> tuple[QueryPlan, GfMatrix]:
    # Schemes are immutable, so repeated repairs can share one decoder.
    plan = verify_scheme(scheme)
    return plan, repair_decoder(scheme, plan)


# Equivalence-preserving transforms.  Scaling and adding repair matrices keep
# every row span; adding a multiple of the last column to an earlier one
# keeps only the span dimensions.

def _check_index(scheme: RepairScheme, j: int) -> None:
    if not 0 <= j < scheme.t:
        raise IndexError(f"repair matrix index {j} out of range 0..{scheme.t - 1}")


def scale_matrix(scheme: RepairScheme, j: int, kappa: int) -> RepairScheme:
    _check_index(scheme, j)
    kappa %= scheme.code.q
    if kappa == 0:
        raise ValueError("scaling a repair matrix by 0 destroys the scheme")
    mats = list(scheme.matrices)
    mats[j] = mats[j].scale(kappa)
    return replace(scheme, matrices=tuple(mats))


def add_matrix(scheme: RepairScheme, j: int, l: int, kappa: int) -> RepairScheme:
    """Add kappa * W(j) to W(l)."""
    _check_index(scheme, j)
    _check_index(scheme, l)
    if j == l:
        raise ValueError("add_matrix needs two different repair matrices")
    mats = list(scheme.matrices)
    mats[l] = mats[l] + mats[j].scale(kappa)
    return replace(scheme, matrices=tuple(mats))


def recombine(scheme: RepairScheme, transform: GfMatrix) -> RepairScheme:
    """New matrices V(j) = sum_l transform[j, l] W(l) for an invertible transform."""
    t, q = scheme.t, scheme.code.q
    if transform.shape != (t, t) or rank(transform) != t:
        raise ValueError("recombination needs an invertible t x t matrix")
    stack = np.stack([w.data for w in scheme.matrices])
    new = np.einsum("jl,lrc->jrc", transform.data, stack) % q
    return replace(scheme, matrices=tuple(GfMatrix(scheme.code.field, m) for m in new))


def add_last_column(scheme: RepairScheme, target_col: int, kappa: int) -> RepairScheme:
    """Add kappa times the last column to column ``target_col`` in every matrix.

    Piggybacking codes admit only column 0; linebacking codes any column
    before the last.
    """
    t = scheme.code.t
    if scheme.code.kind == LINEBACK:
        legal = 0 <= target_col < t - 1
    else:
        legal = target_col == 0
    if not legal:
        raise SchemeError(
            "illegal-column",
            f"cannot add the last column to column {target_col} of a {scheme.code.kind} code with t={t}",
        )
    mats = []
    for w in scheme.matrices:
        arr = w.data.copy()
        arr[:, target_col] += kappa * arr[:, t - 1]
        mats.append(GfMatrix(w.field, arr))
    return replace(scheme, matrices=tuple(mats))


def equivalent(a: RepairScheme, b: RepairScheme) -> bool:
    """Same failed node and identical row span at every node."""
    if a.failed != b.failed:
        return False
    sa, sb = row_spans(a), row_spans(b)
    return all(sa[i] == sb[i] for i in sa)


def download_equivalent(a: RepairScheme, b: RepairScheme) -> bool:
    if a.failed != b.failed:
        return False
    sa, sb = row_spans(a), row_spans(b)
    return all(sa[i].rows == sb[i].rows for i in sa)


def rightmost_column_weight(w: GfMatrix) -> int:
    c = rightmost_nonzero_column(w)
    return 0 if c is None else int(np.count_nonzero(w.data[:, c]))


@dataclass(frozen=True)
class StandardFormInfo:
    shared_rows: tuple[int, ...]
    exclusive_rows: tuple[int, ...]


def to_standard_form(scheme: RepairScheme) -> tuple[RepairScheme, StandardFormInfo]:
    """Equivalent perfect-bandwidth scheme where W(j) lives on T + {r_j, i*}.

    T is the k-1 smallest helpers.  For each matrix in turn, r_j is its
    smallest nonzero row outside T and i*; multiples of W(j) are then
    subtracted from every other matrix to clear row r_j there.
    """
    code = scheme.code
    k, t, q = code.k, code.t, code.q
    plan = verify_scheme(scheme)
    if plan.bandwidth != perfect_bandwidth(code):
        raise SchemeError(
            "not-perfect-bandwidth",
            f"bandwidth {plan.bandwidth} != k+t-1 = {perfect_bandwidth(code)}",
        )
    helpers = plan.helpers()
    shared = tuple(helpers[: k - 1])
    mats = [w.data.copy() for w in scheme.matrices]
    exclusive = []
    for j in range(t):
        candidates = [
            r for r in np.flatnonzero(mats[j].any(axis=1))
            if r not in shared and r != scheme.failed
        ]
        if not candidates:
            raise SchemeError("not-perfect-bandwidth", f"matrix {j} has no exclusive row available")
        r_j = int(candidates[0])
        exclusive.append(r_j)
        pivot_col = int(np.flatnonzero(mats[j][r_j])[0])
        pivot_inv = pow(int(mats[j][r_j, pivot_col]), -1, q)
        for l in range(t):
            if l == j:
                continue
            factor = (mats[l][r_j, pivot_col] * pivot_inv) % q
            if factor:
                mats[l] = (mats[l] - factor * mats[j]) % q
    out = replace(scheme, matrices=tuple(GfMatrix(code.field, m) for m in mats))
    info = StandardFormInfo(shared, tuple(exclusive))
    _check_standard_form(out, info)
    return out, info


def _check_standard_form(scheme: RepairScheme, info: StandardFormInfo) -> None:
    k, t = scheme.code.k, scheme.code.t
    rows = set(info.shared_rows) | set(info.exclusive_rows)
    helpers = scheme.support() - {scheme.failed}
    if len(info.shared_rows) != k - 1 or len(set(info.exclusive_rows)) != t or rows != helpers:
        raise SchemeError("not-perfect-bandwidth", "standard-form rows do not partition the repair set")
    for j, w in enumerate(scheme.matrices):
        expected = set(info.shared_rows) | {info.exclusive_rows[j], scheme.failed}
        if set(w.nonzero_rows()) != expected:
            raise SchemeError("not-perfect-bandwidth", f"matrix {j} is not supported on T + r_j + i*")
        if np.count_nonzero(w.data[:, t - 1]) != k + 1:
            raise SchemeError("not-perfect-bandwidth", f"last column of matrix {j} does not have weight k+1")


def is_standard_form(scheme: RepairScheme, info: StandardFormInfo) -> bool:
    try:
        _check_standard_form(scheme, info)
    except SchemeError:
        return False
    return True


def t2_kappas(scheme: RepairScheme) -> dict[int, int]:
    """Scalars kappa_i with W(1)_i = kappa_i W(0)_i after normalizing row i* to I.

    Defined for perfect t=2 schemes, where every helper row is nonzero in the
    normalized W(0).
    """
    if scheme.t != 2:
        raise ValueError(f"kappa scalars are defined for t=2, got t={scheme.t}")
    q = scheme.code.q
    plan = verify_scheme(scheme)
    norm = recombine(scheme, inverse(scheme.node_rows(scheme.failed)))
    w0, w1 = norm.matrices[0].data, norm.matrices[1].data
    out = {}
    for i in plan.helpers():
        nz = np.flatnonzero(w0[i])
        if nz.size == 0:
            raise SchemeError("not-perfect-bandwidth", f"helper {i} vanishes in the normalized W(0)")
        c = int(nz[0])
        kappa = (int(w1[i, c]) * pow(int(w0[i, c]), -1, q)) % q
        if not np.array_equal((kappa * w0[i]) % q, w1[i]):
            raise SchemeError("not-perfect-bandwidth", f"helper {i} rows are not proportional")
        out[i] = kappa
    return out
