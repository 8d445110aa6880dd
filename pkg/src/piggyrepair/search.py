"""Exhaustive search for repair schemes at small parameters.

Any scheme can be recombined so that its rows at the failed node are the
identity without changing a single row span, so it is enough to search
tuples whose matrix j has row e_j at i*.  Within the dual codewords
supported on S + {i*}, those candidates are a fixed particular solution
plus an element of the subspace that vanishes at i*; enumerating that
subspace for every j covers the whole space and an empty result is a
certificate.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .base_code import BaseCode, is_mds, make_grs_base
from .dual import vec_to_matrix
from .errors import BudgetExceeded, ParameterError
from .gf import FieldCtx
from .linalg import GfMatrix, GfVector, kernel_basis, rref_array, solve
from .piggyback import PIGGYBACK, PiggybackCode, random_piggyback
from .repair import RepairScheme, perfect_bandwidth, verify_scheme

FOUND = "found"
EXHAUSTED = "exhausted"
BUDGET = "budget"

_BLOCK = 4096
_MDS_DRAWS = 1000


@dataclass(frozen=True)
class SearchBudget:
    max_candidates: int = 10**6
    seed: int = 0
    time_limit: float = 60.0

    def __post_init__(self) -> None:
        if self.max_candidates <= 0 or self.time_limit <= 0 or self.seed < 0:
            raise ParameterError("search budget values must be positive")


@dataclass(frozen=True)
class SearchOutcome:
    status: str
    scheme: RepairScheme | None = None
    candidates_tried: int = 0
    pair: tuple[RepairScheme, RepairScheme] | None = None
    codes_checked: int = 0


def batched_rank(mats: np.ndarray, q: int) -> np.ndarray:
    """Rank of each matrix in an (N, r, c) stack over GF(q)."""
    a = mats.copy() % q
    n_mats, rows, cols = a.shape
    ranks = np.zeros(n_mats, dtype=np.int64)
    idx = np.arange(n_mats)
    inv = np.array([0] + [pow(v, -1, q) for v in range(1, q)], dtype=np.int64)
    for col in range(cols):
        active = ranks < rows
        if not active.any():
            break
        # First row at or below the current rank with a nonzero entry in this column.
        below = np.arange(rows)[None, :] >= ranks[:, None]
        cand = (a[:, :, col] != 0) & below
        has = cand.any(axis=1) & active
        if not has.any():
            continue
        piv = np.argmax(cand, axis=1)
        sel = idx[has]
        pr, r = piv[has], ranks[has]
        top = a[sel, r].copy()
        a[sel, r] = a[sel, pr]
        a[sel, pr] = top
        a[sel, r] = (a[sel, r] * inv[a[sel, r, col]][:, None]) % q
        factors = a[sel, :, col].copy()
        factors[np.arange(sel.size), r] = 0
        a[sel] = (a[sel] - factors[:, :, None] * a[sel, r][:, None, :]) % q
        ranks[sel] += 1
    return ranks


def _restricted_dual(code: PiggybackCode, support: Sequence[int]) -> np.ndarray:
    """Basis (rows, length nt) of dual codewords vanishing outside ``support``."""
    n, t = code.n, code.t
    cols = [i * n + r for i in range(t) for r in support]
    g = code.generator_matrix.select_columns(cols)
    basis = kernel_basis(g)
    out = np.zeros((len(basis), n * t), dtype=np.int64)
    for b, v in enumerate(basis):
        out[b, cols] = v.data
    return out


def _node_block(stack: np.ndarray, code: PiggybackCode, node: int) -> np.ndarray:
    # stack: (N, t, n*t) candidate tuples -> (N, t, t) rows at ``node``.
    return stack[:, :, [i * code.n + node for i in range(code.t)]]


def exhaustive_scheme_search(
    code: PiggybackCode,
    failed: int,
    repair_set: Iterable[int],
    target_b: int,
    budget: SearchBudget | None = None,
) -> SearchOutcome:
    """First scheme (in canonical order) from S with bandwidth <= target_b, or a certificate."""
    budget = budget or SearchBudget()
    s = sorted(set(repair_set))
    if failed in s or not 0 <= failed < code.n or any(not 0 <= r < code.n for r in s):
        raise ParameterError(f"bad failed node {failed} or repair set {s}")
    q, t, n = code.q, code.t, code.n
    support = sorted([failed, *s])
    basis = _restricted_dual(code, support)
    at_failed = basis[:, [i * n + failed for i in range(t)]]
    _, pivots = rref_array(at_failed.T, q)
    if len(pivots) < t:
        return SearchOutcome(EXHAUSTED, candidates_tried=0)
    # Particular combinations hitting e_j at i*, plus the part vanishing there.
    proj = GfMatrix(code.field, at_failed.T)
    particular = []
    for j in range(t):
        e = np.zeros(t, dtype=np.int64)
        e[j] = 1
        coeffs = solve(proj, GfVector(code.field, e, "col"))
        particular.append((coeffs.data @ basis) % q)
    particular = np.stack(particular)
    free = kernel_basis(proj)
    free_vecs = (np.stack([v.data for v in free]) @ basis) % q if free else np.zeros((0, n * t), dtype=np.int64)
    m = free_vecs.shape[0]
    total = q ** (m * t)
    if total > budget.max_candidates:
        raise BudgetExceeded(f"search space {q}^{m * t} = {total} exceeds budget {budget.max_candidates}")
    start = time.monotonic()
    others = [r for r in range(n) if r != failed]
    tried = 0
    coeff_iter = itertools.product(range(q), repeat=m * t)
    while True:
        block = list(itertools.islice(coeff_iter, _BLOCK))
        if not block:
            break
        c = np.asarray(block, dtype=np.int64).reshape(len(block), t, m)
        stack = (particular[None] + np.einsum("ntm,mv->ntv", c, free_vecs)) % q
        bw = np.zeros(len(block), dtype=np.int64)
        for r in others:
            bw += batched_rank(_node_block(stack, code, r), q)
        hits = np.flatnonzero(bw <= target_b)
        if hits.size:
            h = int(hits[0])
            mats = tuple(vec_to_matrix(code, stack[h, j]) for j in range(t))
            scheme = RepairScheme(code, failed, frozenset(s), mats)
            verify_scheme(scheme)
            return SearchOutcome(FOUND, scheme, tried + h + 1)
        tried += len(block)
        if time.monotonic() - start > budget.time_limit:
            return SearchOutcome(BUDGET, candidates_tried=tried)
    return SearchOutcome(EXHAUSTED, candidates_tried=tried)


def search_all_supports(code: PiggybackCode, failed: int, target_b: int,
                        budget: SearchBudget | None = None) -> SearchOutcome:
    """Search with every other node allowed; covers every support pattern at once."""
    others = [r for r in range(code.n) if r != failed]
    return exhaustive_scheme_search(code, failed, others, target_b, budget)


def find_scheme(code: PiggybackCode, failed: int, budget: SearchBudget | None = None) -> RepairScheme:
    """A perfect scheme if one exists on some (k+t-1)-subset, else plain download from k nodes."""
    others = [r for r in range(code.n) if r != failed]
    target = perfect_bandwidth(code)
    for s in itertools.combinations(others, target):
        try:
            out = exhaustive_scheme_search(code, failed, s, target, budget)
        except BudgetExceeded:
            break
        if out.status == FOUND:
            return out.scheme
    out = exhaustive_scheme_search(code, failed, others[: code.k], code.k * code.t, budget)
    if out.status != FOUND:
        raise ParameterError(f"no repair scheme for node {failed}; is the base code MDS?")
    return out.scheme


def random_mds_base(n: int, k: int, field: FieldCtx, rng: np.random.Generator) -> BaseCode:
    """Random (n,k) MDS base: GRS with random multipliers, or rejection sampling when n > q."""
    q = field.q
    if n <= q:
        return make_grs_base(n, k, field, rng.integers(1, q, n))
    eye = np.eye(k, dtype=np.int64)
    for _ in range(_MDS_DRAWS):
        g = GfMatrix(field, np.hstack([eye, rng.integers(1, q, (k, n - k))]))
        if is_mds(g):
            return BaseCode(g)
    raise ParameterError(
        f"no ({n},{k}) MDS generator over GF({q}) found in {_MDS_DRAWS} draws; "
        f"iter_systematic_mds can certify that none exists"
    )


def sample_piggyback_codes(n: int, k: int, t: int, q: int, count: int, seed: int,
                           kind: str = PIGGYBACK) -> list[PiggybackCode]:
    rng = np.random.default_rng(seed)
    field = FieldCtx(q)
    return [random_piggyback(random_mds_base(n, k, field, rng), t, rng, kind) for _ in range(count)]


def witness_any_d_impossibility(codes: Iterable[PiggybackCode],
                                budget: SearchBudget | None = None) -> SearchOutcome:
    """Look for perfect schemes for nodes 0 and 1 that share the rows 0..k+t-1.

    Node 0 is repaired from {1..k+t-1} and node 1 from {0, 2..k+t-1}.  Returns
    ``found`` with the pair if some code has both, ``exhausted`` if every
    code was fully searched without one.
    """
    budget = budget or SearchBudget()
    start = time.monotonic()
    tried = 0
    checked = 0
    for code in codes:
        if code.n < code.k + code.t:
            raise ParameterError(f"need n >= k+t = {code.k + code.t}, got n={code.n}")
        rows = list(range(code.k + code.t))
        b = perfect_bandwidth(code)
        left = time.monotonic() - start
        sub = SearchBudget(budget.max_candidates, budget.seed, max(budget.time_limit - left, 1e-9))
        try:
            w = exhaustive_scheme_search(code, 0, [r for r in rows if r != 0], b, sub)
            tried += w.candidates_tried
            if w.status == BUDGET:
                return SearchOutcome(BUDGET, candidates_tried=tried, codes_checked=checked)
            if w.status == FOUND:
                v = exhaustive_scheme_search(code, 1, [r for r in rows if r != 1], b, sub)
                tried += v.candidates_tried
                if v.status == BUDGET:
                    return SearchOutcome(BUDGET, candidates_tried=tried, codes_checked=checked)
                if v.status == FOUND:
                    return SearchOutcome(FOUND, w.scheme, tried, (w.scheme, v.scheme), checked + 1)
        except BudgetExceeded:
            return SearchOutcome(BUDGET, candidates_tried=tried, codes_checked=checked)
        checked += 1
    return SearchOutcome(EXHAUSTED, candidates_tried=tried, codes_checked=checked)
