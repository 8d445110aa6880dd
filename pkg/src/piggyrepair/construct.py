"""Explicit perfect-bandwidth repair schemes and the substripe reduction."""
from __future__ import annotations

import itertools
from math import comb, prod
from typing import Mapping, TypeVar

import numpy as np

from .base_code import BaseCode, make_rs_base
from .errors import BudgetExhausted, ParameterError, SchemeError
from .gf import FieldCtx, is_prime
from .linalg import GfMatrix, inverse, rank
from .piggyback import LINEBACK, PIGGYBACK, PiggybackCode, random_piggyback
from .repair import RepairScheme, perfect_bandwidth, recombine, verify_scheme
from .search import SearchBudget

K = TypeVar("K")

GF7 = FieldCtx(7)

_FIG3_F = [[1, 0, 0, 1, 3, 6], [0, 1, 0, 4, 6, 6], [0, 0, 1, 3, 6, 3]]
_FIG3_P01 = [[0, 0, 0, 1, 0, 0], [0, 0, 0, 0, 0, 0], [0, 0, 0, 0, 1, 0]]
_FIG3_SCHEMES = {
    0: ([[4, 1], [0, 6], [0, 0], [0, 3], [0, 0], [0, 4]],
        [[2, 1], [0, 0], [0, 2], [0, 5], [0, 0], [0, 6]], {1, 2, 3, 5}),
    1: ([[1, 1], [6, 5], [0, 0], [0, 2], [6, 6], [0, 0]],
        [[0, 0], [6, 1], [0, 4], [0, 3], [6, 6], [0, 0]], {0, 2, 3, 4}),
    2: ([[0, 1], [0, 0], [2, 6], [0, 0], [0, 5], [0, 2]],
        [[0, 0], [0, 1], [5, 5], [0, 0], [0, 2], [0, 6]], {0, 1, 4, 5}),
    3: ([[0, 1], [0, 0], [0, 0], [6, 4], [0, 1], [3, 1]],
        [[0, 0], [3, 1], [0, 0], [4, 1], [0, 1], [5, 4]], {0, 1, 4, 5}),
    4: ([[0, 0], [6, 1], [0, 0], [0, 1], [3, 1], [3, 4]],
        [[0, 0], [0, 0], [0, 1], [0, 4], [6, 3], [1, 6]], {1, 2, 3, 5}),
    5: ([[2, 1], [0, 0], [0, 0], [0, 4], [2, 1], [5, 1]],
        [[0, 0], [0, 0], [0, 1], [0, 4], [6, 3], [1, 6]], {0, 2, 3, 4}),
}


def fig3_code() -> PiggybackCode:
    """(6,3) Reed-Solomon over GF(7), t=2, with a two-entry piggyback into substripe 1."""
    return PiggybackCode(BaseCode(GfMatrix(GF7, _FIG3_F)), 2, {(0, 1): GfMatrix(GF7, _FIG3_P01)})


def fig3_fixture() -> tuple[PiggybackCode, dict[int, RepairScheme]]:
    """The reference (6,3,2) code over GF(7) with a bandwidth-4 scheme per node."""
    code = fig3_code()
    schemes = {
        i: RepairScheme(code, i, frozenset(s), (GfMatrix(GF7, w0), GfMatrix(GF7, w1)))
        for i, (w0, w1, s) in _FIG3_SCHEMES.items()
    }
    return code, schemes


def _solve2(field: FieldCtx, cols: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # cols is 2x2 and invertible for an MDS base.
    return (inverse(GfMatrix(field, cols)).data @ rhs) % field.q


def _dual_on(f: np.ndarray, field: FieldCtx, fixed: dict[int, int], free: tuple[int, int]) -> np.ndarray:
    """Base-dual vector with the given fixed entries, completed on two free positions."""
    n = f.shape[1]
    x = np.zeros(n, dtype=np.int64)
    for pos, val in fixed.items():
        x[pos] = val % field.q
    x[list(free)] = _solve2(field, f[:, list(free)], (-(f @ x)) % field.q)
    return x


def construct_k2_t2(base: BaseCode) -> tuple[PiggybackCode, dict[int, RepairScheme]]:
    """Piggybacking code on an (n,2) MDS base with a perfect t=2 scheme for every node.

    The single piggyback entry sits at (0, c) with c the first column where
    row 1 of F is nonzero.  Node c takes a separate route that needs a
    nonzero scalar sweep, which is where q >= 3 enters.
    """
    if base.k != 2:
        raise ParameterError(f"this construction needs k=2, got k={base.k}")
    if base.q < 3:
        raise ParameterError(f"this construction needs q >= k+1 = 3, got q={base.q}")
    if base.n < 4:
        raise ParameterError(f"this construction needs n >= 4, got n={base.n}")
    n, field, q = base.n, base.field, base.q
    f = base.generator.data
    c = int(np.flatnonzero(f[1])[0])
    p = np.zeros((2, n), dtype=np.int64)
    p[0, c] = 1
    code = PiggybackCode(base, 2, {(0, 1): GfMatrix(field, p)})
    schemes = {}
    for i_star in range(n):
        build = _k2_t2_other if i_star != c else _k2_t2_coupled
        scheme = build(code, i_star, c)
        plan = verify_scheme(scheme)
        if plan.bandwidth != perfect_bandwidth(code):
            raise SchemeError("not-perfect-bandwidth", f"node {i_star}: bandwidth {plan.bandwidth}")
        schemes[i_star] = scheme
    return code, schemes


def _k2_t2_other(code: PiggybackCode, i_star: int, c: int) -> RepairScheme:
    n, field, q = code.n, code.field, code.q
    f = code.F.data
    i0, i1 = [r for r in range(n) if r not in (i_star, c)][:2]
    # W0: column 0 on {i*, c}, cancelled on substripe 1 by the piggyback.
    alpha = (-f[1, i_star] * pow(int(f[1, c]), -1, q)) % q
    beta = (-f[0, i_star] - alpha * f[0, c]) % q
    w0 = np.zeros((n, 2), dtype=np.int64)
    w0[i_star, 0] = 1
    w0[c, 0] = alpha
    w0[:, 1] = _dual_on(f, field, {c: beta}, (i0, i1))
    w1 = np.zeros((n, 2), dtype=np.int64)
    w1[:, 1] = _dual_on(f, field, {i_star: 1}, (i0, i1))
    return RepairScheme(code, i_star, frozenset({c, i0, i1}),
                        (GfMatrix(field, w0), GfMatrix(field, w1)))


def _k2_t2_coupled(code: PiggybackCode, i_star: int, c: int) -> RepairScheme:
    n, field, q = code.n, code.field, code.q
    f = code.F.data
    e0 = np.array([1, 0], dtype=np.int64)
    others = [r for r in range(n) if r != i_star]
    # x0 lives on {i*, i0, i1}; the remaining helper i2 only enters column 1.
    for i0, i1, i2 in itertools.permutations(others, 3):
        if i0 > i1:
            continue
        a0, a1 = _solve2(field, f[:, [i0, i1]], (-f[:, i_star]) % q)
        v = _solve2(field, f[:, [i0, i1]], (-e0) % q)
        k0 = (v[0] * pow(int(a0), -1, q)) % q
        k1 = (v[1] * pow(int(a1), -1, q)) % q
        for b0 in range(1, q):
            x1 = _dual_on(f, field, {i0: b0}, (i1, i2))
            y1 = _dual_on(f, field, {i_star: 1, i0: k0 * b0}, (i1, i2))
            if not x1[i1] or not x1[i2] or (k1 * x1[i1] - y1[i1]) % q:
                continue
            w0 = np.zeros((n, 2), dtype=np.int64)
            w0[[i_star, i0, i1], 0] = [1, a0, a1]
            w0[:, 1] = x1
            w1 = np.zeros((n, 2), dtype=np.int64)
            w1[[i0, i1], 0] = [(k0 * a0) % q, (k1 * a1) % q]
            w1[:, 1] = y1
            scheme = RepairScheme(code, i_star, frozenset({i0, i1, i2}),
                                  (GfMatrix(field, w0), GfMatrix(field, w1)))
            try:
                if verify_scheme(scheme).bandwidth == perfect_bandwidth(code):
                    return scheme
            except SchemeError:
                continue
    raise SchemeError("not-perfect-bandwidth", f"no perfect scheme found for node {i_star}")


def lineback_failure_bound(n: int, t: int, q: int) -> float:
    """Union bound on the chance that a random linebacking draw misses some (i*, S)."""
    miss = 1.0 - prod(1.0 - q ** -i for i in range(1, t))
    return n * comb(n - 1, t + 1) * miss


def smallest_prime_for_lineback(n: int, t: int) -> int:
    """Smallest prime q >= n with a union bound below 1."""
    q = max(n, 2)
    while not (is_prime(q) and lineback_failure_bound(n, t, q) < 1):
        q += 1
    return q


def _lineback_scheme(code: PiggybackCode, i_star: int, shared: int, exclusive: list[int]) -> RepairScheme:
    field, q, n, t = code.field, code.q, code.n, code.t
    f = code.F.data
    mats = []
    for r_j in exclusive:
        w = np.zeros((n, t), dtype=np.int64)
        last = _dual_on(f, field, {i_star: 1}, (r_j, shared))
        w[:, t - 1] = last
        for i in range(t - 1):
            z = (-(code.P(i, t - 1).data @ last)) % q
            w[[i_star, r_j], i] = _solve2(field, f[:, [i_star, r_j]], z)
        mats.append(GfMatrix(field, w))
    return RepairScheme(code, i_star, frozenset([shared, *exclusive]), tuple(mats))


def lineback_schemes(code: PiggybackCode) -> tuple[dict[tuple[int, frozenset[int]], RepairScheme], int]:
    """Perfect schemes for every (i*, S) with |S| = t+1 that this draw supports.

    Returns the schemes found and the number of pairs tried.
    """
    n, t = code.n, code.t
    found = {}
    total = 0
    for i_star in range(n):
        for s in itertools.combinations([r for r in range(n) if r != i_star], t + 1):
            total += 1
            for shared in s:
                scheme = _lineback_scheme(code, i_star, shared, [r for r in s if r != shared])
                if rank(scheme.node_rows(i_star)) == t:
                    found[(i_star, frozenset(s))] = scheme
                    break
    return found, total


def construct_k2_lineback(base: BaseCode, t: int, budget: SearchBudget | None = None):
    """Random linebacking code on an (n,2) base with a perfect scheme for every (i*, S).

    Draws piggyback matrices from a generator seeded by ``budget.seed``, at
    most ``budget.max_candidates`` times.  Raises BudgetExhausted with the
    best coverage if no draw handles every pair.
    """
    budget = budget or SearchBudget(max_candidates=10)
    if base.k != 2:
        raise ParameterError(f"this construction needs k=2, got k={base.k}")
    if not 2 <= t <= base.n - 2:
        raise ParameterError(f"need 2 <= t <= n-2 = {base.n - 2}, got t={t}")
    rng = np.random.default_rng(budget.seed)
    best = 0
    total = 0
    for _ in range(budget.max_candidates):
        code = random_piggyback(base, t, rng, LINEBACK)
        found, total = lineback_schemes(code)
        if len(found) == total:
            return code, found
        best = max(best, len(found))
    raise BudgetExhausted(
        f"no draw covered all {total} repair pairs in {budget.max_candidates} tries "
        f"(best {best}/{total}, union bound {lineback_failure_bound(base.n, t, base.q):.3g})",
        best, total,
    )


def reduce_scheme(scheme: RepairScheme) -> RepairScheme:
    """Scheme for the code without substripe 0, using at least one fewer download.

    Rows at i* are first normalized to the identity.  The first nonzero
    entry of W(0) away from i* is cleared from the other matrices, then W(0)
    and column 0 are dropped.  The shorter code keeps P(i+1, j+1) as P(i, j).
    """
    code = scheme.code
    t = code.t
    if t < 3:
        raise ParameterError(f"reduction needs t >= 3 so the result keeps t >= 2, got t={t}")
    plan = verify_scheme(scheme)
    norm = recombine(scheme, inverse(scheme.node_rows(scheme.failed)))
    mats = [w.data.copy() for w in norm.matrices]
    q = code.q
    w0 = mats[0].copy()
    w0[scheme.failed] = 0
    nz = np.argwhere(w0)
    if nz.size == 0:
        raise SchemeError("not-dual", "W(0) vanishes away from the failed node")
    r, col = (int(v) for v in nz[0])
    inv = pow(int(mats[0][r, col]), -1, q)
    for l in range(1, t):
        factor = (mats[l][r, col] * inv) % q
        if factor:
            mats[l] = (mats[l] - factor * mats[0]) % q
    reduced = reduced_code(code)
    new = [GfMatrix(code.field, m[:, 1:]) for m in mats[1:]]
    support = set()
    for m in new:
        support.update(m.nonzero_rows())
    support.discard(scheme.failed)
    out = RepairScheme(reduced, scheme.failed, frozenset(support), tuple(new))
    if verify_scheme(out).bandwidth > plan.bandwidth - 1:
        raise SchemeError("not-perfect-bandwidth", "reduction did not save a download")
    return out


def reduce_substripe(code: PiggybackCode, schemes: Mapping[K, RepairScheme]) -> tuple[PiggybackCode, dict[K, RepairScheme]]:
    """Apply ``reduce_scheme`` to every scheme of ``code``; keys are kept."""
    if code.t < 3:
        raise ParameterError(f"reduction needs t >= 3 so the result keeps t >= 2, got t={code.t}")
    out = {}
    for key, scheme in schemes.items():
        if scheme.code != code:
            raise ParameterError(f"scheme {key!r} belongs to a different code")
        out[key] = reduce_scheme(scheme)
    return reduced_code(code), out


def reduced_code(code: PiggybackCode) -> PiggybackCode:
    """The code on substripes 1..t-1, with P(i+1, j+1) renamed P(i, j)."""
    piggy = {(i - 1, j - 1): m for (i, j), m in code.piggy.items() if i >= 1}
    return PiggybackCode(code.base, code.t - 1, piggy, code.kind)


def default_k2_base(n: int, field: FieldCtx) -> BaseCode:
    return make_rs_base(n, 2, field)


__all__ = [
    "PIGGYBACK",
    "LINEBACK",
    "fig3_code",
    "fig3_fixture",
    "construct_k2_t2",
    "construct_k2_lineback",
    "lineback_schemes",
    "lineback_failure_bound",
    "smallest_prime_for_lineback",
    "reduce_scheme",
    "reduce_substripe",
    "reduced_code",
    "default_k2_base",
]
