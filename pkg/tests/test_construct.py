from math import comb

import numpy as np
import pytest

from piggyrepair.base_code import BaseCode, make_grs_base, make_rs_base
from piggyrepair.construct import (
    construct_k2_lineback,
    construct_k2_t2,
    fig3_fixture,
    lineback_failure_bound,
    lineback_schemes,
    reduce_scheme,
    reduce_substripe,
    reduced_code,
    smallest_prime_for_lineback,
)
from piggyrepair.errors import BudgetExhausted, ParameterError
from piggyrepair.gf import FieldCtx
from piggyrepair.linalg import GfMatrix
from piggyrepair.piggyback import LINEBACK, Message, encode, random_piggyback
from piggyrepair.repair import execute_repair, t2_kappas, to_standard_form, verify_scheme
from piggyrepair.search import FOUND, SearchBudget, exhaustive_scheme_search


def test_fig3_data():
    code, schemes = fig3_fixture()
    assert code.F.row(0).tolist() == [1, 0, 0, 1, 3, 6]
    p = code.P(0, 1)
    assert [tuple(map(int, ij)) for ij in np.argwhere(p.data)] == [(0, 3), (2, 4)]
    assert schemes[0].repair_set == {1, 2, 3, 5}
    assert schemes[4].matrices[1] == schemes[5].matrices[1]
    assert all(verify_scheme(s).bandwidth == 4 for s in schemes.values())


def test_fig3_supports_differ_for_nodes_0_and_1():
    _, schemes = fig3_fixture()
    assert schemes[0].support() != schemes[1].support()


def _check_k2_t2(base):
    code, schemes = construct_k2_t2(base)
    assert sorted(schemes) == list(range(base.n))
    nz = np.argwhere(code.P(0, 1).data)
    assert len(nz) == 1 and nz[0][0] == 0
    col = int(nz[0][1])
    assert code.F[1, col] != 0 and all(code.F[1, j] == 0 for j in range(col))
    rng = np.random.default_rng(base.n)
    for node, s in schemes.items():
        assert verify_scheme(s).bandwidth == 3
        cw = encode(code, Message.random(code, rng))
        assert execute_repair(s, cw) == cw.row(node)
    return code, schemes


@pytest.mark.parametrize("n,q", [(4, 5), (5, 5), (6, 7), (7, 11), (8, 13)])
def test_k2_t2_rs(n, q):
    _check_k2_t2(make_rs_base(n, 2, FieldCtx(q)))


def test_k2_t2_over_gf3():
    _check_k2_t2(BaseCode(GfMatrix(FieldCtx(3), [[1, 0, 1, 1], [0, 1, 1, 2]])))


@pytest.mark.parametrize("seed", range(8))
def test_k2_t2_grs(seed):
    rng = np.random.default_rng(seed)
    q = [5, 7, 11, 13][seed % 4]
    n = int(rng.integers(4, q + 1))
    _check_k2_t2(make_grs_base(n, 2, FieldCtx(q), rng.integers(1, q, n)))


def test_k2_t2_rejects_q2():
    base = BaseCode(GfMatrix(FieldCtx(2), [[1, 0, 1], [0, 1, 1]]))
    with pytest.raises(ParameterError, match="q >= k"):
        construct_k2_t2(base)


def test_k2_t2_rejects_k3():
    with pytest.raises(ParameterError):
        construct_k2_t2(make_rs_base(6, 3, FieldCtx(7)))


def test_k2_t2_agrees_with_search():
    code, schemes = construct_k2_t2(make_rs_base(5, 2, FieldCtx(5)))
    for node, s in schemes.items():
        out = exhaustive_scheme_search(code, node, s.repair_set, 3)
        assert out.status == FOUND


def test_kappas_distinct_on_constructions():
    code, schemes = construct_k2_t2(make_rs_base(7, 2, FieldCtx(7)))
    for s in schemes.values():
        kappas = t2_kappas(s)
        assert len(kappas) == 3 and len(set(kappas.values())) == 3


def test_union_bound_values():
    assert lineback_failure_bound(5, 2, 23) < 1 <= lineback_failure_bound(5, 2, 19)
    assert smallest_prime_for_lineback(5, 2) == 23
    assert lineback_failure_bound(6, 3, 31) < 1
    assert lineback_failure_bound(6, 4, 7) < 1


@pytest.mark.parametrize("n,t,q", [(5, 2, 23), (5, 2, 101), (6, 3, 31)])
def test_lineback_covers_every_pair(n, t, q):
    code, schemes = construct_k2_lineback(make_rs_base(n, 2, FieldCtx(q)), t, SearchBudget(10, seed=1))
    assert code.kind == LINEBACK
    assert len(schemes) == n * comb(n - 1, t + 1)
    for (node, s_set), s in schemes.items():
        assert s.failed == node and s.repair_set == s_set
        assert verify_scheme(s).bandwidth == t + 1


def test_lineback_reproducible():
    base = make_rs_base(5, 2, FieldCtx(23))
    a = construct_k2_lineback(base, 2, SearchBudget(10, seed=4))[0]
    b = construct_k2_lineback(base, 2, SearchBudget(10, seed=4))[0]
    assert a == b


def test_lineback_budget_exhausted():
    # q=5 is far below the union-bound threshold of 23.
    with pytest.raises(BudgetExhausted) as exc:
        construct_k2_lineback(make_rs_base(5, 2, FieldCtx(5)), 2, SearchBudget(1, seed=0))
    assert exc.value.total == 20 and exc.value.best_coverage == 16


def test_lineback_partial_coverage_counts():
    base = make_rs_base(5, 2, FieldCtx(5))
    code = random_piggyback(base, 2, np.random.default_rng(2), LINEBACK)
    found, total = lineback_schemes(code)
    assert total == 20 and len(found) <= 20
    for s in found.values():
        assert verify_scheme(s).bandwidth == 3


def test_lineback_parameter_checks():
    with pytest.raises(ParameterError):
        construct_k2_lineback(make_rs_base(6, 3, FieldCtx(7)), 2)
    with pytest.raises(ParameterError):
        construct_k2_lineback(make_rs_base(5, 2, FieldCtx(7)), 4)


def test_reduce_t3_to_t2():
    code, schemes = construct_k2_lineback(make_rs_base(6, 2, FieldCtx(31)), 3, SearchBudget(10, seed=0))
    reduced, out = reduce_substripe(code, schemes)
    assert reduced.t == 2 and reduced == reduced_code(code)
    for key, s in out.items():
        assert s.code == reduced
        assert verify_scheme(s).bandwidth <= 3
        assert verify_scheme(s).bandwidth < verify_scheme(schemes[key]).bandwidth
    for (i, j), m in reduced.piggy.items():
        assert m == code.P(i + 1, j + 1)


def test_iterated_reduction_from_t4():
    code, schemes = construct_k2_lineback(make_rs_base(7, 2, FieldCtx(7)), 4, SearchBudget(10, seed=3))
    bw = {key: verify_scheme(s).bandwidth for key, s in schemes.items()}
    for t in (3, 2):
        code, schemes = reduce_substripe(code, schemes)
        assert code.t == t
        new_bw = {key: verify_scheme(s).bandwidth for key, s in schemes.items()}
        assert all(new_bw[key] <= bw[key] - 1 for key in bw)
        bw = new_bw
    assert set(bw.values()) == {3}


def test_reduce_needs_t3():
    code, schemes = fig3_fixture()
    with pytest.raises(ParameterError):
        reduce_substripe(code, schemes)
    with pytest.raises(ParameterError):
        reduce_scheme(schemes[0])


def test_standard_form_on_constructions():
    code, schemes = construct_k2_lineback(make_rs_base(6, 2, FieldCtx(31)), 3, SearchBudget(10, seed=0))
    for s in list(schemes.values())[:12]:
        out, info = to_standard_form(s)
        assert len(info.shared_rows) == 1 and len(info.exclusive_rows) == 3
