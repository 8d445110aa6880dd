import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from piggyrepair.construct import fig3_code
from piggyrepair.gf import FieldCtx, FieldMismatchError
from piggyrepair.linalg import (
    DimensionError,
    GfMatrix,
    GfVector,
    inverse,
    kernel_basis,
    mat_mul,
    rank,
    rref,
    row_space_basis,
    solve,
    span_contains,
)

from conftest import SMALL_PRIMES


@st.composite
def matrices(draw, max_dim=5, q=None):
    q = q or draw(st.sampled_from(SMALL_PRIMES))
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    data = draw(st.lists(st.integers(0, q - 1), min_size=r * c, max_size=r * c))
    return GfMatrix(FieldCtx(q), np.array(data, dtype=np.int64).reshape(r, c))


def brute_rank(m: GfMatrix) -> int:
    # Size of the row space is q^rank.
    q = m.field.q
    seen = set()
    for coeffs in itertools.product(range(q), repeat=m.rows):
        seen.add(tuple((np.array(coeffs) @ m.data) % q))
    return round(np.log(len(seen)) / np.log(q))


def test_fig3_last_column_in_base_dual():
    f = fig3_code().F
    x = GfVector(f.field, [1, 6, 0, 3, 0, 4], "col")
    assert (f @ x).tolist() == [0, 0, 0]


def test_identity_and_zero_products(gf7):
    a = GfMatrix(gf7, [[1, 2, 3], [4, 5, 6]])
    assert GfMatrix.identity(gf7, 2) @ a == a
    assert (GfMatrix.zeros(gf7, 3, 2) @ a).is_zero()


def test_mul_dimension_mismatch(gf7):
    with pytest.raises(DimensionError):
        mat_mul(GfMatrix.zeros(gf7, 2, 3), GfMatrix.zeros(gf7, 2, 3))
    with pytest.raises(FieldMismatchError):
        mat_mul(GfMatrix.zeros(gf7, 2, 2), GfMatrix.zeros(FieldCtx(5), 2, 2))
    with pytest.raises(DimensionError):
        GfMatrix.zeros(gf7, 2, 2) @ GfVector(gf7, [1, 2], "row")


def test_rank_examples(gf7):
    assert rank(GfMatrix(gf7, [[4, 1], [2, 1]])) == 2
    assert rank(GfMatrix.zeros(gf7, 3, 3)) == 0


@given(matrices(max_dim=4, q=3))
def test_rank_matches_row_space_size(m):
    assert rank(m) == brute_rank(m)


@given(matrices())
def test_rank_of_transpose(m):
    assert rank(m) == rank(m.T)


@given(matrices())
def test_rref_is_canonical(m):
    r, pivots = rref(m)
    assert rref(r)[0] == r
    assert len(pivots) == rank(m)
    for i, c in enumerate(pivots):
        assert r[i, c] == 1
        assert sum(1 for k in range(r.rows) if r[k, c]) == 1
    assert row_space_basis(m).rows == rank(m)


@given(matrices())
def test_kernel_basis(m):
    basis = kernel_basis(m)
    assert len(basis) == m.cols - rank(m)
    for v in basis:
        assert (m @ v).is_zero()
    if basis:
        assert rank(GfMatrix.from_columns(m.field, basis)) == len(basis)


def test_kernel_examples(gf7):
    assert len(kernel_basis(fig3_code().F)) == 3
    assert kernel_basis(GfMatrix.identity(gf7, 4)) == []


@given(matrices(), st.data())
def test_solve_reproduces_rhs(m, data):
    q = m.field.q
    b = GfVector(m.field, data.draw(st.lists(st.integers(0, q - 1), min_size=m.rows, max_size=m.rows)), "col")
    x = solve(m, b)
    if x is None:
        aug = GfMatrix(m.field, np.hstack([m.data, b.data.reshape(-1, 1)]))
        assert rank(aug) > rank(m)
    else:
        assert m @ x == b


def test_solve_examples(gf7):
    b = GfVector(gf7, [3, 1, 4], "col")
    assert solve(GfMatrix.identity(gf7, 3), b) == b
    minor = fig3_code().F.select_columns([0, 3, 4])
    for vals in itertools.product(range(7), repeat=3):
        rhs = GfVector(gf7, vals, "col")
        assert minor @ solve(minor, rhs) == rhs
    inconsistent = GfMatrix(gf7, [[1, 0], [1, 0]])
    assert solve(inconsistent, GfVector(gf7, [1, 2], "col")) is None


def test_solve_free_variables_zero(gf7):
    x = solve(GfMatrix(gf7, [[1, 1, 0]]), GfVector(gf7, [5], "col"))
    assert x.tolist() == [5, 0, 0]


@given(matrices(max_dim=4))
def test_inverse(m):
    sq = GfMatrix(m.field, m.data[: min(m.shape), : min(m.shape)])
    if rank(sq) == sq.rows:
        inv = inverse(sq)
        assert sq @ inv == GfMatrix.identity(sq.field, sq.rows)
    else:
        with pytest.raises(ZeroDivisionError):
            inverse(sq)


def test_span_contains(gf7):
    basis = row_space_basis(GfMatrix(gf7, [[1, 2, 0], [0, 0, 1]]))
    assert span_contains(basis, GfVector(gf7, [2, 4, 3], "row"))
    assert not span_contains(basis, GfVector(gf7, [0, 1, 0], "row"))


def test_immutability(gf7):
    m = GfMatrix(gf7, [[1, 2], [3, 4]])
    with pytest.raises(ValueError):
        m.data[0, 0] = 5
    assert m.with_entry(0, 0, 5)[0, 0] == 5 and m[0, 0] == 1


def test_vector_orientation(gf7):
    row = GfVector(gf7, [1, 2], "row")
    m = GfMatrix(gf7, [[1, 0, 2], [0, 1, 3]])
    assert (row @ m).tolist() == [1, 2, 1]
    assert row.T.orientation == "col"
    assert row.dot(GfVector(gf7, [3, 3], "col")) == 2
