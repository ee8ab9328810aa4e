from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from khcable.exactla import (
    DimensionError,
    SparseExactMatrix,
    certified_rank,
    exact_rank,
    in_image,
    kernel_basis,
    modular_rank,
    rank_of_vectors,
)

entries = st.one_of(st.integers(-3, 3), st.fractions(-5, 5, max_denominator=4))
matrices = st.integers(0, 7).flatmap(
    lambda r: st.integers(0, 7).flatmap(
        lambda c: st.lists(st.lists(entries, min_size=c, max_size=c), min_size=r, max_size=r)
        .map(lambda rows, c=c: (rows, c))))


def sympy_rank(rows, ncols):
    if not rows or not ncols:
        return 0
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else x
                          for x in row] for row in rows]).rank()


def build(rows, ncols):
    return SparseExactMatrix(len(rows), ncols,
                             [{r: rows[r][c] for r in range(len(rows))} for c in range(ncols)])


@given(matrices)
@settings(max_examples=150, deadline=None)
def test_ranks_match_sympy(data):
    rows, ncols = data
    m = build(rows, ncols)
    want = sympy_rank(rows, ncols)
    assert exact_rank(m) == want
    assert certified_rank(m, 3) == want
    assert m.transpose().shape == (ncols, len(rows))
    assert exact_rank(m.transpose()) == want


@given(matrices)
@settings(max_examples=80, deadline=None)
def test_kernel_basis(data):
    rows, ncols = data
    m = build(rows, ncols)
    ker = kernel_basis(m)
    assert len(ker) == ncols - exact_rank(m)
    for z in ker:
        assert not m.apply(z)
    assert rank_of_vectors(ker) == len(ker)


@given(matrices)
@settings(max_examples=80, deadline=None)
def test_columns_are_in_image(data):
    rows, ncols = data
    m = build(rows, ncols)
    for c in range(ncols):
        assert in_image(m.column(c), m)
    if len(rows) > exact_rank(m):
        # some unit vector is missing from the span
        assert not all(in_image({r: 1}, m) for r in range(len(rows)))


def test_modular_rank_drops_mod_p():
    m = SparseExactMatrix.from_dense([[1, 1], [1, 8]])
    assert exact_rank(m) == 2
    assert modular_rank(m, 7) == 1
    assert modular_rank(m, 11) == 2
    half = SparseExactMatrix.from_dense([[Fraction(1, 2)]])
    assert modular_rank(half, 2) is None
    assert certified_rank(half) == 1


def test_from_coo_sums_duplicates():
    m = SparseExactMatrix.from_coo(2, 2, [0, 0, 1], [1, 1, 0], [2, -2, 5])
    assert m.to_dense() == [[0, 0], [5, 0]]
    assert m.nnz == 1


def test_dimension_errors():
    with pytest.raises(DimensionError):
        SparseExactMatrix(2, 1, [{2: 1}])
    with pytest.raises(DimensionError):
        SparseExactMatrix(2, 2, [{}])
    a = SparseExactMatrix.from_dense([[1, 2]])
    with pytest.raises(DimensionError):
        a @ a
    with pytest.raises(DimensionError):
        in_image([1, 2], a)


def test_product():
    a = SparseExactMatrix.from_dense([[1, 2], [0, 1]])
    b = SparseExactMatrix.from_dense([[1, -2], [0, 1]])
    assert (a @ b).to_dense() == [[1, 0], [0, 1]]
    assert not (a @ b).is_zero()
    assert SparseExactMatrix(3, 2).is_zero()


def test_large_entries_stay_exact():
    # entries beyond 64 bits; the determinant is 1
    big = 2**80
    m = SparseExactMatrix.from_dense([[big + 1, big], [big, big - 1]])
    assert exact_rank(m) == 2
    assert certified_rank(m) == 2
    singular = SparseExactMatrix.from_dense([[big, 2 * big], [3, 6]])
    assert exact_rank(singular) == 1
