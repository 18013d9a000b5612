from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from leglab.linalg import (
    IntRowBasis,
    LinalgError,
    Matrix,
    intersect_rowspan,
    kernel_basis,
    primitive_vector,
    rank,
    solve_linear,
)
from leglab.scalars import EXACT, approx_backend


def test_rank_identity():
    assert rank(Matrix.identity(3)) == 3


def test_rank_zero():
    assert rank(Matrix([[0, 0], [0, 0]])) == 0


def test_rank_proportional_rows():
    assert rank(Matrix([[1, 2], [2, 4]])) == 1


def test_kernel_identity_empty():
    assert kernel_basis(Matrix.identity(2)) == []


def test_kernel_one_constraint():
    (v,) = kernel_basis(Matrix([[1, -1]]))
    assert v[0] == v[1] != 0


def test_kernel_proportional():
    (v,) = kernel_basis(Matrix([[1, 2], [2, 4]]))
    # proportional to (2, -1)
    assert v[0] * (-1) == v[1] * 2


def test_solve_unique():
    sol = solve_linear(Matrix.identity(2), [3, 5])
    assert sol.kind == "unique"
    assert sol.particular == (3, 5)


def test_solve_family():
    sol = solve_linear(Matrix([[1, 1]]), [0])
    assert sol.kind == "family"
    assert sol.particular == (0, 0)
    (k,) = sol.kernel
    assert k[0] == -k[1]


def test_solve_none():
    assert solve_linear(Matrix([[1], [1]]), [0, 1]).kind == "none"


def test_solve_dimension_mismatch():
    with pytest.raises(LinalgError):
        solve_linear(Matrix.identity(2), [1, 2, 3])


def test_primitive_vector():
    assert primitive_vector([Fraction(-2, 3), Fraction(4, 3), 0]) == (-1, 2, 0)
    assert primitive_vector([0, Fraction(0)]) == (0, 0)


def test_intersect_rowspan():
    m = Matrix([[1, 0, 0], [0, 1, 0]])
    out = intersect_rowspan(m, [(1, 1, 0)])
    assert out.nrows == 1
    v = out.entries[0]
    assert v[0] + v[1] == 0 and v[2] == 0


small_ints = st.integers(min_value=-30, max_value=30)


@st.composite
def int_matrices(draw, max_dim=6):
    nrows = draw(st.integers(1, max_dim))
    ncols = draw(st.integers(1, max_dim))
    rows = [[draw(small_ints) for _ in range(ncols)] for _ in range(nrows)]
    return rows


@settings(max_examples=60, deadline=None)
@given(int_matrices())
def test_rank_equals_transpose_rank(rows):
    m = Matrix(rows)
    assert rank(m) == rank(m.transpose())


@settings(max_examples=60, deadline=None)
@given(int_matrices())
def test_kernel_vectors_annihilated(rows):
    m = Matrix(rows)
    basis = kernel_basis(m)
    assert len(basis) == m.ncols - rank(m)
    for v in basis:
        assert all(x == 0 for x in m.mat_vec(v))


@settings(max_examples=40, deadline=None)
@given(int_matrices())
def test_fraction_free_integrality(rows):
    # the elimination raises if an exact division ever leaves a remainder
    m = Matrix(rows)
    r1 = rank(m)
    # oracle: rational RREF pivot count
    from leglab.linalg import rref

    _, pivots = rref(m)
    assert r1 == len(pivots)


@settings(max_examples=20, deadline=None)
@given(int_matrices(max_dim=12))
def test_approx_rank_agrees(rows):
    m = Matrix(rows)
    ab = approx_backend(100)
    ma = Matrix(rows, ab)
    assert rank(m) == rank(ma)


def test_approx_rank_agrees_20x20():
    from leglab.rng import DetRng

    rng = DetRng(5)
    ab = approx_backend(100)
    for trial in range(5):
        rows = [[rng.int_in(-10, 10) for _ in range(20)] for _ in range(20)]
        assert rank(Matrix(rows)) == rank(Matrix(rows, ab))


def test_approx_solve_inconclusive_on_tiny_pivot():
    ab = approx_backend(64)
    tiny = ab.convert(Fraction(1, 2**40))  # below tol = 2^-32
    m = Matrix([[tiny]], ab)
    assert solve_linear(m, [ab.convert(1)]).kind in ("none", "inconclusive")


def test_int_row_basis_kernel():
    b = IntRowBasis(3)
    assert b.add([1, 2, 3])
    assert not b.add([2, 4, 6])
    assert b.add([0, 1, 1])
    assert b.rank == 2
    (k,) = b.kernel()
    assert sum(a * x for a, x in zip([1, 2, 3], k)) == 0
    assert sum(a * x for a, x in zip([0, 1, 1], k)) == 0
