import random

import pytest
from hypothesis import given, settings, strategies as st

from reflekt.errors import InputError, NotInvertible
from reflekt.linalg import (ExactMatrix, FieldSpec, QQ, block_diag, cokernel, free_columns,
                            hstack, inverse, nullspace, random_matrix, solve, vstack)

from oracles import rank as oracle_rank

FIELDS = [FieldSpec(0), FieldSpec(2), FieldSpec(5)]


def mats(draw_field=st.sampled_from(FIELDS)):
    @st.composite
    def build(draw):
        F = draw(draw_field)
        r = draw(st.integers(0, 5))
        c = draw(st.integers(0, 5))
        seed = draw(st.integers(0, 10**6))
        return random_matrix(F, r, c, random.Random(seed))
    return build()


def test_field_parsing():
    assert FieldSpec.parse("Q") == QQ
    assert FieldSpec.parse("F5").p == 5
    assert str(FieldSpec(7)) == "F7"
    with pytest.raises(InputError):
        FieldSpec.parse("F4")
    with pytest.raises(InputError):
        FieldSpec.parse("R")


def test_elements_from_strings():
    assert QQ.elem("3/6") == QQ.elem("1/2")
    assert FieldSpec(5).elem("7") == 2
    assert FieldSpec(5).elem("1/2") == 3


@given(mats())
@settings(max_examples=60, deadline=None)
def test_rank_matches_oracle(A):
    assert A.rank() == oracle_rank(A.to_lists(), A.field.p)


@given(mats())
@settings(max_examples=60, deadline=None)
def test_nullspace_is_kernel_basis(A):
    N = nullspace(A)
    assert (A @ N).is_zero()
    assert N.cols == A.cols - A.rank()
    free = free_columns(A)
    assert N.submatrix(free, range(N.cols)) == ExactMatrix.identity(A.field, len(free))


@given(mats())
@settings(max_examples=60, deadline=None)
def test_cokernel_projection(A):
    P, comp = cokernel(A)
    assert (P @ A).is_zero()
    assert P.rows == A.rows - A.rank()
    assert P.rank() == P.rows
    assert P.submatrix(range(P.rows), comp) == ExactMatrix.identity(A.field, len(comp))


@given(st.sampled_from(FIELDS), st.integers(1, 4), st.integers(0, 10**6))
@settings(max_examples=40, deadline=None)
def test_inverse_or_singular(F, n, seed):
    A = random_matrix(F, n, n, random.Random(seed))
    if A.rank() == n:
        assert A @ inverse(A) == ExactMatrix.identity(F, n)
    else:
        with pytest.raises(NotInvertible):
            inverse(A)


def test_solve_inconsistent():
    A = ExactMatrix.from_rows(QQ, [[1, 0], [0, 0]])
    B = ExactMatrix.from_rows(QQ, [[1], [1]])
    with pytest.raises(NotInvertible):
        solve(A, B)


def test_cokernel_of_column_vector():
    A = ExactMatrix.from_rows(QQ, [[1], [0]])
    P, comp = cokernel(A)
    assert P.shape == (1, 2) and comp == [1]


def test_stacks():
    I = ExactMatrix.identity(QQ, 2)
    Z = ExactMatrix.zeros(QQ, 2, 1)
    assert hstack(QQ, 2, [I, Z]).shape == (2, 3)
    assert vstack(QQ, 2, [I, I]).shape == (4, 2)
    assert block_diag(QQ, [I, ExactMatrix.identity(QQ, 1)]) == ExactMatrix.identity(QQ, 3)
    assert hstack(QQ, 3, []).shape == (3, 0)


def test_prime_field_arithmetic():
    F = FieldSpec(5)
    A = ExactMatrix.from_rows(F, [[2, 0], [0, 3]])
    assert A @ inverse(A) == ExactMatrix.identity(F, 2)
    assert inverse(A).to_strings() == [["3", "0"], ["0", "2"]]
