from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from derivkit import exactlin as el
from derivkit.exactlin import QMatrix, QQ, GF

import oracles


def Q(rows, cols=None):
    rows = [list(r) for r in rows]
    return QMatrix(len(rows), cols if cols is not None else (len(rows[0]) if rows else 0),
                   rows)


small = st.integers(-3, 3)


@st.composite
def matrices(draw, max_dim=5):
    r = draw(st.integers(0, max_dim))
    c = draw(st.integers(0, max_dim))
    rows = draw(st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r))
    return QMatrix(r, c, rows)


def test_rank_examples():
    assert el.rank(QMatrix.identity(3)) == 3
    assert el.rank(QMatrix.zeros(2, 5)) == 0


def test_rank_dependent_rows():
    # hand elimination gives 1; the dense oracle agrees
    M = [[1, 2], [2, 4]]
    assert oracles.rank(oracles.dense(M)) == 1
    assert el.rank(Q(M)) == 1


def test_kernel_of_row():
    K = el.solve_space(Q([[1, 1]]), "kernel")
    assert K.shape == (2, 1)
    v = [K.entry(0, 0), K.entry(1, 0)]
    assert v[0] == -v[1] != 0
    assert oracles.kernel(oracles.dense([[1, 1]]), 2) == [[Fraction(-1), Fraction(1)]]


def test_image_of_identity_and_empty_kernel():
    assert el.rank(el.solve_space(QMatrix.identity(4), "image")) == 4
    K = el.solve_space(QMatrix.zeros(0, 3), "kernel")
    assert K.shape == (3, 3) and el.rank(K) == 3


def test_unknown_space():
    with pytest.raises(el.LinAlgError):
        el.solve_space(QMatrix.identity(1), "cokernel")


def test_is_iso_and_solve():
    assert el.is_iso(Q([[2]]))
    assert not el.is_iso(Q([[1, 0]]))
    x = el.solve(Q([[1, 2]]), [3])
    assert x[0] + 2 * x[1] == 3
    assert el.solve(Q([[0, 0]]), [1]) is None


def test_serialization_is_p_over_q():
    M = Q([[Fraction(1, 2), 0], [-3, Fraction(-2, 7)]])
    assert M.to_json() == [["1/2", "0/1"], ["-3/1", "-2/7"]]
    assert QMatrix.from_json(M.to_json()) == M
    assert QMatrix.from_json([], 0, 3).shape == (0, 3)


def test_prime_field():
    F = GF(5)
    M = QMatrix(2, 2, [[1, 2], [3, 4]], F)
    assert el.rank(M) == 2
    assert el.rank(QMatrix(2, 2, [[1, 2], [3, 1]], F)) == 1
    assert el.parse_field("fp:7") == GF(7)
    assert el.parse_field("q") == QQ
    with pytest.raises(el.LinAlgError):
        GF(6)
    with pytest.raises(el.LinAlgError):
        el.parse_field("z")


def test_field_mismatch_rejected():
    with pytest.raises(el.LinAlgError):
        QMatrix.identity(2) @ QMatrix.identity(2, GF(3))


def test_degenerate_shapes():
    A = QMatrix.zeros(0, 3)
    B = QMatrix.zeros(3, 0)
    assert (B @ A).shape == (3, 3) and (B @ A).is_zero()
    assert (A @ B).shape == (0, 0)
    assert el.is_iso(QMatrix.zeros(0, 0))
    assert el.inverse(QMatrix.zeros(0, 0)).shape == (0, 0)


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_rank_matches_oracle_and_transpose(M):
    dense = [[M.entry(i, j) for j in range(M.cols)] for i in range(M.rows)]
    r = el.rank(M)
    assert r == oracles.rank(dense)
    assert r == el.rank(M.T)


@settings(max_examples=60, deadline=None)
@given(matrices(4), matrices(4))
def test_rank_of_product(A, B):
    B = QMatrix(A.cols, B.cols, [[B.entry(i % max(B.rows, 1), j) if B.rows else 0
                                  for j in range(B.cols)] for i in range(A.cols)])
    assert el.rank(A @ B) <= min(el.rank(A), el.rank(B))


@settings(max_examples=80, deadline=None)
@given(matrices())
def test_kernel_and_image(M):
    K = el.kernel(M)
    assert (M @ K).is_zero()
    assert K.cols == M.cols - el.rank(M)
    assert el.rank(K) == K.cols
    I = el.image(M)
    assert el.rank(I) == el.rank(M) == I.cols
    for j in range(I.cols):
        col = [I.entry(i, j) for i in range(I.rows)]
        assert el.solve(M, col) is not None


@settings(max_examples=60, deadline=None)
@given(matrices(4))
def test_inverse_roundtrip(M):
    if el.is_iso(M):
        assert M @ el.inverse(M) == QMatrix.identity(M.rows)
    else:
        with pytest.raises(el.LinAlgError):
            el.inverse(M)


@settings(max_examples=60, deadline=None)
@given(matrices(4))
def test_left_inverse_and_quotient(M):
    B = el.image(M)
    if B.cols:
        L = el.left_inverse(B)
        assert L @ B == QMatrix.identity(B.cols)
    pi, E = el.quotient_data(B, M.rows)
    assert pi.rows == M.rows - B.cols
    assert (pi @ B).is_zero()
    assert pi @ E == QMatrix.identity(pi.rows)
