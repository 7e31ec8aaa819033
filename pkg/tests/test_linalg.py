import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from paralattice.errors import NonConvergence, Singular
from paralattice.linalg import (
    as_matrix, classify_matrix, det, inv, inv_transpose, is_integer_matrix, is_permutation_matrix,
    permutation_matrix, spectral_norm,
)

entries = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def square(d):
    return arrays(np.float64, (d, d), elements=entries)


def test_as_matrix_validation():
    assert as_matrix(2.0).shape == (1, 1)
    with pytest.raises(ValueError):
        as_matrix([[1, 2, 3], [4, 5, 6]])
    with pytest.raises(ValueError):
        as_matrix(np.eye(9))
    with pytest.raises(ValueError):
        as_matrix([[np.nan]])


def test_det_examples(h_ex):
    assert det(h_ex) == pytest.approx(1 / math.sqrt(6), rel=1e-14)
    assert det([[0, 1], [1, 0]]) == -1.0
    assert det(np.eye(5) * 2) == pytest.approx(32.0)


def test_inv_and_singular(h_ex):
    assert np.allclose(inv(h_ex) @ h_ex, np.eye(2), atol=1e-14)
    assert np.allclose(inv_transpose(h_ex), np.linalg.inv(h_ex).T, atol=1e-14)
    with pytest.raises(Singular):
        inv([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(Singular):
        inv(np.zeros((3, 3)))


@settings(max_examples=60, deadline=None)
@given(square(3), square(3))
def test_det_multiplicative(A, B):
    lhs, rhs = det(A @ B), det(A) * det(B)
    scale = max(1.0, float(np.prod(np.linalg.norm(A, axis=1)) * np.prod(np.linalg.norm(B, axis=1))))
    assert abs(lhs - rhs) <= 1e-9 * scale


@settings(max_examples=60, deadline=None)
@given(square(3), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_spectral_norm_scaling(A, c):
    n = spectral_norm(A)
    assert spectral_norm(c * A) == pytest.approx(abs(c) * n, rel=1e-9, abs=1e-12)
    assert n == pytest.approx(np.linalg.norm(A, 2), rel=1e-9, abs=1e-12)


def test_spectral_norm_examples():
    c, s = math.cos(math.pi / 6), math.sin(math.pi / 6)
    assert spectral_norm(0.1 * np.array([[c, -s], [s, c]])) == pytest.approx(0.1, rel=1e-13)
    assert spectral_norm(np.zeros((2, 2))) == 0.0
    # top singular vector orthogonal to the all-ones start
    assert spectral_norm([[1.0, 0.0], [-1.0, 0.0]]) == pytest.approx(math.sqrt(2), rel=1e-13)
    assert spectral_norm([[3.0, 0.0], [0.0, 3.0]]) == pytest.approx(3.0)


def test_spectral_norm_iteration_cap():
    # nearly equal top singular values converge slowly without squaring
    A = np.diag([1.0, 1.0 - 1e-15, 0.5])
    assert spectral_norm(A) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(NonConvergence):
        spectral_norm(np.diag([1.0, 0.9999]), max_iter=0)


def test_classify_matrix(h_ex):
    c = classify_matrix(h_ex)
    assert c.is_lower_triangular and c.diag_in_unit_interval
    assert not c.is_unitriangular and not c.is_integer and not c.is_permutation
    u = classify_matrix([[1, 0], [3, 1]])
    assert u.is_unitriangular and u.is_integer and u.diag_in_unit_interval
    p = classify_matrix([[0, 1], [1, 0]])
    assert p.is_permutation and not p.is_lower_triangular
    assert not classify_matrix([[1.5, 0], [0, 1]]).diag_in_unit_interval
    assert not classify_matrix([[-0.5, 0], [0, 1]]).diag_in_unit_interval
    assert classify_matrix([[1 + 1e-12, 0], [0, 1]], tol=1e-9).is_unitriangular


def test_integer_and_permutation_helpers():
    assert is_integer_matrix([[1.0, 2.0], [3.0 + 1e-12, 4.0]])
    assert not is_integer_matrix([[1.5, 0], [0, 1]])
    assert is_permutation_matrix([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
    assert not is_permutation_matrix([[1, 1], [0, 1]])
    A = np.arange(9.0).reshape(3, 3)
    P = permutation_matrix((2, 0, 1))
    assert np.array_equal((A @ P)[:, 0], A[:, 2])
