import pytest
import numpy as np

from app.exceptions import DimensionMismatch, NonFiniteMatrix, NotOrthonormal
from app.models.riccati import Tolerance
from app.utils import linalg


def penrose_defects(M, P):
    return [
        linalg.max_norm(M @ P @ M - M),
        linalg.max_norm(P @ M @ P - P),
        linalg.max_norm((P @ M).T - P @ M),
        linalg.max_norm((M @ P).T - M @ P),
    ]


def test_pinv_of_zero_is_zero():
    assert np.array_equal(linalg.pinv(np.zeros((2, 2))), np.zeros((2, 2)))


def test_pinv_diagonal():
    np.testing.assert_allclose(linalg.pinv(np.diag([2.0, 0.0])), np.diag([0.5, 0.0]))


def test_pinv_rank_one():
    M = np.array([[27.0, -45.0], [-45.0, 75.0]])
    expected = np.array([[9.0, -15.0], [-15.0, 25.0]]) / 3468.0
    P = linalg.pinv(M)
    np.testing.assert_allclose(P, expected, atol=1e-14)
    assert max(penrose_defects(M, P)) <= 1e-8


def test_pinv_empty_shapes():
    assert linalg.pinv(np.zeros((3, 0))).shape == (0, 3)


def test_pinv_ignores_noise_below_floor():
    M = np.full((2, 2), 1e-30)
    tol = Tolerance().at_scale(1.0, 2)
    assert linalg.rank(M, tol) == 0
    assert linalg.max_norm(linalg.pinv(M, tol)) == 0.0
    assert linalg.rank(M) == 1


def test_kernel_basis_example1_state_matrix():
    A = np.array([[0.0, -4.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, -1.0]])
    K = linalg.kernel_basis(A)
    assert K.shape == (3, 1)
    np.testing.assert_allclose(K @ K.T, np.diag([1.0, 0.0, 0.0]), atol=1e-12)


def test_kernel_basis_identity_and_zero():
    assert linalg.kernel_basis(np.eye(3)).shape == (3, 0)
    K = linalg.kernel_basis(np.zeros((2, 2)))
    assert K.shape == (2, 2)
    assert linalg.is_orthogonal(K)


def test_kernel_basis_width_plus_rank(rng):
    for _ in range(20):
        rows, cols = rng.integers(1, 8, size=2)
        r = int(rng.integers(0, min(rows, cols) + 1))
        M = rng.standard_normal((rows, r)) @ rng.standard_normal((r, cols))
        K = linalg.kernel_basis(M)
        assert linalg.rank(M) + K.shape[1] == cols
        assert linalg.max_norm(M @ K) <= 1e-8


def test_orthonormal_extension_keeps_trailing_columns(rng):
    W, _ = np.linalg.qr(rng.standard_normal((5, 2)))
    U = linalg.orthonormal_extension(W)
    assert linalg.max_norm(U.T @ U - np.eye(5)) <= 1e-8
    np.testing.assert_array_equal(U[:, 3:], W)


def test_orthonormal_extension_of_e1():
    U = linalg.orthonormal_extension(np.array([[1.0], [0.0], [0.0]]))
    assert linalg.is_orthogonal(U)
    np.testing.assert_array_equal(U[:, 2], [1.0, 0.0, 0.0])


def test_orthonormal_extension_full_width():
    U = linalg.orthonormal_extension(np.eye(2))
    np.testing.assert_array_equal(U, np.eye(2))


def test_orthonormal_extension_rejects_non_orthonormal():
    with pytest.raises(NotOrthonormal):
        linalg.orthonormal_extension(np.array([[1.0], [1.0]]))


def test_ker_included_cases():
    assert linalg.ker_included(np.eye(2), np.ones((3, 2)))
    assert linalg.ker_included(np.zeros((2, 2)), np.zeros((2, 2)))
    assert not linalg.ker_included(np.zeros((2, 2)), np.eye(2))


def test_ker_included_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        linalg.ker_included(np.eye(2), np.eye(3))


def test_ker_included_reflexive(rng):
    for _ in range(20):
        M = rng.standard_normal((4, 2)) @ rng.standard_normal((2, 4))
        assert linalg.ker_included(M, M)
        assert linalg.ker_included(M, linalg.pinv(M) @ M)


def test_rank_and_psd():
    assert linalg.rank(np.array([[27.0, -45.0], [-45.0, 75.0]])) == 1
    assert linalg.is_psd(np.diag([3.0, 0.0, 16.0]))
    assert not linalg.is_psd(np.diag([0.0, 0.0, -1.0]))


def test_is_psd_rejects_non_square():
    with pytest.raises(DimensionMismatch):
        linalg.is_psd(np.zeros((2, 3)))


def test_as_matrix_checks():
    assert linalg.as_matrix(5).shape == (1, 1)
    assert linalg.as_matrix([], rows=3, cols=0).shape == (3, 0)
    with pytest.raises(NonFiniteMatrix):
        linalg.as_matrix([[np.nan]])
    with pytest.raises(DimensionMismatch):
        linalg.as_matrix([[1.0, 2.0]], rows=2)


def test_cutoff_is_scale_invariant():
    tol = Tolerance()
    M = np.diag([1.0, 1e-12])
    assert linalg.rank(M, tol) == 1
    assert linalg.rank(1e6 * M, tol) == 1
    assert linalg.rank(1e-12 * M, tol) == 1
    assert linalg.rank(1e-12 * np.eye(2), tol) == 2
    assert linalg.is_nonsingular(1e-12 * np.eye(2), tol)
    assert linalg.rank(np.zeros((2, 2)), tol) == 0


def test_noise_floor_only_rises():
    tol = Tolerance(floor=1e-6)
    assert tol.at_scale(1.0, 3) is tol
    raised = Tolerance().at_scale(100.0, 3)
    assert raised.floor == pytest.approx(3e-10)
    assert raised.rel == Tolerance().rel
