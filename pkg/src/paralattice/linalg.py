"""Small dense linear algebra for d x d real matrices (d <= 8).

Matrices are plain float64 numpy arrays; :func:`as_matrix` validates shape
and finiteness.  Determinant and inverse use Gaussian elimination with
partial pivoting, the spectral norm uses power iteration on ``M^T M``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, Singular

MAX_DIM = 8
EPS_NUM = 1e-9
POWER_ITERATION_CAP = 10_000


def as_matrix(M, *, max_dim: int = MAX_DIM) -> np.ndarray:
    """Return ``M`` as a validated square float64 array."""
    arr = np.array(M, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if not 1 <= arr.shape[0] <= max_dim:
        raise ValueError(f"dimension {arr.shape[0]} outside 1..{max_dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def singular_threshold(M: np.ndarray) -> float:
    d = M.shape[0]
    return 1e-12 * float(np.max(np.abs(M))) ** d


def _eliminate(M: np.ndarray, rhs: np.ndarray | None = None):
    """Forward elimination with partial pivoting.

    Returns the upper-triangular factor, the permutation sign and the
    transformed right-hand side.
    """
    U = M.astype(float, copy=True)
    d = U.shape[0]
    X = None if rhs is None else rhs.astype(float, copy=True)
    sign = 1.0
    for k in range(d):
        p = k + int(np.argmax(np.abs(U[k:, k])))
        if U[p, k] == 0.0:
            return U, 0.0, X
        if p != k:
            U[[k, p]] = U[[p, k]]
            if X is not None:
                X[[k, p]] = X[[p, k]]
            sign = -sign
        for i in range(k + 1, d):
            f = U[i, k] / U[k, k]
            if f != 0.0:
                U[i, k:] -= f * U[k, k:]
                if X is not None:
                    X[i] -= f * X[k]
    return U, sign, X


def det(M) -> float:
    M = as_matrix(M)
    U, sign, _ = _eliminate(M)
    if sign == 0.0:
        return 0.0
    return float(sign * np.prod(np.diag(U)))


def inv(M) -> np.ndarray:
    """Inverse by Gauss-Jordan elimination with partial pivoting.

    Raises :class:`Singular` when ``|det M| <= 1e-12 * max|M_ij|**d``.
    """
    M = as_matrix(M)
    d = M.shape[0]
    U, sign, X = _eliminate(M, np.eye(d))
    D = sign * np.prod(np.diag(U)) if sign != 0.0 else 0.0
    if abs(D) <= singular_threshold(M):
        raise Singular(f"matrix is singular (|det| = {abs(D):.3e})")
    for k in range(d - 1, -1, -1):
        X[k] = (X[k] - U[k, k + 1:] @ X[k + 1:]) / U[k, k]
    return X


def inv_transpose(M) -> np.ndarray:
    """``M^{-T}``, the basis of the dual lattice of ``M Z^d``."""
    return inv(M).T


def spectral_norm(M, *, rtol: float = 1e-13, max_iter: int = POWER_ITERATION_CAP) -> float:
    """Largest singular value of ``M``.

    Power iteration on ``S = M^T M`` from the all-ones vector.  The iteration
    operator is first replaced by ``S^(2^k)`` via repeated squaring, which
    applies the same power sequence in far fewer steps and makes nearly tied
    top singular values harmless.  If the start vector happens to be
    orthogonal to the dominant eigenspace, the largest column of the squared
    operator (which lies in that eigenspace) is used instead.
    """
    M = as_matrix(M)
    S = M.T @ M
    scale = float(np.max(np.abs(S)))
    if scale == 0.0:
        return 0.0
    d = S.shape[0]

    T = S / scale
    for _ in range(64):
        T2 = T @ T
        nrm = float(np.max(np.abs(T2)))
        if nrm == 0.0:
            break
        T2 /= nrm
        if np.allclose(T2, T, rtol=0.0, atol=1e-15):
            T = T2
            break
        T = T2

    v = T @ np.ones(d)
    if np.linalg.norm(v) <= 1e-8 * np.sqrt(d):
        cols = np.linalg.norm(T, axis=0)
        v = T[:, int(np.argmax(cols))].copy()
    v /= np.linalg.norm(v)

    rho = float(v @ S @ v)
    for _ in range(max_iter):
        w = S @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = float(v @ S @ v)
        if abs(new - rho) <= rtol * abs(new):
            return float(np.sqrt(new))
        rho = new
    raise NonConvergence(f"power iteration did not converge in {max_iter} steps")


@dataclass(frozen=True)
class MatClass:
    is_integer: bool
    is_lower_triangular: bool
    is_unitriangular: bool
    is_permutation: bool
    diag_in_unit_interval: bool


def is_integer_matrix(M, tol: float = EPS_NUM) -> bool:
    M = np.asarray(M, dtype=float)
    return bool(np.all(np.abs(M - np.rint(M)) <= tol))


def is_permutation_matrix(M, tol: float = EPS_NUM) -> bool:
    M = np.asarray(M, dtype=float)
    ones = np.abs(M - 1.0) <= tol
    zeros = np.abs(M) <= tol
    if not np.all(ones | zeros):
        return False
    return bool(np.all(ones.sum(axis=0) == 1) and np.all(ones.sum(axis=1) == 1))


def classify_matrix(M, tol: float = EPS_NUM) -> MatClass:
    """Structural flags of ``M`` with entrywise tolerance ``tol``.

    The diagonal test is the half-open interval ``(tol, 1 + tol]``.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    M = as_matrix(M)
    diag = np.diag(M)
    lower = bool(np.all(np.abs(np.triu(M, 1)) <= tol))
    return MatClass(
        is_integer=is_integer_matrix(M, tol),
        is_lower_triangular=lower,
        is_unitriangular=lower and bool(np.all(np.abs(diag - 1.0) <= tol)),
        is_permutation=is_permutation_matrix(M, tol),
        diag_in_unit_interval=bool(np.all((diag > tol) & (diag <= 1.0 + tol))),
    )


def permutation_matrix(perm) -> np.ndarray:
    """Matrix ``P`` with ``(A @ P)[:, j] == A[:, perm[j]]``."""
    perm = list(perm)
    return np.eye(len(perm))[:, perm]
