"""Witnesses for the parallelepiped decomposition ``A[0,1]^d = B^{-T} R^{-1} H [0,1]^d``.

Two parallelepipeds ``A[0,1]^d`` and ``M[0,1]^d`` with the origin as a
common vertex coincide iff ``M^{-1} A`` maps the unit cube onto itself while
fixing the vertex 0.  The only such linear maps are the coordinate
permutations, so set equality reduces to ``M = A P`` for a permutation
matrix ``P``.

Deciding whether *some* integer ``R`` exists is not attempted; the search
here only tries ``R = I`` with every column permutation, and a failed search
means "unknown", never "impossible".
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import Singular
from .linalg import (
    EPS_NUM, as_matrix, classify_matrix, det, inv, inv_transpose, is_integer_matrix,
    is_permutation_matrix, permutation_matrix,
)

MODES = ("orthogonal", "riesz")


@dataclass
class Witness:
    R: np.ndarray
    H: np.ndarray
    P: tuple[int, ...]
    mode: str = "riesz"

    def __post_init__(self):
        self.R = as_matrix(self.R)
        self.H = as_matrix(self.H)
        self.P = tuple(int(i) for i in self.P)
        if sorted(self.P) != list(range(self.H.shape[0])):
            raise ValueError(f"P = {self.P} is not a permutation of 0..{self.H.shape[0] - 1}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    @property
    def P_matrix(self) -> np.ndarray:
        return permutation_matrix(self.P)

    def to_json(self) -> dict:
        return {"R": self.R.tolist(), "H": self.H.tolist(), "P": list(self.P), "mode": self.mode}

    @classmethod
    def from_json(cls, data: dict) -> "Witness":
        H = as_matrix(data["H"])
        P = data.get("P", list(range(H.shape[0])))
        return cls(data["R"], H, P, data.get("mode", "riesz"))


@dataclass
class WitnessReport:
    accepted: bool
    failures: list[str] = field(default_factory=list)
    residual: float = math.inf

    def to_json(self) -> dict:
        return {"accepted": self.accepted, "failures": list(self.failures), "residual": self.residual}


def parallelepiped_residual(A, M) -> float:
    """Distance of ``M^{-1} A`` from the nearest permutation matrix (max entry)."""
    Q = inv(M) @ as_matrix(A)
    nearest = np.zeros_like(Q)
    nearest[np.arange(Q.shape[0]), np.argmax(np.abs(Q), axis=1)] = 1.0
    if not is_permutation_matrix(nearest, 0.0):
        return float(np.max(np.abs(Q - np.rint(Q)))) + 1.0
    return float(np.max(np.abs(Q - nearest)))


def _same_columns(A: np.ndarray, M: np.ndarray) -> bool:
    """Columns of ``M`` are exactly (bitwise) a reordering of those of ``A``."""
    return sorted(map(tuple, A.T.tolist())) == sorted(map(tuple, M.T.tolist()))


def parallelepiped_equal(A, M, tol: float = EPS_NUM) -> bool:
    """``A[0,1]^d == M[0,1]^d`` as sets, i.e. ``M^{-1} A`` is a permutation.

    Exact column reorderings are recognized before any arithmetic, so the
    relation stays reflexive and symmetric at ``tol = 0``.
    """
    A, M = as_matrix(A), as_matrix(M)
    inv(A)
    Minv = inv(M)
    return _same_columns(A, M) or is_permutation_matrix(Minv @ A, tol)


def structure_failures(H, mode: str, tol: float = EPS_NUM) -> list[str]:
    c = classify_matrix(H, tol)
    failures = []
    if not c.is_lower_triangular:
        failures.append("lower_triangular")
    if mode == "orthogonal":
        if not c.is_unitriangular:
            failures.append("unitriangular")
    elif not c.diag_in_unit_interval:
        failures.append("diag_in_unit_interval")
    return failures


def check_witness(A, B, w: Witness, tol: float = EPS_NUM) -> WitnessReport:
    """Validate every clause of a decomposition witness.

    Failure names: ``R_integer``, ``R_nonsingular``, ``lower_triangular``,
    ``unitriangular`` (orthogonal mode), ``diag_in_unit_interval`` (Riesz
    mode) and ``parallelepiped_equal``.
    """
    A = as_matrix(A)
    B = np.eye(A.shape[0]) if B is None else as_matrix(B)
    inv(A)
    inv(B)
    if w.R.shape != A.shape or w.H.shape != A.shape:
        raise ValueError("witness matrices must match the dimension of A")
    failures = []
    if not is_integer_matrix(w.R, tol):
        failures.append("R_integer")
    R = np.rint(w.R) if not failures else w.R
    try:
        Rinv = inv(R)
    except Singular:
        failures.append("R_nonsingular")
        return WitnessReport(False, failures + structure_failures(w.H, w.mode, tol), math.inf)
    failures += structure_failures(w.H, w.mode, tol)
    M = inv_transpose(B) @ Rinv @ w.H
    try:
        residual = parallelepiped_residual(A @ w.P_matrix, M)
    except Singular:
        failures.append("parallelepiped_equal")
        return WitnessReport(False, failures, math.inf)
    if residual > tol:
        failures.append("parallelepiped_equal")
    return WitnessReport(not failures, failures, residual)


def find_witness_heuristic(A, B=None, mode: str = "riesz", tol: float = EPS_NUM) -> Witness | None:
    """First column permutation ``P`` (lexicographic) making ``B^T A P`` admissible.

    Only ``R = I`` is tried.  ``None`` does not prove that no witness exists.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    A = as_matrix(A)
    d = A.shape[0]
    B = np.eye(d) if B is None else as_matrix(B)
    inv(A)
    inv(B)
    base = B.T @ A
    for perm in itertools.permutations(range(d)):
        H = base @ permutation_matrix(perm)
        if not structure_failures(H, mode, tol):
            return Witness(np.eye(d), H, perm, mode)
    return None


def orthogonal_volume_obstruction(A, B=None, tol: float = 1e-9) -> bool:
    """True when no unitriangular witness can exist for volume reasons.

    A witness forces ``|det(B^T A)| = 1 / |det R|`` with ``R`` integer, so
    ``1 / |det(B^T A)|`` must be a positive integer.
    """
    A = as_matrix(A)
    B = np.eye(A.shape[0]) if B is None else as_matrix(B)
    inv_vol = 1.0 / abs(det(B.T @ A))
    return abs(inv_vol - round(inv_vol)) > tol * max(1.0, inv_vol)
