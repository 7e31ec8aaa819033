"""Frequency-set constructions and perturbation admissibility checks.

Constructions:

* rounded dual lattice ``r(H^{-T} Z^d)`` for lower triangular ``H`` with
  diagonal in ``(0, 1]``;
* rectangular rounded lattice ``r(Z/a_11 + delta_1) x ... x r(Z/a_dd + delta_d)``;
* lift ``Gamma = B R^T C`` into the prescribed lattice ``B Z^d``;
* rounding of ``A^{-T} Z^d`` when ``||A||_2 < 2 ln 2 / (pi d^{3/2})``;
* tensor products of one-dimensional sets.

Condition checks only see a finite window of the (infinite) sequence, so
every :class:`ConditionReport` is window-verified, never a statement about
the whole sequence.

The block-mean condition is normalized by the block length ``P``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BadDiagonal, BadStructure, IncompleteBlock, NormTooLarge, OutOfRange
from .lattice import FreqSet, FrequencyRule, LatticeRule
from .linalg import as_matrix, classify_matrix, inv, inv_transpose, is_integer_matrix, spectral_norm

QUARTER = 0.25


def spectral_norm_threshold(d: int) -> float:
    return 2.0 * math.log(2.0) / (math.pi * d ** 1.5)


def bailey_threshold(d: int) -> float:
    return math.log(2.0) / (math.pi * d)


@dataclass
class PerturbedSequence:
    """Finite window of a perturbed sequence ``values[i] = base[i] + deltas[i]``.

    ``indices`` are the generating indices (contiguous integers in 1-D,
    index vectors in higher dimension).
    """

    indices: np.ndarray
    values: np.ndarray
    base: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=float)
        self.base = np.asarray(self.base, dtype=float)
        if self.values.shape != self.base.shape or len(self.indices) != len(self.values):
            raise ValueError("indices, values and base must have matching lengths")
        if len(self.values) == 0:
            raise ValueError("window must be non-empty")
        if self.indices.ndim == 1 and np.any(np.diff(self.indices) != 1):
            raise ValueError("indices must be contiguous")

    @property
    def deltas(self) -> np.ndarray:
        return self.values - self.base

    @classmethod
    def around_integers(cls, values: Sequence[float], start: int) -> "PerturbedSequence":
        vals = np.asarray(values, dtype=float)
        idx = np.arange(start, start + len(vals))
        return cls(idx, vals, idx.astype(float))

    @classmethod
    def from_function(cls, delta: Callable[[np.ndarray], np.ndarray], n_min: int, n_max: int):
        idx = np.arange(n_min, n_max + 1)
        return cls(idx, idx + np.asarray(delta(idx), dtype=float), idx.astype(float))

    @classmethod
    def from_freqset(cls, fs: FreqSet, base_matrix=None) -> "PerturbedSequence":
        """Pair each point with ``base_matrix @ index`` (identity by default)."""
        if fs.indices is None:
            raise ValueError("frequency set carries no generating indices")
        idx = fs.indices
        B = np.eye(fs.dim) if base_matrix is None else as_matrix(base_matrix)
        return cls(idx, fs.points.astype(float), idx @ B.T)


@dataclass
class ConditionReport:
    """Outcome of a window-verified admissibility check.

    ``margin`` is the signed distance to the threshold.  For strict
    conditions ``satisfied`` iff ``margin > 0``; for closed conditions
    (the Bailey tube and minimum separation) ``margin == 0`` still counts as
    satisfied.
    """

    condition: str
    satisfied: bool
    margin: float
    parameters: dict = field(default_factory=dict)
    window: int = 0
    qualifier: str = "window-verified"

    def to_json(self) -> dict:
        return {
            "condition": self.condition,
            "satisfied": self.satisfied,
            "margin": self.margin,
            "parameters": dict(self.parameters),
            "window": self.window,
            "qualifier": self.qualifier,
        }


# --- constructions ---------------------------------------------------------


def _require_lower_triangular(H, tol: float) -> np.ndarray:
    H = as_matrix(H)
    cls = classify_matrix(H, tol)
    if not cls.is_lower_triangular:
        raise BadStructure("H must be lower triangular")
    if not cls.diag_in_unit_interval:
        raise BadStructure("diagonal of H must lie in (0, 1]")
    return H


def rounded_dual_rule(H, tol: float = 1e-9) -> LatticeRule:
    H = _require_lower_triangular(H, tol)
    return LatticeRule(inv_transpose(H), rounded=True, provenance="rounded-dual")


def rounded_dual_construction(H, N: int, tol: float = 1e-9) -> FreqSet:
    """``r(H^{-T} n)`` for ``|n_k| <= N``.

    Injectivity of the rounding is guaranteed by the structure of ``H``; a
    collision here means the inputs were mis-validated.
    """
    return rounded_dual_rule(H, tol).generate(N)


class ProductRule(FrequencyRule):
    """Cartesian product of one-dimensional rules."""

    def __init__(self, factors: Sequence[FrequencyRule], provenance: str = "tensor"):
        if any(f.dim != 1 for f in factors):
            raise ValueError("product factors must be one-dimensional")
        self.factors = list(factors)
        self.dim = len(self.factors)
        self.provenance = provenance

    def generate(self, N: int) -> FreqSet:
        prod = tensor_product([f.generate(N) for f in self.factors])
        return FreqSet(prod.points, self.provenance, N, prod.indices)

    def covering_radius(self, r: float) -> int:
        return max(f.covering_radius(r) for f in self.factors)


def rectangular_rule(diag: Sequence[float], offsets: Sequence[float] | None = None) -> ProductRule:
    diag = [float(a) for a in diag]
    offsets = [0.0] * len(diag) if offsets is None else [float(o) for o in offsets]
    if len(offsets) != len(diag):
        raise ValueError("offsets and diagonals differ in length")
    for a in diag:
        if not 0.0 < a <= 1.0:
            raise BadDiagonal(f"diagonal entry {a} outside (0, 1]")
    factors = [
        LatticeRule([[1.0 / a]], offset=[o] if o else None, rounded=True)
        for a, o in zip(diag, offsets)
    ]
    return ProductRule(factors, provenance="rectangular")


def rectangular_construction(diag: Sequence[float], offsets: Sequence[float] | None = None,
                             N: int = 10) -> FreqSet:
    return rectangular_rule(diag, offsets).generate(N)


def _require_integer_nonsingular(R, tol: float = 1e-9) -> np.ndarray:
    R = as_matrix(R)
    if not is_integer_matrix(R, tol):
        raise BadStructure("R must have integer entries")
    R = np.rint(R)
    inv(R)
    return R


def lift_frequencies(C: FreqSet, R, B=None) -> FreqSet:
    """Map ``C`` to ``B R^T C``; lands in ``B Z^d`` when ``C`` is integral."""
    if not C.is_integer:
        raise ValueError("C must be integer-valued")
    R = _require_integer_nonsingular(R)
    B = np.eye(C.dim) if B is None else as_matrix(B)
    inv(B)
    T = B @ R.T
    if is_integer_matrix(T, 0.0):
        pts = C.points @ np.rint(T).astype(np.int64).T
    else:
        pts = C.points @ T.T
    return FreqSet(pts, "lifted", C.index_radius, C.indices)


class LinearImageRule(FrequencyRule):
    """Image ``T Gamma`` of another rule's set under a fixed linear map."""

    def __init__(self, inner: FrequencyRule, T, provenance: str = "lifted"):
        self.inner = inner
        self.T = as_matrix(T)
        self.Tinv = inv(self.T)
        self.dim = inner.dim
        self.provenance = provenance

    def generate(self, N: int) -> FreqSet:
        C = self.inner.generate(N)
        if is_integer_matrix(self.T, 0.0) and C.is_integer:
            pts = C.points @ np.rint(self.T).astype(np.int64).T
        else:
            pts = C.points @ self.T.T
        return FreqSet(pts, self.provenance, N, C.indices)

    def covering_radius(self, r: float) -> int:
        row_norm = float(np.max(np.sum(np.abs(self.Tinv), axis=1)))
        return self.inner.covering_radius(row_norm * r)


def lifted_rule(inner: FrequencyRule, R, B=None) -> FrequencyRule:
    R = _require_integer_nonsingular(R)
    B = np.eye(inner.dim) if B is None else as_matrix(B)
    T = B @ R.T
    if np.array_equal(T, np.eye(inner.dim)):
        return inner
    return LinearImageRule(inner, T)


def spectral_norm_rule(A) -> LatticeRule:
    A = as_matrix(A)
    d = A.shape[0]
    norm = spectral_norm(A)
    threshold = spectral_norm_threshold(d)
    if not norm < threshold:
        raise NormTooLarge(norm, threshold)
    return LatticeRule(inv_transpose(A), rounded=True, provenance="spectral-norm")


def spectral_norm_construction(A, N: int) -> FreqSet:
    """Round ``A^{-T} Z^d`` (index box ``N``) when ``A`` is small in norm."""
    return spectral_norm_rule(A).generate(N)


def tensor_product(sets: Sequence[FreqSet]) -> FreqSet:
    """Cartesian product in lexicographic order of the factor rows."""
    if not sets:
        raise ValueError("need at least one factor")
    if any(s.dim != 1 for s in sets):
        raise ValueError("tensor factors must be one-dimensional")
    grids = np.meshgrid(*[s.points[:, 0] for s in sets], indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    indices = None
    if all(s.indices is not None for s in sets):
        igrids = np.meshgrid(*[s.indices[:, 0] for s in sets], indexing="ij")
        indices = np.stack([g.ravel() for g in igrids], axis=1)
    return FreqSet(pts, "tensor", max(s.index_radius for s in sets), indices)


class PerturbationRule(FrequencyRule):
    """One-dimensional sequence ``n + delta(n)`` with ``|delta| <= max_shift``."""

    dim = 1

    def __init__(self, delta: Callable[[np.ndarray], np.ndarray], max_shift: float,
                 provenance: str = "explicit"):
        self.delta = delta
        self.max_shift = float(max_shift)
        self.provenance = provenance

    def generate(self, N: int) -> FreqSet:
        idx = np.arange(-N, N + 1)
        vals = idx + np.asarray(self.delta(idx), dtype=float)
        return FreqSet(vals.reshape(-1, 1), self.provenance, N, idx)

    def covering_radius(self, r: float) -> int:
        return int(math.ceil(r + self.max_shift)) + 1


# --- admissibility checks --------------------------------------------------


def kadec_condition_check(s: PerturbedSequence) -> ConditionReport:
    """Pointwise quarter condition ``max |gamma_n - n| < 1/4``."""
    L = float(np.max(np.abs(s.deltas)))
    return ConditionReport("kadec", L < QUARTER, QUARTER - L, {"L": L}, len(s.values))


def avdonin_condition_check(s: PerturbedSequence, P: int, sep_min: float) -> ConditionReport:
    """Separation plus quarter-in-the-mean over blocks of length ``P``.

    Blocks are ``[mP, (m+1)P - 1]``; the window must consist of whole blocks.
    """
    if P < 1:
        raise ValueError("P must be >= 1")
    if sep_min <= 0:
        raise ValueError("sep_min must be positive")
    idx = s.indices
    if idx.ndim != 1:
        raise ValueError("block-mean condition is one-dimensional")
    if idx[0] % P != 0 or len(idx) % P != 0:
        raise IncompleteBlock(f"window [{idx[0]}, {idx[-1]}] is not a union of blocks of length {P}")
    means = np.abs(s.deltas.reshape(-1, P).sum(axis=1)) / P
    L = float(np.max(means))
    vals = np.sort(s.values)
    gap = float(np.min(np.diff(vals))) if len(vals) > 1 else math.inf
    separated = gap >= sep_min
    satisfied = separated and L < QUARTER
    margin = min(QUARTER - L, gap - sep_min)
    return ConditionReport(
        "avdonin", satisfied, margin,
        {"L": L, "P": int(P), "min_gap": gap, "sep_min": float(sep_min)}, len(vals),
    )


def bailey_condition_check(family: PerturbedSequence, A=None, L: float | None = None) -> ConditionReport:
    """Tube condition ``||A^T lambda_n - n||_inf <= L`` for every indexed point.

    With ``L`` omitted the measured deviation itself is compared (strictly)
    against ``ln 2 / (pi d)``; with ``L`` given it must satisfy
    ``0 < L < ln 2 / (pi d)`` and the tube is closed.
    """
    idx = family.indices if family.indices.ndim == 2 else family.indices.reshape(-1, 1)
    vals = family.values if family.values.ndim == 2 else family.values.reshape(-1, 1)
    d = idx.shape[1]
    A = np.eye(d) if A is None else as_matrix(A)
    inv(A)
    threshold = bailey_threshold(d)
    dev = float(np.max(np.abs(vals @ A - idx)))
    params = {"max_deviation": dev, "threshold": threshold, "d": d}
    if L is None:
        return ConditionReport("bailey", dev < threshold, threshold - dev, params, len(vals))
    if not 0.0 < L < threshold:
        raise OutOfRange(f"L = {L} must lie in (0, {threshold:.6g})")
    params["L"] = float(L)
    return ConditionReport("bailey", dev <= L, L - dev, params, len(vals))


def dual_lattice_offsets(fs: FreqSet, M) -> np.ndarray:
    """``points - M @ index`` for each point: displacement from its generator."""
    if fs.indices is None:
        raise ValueError("frequency set carries no generating indices")
    M = as_matrix(M)
    return fs.points - fs.indices @ M.T


__all__ = [
    "ConditionReport", "PerturbedSequence", "ProductRule", "LinearImageRule", "PerturbationRule",
    "avdonin_condition_check", "bailey_condition_check", "bailey_threshold", "dual_lattice_offsets",
    "kadec_condition_check", "lift_frequencies", "lifted_rule", "rectangular_construction",
    "rectangular_rule", "rounded_dual_construction", "rounded_dual_rule", "spectral_norm_construction",
    "spectral_norm_rule", "spectral_norm_threshold", "tensor_product",
]
