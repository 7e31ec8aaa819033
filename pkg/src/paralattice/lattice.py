"""Lattices, dual lattices, the rounding map and frequency-set containers.

Enumeration always truncates the *index* box ``n in [-N, N]^d`` and emits
points in lexicographic index order, so truncations at increasing ``N`` are
nested and the corresponding Gram matrices are nested principal sections.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np

from .errors import BadAlpha, DuplicateAfterRounding
from .linalg import as_matrix, inv, is_integer_matrix

PROVENANCES = ("rounded-dual", "rectangular", "lifted", "spectral-norm", "tensor", "explicit")


@dataclass(frozen=True, eq=False)
class FreqSet:
    """A finite, duplicate-free truncation of a frequency set.

    ``points`` has shape ``(m, d)``.  Integer-valued sets are stored with an
    integer dtype.  ``indices`` optionally records the generating index
    vector of each point (same row order).
    """

    points: np.ndarray
    provenance: str = "explicit"
    index_radius: int = 0
    indices: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise ValueError("points must be an (m, d) array")
        if pts.dtype.kind not in "iu":
            pts = pts.astype(float)
            if not np.all(np.isfinite(pts)):
                raise ValueError("points must be finite")
            if pts.size and np.all(pts == np.rint(pts)) and np.all(np.abs(pts) < 2**53):
                pts = pts.astype(np.int64)
        else:
            pts = pts.astype(np.int64)
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if len(pts) != len({tuple(p) for p in pts.tolist()}):
            raise ValueError("frequency set contains duplicate points")
        object.__setattr__(self, "points", pts)
        if self.indices is not None:
            idx = np.asarray(self.indices, dtype=np.int64)
            if idx.ndim == 1:
                idx = idx.reshape(-1, 1)
            if len(idx) != len(pts):
                raise ValueError("indices and points differ in length")
            object.__setattr__(self, "indices", idx)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def is_integer(self) -> bool:
        return self.points.dtype.kind == "i"

    def __len__(self) -> int:
        return len(self.points)

    def as_set(self) -> set[tuple]:
        return {tuple(p) for p in self.points.tolist()}

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "provenance": self.provenance,
            "index_radius": int(self.index_radius),
            "points": self.points.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "FreqSet":
        pts = np.asarray(data["points"])
        if pts.size == 0:
            pts = pts.reshape(0, int(data["dim"]))
        fs = cls(pts, data.get("provenance", "explicit"), int(data.get("index_radius", 0)))
        if fs.dim != int(data["dim"]):
            raise ValueError("dim does not match the point coordinates")
        return fs


@dataclass(frozen=True)
class DensityReport:
    window_radii: list[float]
    counts: list[int]
    estimates: list[float]
    extrapolated: float

    def to_json(self) -> dict:
        return {
            "window_radii": list(self.window_radii),
            "counts": list(self.counts),
            "estimates": list(self.estimates),
            "extrapolated": self.extrapolated,
        }


def round_half_up(x):
    """``floor(x + 1/2)`` evaluated without the rounding error of ``x + 0.5``.

    Scalars give a Python ``int``; arrays give an ``int64`` array.
    """
    arr = np.asarray(x, dtype=float)
    f = np.floor(arr)
    out = (f + (arr - f >= 0.5)).astype(np.int64)
    if out.ndim == 0:
        return int(out)
    return out


def index_box(N: int, d: int) -> np.ndarray:
    """All ``n in [-N, N]^d`` in lexicographic order, shape ``((2N+1)^d, d)``."""
    if N < 0:
        raise ValueError("N must be non-negative")
    r = np.arange(-N, N + 1, dtype=np.int64)
    grids = np.meshgrid(*([r] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _image(M: np.ndarray, idx: np.ndarray, offset=None) -> np.ndarray:
    if is_integer_matrix(M, 0.0) and offset is None:
        return idx @ np.rint(M).astype(np.int64).T
    pts = idx @ M.T
    if offset is not None:
        pts = pts + np.asarray(offset, dtype=float)
    return pts


def lattice_points(M, N: int, provenance: str = "explicit") -> FreqSet:
    """``{M n : |n_k| <= N}``, the index-box truncation of ``M Z^d``."""
    M = as_matrix(M)
    inv(M)  # raises Singular
    idx = index_box(N, M.shape[0])
    return FreqSet(_image(M, idx), provenance, N, idx)


def _check_injective(idx: np.ndarray, pts: np.ndarray) -> None:
    seen: dict[tuple, int] = {}
    for row, p in enumerate(map(tuple, pts.tolist())):
        prev = seen.setdefault(p, row)
        if prev != row:
            raise DuplicateAfterRounding(idx[prev], idx[row], p)


def rounded_lattice(M, N: int, offset=None, provenance: str = "explicit") -> FreqSet:
    """``r(M n + offset)`` for ``|n_k| <= N``; rounding must be injective."""
    M = as_matrix(M)
    inv(M)
    idx = index_box(N, M.shape[0])
    pts = round_half_up(_image(M, idx, offset))
    _check_injective(idx, pts)
    return FreqSet(pts, provenance, N, idx)


def beatty_fraenkel(alpha, beta, k_min: int, k_max: int) -> FreqSet:
    """``{floor((k + beta) / alpha) : k_min <= k <= k_max}`` as a sorted 1-D set.

    Rational inputs (``int``/``Fraction``) are evaluated exactly; floats use
    floating point division.
    """
    if not (alpha > 0 and alpha <= 1):
        raise BadAlpha(f"alpha must lie in (0, 1], got {alpha}")
    ks = range(int(k_min), int(k_max) + 1)
    if isinstance(alpha, Rational) and isinstance(beta, Rational):
        a, b = Fraction(alpha), Fraction(beta)
        vals = [math.floor((k + b) / a) for k in ks]
    else:
        vals = [math.floor((k + float(beta)) / float(alpha)) for k in ks]
    vals = sorted(vals)
    return FreqSet(np.array(vals, dtype=np.int64).reshape(-1, 1), "explicit", max(abs(k_min), abs(k_max)),
                   np.array(list(ks), dtype=np.int64))


# --- generator rules -------------------------------------------------------
#
# A rule produces the nested truncations Gamma_N of an infinite frequency set
# and knows how large N must be so that Gamma_N contains every point of the
# infinite set inside the window [-r, r]^d.


class FrequencyRule:
    dim: int
    provenance: str

    def generate(self, N: int) -> FreqSet:
        raise NotImplementedError

    def covering_radius(self, r: float) -> int:
        raise NotImplementedError


class LatticeRule(FrequencyRule):
    """``M Z^d + offset``, optionally passed through the rounding map."""

    def __init__(self, M, offset=None, rounded: bool = False, provenance: str = "explicit"):
        self.M = as_matrix(M)
        self.Minv = inv(self.M)
        self.dim = self.M.shape[0]
        self.offset = None if offset is None else np.asarray(offset, dtype=float).reshape(self.dim)
        self.rounded = rounded
        self.provenance = provenance

    def generate(self, N: int) -> FreqSet:
        if self.rounded:
            return rounded_lattice(self.M, N, self.offset, self.provenance)
        idx = index_box(N, self.dim)
        return FreqSet(_image(self.M, idx, self.offset), self.provenance, N, idx)

    def covering_radius(self, r: float) -> int:
        slack = 0.5 if self.rounded else 0.0
        shift = 0.0 if self.offset is None else float(np.max(np.abs(self.offset)))
        row_norm = float(np.max(np.sum(np.abs(self.Minv), axis=1)))
        return int(math.ceil(row_norm * (r + slack + shift))) + 1


class BeattyRule(FrequencyRule):
    """Beatty-Fraenkel set ``floor((Z + beta) / alpha)`` indexed by ``k``."""

    dim = 1

    def __init__(self, alpha, beta=0, provenance: str = "explicit"):
        if not (alpha > 0 and alpha <= 1):
            raise BadAlpha(f"alpha must lie in (0, 1], got {alpha}")
        self.alpha, self.beta = alpha, beta
        self.provenance = provenance

    def generate(self, N: int) -> FreqSet:
        # keep index order (k ascending) which is also value order
        fs = beatty_fraenkel(self.alpha, self.beta, -N, N)
        return FreqSet(fs.points, self.provenance, N, fs.indices)

    def covering_radius(self, r: float) -> int:
        return int(math.ceil(float(self.alpha) * (r + 1) + abs(float(self.beta)))) + 1


def density_estimate(rule: FrequencyRule, window_radii: Sequence[float]) -> DensityReport:
    """Point counts of the rule's set in centred cubes ``[-r, r]^d``.

    ``extrapolated`` is the estimate at the largest radius.
    """
    radii = [float(r) for r in window_radii]
    if not radii or any(r <= 0 for r in radii):
        raise ValueError("window radii must be positive")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("window radii must be strictly increasing")
    fs = rule.generate(rule.covering_radius(radii[-1]))
    sup = np.max(np.abs(fs.points), axis=1) if len(fs) else np.zeros(0)
    counts = [int(np.count_nonzero(sup <= r)) for r in radii]
    d = fs.dim
    estimates = [c / (2.0 * r) ** d for c, r in zip(counts, radii)]
    return DensityReport(radii, counts, estimates, estimates[-1])


def cube_vertices(M) -> np.ndarray:
    """Vertices ``M v`` for ``v in {0,1}^d`` in lexicographic order of ``v``."""
    M = as_matrix(M)
    d = M.shape[0]
    corners = np.array(list(itertools.product((0, 1), repeat=d)), dtype=float)
    return corners @ M.T
