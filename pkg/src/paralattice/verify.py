"""Numerical certification through Gram matrices of exponentials.

For the domain ``A[0,1]^d`` the substitution ``x = A t`` gives the closed form

    <e_g, e_h> = |det A| * prod_k phi(u_k),   u = A^T (g - h),
    phi(u) = (exp(2 pi i u) - 1) / (2 pi i u) = exp(pi i u) * sinc(u),

with ``sinc(u) = sin(pi u) / (pi u)``.  The phase factor splits as
``exp(pi i s_g) * conj(exp(pi i s_h))`` with ``s = sum_k (A^T g)_k``, so the
Gram matrix is unitarily similar to the real symmetric matrix
``|det A| * prod_k sinc(u_k)`` (the Gram matrix of the domain translated to
be centred at the origin).  Eigenvalue computations use that real form.

A truncation ladder gives evidence, not proof: the smallest eigenvalue of a
finite section is an *upper* estimate of the true lower Riesz bound, and the
largest eigenvalue a *lower* estimate of the upper bound.  Completeness is
never inferred from Gram data.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import NonConvergence, TooLarge
from .lattice import FreqSet, FrequencyRule
from .linalg import as_matrix, det, inv

GRAM_SIZE_CAP = 8192
DENSE_EIG_LIMIT = 2000
SERIES_CUTOFF = 1e-8
STABILIZED_RTOL = 0.01
LADDER_ORIENTATION = (
    "finite sections: eig_min upper-estimates the true lower Riesz bound, "
    "eig_max lower-estimates the true upper bound"
)


def worker_count() -> int:
    env = os.environ.get("PARALATTICE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _reduced_sincos(u: np.ndarray):
    """``sin(pi u)`` and ``cos(pi u)`` with exact zeros/signs at integers."""
    k = np.rint(u)
    f = u - k
    sign = 1.0 - 2.0 * np.mod(k, 2.0)
    return sign * np.sin(np.pi * f), sign * np.cos(np.pi * f)


def _sinpi(u: np.ndarray) -> np.ndarray:
    k = np.rint(u)
    out = np.sin(np.pi * (u - k))
    np.negative(out, out=out, where=np.fmod(k, 2.0) != 0.0)
    return out


def sinc(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    out = _sinpi(u)
    with np.errstate(invalid="ignore", divide="ignore"):
        out /= np.pi * u
    small = np.abs(u) < SERIES_CUTOFF
    if small.any():
        z2 = (np.pi * u[small]) ** 2
        out[small] = 1.0 - z2 / 6.0 + z2 * z2 / 120.0
    return out


def phi(u) -> np.ndarray:
    """``(exp(2 pi i u) - 1) / (2 pi i u)``, equal to 1 at ``u = 0``."""
    u = np.asarray(u, dtype=float)
    s, c = _reduced_sincos(u)
    return (c + 1j * s) * sinc(u)


def gram_entry(A, g, h) -> complex:
    A = as_matrix(A)
    inv(A)
    u = A.T @ (np.asarray(g, dtype=float) - np.asarray(h, dtype=float))
    return complex(abs(det(A)) * np.prod(phi(u)))


def _check_size(n: int) -> None:
    if n > GRAM_SIZE_CAP:
        raise TooLarge(f"{n} frequencies exceed the Gram size cap {GRAM_SIZE_CAP}")


def _row_blocks(n: int) -> list[tuple[int, int]]:
    step = max(1, min(n, 2_000_000 // max(n, 1)))
    return [(lo, min(n, lo + step)) for lo in range(0, n, step)]


def _block_rows(n: int, fill) -> None:
    """Run ``fill(lo, hi)`` over row blocks, possibly on several threads."""
    blocks = _row_blocks(n)
    workers = min(worker_count(), len(blocks))
    if workers <= 1:
        for lo, hi in blocks:
            fill(lo, hi)
    else:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(lambda b: fill(*b), blocks))


def _mirror_upper(M: np.ndarray, conjugate: bool = False) -> None:
    """Overwrite the strict lower triangle with the (conjugated) upper one."""
    n = M.shape[0]
    for lo, hi in _row_blocks(n):
        upper = M[:hi, lo:hi]
        lower = np.conj(upper.T) if conjugate else upper.T
        mask = np.arange(hi)[None, :] < np.arange(lo, hi)[:, None]
        M[lo:hi, :hi] = np.where(mask, lower, M[lo:hi, :hi])


def _projected(A: np.ndarray, gamma: FreqSet) -> np.ndarray:
    if gamma.dim != A.shape[0]:
        raise ValueError("frequency set and matrix dimensions differ")
    return gamma.points.astype(float) @ A  # row i is (A^T gamma_i)^T


def assemble_gram(A, gamma: FreqSet) -> np.ndarray:
    """Complex Hermitian Gram matrix of ``E(gamma)`` on ``L^2(A[0,1]^d)``.

    Built as ``D S D^*`` from the centred form ``S`` and the phases
    ``D = diag(exp(pi i s_g))``.
    """
    A = as_matrix(A)
    S = centered_gram(A, gamma)
    s_, c_ = _reduced_sincos(_projected(A, gamma).sum(axis=1))
    ph = c_ + 1j * s_
    G = S * ph[:, None]
    G *= np.conj(ph)[None, :]
    _mirror_upper(G, conjugate=True)
    np.fill_diagonal(G, np.diag(S))
    return G


def centered_gram(A, gamma: FreqSet) -> np.ndarray:
    """Real symmetric matrix unitarily similar to :func:`assemble_gram`."""
    A = as_matrix(A)
    inv(A)
    n = len(gamma)
    _check_size(n)
    p = _projected(A, gamma)
    vol = abs(det(A))
    S = np.empty((n, n))

    def fill(lo, hi):  # columns from lo onward; the rest is mirrored
        block = np.full((hi - lo, n - lo), vol)
        for k in range(p.shape[1]):
            block *= sinc(p[lo:hi, None, k] - p[None, lo:, k])
        S[lo:hi, lo:] = block

    _block_rows(n, fill)
    _mirror_upper(S)
    return S


def eig_range(G: np.ndarray, *, method: str = "dense", rtol: float = 1e-8) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a Hermitian matrix.

    ``method="dense"`` (default) uses a full symmetric eigendecomposition at
    every size up to the cap.  ``method="lanczos"`` switches to implicitly
    restarted Lanczos (ARPACK, normalized all-ones start) above
    ``DENSE_EIG_LIMIT``; it is faster on well-separated spectra but can settle
    on a non-extreme Ritz value when the spectrum edge is tightly clustered.
    """
    G = np.asarray(G)
    n = G.shape[0]
    if G.ndim != 2 or G.shape[1] != n:
        raise ValueError("expected a square matrix")
    _check_size(n)
    if method not in ("dense", "lanczos"):
        raise ValueError(f"unknown method {method!r}")
    if method == "dense" or n <= DENSE_EIG_LIMIT:
        w = scipy.linalg.eigvalsh(G, check_finite=False)
        return float(w[0]), float(w[-1])
    v0 = np.ones(n, dtype=G.dtype) / math.sqrt(n)
    out = []
    for which in ("SA", "LA"):
        try:
            w = eigsh(G, k=1, which=which, v0=v0, tol=rtol * 1e-3, ncv=min(n, 64), maxiter=20 * n)
        except ArpackNoConvergence as exc:
            raise NonConvergence(f"Lanczos ({which}) did not converge") from exc
        out.append(float(w[0][0]))
    return out[0], out[1]


def orthogonality_test(A, gamma: FreqSet, tol: float = 1e-9) -> bool:
    """True iff the Gram matrix equals ``|det A| I`` to relative tolerance ``tol``.

    Entry moduli of the Gram matrix and of its real centred form agree, so
    the cheaper real form is tested.
    """
    G = centered_gram(A, gamma)
    vol = abs(det(A))
    diag = np.diag(G).copy()
    if np.any(np.abs(diag - vol) > tol * vol):
        return False
    np.fill_diagonal(G, 0.0)
    return bool(np.max(np.abs(G), initial=0.0) <= tol * vol)


def max_offdiagonal(A, gamma: FreqSet) -> float:
    G = centered_gram(A, gamma)
    np.fill_diagonal(G, 0.0)
    return float(np.max(np.abs(G), initial=0.0))


@dataclass
class GramReport:
    radius_ladder: list[int]
    sizes: list[int]
    eig_min: list[float]
    eig_max: list[float]
    normalized: bool
    numerical_failure: bool = False
    stabilized: bool = False
    orientation: str = LADDER_ORIENTATION

    @property
    def floor(self) -> float:
        return self.eig_min[-1]

    def to_json(self) -> dict:
        return {
            "radius_ladder": list(self.radius_ladder),
            "sizes": list(self.sizes),
            "eig_min": list(self.eig_min),
            "eig_max": list(self.eig_max),
            "normalized": self.normalized,
            "numerical_failure": self.numerical_failure,
            "stabilized": self.stabilized,
            "orientation": self.orientation,
        }


def truncation_ladder(A, rule: FrequencyRule, radii: Sequence[int], normalized: bool = False,
                      *, interlace_tol: float = 1e-8, method: str = "dense") -> GramReport:
    """Extreme Gram eigenvalues of the nested truncations ``Gamma_N``.

    Interlacing (``eig_min`` non-increasing, ``eig_max`` non-decreasing) is
    checked afterwards; a violation beyond ``interlace_tol`` (relative to the
    largest eigenvalue) sets ``numerical_failure``.
    """
    A = as_matrix(A)
    radii = [int(r) for r in radii]
    if not radii or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be a non-empty increasing list")
    scale = abs(det(A)) if normalized else 1.0
    sizes, lo, hi = [], [], []
    for N in radii:
        gamma = rule.generate(N)
        sizes.append(len(gamma))
        _check_size(len(gamma))
        a, b = eig_range(centered_gram(A, gamma), method=method)
        lo.append(a / scale)
        hi.append(b / scale)
    slack = interlace_tol * max(1.0, max(hi))
    failure = any(b > a + slack for a, b in zip(lo, lo[1:])) or any(
        b < a - slack for a, b in zip(hi, hi[1:])) or any(v < -slack for v in lo)
    stabilized = len(lo) >= 2 and lo[-1] > 0 and abs(lo[-2] - lo[-1]) < STABILIZED_RTOL * lo[-1]
    return GramReport(radii, sizes, lo, hi, normalized, failure, stabilized)


@dataclass
class EquidistReport:
    P: int
    max_deviation: float
    epsilon: float
    alpha: float = 0.0
    betas: list[float] = field(default_factory=list)
    m_range: tuple[int, int] = (0, 0)

    @property
    def satisfied(self) -> bool:
        return self.max_deviation < self.epsilon

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "betas": list(self.betas),
            "P": self.P,
            "m_range": list(self.m_range),
            "max_deviation": self.max_deviation,
            "epsilon": self.epsilon,
            "satisfied": self.satisfied,
        }


def equidistribution_check(alpha: float, betas: Sequence[float], P: int,
                           m_range: tuple[int, int], epsilon: float) -> EquidistReport:
    """Worst block mean ``|(1/P) sum frac((k + beta)/alpha) - 1/2|``.

    Blocks are ``k in [mP, (m+1)P - 1]`` for ``m`` in the inclusive range.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if P < 1:
        raise ValueError("P must be >= 1")
    m0, m1 = int(m_range[0]), int(m_range[1])
    if m1 < m0:
        raise ValueError("empty block range")
    k = np.arange(m0 * P, (m1 + 1) * P, dtype=float)
    worst = 0.0
    for beta in betas:
        x = (k + float(beta)) / float(alpha)
        frac = x - np.floor(x)
        means = frac.reshape(-1, P).mean(axis=1)
        worst = max(worst, float(np.max(np.abs(means - 0.5))))
    return EquidistReport(int(P), worst, float(epsilon), float(alpha),
                          [float(b) for b in betas], (m0, m1))
