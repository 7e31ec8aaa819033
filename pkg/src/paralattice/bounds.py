"""Explicit Riesz-bound formulas.

* ``B(L) = 1 - cos(pi L) + sin(pi L)`` and the pointwise-quarter bounds
  ``(1 - B(L))^2``, ``(1 + B(L))^2``;
* products of those bounds for tensor-product sets;
* Lindner's explicit lower bound for the quarter-in-the-mean condition,
  which is astronomically small and therefore only ever handled through
  ``log(-log A)``;
* the effect of translations and linear changes of variables on bounds.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Sequence

from .errors import OutOfRange, Singular
from .linalg import as_matrix, det, inv


_LOG_TINY = math.log(sys.float_info.min)


def _log_or_neg_inf(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


@dataclass(frozen=True)
class BoundCert:
    """Lower/upper Riesz bounds together with the rule that produced them."""

    lower: float
    upper: float
    log_lower: float
    source: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower < 0 or self.upper < self.lower:
            raise ValueError(f"invalid bounds ({self.lower}, {self.upper})")

    @classmethod
    def from_bounds(cls, lower: float, upper: float, source: str, **params) -> "BoundCert":
        return cls(float(lower), float(upper), _log_or_neg_inf(lower), source, params)

    @property
    def underflow(self) -> bool:
        """True when ``exp(log_lower)`` is subnormal or zero in double precision."""
        return self.log_lower < _LOG_TINY

    def to_json(self) -> dict:
        under = self.underflow
        return {
            "lower": 0.0 if under else self.lower,
            "upper": self.upper,
            "log_lower": self.log_lower,
            "underflow": under,
            "source": self.source,
            "params": dict(self.params),
        }


def kadec_B(L: float) -> float:
    return 1.0 - math.cos(math.pi * L) + math.sin(math.pi * L)


def kadec_bounds(L: float) -> tuple[float, BoundCert]:
    if not 0.0 <= L < 0.25:
        raise OutOfRange(f"L = {L} must lie in [0, 1/4)")
    b = kadec_B(L)
    return b, BoundCert.from_bounds((1.0 - b) ** 2, (1.0 + b) ** 2, "kadec", L=float(L))


def tensor_bounds(Ls: Sequence[float]) -> BoundCert:
    Ls = [float(L) for L in Ls]
    if not Ls:
        raise ValueError("need at least one factor")
    lower = upper = 1.0
    log_lower = 0.0
    for L in Ls:
        _, c = kadec_bounds(L)
        lower *= c.lower
        upper *= c.upper
        log_lower += c.log_lower
    return BoundCert(lower, upper, log_lower, "tensor-kadec", {"L": Ls})


@total_ordering
@dataclass(frozen=True)
class NegativeLog:
    """A large negative number ``-exp(t)`` stored through ``t``.

    Used for ``log A`` where ``|log A|`` itself can exceed the float range.
    """

    t: float

    @property
    def value(self) -> float:
        """``-exp(t)`` as a float (``-inf`` once it leaves the float range)."""
        try:
            return -math.exp(self.t)
        except OverflowError:
            return -math.inf

    def __float__(self) -> float:
        return self.value

    def __lt__(self, other):
        if isinstance(other, NegativeLog):
            return self.t > other.t
        return self.value < other

    def __eq__(self, other):
        if isinstance(other, NegativeLog):
            return self.t == other.t
        return self.value == other

    def __hash__(self):
        return hash(self.t)

    def decimal(self, digits: int = 12) -> str:
        """Scientific notation ``-m.mmm...e+E`` without materializing the value."""
        log10 = self.t / math.log(10.0)
        e = math.floor(log10)
        m = 10.0 ** (log10 - e)
        if round(m, digits - 1) >= 10.0:
            m, e = m / 10.0, e + 1
        return f"-{m:.{digits - 1}f}e+{e}"


def lindner_parameters(Bp: float, delta: float, L: float, P: int) -> dict:
    if not (Bp >= 0 and delta > 0 and 0 <= L < 0.25 and int(P) == P and P >= 1):
        raise OutOfRange("need Bp >= 0, delta > 0, 0 <= L < 1/4, integer P >= 1")
    P = int(P)
    P_t = P * math.ceil((2.0 * (4.0 * Bp + 2.0) ** 2 / (0.25 - L)) / P)
    B_t = 1.5 + 2.0 * (3.0 * Bp + 1.0)
    delta_t = 0.5 * (0.25 - L) * delta
    if not delta_t < 9.0 * B_t:
        raise OutOfRange("need delta_tilde < 9 * B_tilde")
    return {"P_tilde": P_t, "B_tilde": B_t, "delta_tilde": delta_t}


def lindner_log_lower_bound(Bp: float, delta: float, L: float, P: int) -> NegativeLog:
    """Natural log of Lindner's lower Riesz bound ``A(B, delta, L, P)``.

    ``log A = -20 pi^2 (2B~)^(2P~) / P~^2 + 240 (2B~)^P~ log(delta~ / (9B~))``.
    Both terms are negative, so ``log A = -exp(t)`` with ``t`` obtained by a
    log-sum-exp of the two term logarithms; no power of ``2B~`` is ever
    formed.
    """
    p = lindner_parameters(Bp, delta, L, P)
    P_t, B_t, d_t = p["P_tilde"], p["B_tilde"], p["delta_tilde"]
    e = P_t * math.log(2.0 * B_t)  # log of (2B~)^P~
    a = math.log(20.0 * math.pi ** 2) + 2.0 * e - 2.0 * math.log(P_t)
    b = math.log(240.0) + e + math.log(math.log(9.0 * B_t / d_t))
    hi, lo = max(a, b), min(a, b)
    return NegativeLog(hi + math.log1p(math.exp(lo - hi)))


TRANSFORMS = ("translate-domain", "translate-frequency", "linear-map")


def transform_bounds(cert: BoundCert, op: str, A=None) -> BoundCert:
    """Bounds after translating the domain or frequencies, or after ``Gamma -> A Gamma``.

    Translations leave the bounds unchanged.  The linear map sends a Riesz
    basis for ``L^2(S)`` to one for ``L^2(A^{-T} S)`` with both bounds
    divided by ``|det A|``.
    """
    if op in ("translate-domain", "translate-frequency"):
        return cert
    if op != "linear-map":
        raise ValueError(f"unknown transform {op!r}; expected one of {TRANSFORMS}")
    if A is None:
        raise ValueError("linear-map needs a matrix")
    A = as_matrix(A)
    inv(A)
    D = abs(det(A))
    if D == 0.0:
        raise Singular("matrix is singular")
    params = dict(cert.params)
    params["volume_factor"] = params.get("volume_factor", 1.0) * D
    return BoundCert(cert.lower / D, cert.upper / D, cert.log_lower - math.log(D),
                     cert.source, params)


__all__ = [
    "BoundCert", "NegativeLog", "TRANSFORMS", "kadec_B", "kadec_bounds", "lindner_log_lower_bound",
    "lindner_parameters", "tensor_bounds", "transform_bounds",
]
