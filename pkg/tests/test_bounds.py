import math

import numpy as np
import pytest

from oracles import KADEC, LINDNER_LOG, TENSOR_02_01
from paralattice.bounds import (
    BoundCert, NegativeLog, kadec_B, kadec_bounds, lindner_log_lower_bound, lindner_parameters,
    tensor_bounds, transform_bounds,
)
from paralattice.errors import OutOfRange, Singular


@pytest.mark.parametrize("L", sorted(KADEC))
def test_kadec_bounds_match_oracle(L):
    B, lo, hi = KADEC[L]
    b, cert = kadec_bounds(L)
    assert b == pytest.approx(B, rel=1e-15)
    assert cert.lower == pytest.approx(lo, rel=1e-14)
    assert cert.upper == pytest.approx(hi, rel=1e-14)
    assert cert.source == "kadec" and cert.params == {"L": L}


def test_kadec_edges():
    b, cert = kadec_bounds(0.0)
    assert b == 0.0 and cert.lower == cert.upper == 1.0
    for bad in (0.25, -0.01, 0.3):
        with pytest.raises(OutOfRange):
            kadec_bounds(bad)
    # B reaches 1 exactly at L = 1/4, so the lower bound vanishes there
    assert kadec_B(0.25) == pytest.approx(1.0, abs=1e-15)


def test_tensor_bounds():
    cert = tensor_bounds([0.2, 0.1])
    assert cert.lower == pytest.approx(TENSOR_02_01[0], rel=1e-14)
    assert cert.upper == pytest.approx(TENSOR_02_01[1], rel=1e-14)
    assert cert.log_lower == pytest.approx(math.log(TENSOR_02_01[0]), rel=1e-13)
    with pytest.raises(OutOfRange):
        tensor_bounds([0.1, 0.3])
    with pytest.raises(ValueError):
        tensor_bounds([])


def test_tensor_underflow_is_flagged():
    cert = tensor_bounds([0.2499999] * 8)
    assert cert.lower > 0
    many = BoundCert(0.0, 1.0, -1e6, "synthetic")
    assert many.underflow and many.to_json()["lower"] == 0.0


@pytest.mark.parametrize("Bp", sorted(LINDNER_LOG))
def test_lindner_matches_oracle(Bp):
    Pt, expected = LINDNER_LOG[Bp]
    assert lindner_parameters(Bp, 1.0, 0.0, 1)["P_tilde"] == Pt
    got = lindner_log_lower_bound(Bp, 1.0, 0.0, 1)
    assert isinstance(got, NegativeLog)
    assert got.value == pytest.approx(expected, rel=1e-10)


def test_lindner_never_overflows():
    got = lindner_log_lower_bound(10.0, 1e-3, 0.2, 7)
    assert math.isfinite(got.t)
    assert got.value == -math.inf  # beyond the double range, but still ordered
    assert got < lindner_log_lower_bound(0.2, 1.0, 0.0, 1)
    assert got.decimal().startswith("-") and "e+" in got.decimal()


def test_lindner_parameters_and_errors():
    p = lindner_parameters(0.0, 1.0, 0.0, 5)
    assert p["P_tilde"] % 5 == 0 and p["P_tilde"] >= 32
    assert p["B_tilde"] == 3.5 and p["delta_tilde"] == 0.125
    for args in [(-1, 1, 0, 1), (0, 0, 0, 1), (0, 1, 0.25, 1), (0, 1, 0, 0), (0, 1, 0, 1.5)]:
        with pytest.raises(OutOfRange):
            lindner_parameters(*args)


def test_negative_log_ordering_and_decimal():
    a, b = NegativeLog(2.0), NegativeLog(3.0)
    assert b < a and a > b and a == NegativeLog(2.0)
    assert a < 0 and float(a) == pytest.approx(-math.exp(2.0))
    assert NegativeLog(math.log(1234.5)).decimal(5) == "-1.2345e+3"


def test_transforms():
    _, cert = kadec_bounds(0.2)
    assert transform_bounds(cert, "translate-domain") is cert
    assert transform_bounds(cert, "translate-frequency") is cert
    scaled = transform_bounds(cert, "linear-map", 4 * np.eye(2))
    assert scaled.lower == cert.lower / 16 and scaled.params["volume_factor"] == 16
    assert scaled.log_lower == pytest.approx(cert.log_lower - math.log(16))
    with pytest.raises(ValueError):
        transform_bounds(cert, "rotate")
    with pytest.raises(ValueError):
        transform_bounds(cert, "linear-map")
    with pytest.raises(Singular):
        transform_bounds(cert, "linear-map", [[1, 1], [1, 1]])


def test_boundcert_validation():
    with pytest.raises(ValueError):
        BoundCert.from_bounds(2.0, 1.0, "x")
    with pytest.raises(ValueError):
        BoundCert.from_bounds(-1.0, 1.0, "x")
    data = BoundCert.from_bounds(0.5, 2.0, "x", L=0.1).to_json()
    assert list(data) == ["lower", "upper", "log_lower", "underflow", "source", "params"]
