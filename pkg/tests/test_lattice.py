import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import EXAMPLE_DUAL_POINT, EXAMPLE_ROUNDED_POINT, H_EX_DET
from paralattice.errors import BadAlpha, DuplicateAfterRounding, Singular
from paralattice.lattice import (
    BeattyRule, FreqSet, LatticeRule, beatty_fraenkel, cube_vertices, density_estimate, index_box,
    lattice_points, round_half_up, rounded_lattice,
)
from paralattice.linalg import inv_transpose

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_round_half_up_ties_and_types():
    assert round_half_up(0.5) == 1
    assert round_half_up(-0.5) == 0
    assert round_half_up(-1.5) == -1
    assert round_half_up(2.4999999) == 2
    assert isinstance(round_half_up(1.2), int)
    out = round_half_up([0.5, -0.5, 1.49])
    assert out.dtype == np.int64 and out.tolist() == [1, 0, 1]
    # 0.49999999999999994 + 0.5 rounds up to 1.0 in floating point
    assert round_half_up(0.49999999999999994) == 0


@settings(max_examples=200)
@given(finite)
def test_round_half_up_error_at_most_half(x):
    assert abs(round_half_up(x) - x) <= 0.5


@settings(max_examples=200)
@given(finite)
def test_round_half_up_shift_equivariant(x):
    assume((x + 1) - 1 == x)
    assert round_half_up(x + 1) == round_half_up(x) + 1


def test_index_box_order():
    box = index_box(1, 2)
    assert box.tolist()[:4] == [[-1, -1], [-1, 0], [-1, 1], [0, -1]]
    assert len(index_box(2, 3)) == 125
    with pytest.raises(ValueError):
        index_box(-1, 2)


def test_lattice_points_nested_and_integral():
    small = lattice_points([[2, 1], [0, 1]], 2)
    big = lattice_points([[2, 1], [0, 1]], 4)
    assert small.is_integer
    assert small.as_set() <= big.as_set()
    assert len(big) == 81
    with pytest.raises(Singular):
        lattice_points([[1, 2], [2, 4]], 2)


def test_example_dual_point_and_its_rounding(h_ex):
    fs = lattice_points(inv_transpose(h_ex), 3)
    rows = {tuple(n): p for n, p in zip(fs.indices.tolist(), fs.points.tolist())}
    # the dual generator of index (0, 1) is the second column of H^{-T}
    assert rows[(0, 1)] == pytest.approx(EXAMPLE_DUAL_POINT, abs=1e-14)
    rounded = rounded_lattice(inv_transpose(h_ex), 3)
    rrows = {tuple(n): tuple(p) for n, p in zip(rounded.indices.tolist(), rounded.points.tolist())}
    assert rrows[(0, 1)] == EXAMPLE_ROUNDED_POINT


def test_rounded_lattice_reports_collision():
    with pytest.raises(DuplicateAfterRounding) as info:
        rounded_lattice([[0.3]], 3)
    err = info.value
    assert err.first != err.second
    assert round_half_up(0.3 * err.first[0]) == err.point[0] == round_half_up(0.3 * err.second[0])


def test_freqset_json_roundtrip():
    fs = rounded_lattice([[1.7, 0], [0.2, 1.3]], 2, provenance="rounded-dual")
    data = fs.to_json()
    assert list(data) == ["dim", "provenance", "index_radius", "points"]
    back = FreqSet.from_json(data)
    assert np.array_equal(back.points, fs.points) and back.provenance == "rounded-dual"
    assert back.index_radius == 2
    empty = FreqSet.from_json({"dim": 3, "points": []})
    assert len(empty) == 0 and empty.dim == 3


def test_freqset_rejects_bad_input():
    with pytest.raises(ValueError):
        FreqSet(np.array([[1, 2], [1, 2]]))
    with pytest.raises(ValueError):
        FreqSet(np.array([[1.0]]), provenance="nonsense")
    with pytest.raises(ValueError):
        FreqSet(np.array([[np.inf]]))
    assert FreqSet(np.array([[1.0, 2.0]])).is_integer
    assert not FreqSet(np.array([[1.5]])).is_integer


def test_beatty_exact_and_float():
    exact = beatty_fraenkel(Fraction(2, 3), 0, -4, 2)
    approx = beatty_fraenkel(2 / 3, 0.0, -4, 2)
    assert exact.points[:, 0].tolist() == [-6, -5, -3, -2, 0, 1, 3]
    assert approx.points[:, 0].tolist() == exact.points[:, 0].tolist()
    assert beatty_fraenkel(1, 0, -3, 3).points[:, 0].tolist() == list(range(-3, 4))
    for bad in (0, -0.5, 1.5):
        with pytest.raises(BadAlpha):
            beatty_fraenkel(bad, 0, 0, 3)


def test_beatty_rational_periodicity():
    # alpha = p/q: the sequence shifts by q when k shifts by p
    fs = beatty_fraenkel(Fraction(2, 3), Fraction(1, 3), -30, 30)
    vals = fs.points[:, 0].tolist()
    assert all(vals[i + 2] - vals[i] == 3 for i in range(len(vals) - 2))


def test_density_estimates(h_ex):
    rep = density_estimate(LatticeRule(inv_transpose(h_ex), rounded=True), [50.0, 100.0, 150.0])
    assert rep.extrapolated == rep.estimates[-1]
    assert rep.counts == sorted(rep.counts)
    assert rep.extrapolated == pytest.approx(H_EX_DET, abs=0.02)
    beatty = density_estimate(BeattyRule(Fraction(2, 3)), [3000.0])
    assert beatty.extrapolated == pytest.approx(2 / 3, abs=1e-3)
    with pytest.raises(ValueError):
        density_estimate(BeattyRule(0.5), [10.0, 5.0])


@pytest.mark.parametrize("rule", [
    LatticeRule(inv_transpose([[1 / math.sqrt(3), 0], [1 / math.sqrt(5), 1 / math.sqrt(2)]]), rounded=True),
    LatticeRule([[0.9, 0.4], [-0.3, 1.1]], offset=[0.25, -0.1]),
    BeattyRule(0.37, 0.2),
])
def test_covering_radius_captures_window(rule):
    r = 12.0
    full = rule.generate(rule.covering_radius(r) + 5)
    cover = rule.generate(rule.covering_radius(r))

    def inside(fs):
        return {p for p in fs.as_set() if max(abs(v) for v in p) <= r}

    assert inside(cover)
    assert inside(full) == inside(cover)


def test_cube_vertices(h_ex):
    v = cube_vertices(h_ex)
    s3, s5, s2 = 1 / math.sqrt(3), 1 / math.sqrt(5), 1 / math.sqrt(2)
    expected = [(0, 0), (0, s2), (s3, s5), (s3, s5 + s2)]
    assert np.allclose(v, expected, atol=1e-15)
