import itertools

import numpy as np
import pytest

from paralattice.construct import lifted_rule, rounded_dual_rule
from paralattice.decomp import (
    Witness, check_witness, find_witness_heuristic, orthogonal_volume_obstruction,
    parallelepiped_equal,
)
from paralattice.errors import Singular
from paralattice.linalg import inv, inv_transpose, permutation_matrix
from paralattice.verify import truncation_ladder

RNG = np.random.default_rng(7)


def test_parallelepiped_equal_examples(h_ex):
    A = RNG.normal(size=(3, 3))
    for perm in itertools.permutations(range(3)):
        assert parallelepiped_equal(A, A @ permutation_matrix(perm))
    assert not parallelepiped_equal(A, 2 * A)
    assert parallelepiped_equal(h_ex, inv_transpose(np.eye(2)) @ inv(np.eye(2)) @ h_ex)
    # same volume, different shape
    assert not parallelepiped_equal(np.eye(2), [[1.0, 0.0], [1.0, 1.0]])
    # reflection of a column is not a cube symmetry fixing the origin vertex
    assert not parallelepiped_equal(np.eye(2), [[-1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(Singular):
        parallelepiped_equal(A, np.zeros((3, 3)))


def test_parallelepiped_equal_is_an_equivalence():
    A = RNG.normal(size=(3, 3))
    family = [A @ permutation_matrix(p) for p in itertools.permutations(range(3))]
    other = RNG.normal(size=(3, 3))
    for X in family:
        assert parallelepiped_equal(X, X, 0.0) is True
        for Y in family:
            assert parallelepiped_equal(X, Y, 1e-12) == parallelepiped_equal(Y, X, 1e-12) is True
        assert not parallelepiped_equal(X, other, 1e-12)


def test_check_witness_accepts_example(h_ex):
    w = Witness(np.eye(2), h_ex, (0, 1), "riesz")
    rep = check_witness(h_ex, np.eye(2), w)
    assert rep.accepted and rep.failures == [] and rep.residual < 1e-12


def test_check_witness_failures(h_ex):
    bad_diag = np.array([[1.2, 0.0], [0.3, 0.5]])
    rep = check_witness(bad_diag, None, Witness(np.eye(2), bad_diag, (0, 1), "riesz"))
    assert not rep.accepted and rep.failures == ["diag_in_unit_interval"]
    rep = check_witness(h_ex, None, Witness(np.eye(2), h_ex, (0, 1), "orthogonal"))
    assert rep.failures == ["unitriangular"]
    rep = check_witness(h_ex, None, Witness([[1.5, 0], [0, 1]], h_ex, (0, 1)))
    assert "R_integer" in rep.failures
    rep = check_witness(h_ex, None, Witness([[1, 1], [1, 1]], h_ex, (0, 1)))
    assert "R_nonsingular" in rep.failures and not rep.accepted
    rep = check_witness(h_ex, None, Witness(np.eye(2), 0.5 * h_ex, (0, 1)))
    assert rep.failures == ["parallelepiped_equal"]
    rep = check_witness(h_ex, None, Witness(np.eye(2), h_ex.T, (0, 1)))
    assert set(rep.failures) == {"lower_triangular", "parallelepiped_equal"}


def test_check_witness_with_lattice_and_integer_R():
    # A = B^{-T} R^{-1} H with nontrivial integer R and B
    B = np.array([[2.0, 0.0], [1.0, 1.0]])
    R = np.array([[1.0, 1.0], [0.0, 2.0]])
    H = np.array([[0.8, 0.0], [0.3, 0.6]])
    A = inv_transpose(B) @ inv(R) @ H
    assert check_witness(A, B, Witness(R, H, (0, 1))).accepted
    # reordering columns leaves the parallelepiped unchanged, so any P is accepted
    A_perm = A[:, ::-1]
    assert check_witness(A_perm, B, Witness(R, H, (1, 0))).accepted
    assert check_witness(A_perm, B, Witness(R, H, (0, 1))).accepted
    assert not check_witness(A, B, Witness(R, 0.9 * H, (0, 1))).accepted


def test_witness_json_roundtrip(h_ex):
    w = Witness(np.eye(2), h_ex, (1, 0), "riesz")
    data = w.to_json()
    assert set(data) == {"R", "H", "P", "mode"}
    back = Witness.from_json(data)
    assert back.P == (1, 0) and np.array_equal(back.H, w.H)
    with pytest.raises(ValueError):
        Witness(np.eye(2), h_ex, (0, 0))


def test_heuristic_examples(h_ex):
    w = find_witness_heuristic(h_ex)
    assert w is not None and w.P == (0, 1) and np.allclose(w.H, h_ex)
    swapped = np.diag([0.5, 0.7])[:, ::-1]
    w = find_witness_heuristic(swapped)
    assert w.P == (1, 0) and np.allclose(w.H, np.diag([0.5, 0.7]))
    assert find_witness_heuristic(np.array([[0.5, 0.3], [0.0, 0.7]])) is None
    assert find_witness_heuristic(h_ex, mode="orthogonal") is None
    w = find_witness_heuristic(np.array([[1.0, 0.0], [2.5, 1.0]]), mode="orthogonal")
    assert w is not None and w.mode == "orthogonal"


def test_heuristic_results_pass_check():
    for _ in range(40):
        d = int(RNG.integers(2, 5))
        H = np.tril(RNG.uniform(-1, 1, size=(d, d)))
        np.fill_diagonal(H, RNG.uniform(0.1, 1.0, size=d))
        perm = RNG.permutation(d)
        A = H[:, np.argsort(perm)]
        w = find_witness_heuristic(A)
        assert w is not None
        assert check_witness(A, None, w).accepted


def test_orthogonal_volume_obstruction(h_ex):
    assert orthogonal_volume_obstruction(h_ex)
    assert not orthogonal_volume_obstruction([[1.0, 0.0], [0.7, 1.0]])
    assert not orthogonal_volume_obstruction([[0.5, 0.0], [0.1, 1.0]])
    assert orthogonal_volume_obstruction(2 * np.eye(2))


def test_accepted_witness_feeds_a_healthy_construction():
    B = np.array([[1.0, 0.0], [1.0, 1.0]])
    R = np.array([[1.0, 0.0], [1.0, 1.0]])
    H = np.array([[0.7, 0.0], [0.2, 0.9]])
    A = inv_transpose(B) @ inv(R) @ H
    w = Witness(R, H, (0, 1))
    assert check_witness(A, B, w).accepted
    rule = lifted_rule(rounded_dual_rule(H), R, B)
    gamma = rule.generate(4)
    # frequencies land in B Z^2
    assert np.allclose(gamma.points @ inv(B).T, np.rint(gamma.points @ inv(B).T))
    rep = truncation_ladder(A, rule, [3, 6, 9])
    assert not rep.numerical_failure and rep.floor > 1e-3
