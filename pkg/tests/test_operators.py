import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spingate.operators import (
    build_operators,
    embed,
    hermiticity_defect,
    pair_sigma,
    subspace_rotation,
    unitarity_defect,
)

from oracles import product_op


def test_single_spin_sz():
    ops = build_operators(0)
    assert np.allclose(ops["S_z"], np.diag([0.5, -0.5]))
    assert np.allclose(ops["S_x"], [[0, 0.5], [0.5, 0]])


def test_different_slots_commute():
    ops = build_operators(1)
    comm = ops["S_x"] @ ops["I_z^1"] - ops["I_z^1"] @ ops["S_x"]
    assert np.max(np.abs(comm)) == 0.0


def test_two_nucleus_product_trace():
    ops = build_operators(2)
    prod = ops["S_z"] @ ops["I_z^1"]
    # dim/16 for dim 8
    assert np.trace(prod @ prod) == pytest.approx(0.5, abs=1e-14)
    oracle = product_op({0: "z", 1: "z"}, 3)
    assert np.max(np.abs(prod - oracle)) < 1e-14


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_operator_properties(n):
    ops = build_operators(n)
    dim = 2 ** (n + 1)
    for name, op in ops.items():
        assert op.shape == (dim, dim)
        assert hermiticity_defect(op) < 1e-14, name
        assert abs(np.trace(op)) < 1e-14, name
        evals = np.sort(np.linalg.eigvalsh(op))
        assert np.allclose(evals[: dim // 2], -0.5)
        assert np.allclose(evals[dim // 2:], 0.5)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_operators_match_bitwise_oracle(n):
    ops = build_operators(n)
    n_spins = n + 1
    assert np.max(np.abs(ops["S_y"] - product_op({0: "y"}, n_spins))) < 1e-14
    for k in range(1, n + 1):
        for ax in "xyz":
            oracle = product_op({k: ax}, n_spins)
            assert np.max(np.abs(ops[f"I_{ax}^{k}"] - oracle)) < 1e-14


def test_dimension_guard():
    with pytest.raises(ValueError):
        build_operators(13)
    with pytest.raises(ValueError):
        build_operators(-1)
    with pytest.raises(ValueError):
        embed(np.eye(2), 2, 2)


def test_pair_sigma_definitions():
    sx = pair_sigma(4, 1, 3, "x")
    assert sx[0, 2] == 1 and sx[2, 0] == 1 and np.count_nonzero(sx) == 2
    sy = pair_sigma(4, 1, 3, "y")
    assert sy[0, 2] == 1j and sy[2, 0] == -1j
    sz = pair_sigma(4, 1, 3, "z")
    assert sz[0, 0] == 1 and sz[2, 2] == -1
    with pytest.raises(ValueError):
        pair_sigma(4, 3, 3)
    with pytest.raises(ValueError):
        pair_sigma(4, 1, 2, "w")


def test_subspace_rotation_full_turn_is_minus_one_on_pair():
    u = subspace_rotation(4, 1, 2, 2 * np.pi)
    expected = np.diag([-1.0, -1.0, 1.0, 1.0])
    assert np.max(np.abs(u - expected)) < 1e-12


def test_subspace_rotation_trace():
    u = subspace_rotation(4, 1, 2, np.pi / 2)
    # 2x2 x-rotation block contributes 2 cos(pi/4) = sqrt(2), identity block 2
    assert np.trace(u).real == pytest.approx(2 + np.sqrt(2), abs=1e-12)
    assert abs(np.trace(u).imag) < 1e-12


def test_refocus_composition_matches_direct_sum():
    u = subspace_rotation(4, 1, 2, np.pi) @ subspace_rotation(4, 3, 4, np.pi)
    block = np.array([[0, -1j], [-1j, 0]])
    direct_sum = np.zeros((4, 4), dtype=complex)
    direct_sum[:2, :2] = block
    direct_sum[2:, 2:] = block
    assert np.max(np.abs(u - direct_sum)) < 1e-14


@settings(max_examples=30, deadline=None)
@given(theta=st.floats(-10, 10), j=st.integers(1, 3),
       axis=st.sampled_from("xyz"))
def test_rotation_inverse(theta, j, axis):
    u = subspace_rotation(4, j, 4, theta, axis)
    inv = subspace_rotation(4, j, 4, -theta, axis)
    assert np.max(np.abs(u @ inv - np.eye(4))) < 1e-12
    assert unitarity_defect(u) < 1e-12
