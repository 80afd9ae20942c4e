import numpy as np
import pytest

from nikishin.global_parametrix import det3
from nikishin.surface import BranchCutError

RNG = np.random.default_rng(5)
POINTS = RNG.uniform(-7, 4, 40) + 1j * RNG.choice([-1, 1], 40) * RNG.uniform(0.01, 4, 40)


def test_det3_against_numpy():
    mats = RNG.normal(size=(10, 3, 3)) + 1j * RNG.normal(size=(10, 3, 3))
    assert np.allclose(det3(mats), np.linalg.det(mats), atol=1e-12)


@pytest.mark.parametrize("which", ["state", "flat_state"])
def test_unit_determinant(which, request):
    gp = request.getfixturevalue(which).gp
    assert np.abs(det3(gp.N0(POINTS)) - 1).max() < 1e-10
    assert np.abs(det3(gp.N(POINTS)) - 1).max() < 1e-9


@pytest.mark.parametrize("which", ["state", "flat_state"])
def test_jumps(which, request):
    gp = request.getfixturevalue(which).gp
    ab, cd = np.linspace(1.02, 1.98, 15), np.linspace(-4.95, -1.05, 15)
    assert gp.jump_residual(ab, "ab") < 1e-10
    assert gp.jump_residual(cd, "cd") < 1e-10
    assert gp.jump_residual(ab, "ab", "N") < 1e-8
    assert gp.jump_residual(cd, "cd", "N") < 1e-8


def test_jump_matrices_have_unit_determinant(state):
    for interval, xs in (("ab", np.array([1.5])), ("cd", np.array([-3.0]))):
        assert abs(np.linalg.det(state.gp.jump_N0(interval)) - 1) < 1e-15
        assert abs(np.linalg.det(state.gp.jump_N(xs, interval)[0]) - 1) < 1e-12


def test_no_jump_across_the_gap_and_outside(state):
    xs = np.array([-0.5, 0.0, 0.9, 2.5, 10.0, -6.0])
    up, dn = state.gp.N0(xs + 1e-12j), state.gp.N0(xs - 1e-12j)
    assert np.abs(up - dn).max() < 1e-8


@pytest.mark.parametrize("radius", [1e2, 1e3, 1e4])
def test_tends_to_identity(state, radius):
    angles = np.linspace(0.1, 2 * np.pi - 0.1, 12)
    z = radius * np.exp(1j * angles)
    dev = np.abs(state.gp.N0(z) - np.eye(3)).max()
    assert dev <= 20 / radius
    devn = np.abs(state.gp.N(z) - np.eye(3)).max()
    assert devn <= 20 / radius


def test_inverse_transpose_structure(state):
    """N_0^{-T} = N_0 on this surface; checked numerically, not assumed."""
    n0 = state.gp.N0(POINTS)
    assert np.abs(np.linalg.inv(n0).transpose(0, 2, 1) - n0).max() < 1e-9


def test_cut_needs_a_side(state):
    with pytest.raises(BranchCutError):
        state.gp.N0(np.array([1.5 + 0j]))
