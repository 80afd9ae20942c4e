import numpy as np
import pytest

from nikishin.pipeline import szego_boundary_residual
from nikishin.szego import EndpointError, build_szego

RNG = np.random.default_rng(11)
POINTS = RNG.uniform(-6, 3, 30) + 1j * RNG.choice([-1, 1], 30) * RNG.uniform(0.05, 3, 30)


@pytest.mark.parametrize("which", ["state", "flat_state"])
def test_product_is_one(which, request):
    szego = request.getfixturevalue(which).szego
    assert np.abs(szego.all_D(POINTS).prod(axis=1) - 1).max() < 1e-10
    assert abs(np.prod(szego.at_infinity) - 1) < 1e-10
    assert szego.at_infinity[1].imag == 0 and szego.at_infinity[1].real > 0


@pytest.mark.parametrize("which", ["state", "flat_state"])
def test_boundary_relations(which, request):
    st = request.getfixturevalue(which)
    assert szego_boundary_residual(st.szego, st.system, k=9) < 1e-9


def test_boundary_relations_for_polynomial_weights(state):
    """A non-constant analytic factor in each weight goes through the same contour integrals."""
    from nikishin.system import NikishinSystem
    system = NikishinSystem(alpha="0.3", beta="-0.2", gamma="0.1", delta="-0.4", h1=("1", "0.2"), h2=("3", "0", "0.1"))
    szego = build_szego(state.smap, system)
    assert szego_boundary_residual(szego, system, k=9) < 1e-8
    assert np.abs(szego.all_D(POINTS).prod(axis=1) - 1).max() < 1e-8


def test_contours_wind_once_around_their_centers(state):
    one, minus_one = state.szego.around_one, state.szego.around_minus_one
    probe = np.array([1 + 0j, -1 + 0j, 0j])
    assert np.allclose(one.winding(probe), [1, 0, 0], atol=1e-12)
    assert np.allclose(minus_one.winding(probe), [0, 1, 0], atol=1e-12)


def test_quadrature_level_is_converged(state):
    """The production rule agrees with one twice as dense, including points just outside the subtraction radius."""
    fine = build_szego(state.smap, state.system, level=7)
    assert np.abs(state.szego.all_D(POINTS) / fine.all_D(POINTS) - 1).max() < 1e-10


def test_conjugation_symmetry(state):
    """The weights carry a factor 2 pi i, so reflection flips the sign on the two finite sheets."""
    d, dc = state.szego.all_D(POINTS), state.szego.all_D(POINTS.conj())
    assert np.allclose(dc, d.conj() * np.array([-1, 1, -1]), rtol=1e-10, atol=0)


def test_one_sided_values_are_limits(state):
    xs = np.array([1.3, 1.7, -4.2, -2.0])
    for side in (1, -1):
        near = state.szego.all_D(xs + side * 1e-9j)
        assert np.allclose(near, state.szego.all_D(xs + 0j, side=side), rtol=1e-6)


def test_endpoint_rejected(state):
    with pytest.raises(EndpointError):
        state.szego.boundary(0, [2.0], 1)
