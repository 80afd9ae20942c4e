import mpmath
import numpy as np
import pytest

from nikishin.local_parametrix import (
    JumpContourError,
    ModelSingularityError,
    OutsideDiskError,
    build_edge_parametrix,
    det2,
    psi_jump,
    psi_jump_residual,
    psi_matching_error,
    psi_model,
    sector_of,
)
from nikishin.pipeline import model_determinant_residual, model_sample_points

ORDERS = (-0.5, 0.0, 0.5, 2.0)


def test_sectors():
    assert sector_of(1 + 1j) == 0
    assert sector_of(-1 + 1j) == 1
    assert sector_of(-1 - 1j) == -1
    assert sector_of(-2, side=1) == 1 and sector_of(-2, side=-1) == -1
    with pytest.raises(ModelSingularityError):
        sector_of(0)
    with pytest.raises(JumpContourError):
        sector_of(-2)
    with mpmath.workprec(96):
        on_ray = 3 * mpmath.expj(2 * mpmath.pi / 3)
        with pytest.raises(JumpContourError):
            sector_of(on_ray)
        assert sector_of(on_ray, side=1) == 0 and sector_of(on_ray, side=-1) == 1
    with pytest.raises(ValueError):
        psi_jump(0.5, 4)


def test_half_integer_order_against_elementary_functions():
    """I and K of order 1/2 are elementary, so the right-sector matrix has a closed form."""
    with mpmath.workprec(120):
        zeta = mpmath.mpc("2.3", "0.4")
        root = mpmath.sqrt(zeta)
        i_half = lambda x: mpmath.sqrt(2 / (mpmath.pi * x)) * mpmath.sinh(x)  # noqa: E731
        k_half = lambda x: mpmath.sqrt(mpmath.pi / (2 * x)) * mpmath.exp(-x)  # noqa: E731
        x = 2 * root
        want = mpmath.matrix([
            [i_half(x), 1j / mpmath.pi * k_half(x)],
            [2j * mpmath.pi * root * mpmath.diff(i_half, x), -2 * root * mpmath.diff(k_half, x)],
        ])
        got = psi_model(0.5, zeta)
        assert mpmath.mnorm(got - want, 1) < mpmath.mpf(10) ** -25


def test_unit_determinant():
    assert model_determinant_residual(ORDERS, count=50) < 1e-20


def test_determinant_on_the_negative_axis():
    for order in ORDERS:
        for side in (1, -1):
            with mpmath.workprec(116):
                assert abs(det2(psi_model(order, mpmath.mpf(-3.7), side=side)) - 1) < 1e-20


@pytest.mark.parametrize("order", ORDERS)
@pytest.mark.parametrize("ray", [1, 2, 3])
def test_jumps_on_rays(order, ray):
    for radius in (1e-3, 0.5, 7.0, 1e3):
        assert psi_jump_residual(order, ray, radius) < 1e-15


@pytest.mark.parametrize("order", ORDERS)
def test_large_argument_matching_rate(order):
    radii = np.logspace(2, 6, 9)
    for angle in (0.3, 1.5, -2.5):
        errs = [psi_matching_error(order, r * np.exp(1j * angle)) for r in radii]
        slope = np.polyfit(np.log(radii), np.log(errs), 1)[0]
        assert abs(slope + 0.5) <= 0.05


def test_sample_points_cover_all_sectors():
    pts = model_sample_points(50)
    sectors = {sector_of(complex(z)) for z in pts}
    assert sectors == {-1, 0, 1}
    assert np.abs(pts).min() == pytest.approx(1e-3) and np.abs(pts).max() == pytest.approx(1e6)


@pytest.fixture(scope="module")
def edges(state):
    out = {}
    for edge in ("b", "d"):
        for k in (8, 16):
            out[edge, k] = build_edge_parametrix(edge, k, k, state.system, state.eq, state.gp)
    return out


@pytest.mark.parametrize("edge", ["b", "d"])
def test_edge_matching_halves_when_degree_doubles(edges, edge):
    ratio = edges[edge, 16].matching_error() / edges[edge, 8].matching_error()
    assert abs(ratio - 0.5) <= 0.15


@pytest.mark.parametrize("edge", ["b", "d"])
def test_edge_prefactor_has_no_jump(edges, edge):
    par = edges[edge, 8]
    for frac in (0.3, 0.6):
        x = par.center - frac * par.radius
        up, dn = par.E(x + 1e-11j), par.E(x - 1e-11j)
        assert np.abs(up - dn).max() / np.abs(up).max() < 1e-8


def test_edge_parametrix_input_errors(edges, state):
    par = edges["b", 8]
    with pytest.raises(OutsideDiskError):
        par.P(par.center + 2 * par.radius)
    with pytest.raises(ValueError):
        build_edge_parametrix("a", 8, 8, state.system, state.eq, state.gp)
