import mpmath
import numpy as np
import pytest

from nikishin.surface import (
    BranchCutError,
    BranchPointError,
    build_surface,
    normalize_geometry,
    solve_critical_points,
    tanh_sinh_theta,
)

from helpers import sample_surface_points, surface_inverse_residual

BITS = 256


@pytest.fixture(scope="module")
def smap():
    return build_surface(1, 2, -5, -1, BITS)


def test_normalization_sends_inner_endpoints_to_plus_minus_one():
    aff, lam, mu = normalize_geometry(1, 2, -5, -1, BITS)
    assert aff(mpmath.mpf(1)) == 1 and aff(mpmath.mpf(-1)) == -1
    assert lam == 2 and mu == 5
    with pytest.raises(ValueError):
        normalize_geometry(-1, 2, -5, 1)


def test_critical_points_are_ordered_and_critical(smap):
    be, al, ah, bh = smap.critical_points()
    assert be < -1 < al < ah < 1 < bh
    with mpmath.workprec(BITS):
        for y in (be, al, ah, bh):
            assert abs(smap.dH(mpmath.mpf(y))) < mpmath.mpf(10) ** -60


def test_critical_values_hit_branch_points(smap):
    want = (-smap.mu, -1, 1, smap.lam)
    with mpmath.workprec(BITS):
        err = max(abs(v - w) for v, w in zip(smap.critical_values(), want))
    assert err < mpmath.mpf(10) ** -20


def test_symmetric_geometry_gives_symmetric_critical_points():
    crit = solve_critical_points(3, 3, BITS)
    with mpmath.workprec(BITS):
        assert abs(crit.a_h + crit.alpha_h) < mpmath.mpf(10) ** -20
        assert abs(crit.b_h + crit.beta_h) < mpmath.mpf(10) ** -20


def test_branches_invert_the_map(smap):
    assert surface_inverse_residual(smap, sample_surface_points(200)) < mpmath.mpf(10) ** (-0.2 * BITS)


def test_batched_and_single_branch_values_agree(smap):
    t = mpmath.mpc("0.3", "0.8")
    many = smap.psi_mp_many([t])[0]
    for sheet in range(3):
        assert many[sheet] == smap.psi_mp(t, sheet)


def test_branches_are_distinct_off_the_cuts(smap):
    t = smap.to_normalized(np.array([p for p, s in sample_surface_points(200) if s is None]))
    ys = smap.psi(t)
    gaps = np.abs(ys[:, [0, 0, 1]] - ys[:, [1, 2, 2]]).min(axis=1)
    assert gaps.min() > 1e-6


def test_branches_at_infinity(smap):
    t = np.array([1e6 + 0j, -1e6 + 1j, 1e6j])
    ys = smap.psi(t)
    kappa = smap.fl["kappa"]
    assert np.allclose(ys[:, 0], 1, atol=1e-5)
    assert np.allclose(ys[:, 2], -1, atol=1e-5)
    assert np.allclose(ys[:, 1] / (kappa * t), 1, atol=1e-5)


def test_sheets_are_glued_across_the_cuts(smap):
    t_ab = np.linspace(1.05, smap.fl["lam"] - 0.05, 9) + 0j
    up, down = smap.psi(t_ab, side=1), smap.psi(t_ab, side=-1)
    assert np.allclose(up[:, 0], down[:, 1], atol=1e-12) and np.allclose(up[:, 1], down[:, 0], atol=1e-12)
    assert np.allclose(up[:, 2], down[:, 2], atol=1e-12)
    t_cd = np.linspace(-smap.fl["mu"] + 0.05, -1.05, 9) + 0j
    up, down = smap.psi(t_cd, side=1), smap.psi(t_cd, side=-1)
    assert np.allclose(up[:, 1], down[:, 2], atol=1e-12) and np.allclose(up[:, 2], down[:, 1], atol=1e-12)
    assert np.allclose(up[:, 0], down[:, 0], atol=1e-12)


def test_boundary_values_are_limits(smap):
    t = np.array([1.4 + 0j, -2.5 + 0j])
    for side in (1, -1):
        near = smap.psi(t + side * 1e-10j)
        assert np.allclose(near, smap.psi(t, side=side), atol=1e-4)


def test_cut_and_branch_point_errors(smap):
    with pytest.raises(BranchCutError):
        smap.psi(np.array([1.5 + 0j]))
    with pytest.raises(BranchPointError):
        smap.psi(np.array([1.0 + 0j]), side=1)
    with pytest.raises(ValueError):
        smap.H(mpmath.mpf(1))


def test_tanh_sinh_rule_integrates_endpoint_singularity():
    theta, theta_c, w = tanh_sinh_theta(6)
    assert np.sum(w) == pytest.approx(np.pi, rel=1e-14)
    # int_0^pi theta^(-1/2) dtheta = 2 sqrt(pi)
    assert np.sum(w / np.sqrt(theta)) == pytest.approx(2 * np.sqrt(np.pi), rel=1e-9)
    assert np.allclose(theta + theta_c, np.pi, atol=1e-15)
