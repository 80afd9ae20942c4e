import mpmath
import pytest

from nikishin import exact
from nikishin.system import BranchCutError, NikishinSystem

BITS = 128


@pytest.fixture(scope="module")
def system():
    return NikishinSystem()


def _arcsine_moments(count, bits):
    """Moments of the arcsine mu1 on [1, 2] and of w mu1, from the closed-form Markov function."""
    with mpmath.workprec(bits):
        x = lambda th: 1.5 + 0.5 * mpmath.cos(th)  # noqa: E731
        w = lambda t: mpmath.pi / mpmath.sqrt((t + 5) * (t + 1))  # noqa: E731
        m1 = [mpmath.quad(lambda th: x(th) ** k, [0, mpmath.pi]) for k in range(count)]
        m2 = [mpmath.quad(lambda th: w(x(th)) * x(th) ** k, [0, mpmath.pi]) for k in range(count)]
        return m1, m2


def test_type_I_matches_monomial_moment_system(system):
    """Independent route: monomial coefficients from a moment system built with mpmath.quad."""
    n, m = 2, 2
    size = n + m
    sol = exact.solve_type_I(system, (n, m), BITS)
    m1, m2 = _arcsine_moments(2 * size, BITS)
    with mpmath.workprec(BITS):
        mat = mpmath.matrix(size, size)
        for k in range(size):
            for j in range(n):
                mat[k, j] = m1[k + j]
            for j in range(m):
                mat[k, n + j] = m2[k + j]
        rhs = mpmath.matrix([0] * (size - 1) + [1])
        coef = mpmath.lu_solve(mat, rhs)
        for j in range(n):
            assert abs(coef[j] - sol.a_coeffs[j]) < mpmath.mpf(10) ** -25
        for j in range(m):
            assert abs(coef[n + j] - sol.b_coeffs[j]) < mpmath.mpf(10) ** -25


def test_type_II_matches_moment_system(system):
    n, m = 2, 1
    size = n + m
    poly = exact.solve_type_II(system, (n, m), BITS)
    m1, m2 = _arcsine_moments(2 * size + 1, BITS)
    with mpmath.workprec(BITS):
        rows = [[m1[k + j] for j in range(size)] for k in range(n)] + [[m2[k + j] for j in range(size)] for k in range(m)]
        rhs = [-m1[k + size] for k in range(n)] + [-m2[k + size] for k in range(m)]
        coef = mpmath.lu_solve(mpmath.matrix(rows), mpmath.matrix(rhs))
        for j in range(size):
            assert abs(coef[j] - poly.coeffs[j]) < mpmath.mpf(10) ** -25


@pytest.mark.parametrize("k", [2, 3, 5])
def test_type_II_without_second_measure_is_chebyshev(system, k):
    """With m = 0 and the arcsine weight, P is the monic Chebyshev polynomial of [1, 2]."""
    poly = exact.solve_type_II(system, (k, 0), BITS)
    zeros = exact.type_II_zeros(poly)
    with mpmath.workprec(BITS):
        want = sorted(1.5 + 0.5 * mpmath.cos((2 * j + 1) * mpmath.pi / (2 * k)) for j in range(k))
        assert len(zeros) == k
        assert max(abs(z - w) for z, w in zip(zeros, want)) < mpmath.mpf(10) ** -25


@pytest.mark.parametrize("idx", [(3, 3), (6, 3), (8, 8)])
def test_type_I_residuals_and_zeros(system, idx):
    sol = exact.solve_type_I(system, idx, BITS)
    assert sol.residual <= 1e-12
    assert abs(sol.kappa_check) <= 1e-12
    assert len(exact.linear_form_zeros(sol)) == sum(idx) - 1


@pytest.mark.parametrize("idx", [(3, 3), (5, 2)])
def test_type_II_orthogonality_and_degree(system, idx):
    poly = exact.solve_type_II(system, idx, BITS)
    assert poly.monic and poly.coeffs[-1] == 1 and len(poly.coeffs) == sum(idx) + 1
    assert max(exact.type_II_residuals(poly)) <= 1e-12
    assert len(exact.type_II_zeros(poly)) == sum(idx)


def test_varying_orthogonality_and_cauchy_identity(system):
    sol = exact.solve_type_I(system, (5, 5), BITS)
    hcoef, zeros = exact.h_polynomial(sol)
    assert max(exact.varying_orthogonality_residuals(sol, hcoef)) <= 1e-10
    # (A + wB)/H equals the Cauchy transform of B/H against sigma off [c, d]
    with mpmath.workprec(BITS):
        z = mpmath.mpc(0.3, 0.7)
        lhs = exact.linear_form(system, sol, z) / exact.polyval(hcoef, z)
        rhs = exact.cauchy_of_B_over_H(sol, hcoef, z)
        assert abs(lhs - rhs) <= 1e-20 * abs(lhs)


def test_B_zeros_lie_in_cd(system):
    sol = exact.solve_type_I(system, (6, 6), BITS)
    zs = exact.b_zeros(sol)
    assert len(zs) == 5 and all(-5 < z < -1 for z in zs)


def test_X_jump_and_determinant(system):
    xd = exact.build_X(system, (3, 3), BITS)
    assert exact.validate_X_jump(xd, 1.4, bits=160) <= 1e-8
    with mpmath.workprec(BITS):
        for z in (mpmath.mpc(3, 1), mpmath.mpc(-2, 0.5), mpmath.mpc(0, -2)):
            assert abs(exact.det3(exact.assemble_X(xd, z), BITS) - 1) < 1e-20
    with pytest.raises(BranchCutError):
        exact.assemble_X(xd, 1.5)


def test_invalid_indices(system):
    with pytest.raises(ValueError):
        exact.solve_type_I(system, (0, 0))
