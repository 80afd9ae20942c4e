import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import roots_jacobi

from nikishin.precision import (
    DegenerateInputError,
    InvalidWeightError,
    chebyshev_to_monomial,
    clenshaw,
    gauss_jacobi,
    gauss_legendre,
    poly_from_roots,
    poly_roots,
    polyval,
    real_roots_bracketed,
    to_mpf,
)

SLOW = settings(max_examples=15, deadline=None)


def test_decimal_strings_convert_without_double_rounding():
    with mpmath.workprec(256):
        assert to_mpf("0.1", 256) == mpmath.mpf(1) / 10
        assert to_mpf("0.1", 256) != mpmath.mpf(0.1)


@pytest.mark.parametrize("p,q", [(-0.5, -0.5), (0, 0), (0.5, -0.3), (2, 1.5)])
def test_gauss_jacobi_matches_scipy_in_double(p, q):
    rule = gauss_jacobi(20, p, q, bits=128)
    xs, ws = rule.as_float()
    ref_x, ref_w = roots_jacobi(20, p, q)
    assert np.allclose(xs, ref_x, atol=1e-13)
    assert np.allclose(ws, ref_w, rtol=1e-11)


def _jacobi_moment(k, p, q):
    """int_{-1}^{1} x^k (1-x)^p (1+x)^q dx by binomial expansion in Beta functions."""
    total = mpmath.mpf(0)
    for j in range(k + 1):
        total += mpmath.binomial(k, j) * 2**j * (-1) ** (k - j) * mpmath.beta(j + q + 1, p + 1)
    return 2 ** (p + q + 1) * total


@SLOW
@given(
    p=st.sampled_from([(-1, 2), (0, 1), (1, 3), (3, 2)]),
    q=st.sampled_from([(-1, 2), (0, 1), (2, 3)]),
    k=st.integers(0, 39),
)
def test_gauss_jacobi_integrates_monomials_exactly(p, q, k):
    """20 nodes integrate x^k (k < 40) against (1-x)^p (1+x)^q to working precision."""
    bits = 192
    with mpmath.workprec(bits):
        pm = mpmath.mpf(p[0]) / p[1]
        qm = mpmath.mpf(q[0]) / q[1]
        rule = gauss_jacobi(20, pm, qm, bits)
        got = mpmath.fsum(w * x**k for x, w in zip(rule.nodes, rule.weights))
        with mpmath.workprec(bits + 64):
            want = _jacobi_moment(k, pm, qm)
        assert abs(got - want) <= mpmath.mpf(10) ** -40 * max(1, abs(want))


def test_gauss_jacobi_rejects_nonintegrable_exponents():
    with pytest.raises(InvalidWeightError):
        gauss_jacobi(4, -1, 0)
    with pytest.raises(ValueError):
        gauss_jacobi(0, 0, 0)


def test_legendre_weights_sum_to_two():
    rule = gauss_legendre(12, bits=128)
    with mpmath.workprec(128):
        assert abs(mpmath.fsum(rule.weights) - 2) < mpmath.mpf(10) ** -35


def test_rule_transport_to_interval():
    rule = gauss_jacobi(16, "-0.5", "-0.5", bits=128)
    xs, ws = rule.map_to(1, 2)
    with mpmath.workprec(128):
        # arcsine weight on [1, 2] has total mass pi
        assert abs(mpmath.fsum(ws) - mpmath.pi) < mpmath.mpf(10) ** -30
        assert abs(mpmath.fsum(w * x for x, w in zip(xs, ws)) - 1.5 * mpmath.pi) < mpmath.mpf(10) ** -30


@SLOW
@given(st.lists(st.integers(-50, 50), min_size=1, max_size=7, unique=True))
def test_poly_roots_recovers_integer_roots(roots):
    coeffs = poly_from_roots(roots)
    found = sorted(float(mpmath.re(r)) for r in poly_roots(coeffs, bits=128))
    assert np.allclose(found, sorted(roots), atol=1e-20)


def test_poly_roots_degenerate_and_complex():
    with pytest.raises(DegenerateInputError):
        poly_roots([0, 0])
    assert poly_roots([5]) == []
    roots = poly_roots([1, 0, 1], bits=128)
    assert sorted(complex(r).imag for r in roots) == pytest.approx([-1, 1], abs=1e-30)


def test_real_roots_bracketed_cosine():
    with mpmath.workprec(128):
        grid = [mpmath.mpf(k) / 10 for k in range(0, 101)]
        roots = real_roots_bracketed(mpmath.cos, 0, 10, grid, 128)
        want = [(2 * k + 1) * mpmath.pi / 2 for k in range(3)]
        assert len(roots) == 3
        assert max(abs(r - w) for r, w in zip(roots, want)) < mpmath.mpf(10) ** -30


@SLOW
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=8), st.floats(-0.99, 0.99))
def test_chebyshev_to_monomial_agrees_with_clenshaw(coeffs, s):
    lo, hi = 1, 2
    mono = chebyshev_to_monomial(coeffs, lo, hi, bits=128)
    with mpmath.workprec(128):
        x = (mpmath.mpf(s) * (hi - lo) + lo + hi) / 2
        lhs = clenshaw([mpmath.mpf(c) for c in coeffs], mpmath.mpf(s))
        rhs = polyval(mono, mpmath.mpf(x))
        assert abs(lhs - rhs) <= 1e-25 * (1 + sum(abs(c) for c in coeffs))


def test_polyval_increasing_order():
    assert polyval([1, 2, 3], 2) == 1 + 4 + 12
    assert math.isclose(polyval([0.5], 10.0), 0.5)
