from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nikishin.precision import InvalidWeightError
from nikishin.system import (
    BranchCutError,
    GeometryError,
    MultiIndex,
    NikishinSystem,
    markov_w,
    markov_w_side,
    moment,
    sigma_mass,
)

BITS = 128


def arcsine_markov(z, c=-5, d=-1):
    """Closed form of int dt / ((z - t) sqrt((t - c)(d - t))) over [c, d]."""
    return mpmath.pi / (mpmath.sqrt(z - c) * mpmath.sqrt(z - d))


def test_defaults_and_strings():
    s = NikishinSystem()
    assert (s.a, s.b, s.c, s.d) == ("1", "2", "-5", "-1")
    t = NikishinSystem(a=Fraction(1), b="2", alpha=Fraction(-1, 2))
    assert t.alpha == "-1/2"
    with mpmath.workprec(BITS):
        assert t.exponents()[0] == mpmath.mpf(-1) / 2


def test_content_hash_is_stable_and_sensitive():
    assert NikishinSystem().content_hash() == NikishinSystem().content_hash()
    assert NikishinSystem().content_hash() != NikishinSystem(beta="0").content_hash()


@pytest.mark.parametrize(
    "kw,err",
    [
        ({"d": "2"}, GeometryError),
        ({"c": "0"}, GeometryError),
        ({"alpha": "-1"}, InvalidWeightError),
        ({"h1": ("0",)}, InvalidWeightError),
        ({"h2": ("-4", "1")}, InvalidWeightError),
    ],
)
def test_invalid_systems(kw, err):
    with pytest.raises(err):
        NikishinSystem(**kw)


def test_geometry_error_names_the_ordering():
    with pytest.raises(GeometryError, match="c < d < a < b"):
        NikishinSystem(d="3")


def test_multi_index():
    idx = MultiIndex(8, 8)
    assert idx.q1 == Fraction(1, 2) and idx.size == 16
    with pytest.raises(ValueError):
        MultiIndex(2, 3)
    with pytest.raises(ValueError):
        MultiIndex(0, 0)


@settings(max_examples=20, deadline=None)
@given(st.floats(-8, 6), st.floats(0.05, 4), st.sampled_from([1, -1]))
def test_markov_function_matches_closed_form(x, y, sgn):
    s = NikishinSystem()
    with mpmath.workprec(BITS):
        z = mpmath.mpc(x, sgn * y)
        assert abs(markov_w(s, z, BITS) - arcsine_markov(z)) < mpmath.mpf(10) ** -25


def test_markov_function_real_gap_and_cut():
    s = NikishinSystem()
    with mpmath.workprec(BITS):
        assert abs(markov_w(s, mpmath.mpf(0), BITS) - arcsine_markov(mpmath.mpf(0))) < mpmath.mpf(10) ** -30
    with pytest.raises(BranchCutError):
        markov_w(s, -3)


@pytest.mark.parametrize("x", ["-4.5", "-3", "-1.2"])
def test_markov_boundary_values(x):
    """For the arcsine sigma the principal value vanishes, so w_+- = -+ i pi / sqrt((x-c)(d-x))."""
    s = NikishinSystem()
    with mpmath.workprec(BITS):
        xm = mpmath.mpf(x)
        dens = 1 / mpmath.sqrt((xm + 5) * (-1 - xm))
        for side in (1, -1):
            got = markov_w_side(s, xm, side, BITS)
            assert abs(got - (-side) * 1j * mpmath.pi * dens) < mpmath.mpf(10) ** -35


def test_markov_boundary_values_linear_density():
    """sigma with density 2 + t/10 on [c, d]: w = (2 + z/10) log((z-c)/(z-d)) - (d-c)/10."""
    s = NikishinSystem(gamma="0", delta="0", h2=("2", "0.1"))
    with mpmath.workprec(BITS):
        x = mpmath.mpf("-2.5")
        for side in (1, -1):
            want = (2 + x / 10) * (mpmath.log((x + 5) / (-1 - x)) - side * 1j * mpmath.pi) - mpmath.mpf(4) / 10
            assert abs(markov_w_side(s, x, side, BITS) - want) < mpmath.mpf(10) ** -30
        z = mpmath.mpc(-2.5, 0.5)
        want = (2 + z / 10) * mpmath.log((z + 5) / (z + 1)) - mpmath.mpf(4) / 10
        assert abs(markov_w(s, z, BITS) - want) < mpmath.mpf(10) ** -25


def test_masses_and_moments():
    s = NikishinSystem()
    with mpmath.workprec(BITS):
        assert abs(sigma_mass(s, BITS) - mpmath.pi) < mpmath.mpf(10) ** -30
        assert abs(moment(s, 1, 0, BITS) - mpmath.pi) < mpmath.mpf(10) ** -30
        want = mpmath.quad(lambda th: arcsine_markov(1.5 + 0.5 * mpmath.cos(th)), [0, mpmath.pi])
        assert abs(moment(s, 2, 0, BITS) - want) < mpmath.mpf(10) ** -25
    with pytest.raises(ValueError):
        moment(s, 3, 0)
