"""Modified Bessel and Hankel functions of real order at complex argument.

Power series inside ``switch_radius(bits)``, Hankel-type asymptotic expansions
outside.  K of non-integer order comes from the reflection formula with guard
bits covering the exp(2|z|) cancellation and the 1/sin(nu pi) blow-up near
integers; exact integer orders use the logarithmic series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .precision import DEFAULT_BITS


class BesselSingularityError(ValueError):
    pass


class BranchCutError(ValueError):
    pass


@dataclass(frozen=True)
class BesselEval:
    value: object
    derivative: object


def switch_radius(bits: int) -> float:
    return max(20.0, 0.6 * bits * math.log(2.0))


def _log_branch(z, side: int | None):
    """log z with arg in (-pi, pi]; on the negative axis ``side`` picks +-pi."""
    z = mpmath.mpc(z)
    if z.imag == 0 and z.real < 0:
        if side is None:
            raise BranchCutError("argument on (-inf, 0]; pass side=+1 or side=-1")
        return mpmath.log(-z.real) + (1 if side > 0 else -1) * 1j * mpmath.pi
    return mpmath.log(z)


def _a_coeffs(nu, zabs, bits):
    """Terms a_k(nu) of the Hankel expansion up to the smallest |a_k / z^k|."""
    mu = 4 * nu * nu
    out = [mpmath.mpf(1)]
    eps = mpmath.mpf(2) ** (-bits - 8)
    k = 1
    prev = mpmath.mpf(1)
    while True:
        nxt = out[-1] * (mu - (2 * k - 1) ** 2) / (k * 8)
        size = abs(nxt) / zabs**k
        if nxt == 0:
            break
        if size > prev and k > 2:
            break
        out.append(nxt)
        if size < eps:
            break
        prev = size
        k += 1
        if k > 4 * bits:
            break
    return out


def _asym_sum(coeffs, z, sign):
    acc = mpmath.mpc(0)
    zinv = 1 / z
    p = mpmath.mpc(1)
    for k, a in enumerate(coeffs):
        acc += (sign**k) * a * p
        p *= zinv
    return acc


def _series_I(nu, z, logz):
    """I_nu(z) by its power series, with the log of z supplied."""
    q = z * z / 4
    term = mpmath.rgamma(nu + 1)
    total = term
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec - 4)
    k = 0
    while True:
        k += 1
        term = term * q / (k * (nu + k))
        total += term
        if abs(term) <= eps * abs(total) and k > abs(q):
            break
        if k > 100000:
            break
    return mpmath.exp(nu * (logz - mpmath.log(2))) * total


def _series_I_deriv(nu, z, logz):
    """dI_nu/dz from the term-wise differentiated series."""
    q = z * z / 4
    term = mpmath.rgamma(nu + 1)
    total = nu * term
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec - 4)
    k = 0
    while True:
        k += 1
        term = term * q / (k * (nu + k))
        add = (2 * k + nu) * term
        total += add
        if abs(add) <= eps * max(abs(total), eps) and k > abs(q):
            break
        if k > 100000:
            break
    return mpmath.exp(nu * (logz - mpmath.log(2))) * total / z


def _asym_I(nu, z, logz, bits):
    coeffs = _a_coeffs(nu, abs(z), bits)
    pref = mpmath.exp(-(logz + mpmath.log(2 * mpmath.pi)) / 2)
    s_dom = _asym_sum(coeffs, z, -1)
    s_sub = _asym_sum(coeffs, z, 1)
    sgn = 1 if mpmath.im(logz) >= 0 else -1
    return pref * (mpmath.exp(z) * s_dom + sgn * 1j * mpmath.exp(sgn * 1j * nu * mpmath.pi) * mpmath.exp(-z) * s_sub)


def _asym_K(nu, z, logz, bits):
    coeffs = _a_coeffs(nu, abs(z), bits)
    pref = mpmath.sqrt(mpmath.pi / 2) * mpmath.exp(-logz / 2)
    return pref * mpmath.exp(-z) * _asym_sum(coeffs, z, 1)


def _guard(z) -> int:
    return int(3 * abs(z)) + 40


def bessel_I(nu, z, bits: int = DEFAULT_BITS, side: int | None = None) -> BesselEval:
    """I_nu(z) and dI_nu/dz."""
    with mpmath.workprec(bits + 20):
        nu = mpmath.mpf(nu)
        z = mpmath.mpc(z)
        if nu <= -1 and nu != int(nu):
            raise ValueError("order must exceed -1")
        if z == 0:
            if nu == 0:
                return BesselEval(mpmath.mpc(1), mpmath.mpc(0))
            if nu == 1:
                return BesselEval(mpmath.mpc(0), mpmath.mpc(0.5))
            if nu > 1:
                return BesselEval(mpmath.mpc(0), mpmath.mpc(0))
            raise BesselSingularityError("I_nu(0) is singular for this order")
        _log_branch(z, side)
    if abs(z) > switch_radius(bits):
        with mpmath.workprec(bits + 40):
            logz = _log_branch(z, side)
            val = _asym_I(nu, z, logz, bits)
            nxt = _asym_I(nu + 1, z, logz, bits)
            der = nxt + nu / z * val
    else:
        with mpmath.workprec(bits + _guard(z)):
            logz = _log_branch(z, side)
            val = _series_I(nu, z, logz)
            der = _series_I_deriv(nu, z, logz)
    with mpmath.workprec(bits):
        return BesselEval(+val, +der)


def _K_integer(n: int, z, logz):
    """K_n(z) for integer n >= 0 from the logarithmic series."""
    q = z * z / 4
    half = z / 2
    loghalf = logz - mpmath.log(2)
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec - 4)
    first = mpmath.mpc(0)
    if n > 0:
        for k in range(n):
            first += mpmath.factorial(n - k - 1) / mpmath.factorial(k) * (-q) ** k
        first *= mpmath.exp(-n * loghalf) / 2
    inu = _series_I(n, z, logz)
    second = (-1) ** (n + 1) * loghalf * inu
    term = 1 / mpmath.factorial(n)
    psi_a = -mpmath.euler
    psi_b = mpmath.digamma(n + 1)
    total = (psi_a + psi_b) * term
    k = 0
    while True:
        k += 1
        term = term * q / (k * (n + k))
        psi_a += mpmath.mpf(1) / k
        psi_b += mpmath.mpf(1) / (n + k)
        add = (psi_a + psi_b) * term
        total += add
        if abs(add) <= eps * max(abs(total), eps) and k > abs(q):
            break
    third = (-1) ** n * mpmath.exp(n * loghalf) * total / 2
    return first + second + third


def _K_value_small(nu, z, logz):
    nu = abs(nu)
    n = int(mpmath.nint(nu))
    eps = nu - n
    if eps == 0:
        return _K_integer(n, z, logz)
    s = mpmath.sin(nu * mpmath.pi)
    return mpmath.pi / 2 * (_series_I(-nu, z, logz) - _series_I(nu, z, logz)) / s


def bessel_K(nu, z, bits: int = DEFAULT_BITS, side: int | None = None) -> BesselEval:
    """K_nu(z) and dK_nu/dz on the principal branch."""
    with mpmath.workprec(bits + 20):
        nu = mpmath.mpf(nu)
        z = mpmath.mpc(z)
        if z == 0:
            raise BesselSingularityError("K_nu has a singularity at 0")
        _log_branch(z, side)
    if abs(z) > switch_radius(bits):
        with mpmath.workprec(bits + 40):
            logz = _log_branch(z, side)
            val = _asym_K(nu, z, logz, bits)
            lo = _asym_K(nu - 1, z, logz, bits)
            hi = _asym_K(nu + 1, z, logz, bits)
    else:
        extra = _guard(z) * 2
        if abs(nu) != mpmath.nint(abs(nu)):
            extra += int(-mpmath.log(abs(mpmath.sin(nu * mpmath.pi)), 2)) + 10
        with mpmath.workprec(bits + extra):
            logz = _log_branch(z, side)
            val = _K_value_small(nu, z, logz)
            lo = _K_value_small(nu - 1, z, logz)
            hi = _K_value_small(nu + 1, z, logz)
    with mpmath.workprec(bits + 20):
        der = -(lo + hi) / 2
    with mpmath.workprec(bits):
        return BesselEval(+val, +der)


def hankel1(nu, z, bits: int = DEFAULT_BITS) -> BesselEval:
    """H^(1)_nu(z) for -pi/2 < arg z <= pi, via K_nu(-iz)."""
    with mpmath.workprec(bits + 20):
        z = mpmath.mpc(z)
        nu = mpmath.mpf(nu)
        if z == 0:
            raise BesselSingularityError("Hankel functions are singular at 0")
        w = -1j * z
        side = None
        if w.imag == 0 and w.real < 0:
            side = 1
        k = bessel_K(nu, w, bits + 10, side=side)
        c = 2 / (mpmath.pi * 1j) * mpmath.exp(-1j * nu * mpmath.pi / 2)
        val = c * k.value
        der = c * (-1j) * k.derivative
    with mpmath.workprec(bits):
        return BesselEval(+val, +der)


def hankel2(nu, z, bits: int = DEFAULT_BITS) -> BesselEval:
    """H^(2)_nu(z) for -pi <= arg z < pi/2, via K_nu(iz)."""
    with mpmath.workprec(bits + 20):
        z = mpmath.mpc(z)
        nu = mpmath.mpf(nu)
        if z == 0:
            raise BesselSingularityError("Hankel functions are singular at 0")
        w = 1j * z
        side = None
        if w.imag == 0 and w.real < 0:
            side = -1
        k = bessel_K(nu, w, bits + 10, side=side)
        c = -2 / (mpmath.pi * 1j) * mpmath.exp(1j * nu * mpmath.pi / 2)
        val = c * k.value
        der = c * 1j * k.derivative
    with mpmath.workprec(bits):
        return BesselEval(+val, +der)
