"""Vector equilibrium problem with Nikishin interaction for two intervals.

Each measure is written on its support [lo, hi] as

    d nu(t) = (1/pi) sum_k c_k T_k(s) ds / sqrt(1 - s^2),   t = mid + half * s,

with c_0 = 1 (unit mass).  Finite Hilbert transforms, logarithmic potentials
and complex potentials of these densities have closed forms in Chebyshev
polynomials, so the differentiated variational equations become a dense
linear system for the remaining coefficients, collocated at Chebyshev points.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import chebyshev as C


class EquilibriumError(RuntimeError):
    pass


def _joukowski_inv(zeta):
    """sqrt(zeta - 1) sqrt(zeta + 1): cut on [-1, 1], behaves like zeta at infinity."""
    zeta = np.asarray(zeta, dtype=complex)
    return np.sqrt(zeta - 1) * np.sqrt(zeta + 1)


def _cheb_u(kmax, s):
    """U_0..U_kmax at real s in [-1, 1] (rows)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros((kmax + 1,) + s.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = 2 * s
    for k in range(2, kmax + 1):
        out[k] = 2 * s * out[k - 1] - out[k - 2]
    return out


@dataclass(frozen=True)
class IntervalMeasure:
    """Unit measure with inverse-square-root edges on [lo, hi]."""

    lo: float
    hi: float
    coeffs: np.ndarray  # coeffs[0] == 1

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def half(self):
        return 0.5 * (self.hi - self.lo)

    def local(self, x):
        return (np.asarray(x) - self.mid) / self.half

    def density(self, x):
        s = self.local(np.asarray(x, dtype=float))
        smooth = C.chebval(s, self.coeffs)
        return smooth / (np.pi * self.half * np.sqrt(np.clip(1 - s * s, 0, None)))

    def smooth_part(self, x):
        """density * sqrt((x - lo)(hi - x)), a smooth function on the closed interval."""
        s = self.local(np.asarray(x, dtype=float))
        return C.chebval(s, self.coeffs) / np.pi

    def hilbert(self, x):
        """PV int d nu(t) / (x - t) for x inside (lo, hi)."""
        s = self.local(np.asarray(x, dtype=float))
        k = len(self.coeffs) - 1
        u = _cheb_u(max(k - 1, 0), s)
        acc = np.zeros_like(s)
        for j in range(1, k + 1):
            acc -= self.coeffs[j] * u[j - 1]
        return acc / self.half

    def cauchy(self, z):
        """int d nu(t) / (z - t) for z off the support."""
        zeta = self.local(np.asarray(z, dtype=complex))
        root = _joukowski_inv(zeta)
        q = zeta - root
        acc = np.zeros_like(zeta)
        p = np.ones_like(zeta)
        for c in self.coeffs:
            acc += c * p
            p = p * q
        return acc / (root * self.half)

    def potential(self, x):
        """U(x; nu) = int log(1/|x - t|) d nu(t) for real x."""
        x = np.asarray(x, dtype=float)
        s = self.local(x)
        inside = np.abs(s) <= 1
        out = np.empty_like(s)
        ks = np.arange(1, len(self.coeffs))
        if inside.any():
            si = s[inside]
            tk = C.chebvander(si, len(self.coeffs) - 1)[:, 1:]
            out[inside] = -np.log(self.half) + np.log(2.0) + tk @ (self.coeffs[1:] / ks)
        if (~inside).any():
            g = self.log_transform(x[~inside] + 0j)
            out[~inside] = -g.real
        return out

    def log_transform(self, z, side: int = 0):
        """int log(z - t) d nu(t), principal log, cut (-inf, hi]; ``side`` picks the limit on the cut."""
        z = np.asarray(z, dtype=complex)
        if side:
            z = z + 1j * side * 1e-300
        zeta = self.local(z)
        root = _joukowski_inv(zeta)
        if side:
            on_cut = (np.abs(zeta.imag) < 1e-250) & (np.abs(zeta.real) < 1)
            sr = np.sqrt(np.clip(1 - zeta.real**2, 0, None))
            root = np.where(on_cut, side * 1j * sr, root)
        q = zeta - root
        out = np.log(self.half) + np.log((zeta + root) / 2)
        if side:
            left = (np.abs(zeta.imag) < 1e-250) & (zeta.real <= -1)
            out = np.where(left, np.log(np.abs((zeta + root) / 2)) + 1j * side * np.pi + np.log(self.half), out)
        p = np.ones_like(zeta)
        for k in range(1, len(self.coeffs)):
            p = p * q
            out = out - self.coeffs[k] * p / k
        return out

    def tail_mass(self, x):
        """nu([x, hi]) for x in [lo, hi]."""
        s = np.clip(self.local(np.asarray(x, dtype=float)), -1, 1)
        theta = np.arccos(s)
        acc = self.coeffs[0] * theta
        for k in range(1, len(self.coeffs)):
            acc = acc + self.coeffs[k] * np.sin(k * theta) / k
        return acc / np.pi


def _cheb_points(npts):
    k = np.arange(npts)
    return np.cos(np.pi * (k + 0.5) / npts)


def _assemble(a, b, c, d, q1, order):
    """Collocation system for the coefficients c_1..c_K of both measures."""
    K = order
    s_pts = _cheb_points(K)
    m1 = IntervalMeasure(a, b, np.zeros(K + 1))
    m2 = IntervalMeasure(c, d, np.zeros(K + 1))
    x1 = m1.mid + m1.half * s_pts
    x2 = m2.mid + m2.half * s_pts
    u = _cheb_u(K - 1, s_pts)
    mat = np.zeros((2 * K, 2 * K))
    rhs = np.zeros(2 * K)
    # cross terms: Cauchy transforms of unit basis pieces evaluated on the other interval
    zeta21 = m2.local(x1 + 0j)
    r21 = _joukowski_inv(zeta21)
    q21 = zeta21 - r21
    zeta12 = m1.local(x2 + 0j)
    r12 = _joukowski_inv(zeta12)
    q12 = zeta12 - r12
    # rows 0..K-1: 2 H[nu1] - q1 C[nu2] = 0 on (a, b)
    for j in range(1, K + 1):
        mat[:K, j - 1] = 2 * (-u[j - 1]) / m1.half
        mat[:K, K + j - 1] = -q1 * (q21**j / (r21 * m2.half)).real
        mat[K:, j - 1] = -(q12**j / (r12 * m1.half)).real
        mat[K:, K + j - 1] = 2 * q1 * (-u[j - 1]) / m2.half
    rhs[:K] = q1 * (1 / (r21 * m2.half)).real
    rhs[K:] = (1 / (r12 * m1.half)).real
    return mat, rhs


@dataclass(frozen=True)
class EquilibriumSolution:
    q1: Fraction
    nu1: IntervalMeasure
    nu2: IntervalMeasure
    l1: float
    l2: float
    full_support: bool
    order: int

    @property
    def support2(self):
        return (self.nu2.lo, self.nu2.hi)

    def measure(self, i):
        return self.nu1 if i == 1 else self.nu2

    def density(self, i, x):
        return self.measure(i).density(x)

    def potential(self, i, x):
        return self.measure(i).potential(x)

    def g(self, i, z, side: int = 0):
        """Complex potential g_i(z) = int log(z - t) d nu_i(t)."""
        return self.measure(i).log_transform(z, side)

    def g_reflected(self, i, z):
        """int log(t - z) d nu_i(t): real to the left of the support."""
        return _reflected(self.measure(i), z)

    def phi(self, i, x):
        """phi_i(x) = nu_i([x, right endpoint])."""
        return self.measure(i).tail_mass(x)

    def variational_residuals(self, npts=200):
        """sup |2U1 - q1 U2 - l1| on [a, b] and sup |2 q1 U2 - U1 - l2| on supp nu2."""
        q1 = float(self.q1)
        s = np.cos(np.pi * (np.arange(npts) + 0.5) / npts)
        x1 = self.nu1.mid + self.nu1.half * s
        x2 = self.nu2.mid + self.nu2.half * s
        r1 = 2 * self.nu1.potential(x1) - q1 * self.nu2.potential(x1) - self.l1
        r2 = 2 * q1 * self.nu2.potential(x2) - self.nu1.potential(x2) - self.l2
        return float(np.max(np.abs(r1))), float(np.max(np.abs(r2)))

    def phase1(self, z):
        """2 g1 - q1 g2 + l1: equals +-2 pi i phi1 on (a, b) from above/below and vanishes at b."""
        q1 = float(self.q1)
        return 2 * self.g(1, z) - q1 * self.g(2, z) + self.l1

    def phase2(self, z):
        """2 q1 g2 - g1(reflected) + l2: equals +-2 pi i q1 phi2 on supp nu2 and vanishes at d."""
        q1 = float(self.q1)
        return 2 * q1 * self.g(2, z) - _reflected(self.nu1, z) + self.l2

    def lens_decay_check(self, offsets, npts=64, i=1):
        """min |exp(phase)| at x +- i*eps over the support; exceeds 1 when the lens lips decay."""
        meas = self.measure(i)
        s = np.cos(np.pi * (np.arange(npts) + 0.5) / npts)
        xs = meas.mid + meas.half * 0.98 * s
        worst = np.inf
        for eps in offsets:
            for sgn in (1, -1):
                z = xs + 1j * sgn * eps
                val = self.phase1(z) if i == 1 else self.phase2(z)
                mod = np.exp(val.real)
                worst = min(worst, float(np.min(mod)))
        return worst


def _reflected(meas: IntervalMeasure, z):
    """int log(t - z) d nu(t), principal log with cut [lo, +inf)."""
    z = np.asarray(z, dtype=complex)
    w = -z
    refl = IntervalMeasure(-meas.hi, -meas.lo, meas.coeffs * np.array([(-1) ** k for k in range(len(meas.coeffs))]))
    return refl.log_transform(w)


def _solve_fixed(a, b, c, d, q1, order):
    mat, rhs = _assemble(a, b, c, d, q1, order)
    sol = np.linalg.solve(mat, rhs)
    c1 = np.concatenate([[1.0], sol[:order]])
    c2 = np.concatenate([[1.0], sol[order:]])
    nu1 = IntervalMeasure(a, b, c1)
    nu2 = IntervalMeasure(c, d, c2)
    l1 = float(2 * nu1.potential(np.array([nu1.mid]))[0] - q1 * nu2.potential(np.array([nu1.mid]))[0])
    l2 = float(2 * q1 * nu2.potential(np.array([nu2.mid]))[0] - nu1.potential(np.array([nu2.mid]))[0])
    return nu1, nu2, l1, l2


def solve_equilibrium(a, b, c, d, q1, order: int = 48, cstar_tol: float = 1e-12) -> EquilibriumSolution:
    """Equilibrium pair (nu1, nu2) and constants (l1, l2) for c < d < a < b, 0 < q1 <= 1/2."""
    a, b, c, d = float(a), float(b), float(c), float(d)
    if not (c < d < a < b):
        raise ValueError("need c < d < a < b")
    q1 = Fraction(q1).limit_denominator(10**6) if not isinstance(q1, Fraction) else q1
    if not (0 < q1 <= Fraction(1, 2)):
        raise ValueError(f"q1 must lie in (0, 1/2], got {q1}")
    qf = float(q1)
    nu1, nu2, l1, l2 = _solve_fixed(a, b, c, d, qf, order)
    if nu2.smooth_part(np.array([c]))[0] >= 0:
        return EquilibriumSolution(q1, nu1, nu2, l1, l2, True, order)
    # soft edge: shrink the support until the edge coefficient vanishes
    lo, hi = c, d - 1e-9 * (d - c)
    f_lo = _edge_value(a, b, lo, d, qf, order)
    f_hi = _edge_value(a, b, hi, d, qf, order)
    if f_lo * f_hi > 0:
        raise EquilibriumError("could not bracket the soft edge c*")
    while hi - lo > cstar_tol * (d - c):
        mid = 0.5 * (lo + hi)
        f_mid = _edge_value(a, b, mid, d, qf, order)
        if f_mid * f_lo > 0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    cstar = 0.5 * (lo + hi)
    nu1, nu2, l1, l2 = _solve_fixed(a, b, cstar, d, qf, order)
    return EquilibriumSolution(q1, nu1, nu2, l1, l2, False, order)


def _edge_value(a, b, lo, d, q1, order):
    _, nu2, _, _ = _solve_fixed(a, b, lo, d, q1, order)
    return nu2.smooth_part(np.array([lo]))[0]
