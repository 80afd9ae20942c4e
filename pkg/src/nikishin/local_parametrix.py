"""Bessel model problem near a hard edge and the local parametrices built from it.

The model matrix lives in the zeta plane with jump rays at arg = 2pi/3,
arg = pi and arg = -2pi/3, all oriented toward the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .bessel import bessel_I, bessel_K, hankel1, hankel2

SECTOR_RIGHT = 0
SECTOR_UPPER = 1
SECTOR_LOWER = -1

MODEL_BITS = 96


class JumpContourError(ValueError):
    pass


class ModelSingularityError(ValueError):
    pass


def sector_of(zeta, side: int | None = None) -> int:
    """Sector index for zeta; ``side`` selects the +/- limit on a jump ray."""
    zeta = mpmath.mpc(zeta)
    if zeta == 0:
        raise ModelSingularityError("the model matrix is singular at zeta = 0")
    if zeta.imag == 0 and zeta.real < 0:
        if side is None:
            raise JumpContourError("zeta on the negative axis; pass side")
        return SECTOR_UPPER if side > 0 else SECTOR_LOWER
    theta = mpmath.arg(zeta)
    edge = 2 * mpmath.pi / 3
    tol = mpmath.ldexp(1, 16 - mpmath.mp.prec)
    if abs(abs(theta) - edge) < tol:
        if side is None:
            raise JumpContourError("zeta on a jump ray at arg = +-2pi/3; pass side")
        if theta > 0:
            return SECTOR_RIGHT if side > 0 else SECTOR_UPPER
        return SECTOR_LOWER if side > 0 else SECTOR_RIGHT
    if abs(theta) < edge:
        return SECTOR_RIGHT
    return SECTOR_UPPER if theta > 0 else SECTOR_LOWER


def _sqrt_zeta(zeta, sector):
    if zeta.imag == 0 and zeta.real < 0:
        root = mpmath.sqrt(-zeta.real)
        return 1j * root if sector == SECTOR_UPPER else -1j * root
    return mpmath.sqrt(zeta)


def psi_model(order, zeta, side: int | None = None, bits: int = MODEL_BITS):
    """The 2x2 Bessel model matrix as an mpmath matrix."""
    with mpmath.workprec(bits + 20):
        zeta = mpmath.mpc(zeta)
        order = mpmath.mpf(order)
        sector = sector_of(zeta, side)
        root = _sqrt_zeta(zeta, sector)
        if sector == SECTOR_RIGHT:
            arg = 2 * root
            iv = bessel_I(order, arg, bits=bits + 10)
            kv = bessel_K(order, arg, bits=bits + 10)
            return mpmath.matrix(
                [
                    [iv.value, 1j / mpmath.pi * kv.value],
                    [2j * mpmath.pi * root * iv.derivative, -2 * root * kv.derivative],
                ]
            )
        if zeta.imag == 0:
            outer = 2 * mpmath.sqrt(-zeta.real)
        else:
            outer = 2 * mpmath.sqrt(-zeta)
        h1 = hankel1(order, outer, bits=bits + 10)
        h2 = hankel2(order, outer, bits=bits + 10)
        phase = mpmath.exp(1j * order * mpmath.pi / 2)
        if sector == SECTOR_UPPER:
            return mpmath.matrix(
                [
                    [h1.value / 2 * phase, h2.value / 2 / phase],
                    [mpmath.pi * root * h1.derivative * phase, mpmath.pi * root * h2.derivative / phase],
                ]
            )
        return mpmath.matrix(
            [
                [h2.value / 2 / phase, -h1.value / 2 * phase],
                [-mpmath.pi * root * h2.derivative / phase, mpmath.pi * root * h1.derivative * phase],
            ]
        )


def psi_jump(order, ray: int):
    """Jump matrix on ray 1 (arg 2pi/3), 2 (negative axis) or 3 (arg -2pi/3)."""
    order = mpmath.mpf(order)
    if ray == 1:
        return mpmath.matrix([[1, 0], [mpmath.exp(1j * mpmath.pi * order), 1]])
    if ray == 2:
        return mpmath.matrix([[0, 1], [-1, 0]])
    if ray == 3:
        return mpmath.matrix([[1, 0], [mpmath.exp(-1j * mpmath.pi * order), 1]])
    raise ValueError("ray must be 1, 2 or 3")


def psi_outer_factor(zeta):
    """Leading large-zeta behaviour with the exponential factor removed."""
    zeta = mpmath.mpc(zeta)
    q = mpmath.power(zeta, mpmath.mpf(1) / 4)
    s2 = mpmath.sqrt(2 * mpmath.pi)
    left = mpmath.matrix([[1 / (s2 * q), 0], [0, s2 * q]])
    mid = mpmath.matrix([[1, 1j], [1j, 1]]) / mpmath.sqrt(2)
    return left * mid


def psi_matching_error(order, zeta, bits: int = MODEL_BITS) -> float:
    """Max-entry deviation of the normalized model matrix from its limit form."""
    with mpmath.workprec(bits + 20):
        zeta = mpmath.mpc(zeta)
        psi = psi_model(order, zeta, bits=bits)
        root = mpmath.sqrt(zeta)
        strip = mpmath.matrix([[mpmath.exp(-2 * root), 0], [0, mpmath.exp(2 * root)]])
        left = mpmath.matrix([[mpmath.sqrt(2 * mpmath.pi) * mpmath.power(zeta, 0.25), 0],
                              [0, 1 / (mpmath.sqrt(2 * mpmath.pi) * mpmath.power(zeta, 0.25))]])
        core = left * psi * strip
        target = mpmath.matrix([[1, 1j], [1j, 1]]) / mpmath.sqrt(2)
        return float(mpmath.mnorm(core - target, 1))


def det2(mat):
    """ad - bc; LU-based determinants lose everything when entries span e^{+-2|zeta|^{1/2}}."""
    return mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]


# ---------------------------------------------------------------------------
# Local parametrices at the hard edges b and d
# ---------------------------------------------------------------------------

_U = np.array([[1, 1j], [1j, 1]]) / math.sqrt(2)


class OutsideDiskError(ValueError):
    pass


@dataclass
class EdgeParametrix:
    """Bessel parametrix at the right endpoint of [a, b] (edge 'b') or of [c, d] (edge 'd').

    The conformal variable is zeta = s^2 with s = (n+m) * phase / 4, where phase
    is the conjugated exponent that vanishes at the edge.  Then exp(2 s) is
    the power of Phi carried by the parametrix.
    """

    edge: str
    n: int
    m: int
    center: float
    radius: float
    order: float
    lo: float
    p: float
    phase: object
    outer: object
    block: tuple
    bits: int = MODEL_BITS

    def _check(self, z):
        if np.any(np.abs(z - self.center) > self.radius * (1 + 1e-12)):
            raise OutsideDiskError(f"points outside the disk of radius {self.radius} around {self.center}")

    def s_variable(self, z):
        return (self.n + self.m) * self.phase(z) / 4

    def weight_root(self, z):
        """(2 pi i)^{1/2} (z - lo)^{p/2} (z - edge)^{order/2}, principal powers."""
        z = np.asarray(z, dtype=complex)
        return np.sqrt(2j * np.pi) * (z - self.lo) ** (self.p / 2) * (z - self.center) ** (self.order / 2)

    def inner(self, z, side=None):
        """2x2 core M(z) = B_n Psi^{-T}(zeta) diag(W, 1/W) diag(e^{2s}, e^{-2s}), computed in mp."""
        s = complex(self.s_variable(np.array([z]))[0])
        w = complex(self.weight_root(np.array([z]))[0])
        with mpmath.workprec(self.bits + 20):
            smp = mpmath.mpc(s)
            zeta = smp * smp
            psi = psi_model(self.order, zeta, side=side, bits=self.bits)
            det = det2(psi)
            inv_t = mpmath.matrix([[psi[1, 1], -psi[1, 0]], [-psi[0, 1], psi[0, 0]]]) / det
            quarter = mpmath.sqrt(smp)
            scale = mpmath.sqrt(2 * mpmath.pi) * quarter
            left = mpmath.matrix([[1 / scale, 0], [0, scale]])
            right = mpmath.matrix([[w * mpmath.exp(2 * smp), 0], [0, mpmath.exp(-2 * smp) / w]])
            core = left * inv_t * right
            out = np.array([[complex(core[i, j]) for j in range(2)] for i in range(2)])
        return np.diag([1 / w, w]) @ _U @ out

    def _embed(self, mat2):
        out = np.eye(3, dtype=complex)
        i, j = self.block
        out[np.ix_([i, j], [i, j])] = mat2
        return out

    def P(self, z, side=None):
        """P(z) = N(z) (M(z) embedded in the active 2x2 block)."""
        z = complex(z)
        self._check(np.array([z]))
        n_mat = self.outer.N(np.array([z]), side=side)[0]
        return n_mat @ self._embed(self.inner(z, side))

    def E(self, z, side=None):
        """Analytic prefactor E(z) = N(z) (B_n embedded)."""
        z = complex(z)
        s = complex(self.s_variable(np.array([z]))[0])
        w = complex(self.weight_root(np.array([z]))[0])
        scale = np.sqrt(2 * np.pi) * np.sqrt(s)
        bn = np.diag([1 / w, w]) @ _U @ np.diag([1 / scale, scale])
        return self.outer.N(np.array([z]), side=side)[0] @ self._embed(bn)

    def matching_error(self, npts: int = 32) -> float:
        """sup over the circle of ||P N^{-1} - I|| (max-entry norm)."""
        angles = 2 * np.pi * (np.arange(npts) + 0.5) / npts
        zs = self.center + self.radius * np.exp(1j * angles)
        worst = 0.0
        n_all = self.outer.N(zs)
        for z, n_mat in zip(zs, n_all):
            inner = self._embed(self.inner(complex(z)))
            diff = n_mat @ (inner - np.eye(3)) @ np.linalg.inv(n_mat)
            worst = max(worst, float(np.abs(diff).max()))
        return worst


def disk_radius(edge_value: float, others) -> float:
    return min(abs(edge_value - o) for o in others) / 5


def build_edge_parametrix(edge: str, n: int, m: int, sys, equilibrium, outer) -> EdgeParametrix:
    f = sys.floats()
    pts = (f["a"], f["b"], f["c"], f["d"])
    if edge == "b":
        center = f["b"]
        return EdgeParametrix("b", n, m, center, disk_radius(center, (f["a"], f["c"], f["d"])), f["beta"], f["a"],
                              f["alpha"], equilibrium.phase1, outer, (0, 1))
    if edge == "d":
        if equilibrium.support2[0] > f["c"]:
            raise ValueError("soft-edge geometry: the parametrix at d assumes full support on [c, d]")
        center = f["d"]
        return EdgeParametrix("d", n, m, center, disk_radius(center, (f["a"], f["b"], f["c"])), f["delta"], f["c"],
                              f["gamma"], equilibrium.phase2, outer, (1, 2))
    raise ValueError(f"edge must be 'b' or 'd', got {edge!r} ({pts})")


_RAY_TURNS = {1: (2, 3), 2: (1, 1), 3: (-2, 3)}


def psi_jump_residual(order, ray: int, radius, bits: int = MODEL_BITS, offset=1e-20) -> float:
    """Relative residual of Psi_+ = Psi_- J across a jump ray at distance ``radius`` from 0.

    Both limits are taken at points rotated off the ray by +-offset radians, so
    each side is evaluated with its own sector formula.
    """
    with mpmath.workprec(bits + 20):
        num, den = _RAY_TURNS[ray]
        theta = num * mpmath.pi / den
        delta = mpmath.mpf(offset)
        # the + side lies clockwise of a ray oriented toward the origin
        plus = psi_model(order, mpmath.mpf(radius) * mpmath.expj(theta - delta), bits=bits)
        minus = psi_model(order, mpmath.mpf(radius) * mpmath.expj(theta + delta), bits=bits)
        diff = plus - minus * psi_jump(order, ray)
        return float(mpmath.mnorm(diff, 1) / mpmath.mnorm(plus, 1))
