"""Leading-order strong asymptotics for the type I pair (A, B), the linear form A + w B and the type II polynomial P.

Exponential factors are assembled as logarithms and exponentiated with
mpmath so that large indices do not overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .equilibrium import EquilibriumSolution
from .global_parametrix import GlobalParametrix
from .system import MultiIndex, NikishinSystem, markov_w

OFF_CUT = "off-cut"
ON_AB = "on-(a,b)"
ON_CD = "on-(c,d)"


class IndexRayError(ValueError):
    pass


class RegionError(ValueError):
    pass


@dataclass(frozen=True)
class Prediction:
    value: object  # mpmath number
    region: str
    error_order: str = "1/n"


@dataclass(frozen=True)
class OnIntervalSamples:
    """Real predictions amplitude * cos(phase) * exp(log_scale) at the points x."""

    x: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    log_scale: np.ndarray
    region: str

    @property
    def oscillation(self):
        """amplitude * cos(phase): same sign as the prediction, free of overflow."""
        return self.amplitude * np.cos(self.phase)

    def value(self, i: int):
        return mpmath.mpf(float(self.oscillation[i])) * mpmath.exp(float(self.log_scale[i]))


@dataclass
class AsymptoticModel:
    """Bundle of index-independent objects along one ray m/(n+m) = q1."""

    sys: NikishinSystem
    eq: EquilibriumSolution
    gp: GlobalParametrix
    min_distance: float = 1e-3

    def __post_init__(self):
        f = self.sys.floats()
        self._ends = (f["a"], f["b"], f["c"], f["d"])

    # -- helpers --------------------------------------------------------------
    def _check_index(self, n, m):
        idx = MultiIndex(n, m)
        if idx.q1 != Fraction(self.eq.q1):
            raise IndexRayError(f"m/(n+m) = {idx.q1} differs from the equilibrium ray q1 = {self.eq.q1}")
        return idx

    def _check_off(self, z, allow_cd: bool = False):
        a, b, c, d = self._ends
        if abs(z.imag) < self.min_distance:
            if a - self.min_distance <= z.real <= b + self.min_distance:
                raise RegionError("z too close to [a, b]")
            if not allow_cd and c - self.min_distance <= z.real <= d + self.min_distance:
                raise RegionError("z too close to [c, d]")

    def _check_interior(self, x, lo, hi):
        if not (lo < x < hi):
            raise RegionError(f"x = {x} not interior to ({lo}, {hi})")

    def _parts(self, z, side=None):
        zz = np.array([complex(z)])
        ys = self.gp.smap.psi(self.gp.smap.to_normalized(zz), side=side)[0]
        n1 = [complex(self.gp.scalar_functions(np.array([ys[j]]), j)[0][0]) for j in range(3)]
        dz = self.gp.szego.all_D(zz, side=side)[0]
        return n1, dz

    def _g(self, i, z, side=0):
        return complex(np.asarray(self.eq.g(i, np.array([complex(z)]), side))[0])

    @staticmethod
    def _exp(logval):
        return mpmath.exp(mpmath.mpc(logval))

    # -- predictions off the cuts ----------------------------------------------------
    def linear_form_off(self, n, m, z):
        idx = self._check_index(n, m)
        z = complex(z)
        self._check_off(z, allow_cd=True)
        n1, dz = self._parts(z)
        d0inf = self.gp.szego.at_infinity[0]
        expo = idx.size * self._g(1, z) - m * self._g(2, z) + idx.size * self.eq.l1
        return Prediction(mpmath.mpc(n1[1] * d0inf / dz[1]) * self._exp(expo), OFF_CUT)

    def B_off(self, n, m, z):
        idx = self._check_index(n, m)
        z = complex(z)
        self._check_off(z)
        n1, dz = self._parts(z)
        d0inf = self.gp.szego.at_infinity[0]
        expo = m * self._g(2, z) + idx.size * (self.eq.l1 + self.eq.l2)
        return Prediction(mpmath.mpc(n1[2] * d0inf / dz[2]) * self._exp(expo), OFF_CUT)

    def typeI_off(self, n, m, z, bits: int = 128):
        """(A, B, A + w B) predicted at z off both intervals."""
        form = self.linear_form_off(n, m, z)
        bpred = self.B_off(n, m, z)
        w = markov_w(self.sys, mpmath.mpc(complex(z)), bits)
        apred = form.value - w * bpred.value
        return Prediction(apred, OFF_CUT), bpred, form

    def P_off(self, n, m, z):
        """Monic type II polynomial off [a, b]; only g1 and the Szego data enter."""
        idx = self._check_index(n, m)
        z = complex(z)
        a, b, _, _ = self._ends
        if abs(z.imag) < self.min_distance and a - self.min_distance <= z.real <= b + self.min_distance:
            raise RegionError("z too close to [a, b]")
        n1, dz = self._parts(z, side=1 if z.imag == 0 else None)
        d0inf = self.gp.szego.at_infinity[0]
        return Prediction(mpmath.mpc(dz[0] / d0inf * n1[0]) * self._exp(idx.size * self._g(1, z, 1)), OFF_CUT)

    def P_off_from_inverse(self, n, m, z):
        """Same prediction via the (1,1) entry of N^{-T}, without using N_0^{-T} = N_0."""
        idx = self._check_index(n, m)
        z = complex(z)
        n_mat = self.gp.N(np.array([z]), side=1 if z.imag == 0 else None)[0]
        entry = np.linalg.inv(n_mat).T[0, 0]
        return Prediction(mpmath.mpc(entry) * self._exp(idx.size * self._g(1, z, 1)), OFF_CUT)

    # -- on the intervals ------------------------------------------------------------
    # Each on-interval formula is twice the real part of the upper boundary value
    # of the off-cut prediction, written as amplitude * cos(phase) * exp(log_scale).

    def on_interval(self, kind: str, n, m, xs) -> OnIntervalSamples:
        """Vectorized on-interval prediction: "B" on (c, d), "form" or "P" on (a, b)."""
        idx = self._check_index(n, m)
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        a, b, c, d = self._ends
        if kind == "B":
            lo, hi, sheet, measure = max(c, self.eq.support2[0]), d, 2, 2
        elif kind in ("form", "P"):
            lo, hi, sheet, measure = a, b, (1 if kind == "form" else 0), 1
        else:
            raise ValueError(f"kind must be 'B', 'form' or 'P', got {kind!r}")
        for x in xs:
            self._check_interior(x, lo, hi)
        smap = self.gp.smap
        ys = smap.psi(smap.to_normalized(xs + 0j), side=1)[:, sheet]
        n1 = self.gp.scalar_functions(ys, sheet)[0]
        dplus = self.gp.szego.all_D(xs + 0j, side=1)[:, sheet]
        d0inf = self.gp.szego.at_infinity[0]
        phi = self.eq.phi(measure, xs)
        pot = self.eq.potential(measure, xs)
        if kind == "B":
            lead = n1 * d0inf
            phase = m * np.pi * phi - np.angle(dplus) + np.angle(lead)
            amp = 2 * np.abs(lead) / np.abs(dplus)
            log_scale = -m * pot + idx.size * (self.eq.l1 + self.eq.l2)
        elif kind == "form":
            lead = n1 * d0inf
            phase = idx.size * np.pi * phi - np.angle(dplus) + np.angle(lead)
            amp = 2 * np.abs(lead) / np.abs(dplus)
            log_scale = idx.size * pot
        else:
            lead = n1 / d0inf
            phase = idx.size * np.pi * phi + np.angle(dplus) + np.angle(lead)
            amp = 2 * np.abs(lead) * np.abs(dplus)
            log_scale = -idx.size * pot
        region = ON_CD if kind == "B" else ON_AB
        return OnIntervalSamples(xs, amp, phase, np.asarray(log_scale, dtype=float), region)

    def _on_scalar(self, kind, n, m, x):
        smp = self.on_interval(kind, n, m, [x])
        return Prediction(smp.value(0), smp.region)

    def B_on_cd(self, n, m, x):
        """B on (c, d)."""
        return self._on_scalar("B", n, m, x)

    def linear_form_on_ab(self, n, m, x):
        """A + w B on (a, b)."""
        return self._on_scalar("form", n, m, x)

    def P_on_ab(self, n, m, x):
        """Monic P on (a, b)."""
        return self._on_scalar("P", n, m, x)

    # -- boundary-value sums (independent route for the on-interval forms) --------
    def boundary_sum(self, kind: str, n, m, x):
        """Sum of the upper and lower boundary values of the off-cut prediction ("B", "form" or "P")."""
        idx = self._check_index(n, m)
        x = float(x)
        total = mpmath.mpc(0)
        d0inf = self.gp.szego.at_infinity[0]
        for side in (1, -1):
            n1, dz = self._parts(x + 0j, side=side)
            if kind == "B":
                expo = m * self._g(2, x, side) + idx.size * (self.eq.l1 + self.eq.l2)
                total += mpmath.mpc(n1[2] * d0inf / dz[2]) * self._exp(expo)
            elif kind == "form":
                expo = idx.size * self._g(1, x, side) - m * self._g(2, x, side) + idx.size * self.eq.l1
                total += mpmath.mpc(n1[1] * d0inf / dz[1]) * self._exp(expo)
            elif kind == "P":
                total += mpmath.mpc(dz[0] / d0inf * n1[0]) * self._exp(idx.size * self._g(1, x, side))
            else:
                raise ValueError(kind)
        return total
