"""Szego functions D_0, D_1, D_2 for the weight pair (v1, v2) on the three-sheeted surface.

All three are restrictions of one function Dhat on the uniformizing plane,
D_j(z) = Dhat(psi_j(z)).  Dhat is C times the exponential of Cauchy integrals of
log v1 over the boundary of the region around y = 1 and log v2 over the
boundary of the region around y = -1.  Both closed boundaries are traversed
with their interior on the left.

Cauchy integrals are evaluated with a subtracted integrand,

    (1/2pi i) oint f(x)/(x-w) dx = (1/2pi i) oint (f(x)-f_w)/(x-w) dx + f_w * [w inside],

which stays accurate as w approaches the contour.  Which side a point lies
on is known from the sheet it came from, so one-sided values on the cuts fall
out of the same formula.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .surface import ArcData, Contours, SurfaceMap, build_contours
from .system import NikishinSystem

LOG_2PI_I = complex(math.log(2 * math.pi), math.pi / 2)


class EndpointError(ValueError):
    pass


@dataclass(frozen=True)
class LogWeight:
    """log(2 pi i (x-lo)^p (hi-x)^q h(x)) on an interval in original coordinates."""

    lo: float
    hi: float
    p: float
    q: float
    h: tuple

    def from_gaps(self, gap_lo, gap_hi, x):
        hx = np.polyval(list(reversed(self.h)), x)
        return LOG_2PI_I + self.p * np.log(gap_lo) + self.q * np.log(gap_hi) + np.log(hx + 0j)

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        return self.from_gaps(x - self.lo, self.hi - x, x)

    def weight(self, x):
        return np.exp(self(x))


def _weights(sys: NikishinSystem):
    f = sys.floats()
    v1 = LogWeight(f["a"], f["b"], f["alpha"], f["beta"], tuple(f["h1"]))
    v2 = LogWeight(f["c"], f["d"], f["gamma"], f["delta"], tuple(f["h2"]))
    return v1, v2


@dataclass
class _Closed:
    """Closed contour nodes, signed quadrature weights and log-weight samples."""

    y: np.ndarray
    dy: np.ndarray
    f: np.ndarray
    lw: LogWeight

    @classmethod
    def from_arcs(cls, first: ArcData, second: ArcData, lw: LogWeight, smap: SurfaceMap):
        # traverse ``first`` with increasing t, ``second`` backwards
        scale = smap.fl["scale"]
        parts_y, parts_dy, parts_f = [], [], []
        for arc, sign in ((first, 1.0), (second, -1.0)):
            x = smap.to_original(arc.t)
            parts_y.append(arc.y)
            parts_dy.append(sign * arc.dy)
            parts_f.append(lw.from_gaps(arc.t_minus_lo / scale, arc.hi_minus_t / scale, x))
        return cls(np.concatenate(parts_y), np.concatenate(parts_dy), np.concatenate(parts_f), lw)

    def cauchy(self, w, inside, f_w, near):
        """(1/2pi i) oint f/(x-w) dx for each w; ``inside`` flags the + side."""
        w = np.asarray(w, dtype=complex)
        c = np.where(near, f_w, 0.0)
        diff = self.y[None, :] - w[:, None]
        tiny = np.abs(diff) < 1e-13
        num = self.f[None, :] - c[:, None]
        terms = np.where(tiny, 0.0, num / np.where(tiny, 1.0, diff)) * self.dy[None, :]
        return terms.sum(axis=1) / (2j * math.pi) + np.where(inside, c, 0.0)

    def winding(self, w):
        w = np.asarray(w, dtype=complex)
        return (self.dy[None, :] / (self.y[None, :] - w[:, None])).sum(axis=1) / (2j * math.pi)


@dataclass
class SzegoTriple:
    smap: SurfaceMap
    contours: Contours
    v1: LogWeight
    v2: LogWeight
    around_one: _Closed
    around_minus_one: _Closed
    C: complex
    at_infinity: tuple
    near_radius: float

    # -- core ---------------------------------------------------------------
    def _f_continued(self, lw: LogWeight, y):
        x = self.smap.to_original(self.smap.H(y))
        with np.errstate(all="ignore"):
            return lw(x)

    def log_dhat(self, y, sheet):
        """log(Dhat(y)/C) for points y that belong to the closure of sheet ``sheet``."""
        y = np.atleast_1d(np.asarray(y, dtype=complex))
        sheet = np.broadcast_to(np.asarray(sheet), y.shape)
        out = np.zeros(y.shape, dtype=complex)
        for closed, sgn, own in ((self.around_minus_one, 1.0, 2), (self.around_one, -1.0, 0)):
            dist = np.abs(y[:, None] - closed.y[None, :]).min(axis=1)
            near = dist < self.near_radius
            f_w = np.zeros(y.shape, dtype=complex)
            if near.any():
                f_w[near] = self._f_continued(closed.lw, y[near])
                near &= np.isfinite(f_w)
                f_w[~near] = 0.0
            out += sgn * closed.cauchy(y, sheet == own, f_w, near)
        return out

    def dhat(self, y, sheet):
        return self.C * np.exp(self.log_dhat(y, sheet))

    # -- public evaluators -------------------------------------------------
    def D(self, j: int, z, side=None):
        """D_j at original-coordinate points z (``side`` for one-sided values on a cut)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        t = self.smap.to_normalized(z)
        y = self.smap.psi(t, side=side)[:, j]
        return self.dhat(y, np.full(z.shape, j))

    def all_D(self, z, side=None):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        t = self.smap.to_normalized(z)
        ys = self.smap.psi(t, side=side)
        return np.stack([self.dhat(ys[:, j], np.full(z.shape, j)) for j in range(3)], axis=1)

    def boundary(self, j: int, x, side: int):
        """One-sided value D_j(x + i0*side) for real x interior to (a, b) or (c, d)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        a, b, c, d = self.v1.lo, self.v1.hi, self.v2.lo, self.v2.hi
        for xv in x:
            for e in (a, b, c, d):
                if abs(xv - e) < 1e-12 * (1 + abs(e)):
                    raise EndpointError(f"x = {xv} is an endpoint")
        return self.D(j, x + 0j, side=side)


def build_szego(smap: SurfaceMap, sys: NikishinSystem, level: int = 6, contours: Contours | None = None) -> SzegoTriple:
    contours = contours or build_contours(smap, level)
    v1, v2 = _weights(sys)
    # interior on the left: lower arc left to right, then the upper arc back
    around_one = _Closed.from_arcs(contours.gamma1_plus, contours.gamma1_minus, v1, smap)
    around_minus_one = _Closed.from_arcs(contours.gamma2_minus, contours.gamma2_plus, v2, smap)
    spans = [np.ptp(c.y.real) + np.ptp(c.y.imag) for c in (around_one, around_minus_one)]
    trip = SzegoTriple(smap, contours, v1, v2, around_one, around_minus_one, 1.0 + 0j, (), 0.1 * min(spans))
    f = sys.floats()
    z_ref = np.array([f["b"] + (f["b"] - f["a"])], dtype=complex)
    total = sum(trip.log_dhat(trip.smap.psi(trip.smap.to_normalized(z_ref))[:, j], j)[0] for j in range(3))
    if abs(total.imag) > 1e-8 * (1 + abs(total)):
        raise ArithmeticError(f"uncorrected Szego product is not real positive (log = {total})")
    trip.C = cmath.exp(-total.real / 3)
    trip.at_infinity = (
        complex(trip.dhat(np.array([1.0 + 0j]), 0)[0]),
        trip.C,
        complex(trip.dhat(np.array([-1.0 + 0j]), 2)[0]),
    )
    return trip
