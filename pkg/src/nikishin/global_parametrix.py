"""Outer (global) parametrix built from the uniformizing map and the Szego triple."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surface import BranchCutError, SurfaceMap
from .szego import SzegoTriple


def _pair_root(y, lo, hi):
    """(y - mid) sqrt(1 - half^2/(y - mid)^2): sqrt((y-lo)(y-hi)) cut on [lo, hi], ~ y at infinity."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    s = y - mid
    with np.errstate(all="ignore"):
        out = s * np.sqrt(1 - (half / s) ** 2)
    return np.where(s == 0, 1j * half, out)


def _bounded_root(y, lo, hi):
    """sqrt(y - lo) sqrt(hi - y): analytic off (-inf, lo] and [hi, inf)."""
    return np.sqrt(y - lo + 0j) * np.sqrt(hi - y + 0j)


def _unit_phase(z: complex) -> complex:
    """Nearest of 1, i, -1, -i."""
    cands = (1, 1j, -1, -1j)
    return min(cands, key=lambda c: abs(z / abs(z) - c))


@dataclass
class GlobalParametrix:
    smap: SurfaceMap
    szego: SzegoTriple
    phase_sheet0: complex
    phase_sheet2: complex
    r1: complex
    r3: complex

    @property
    def _crit(self):
        f = self.smap.fl
        return f["beta_h"], f["alpha_h"], f["a_h"], f["b_h"]

    def r(self, y, sheet):
        """sqrt((y-beta)(y-alpha)(y-a)(y-b)) with cuts on the two arcs where it changes sign.

        ``sheet`` tells which region y belongs to (0: around 1, 1: outer, 2: around -1).
        """
        y = np.asarray(y, dtype=complex)
        sheet = np.broadcast_to(np.asarray(sheet), y.shape)
        be, al, ah, bh = self._crit
        outer = _pair_root(y, ah, bh) * _pair_root(y, be, al)
        inner0 = self.phase_sheet0 * _bounded_root(y, ah, bh) * _pair_root(y, be, al)
        inner2 = self.phase_sheet2 * _bounded_root(y, be, al) * _pair_root(y, ah, bh)
        return np.where(sheet == 0, inner0, np.where(sheet == 2, inner2, outer))

    def scalar_functions(self, y, sheet):
        """(N_1, N_2, N_3) at uniformizing-plane points y on the given sheet."""
        rv = self.r(y, sheet)
        return self.r1 * (y + 1) / rv, (y * y - 1) / rv, self.r3 * (y - 1) / rv

    def N0(self, z, side=None):
        """Stack of 3x3 matrices N_0(z) for original-coordinate points z."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        ys = self.smap.psi(self.smap.to_normalized(z), side=side)
        out = np.empty(z.shape + (3, 3), dtype=complex)
        for j in range(3):
            n1, n2, n3 = self.scalar_functions(ys[:, j], j)
            out[:, 0, j] = n1
            out[:, 1, j] = n2
            out[:, 2, j] = n3
        return out

    def N(self, z, side=None):
        """N(z) = diag(D(inf)) N_0(z) diag(D(z))^{-1}."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        n0 = self.N0(z, side=side)
        dz = self.szego.all_D(z, side=side)
        dinf = np.asarray(self.szego.at_infinity)
        return dinf[None, :, None] * n0 / dz[:, None, :]

    def jump_N0(self, interval: str):
        if interval == "ab":
            return np.array([[0, 1, 0], [-1, 0, 0], [0, 0, 1]], dtype=complex)
        if interval == "cd":
            return np.array([[1, 0, 0], [0, 0, 1], [0, -1, 0]], dtype=complex)
        raise ValueError("interval must be 'ab' or 'cd'")

    def jump_N(self, x, interval: str):
        """Jump of N across the interval: diag(D_-) J diag(D_+)^{-1}, in terms of the weights."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros(x.shape + (3, 3), dtype=complex)
        if interval == "ab":
            v = self.szego.v1.weight(x + 0j)
            out[:, 0, 1] = 1 / v
            out[:, 1, 0] = -v
            out[:, 2, 2] = 1
        elif interval == "cd":
            v = self.szego.v2.weight(x + 0j)
            out[:, 0, 0] = 1
            out[:, 1, 2] = 1 / v
            out[:, 2, 1] = -v
        else:
            raise ValueError("interval must be 'ab' or 'cd'")
        return out

    def jump_residual(self, x, interval: str, which: str = "N0") -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if which == "N0":
            plus, minus = self.N0(x + 0j, side=1), self.N0(x + 0j, side=-1)
            jump = np.broadcast_to(self.jump_N0(interval), plus.shape)
        else:
            plus, minus = self.N(x + 0j, side=1), self.N(x + 0j, side=-1)
            jump = self.jump_N(x, interval)
        res = np.abs(plus - minus @ jump).max(axis=(1, 2)) / np.abs(plus).max(axis=(1, 2))
        return float(res.max())


def build_global_parametrix(smap: SurfaceMap, szego: SzegoTriple, probe: float = 1e-3) -> GlobalParametrix:
    be, al, ah, bh = (smap.fl[k] for k in ("beta_h", "alpha_h", "a_h", "b_h"))
    # continue the outer branch across the arcs where r has no jump
    y0 = np.array([1 + 1j * probe])
    outer0 = _pair_root(y0, ah, bh) * _pair_root(y0, be, al)
    ph0 = _unit_phase(complex((outer0 / (_bounded_root(y0, ah, bh) * _pair_root(y0, be, al)))[0]))
    y2 = np.array([-1 - 1j * probe])
    outer2 = _pair_root(y2, ah, bh) * _pair_root(y2, be, al)
    ph2 = _unit_phase(complex((outer2 / (_bounded_root(y2, be, al) * _pair_root(y2, ah, bh)))[0]))
    gp = GlobalParametrix(smap, szego, ph0, ph2, 1.0, 1.0)
    gp.r1 = complex(gp.r(np.array([1.0 + 0j]), 0)[0]) / 2
    gp.r3 = -complex(gp.r(np.array([-1.0 + 0j]), 2)[0]) / 2
    return gp


def det3(mats):
    """Cofactor determinants of a stack of 3x3 matrices."""
    m = mats
    return (
        m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
        - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
        + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
    )


__all__ = ["GlobalParametrix", "build_global_parametrix", "det3", "BranchCutError"]
