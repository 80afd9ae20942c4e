"""Genus-zero three-sheeted surface over two intervals and its rational uniformization.

Geometry is first normalized to [a, b] -> [1, lam], [c, d] -> [-mu, -1].  The
map y -> x is the degree-three rational function

    H(y) = (h + y + A y / (1 - y) + B y / (1 + y)) / kappa

whose four critical points beta_h < -1 < alpha_h < a_h < 1 < b_h have
critical values -mu, -1, 1, lam.  The inverse branches psi_0, psi_1, psi_2
(the roots of a cubic) are labelled by continuation from x = infinity, where
they tend to 1, infinity and -1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .precision import DEFAULT_BITS


class CriticalPointError(RuntimeError):
    pass


class BranchPointError(ValueError):
    pass


class BranchCutError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Affine normalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Affine:
    """x -> scale * x + shift."""

    scale: object
    shift: object

    def __call__(self, x):
        return self.scale * x + self.shift

    def inverse(self, t):
        return (t - self.shift) / self.scale


def normalize_geometry(a, b, c, d, bits: int = DEFAULT_BITS):
    """Affine map sending d -> -1 and a -> 1, with the resulting lam = T(b), mu = -T(c)."""
    with mpmath.workprec(bits):
        a, b, c, d = (mpmath.mpf(v) for v in (a, b, c, d))
        if not (c < d < a < b):
            raise ValueError("need c < d < a < b")
        scale = 2 / (a - d)
        shift = 1 - scale * a
        aff = Affine(scale, shift)
        return aff, aff(b), -aff(c)


# ---------------------------------------------------------------------------
# Critical points
# ---------------------------------------------------------------------------


def _system(lam, mu, ah, al):
    p = ah * al
    s = ah + al
    dlt = ah - al
    e1 = (mu - lam) * dlt**3 - 2 * s * ((9 - p) * (1 - p) - dlt**2)
    e2 = (mu + lam) ** 2 * dlt**6 - 4 * (3 + p) ** 2 * (1 - p) * ((s**2 + 12) * (1 - p) - 4 * dlt**2)
    return e1, e2


def _outer_pair(ah, al):
    """beta_h < b_h: roots of y^2 + (a_h + alpha_h) y + (a_h - alpha_h)^2/(1 - a_h alpha_h) - 3."""
    s = ah + al
    q = (ah - al) ** 2 / (1 - ah * al) - 3
    disc = s * s - 4 * q
    if disc <= 0:
        return None
    root = mpmath.sqrt(disc)
    return (-s - root) / 2, (-s + root) / 2


def _damped_newton(lam, mu, ah, al, bits, maxit=200):
    tol = mpmath.mpf(2) ** (-bits + 8)
    step_h = mpmath.mpf(2) ** (-bits // 2)
    for _ in range(maxit):
        f1, f2 = _system(lam, mu, ah, al)
        g1a, g2a = _system(lam, mu, ah + step_h, al)
        g1b, g2b = _system(lam, mu, ah - step_h, al)
        h1a, h2a = _system(lam, mu, ah, al + step_h)
        h1b, h2b = _system(lam, mu, ah, al - step_h)
        j11 = (g1a - g1b) / (2 * step_h)
        j21 = (g2a - g2b) / (2 * step_h)
        j12 = (h1a - h1b) / (2 * step_h)
        j22 = (h2a - h2b) / (2 * step_h)
        det = j11 * j22 - j12 * j21
        if det == 0:
            return None
        da = (f1 * j22 - f2 * j12) / det
        db = (j11 * f2 - j21 * f1) / det
        norm0 = abs(f1) + abs(f2)
        damp = mpmath.mpf(1)
        while damp > mpmath.mpf(2) ** -30:
            na, nb = ah - damp * da, al - damp * db
            if abs(na * nb) < 1:
                n1, n2 = _system(lam, mu, na, nb)
                if abs(n1) + abs(n2) < norm0 or damp < mpmath.mpf(2) ** -20:
                    break
            damp /= 2
        ah, al = ah - damp * da, al - damp * db
        if abs(da) + abs(db) < tol * (1 + abs(ah) + abs(al)):
            return ah, al
    return None


@dataclass(frozen=True)
class CriticalData:
    beta_h: object
    alpha_h: object
    a_h: object
    b_h: object
    A: object
    B: object
    h: object
    kappa: object
    residuals: tuple


def _raw_H(y, A, B, h):
    return h + y + A * y / (1 - y) + B * y / (1 + y)


def solve_critical_points(lam, mu, bits: int = DEFAULT_BITS) -> CriticalData:
    """Critical points of the uniformizing map for [1, lam] and [-mu, -1]."""
    with mpmath.workprec(bits + 32):
        lam = mpmath.mpf(lam)
        mu = mpmath.mpf(mu)
        if lam <= 1 or mu <= 1:
            raise ValueError("need lam > 1 and mu > 1")
        found = []
        for al0, ah0 in itertools.product(("-0.9", "-0.5", "-0.1"), ("0.1", "0.5", "0.9")):
            res = _damped_newton(lam, mu, mpmath.mpf(ah0), mpmath.mpf(al0), bits + 32)
            if res is None:
                continue
            ah, al = res
            if not (-1 < al < ah < 1):
                continue
            pair = _outer_pair(ah, al)
            if pair is None:
                continue
            bh, bb = pair
            if not (bh < -1 and bb > 1):
                continue
            found.append((ah, al, bh, bb))
        if not found:
            raise CriticalPointError("no ordered critical configuration found from the start grid")
        ah, al, bh, bb = found[0]
        for other in found[1:]:
            if abs(other[0] - ah) + abs(other[1] - al) > mpmath.mpf(10) ** (-0.2 * bits):
                raise CriticalPointError("distinct ordered solutions found; uniqueness violated")
        A = (1 - bh) * (1 - al) * (1 - ah) * (1 - bb) / 4
        B = (1 + bh) * (1 + al) * (1 + ah) * (1 + bb) / 4
        h = (ah + al) * (2 * ah * al - (ah - al) ** 2 / (1 - ah * al)) / 4
        kappa = _raw_H(ah, A, B, h)
        e1, e2 = _system(lam, mu, ah, al)
    with mpmath.workprec(bits):
        return CriticalData(+bh, +al, +ah, +bb, +A, +B, +h, +kappa, (float(abs(e1)), float(abs(e2))))


# ---------------------------------------------------------------------------
# The surface map
# ---------------------------------------------------------------------------

_PERMS = list(itertools.permutations(range(3)))


@dataclass(frozen=True)
class SurfaceMap:
    affine: Affine
    lam: object
    mu: object
    crit: CriticalData
    bits: int
    fl: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        c = self.crit
        self.fl.update(
            lam=float(self.lam), mu=float(self.mu), A=float(c.A), B=float(c.B), h=float(c.h),
            kappa=float(c.kappa), beta_h=float(c.beta_h), alpha_h=float(c.alpha_h),
            a_h=float(c.a_h), b_h=float(c.b_h), scale=float(self.affine.scale), shift=float(self.affine.shift),
        )

    # -- rational map ------------------------------------------------------
    def H(self, y):
        """Normalized map (mp or numpy input)."""
        if isinstance(y, (mpmath.mpf, mpmath.mpc)):
            with mpmath.workprec(self.bits):
                if y == 1 or y == -1:
                    raise ValueError("H has poles at y = +-1")
                c = self.crit
                return _raw_H(y, c.A, c.B, c.h) / c.kappa
        f = self.fl
        y = np.asarray(y, dtype=complex)
        return (f["h"] + y + f["A"] * y / (1 - y) + f["B"] * y / (1 + y)) / f["kappa"]

    def dH(self, y):
        if isinstance(y, (mpmath.mpf, mpmath.mpc)):
            c = self.crit
            with mpmath.workprec(self.bits):
                return (1 + c.A / (1 - y) ** 2 + c.B / (1 + y) ** 2) / c.kappa
        f = self.fl
        y = np.asarray(y, dtype=complex)
        return (1 + f["A"] / (1 - y) ** 2 + f["B"] / (1 + y) ** 2) / f["kappa"]

    def d2H(self, y):
        f = self.fl
        y = np.asarray(y, dtype=complex)
        return (2 * f["A"] / (1 - y) ** 3 - 2 * f["B"] / (1 + y) ** 3) / f["kappa"]

    def critical_points(self):
        c = self.crit
        return (c.beta_h, c.alpha_h, c.a_h, c.b_h)

    def critical_values(self):
        with mpmath.workprec(self.bits):
            return tuple(self.H(mpmath.mpf(y)) for y in self.critical_points())

    def cubic(self, x):
        """Coefficients (leading first) of the cubic whose roots are psi_j(x)."""
        f = self.fl
        kx = f["kappa"] * np.asarray(x, dtype=complex)
        one = np.ones_like(kx)
        return np.stack([one, -(kx + f["A"] - f["B"] - f["h"]), -(1 + f["A"] + f["B"]) * one, kx - f["h"]], axis=-1)

    # -- original <-> normalized coordinates ------------------------------
    def to_normalized(self, x):
        return self.fl["scale"] * np.asarray(x) + self.fl["shift"]

    def to_original(self, t):
        return (np.asarray(t) - self.fl["shift"]) / self.fl["scale"]

    # -- branches ----------------------------------------------------------
    def on_cut(self, t):
        t = np.asarray(t, dtype=complex)
        f = self.fl
        real = t.imag == 0
        return real & (((t.real >= 1) & (t.real <= f["lam"])) | ((t.real >= -f["mu"]) & (t.real <= -1)))

    def psi(self, t, side=None):
        """(psi_0, psi_1, psi_2) at normalized points t; last axis indexes the sheet.

        ``side`` = +1/-1 selects upper/lower boundary values for t on a cut.
        """
        t = np.atleast_1d(np.asarray(t, dtype=complex))
        cut = self.on_cut(t)
        if cut.any() and side is None:
            raise BranchCutError("point on a cut; pass side=+1 or side=-1")
        crit_vals = np.array([-self.fl["mu"], -1.0, 1.0, self.fl["lam"]])
        if np.any(np.min(np.abs(t[..., None] - crit_vals), axis=-1) == 0):
            raise BranchPointError("psi branches collide at a branch point")
        sgn = np.where(t.imag > 0, 1.0, np.where(t.imag < 0, -1.0, 1.0 if side is None else float(side)))
        return _track(self, t, sgn)

    def psi_mp(self, t, sheet: int, side=None, bits: int | None = None):
        """Single branch value polished to ``bits`` by Newton on the cubic."""
        bits = bits or self.bits
        with mpmath.workprec(bits + 16):
            t = mpmath.mpmathify(t)
            guess = self.psi(np.array([complex(t)]), side=side)[0, sheet]
            return self._polish(t, mpmath.mpc(guess), bits)

    def psi_mp_many(self, ts, side=None, bits: int | None = None):
        """All three branches at many points: one tracking pass in double, then Newton per value."""
        bits = bits or self.bits
        guesses = self.psi(np.array([complex(t) for t in ts]), side=side)
        with mpmath.workprec(bits + 16):
            return [tuple(self._polish(mpmath.mpmathify(t), mpmath.mpc(g), bits) for g in row)
                    for t, row in zip(ts, guesses)]

    def _polish(self, t, y, bits):
        c = self.crit
        with mpmath.workprec(bits + 16):
            kx = c.kappa * t
            coeffs = [kx - c.h, -(1 + c.A + c.B), -(kx + c.A - c.B - c.h), mpmath.mpf(1)]
            tol = mpmath.mpf(2) ** (-bits)
            for _ in range(100):
                v = ((coeffs[3] * y + coeffs[2]) * y + coeffs[1]) * y + coeffs[0]
                dv = (3 * coeffs[3] * y + 2 * coeffs[2]) * y + coeffs[1]
                step = v / dv
                y -= step
                if abs(step) <= tol * max(1, abs(y)):
                    break
        with mpmath.workprec(bits):
            return +y


def _cubic_roots(coeffs):
    """Roots of many monic cubics (leading-first coefficients) via companion eigenvalues."""
    n = coeffs.shape[0]
    comp = np.zeros((n, 3, 3), dtype=complex)
    comp[:, 0, :] = -coeffs[:, 1:]
    comp[:, 1, 0] = 1
    comp[:, 2, 1] = 1
    roots = np.linalg.eigvals(comp)
    for _ in range(3):
        p = ((roots + coeffs[:, 1:2]) * roots + coeffs[:, 2:3]) * roots + coeffs[:, 3:4]
        dp = (3 * roots + 2 * coeffs[:, 1:2]) * roots + coeffs[:, 2:3]
        ok = dp != 0
        roots = np.where(ok, roots - p / np.where(ok, dp, 1), roots)
    return roots


def _match(prev, new):
    """Reorder ``new`` to follow ``prev``; returns reordered roots and a reliability flag."""
    dist = np.abs(prev[:, :, None] - prev[:, None, :])
    dist[:, [0, 1, 2], [0, 1, 2]] = np.inf
    scale = dist.min(axis=2)
    costs = np.stack([(np.abs(new[:, list(p)] - prev) / scale).max(axis=1) for p in _PERMS], axis=1)
    best = np.argmin(costs, axis=1)
    out = np.take_along_axis(new, np.array(_PERMS)[best], axis=1)
    # each root must move by less than a third of its distance to the nearest other root
    return out, costs[np.arange(len(best)), best] < 1 / 3


def _track(smap: SurfaceMap, t, sgn, base_steps: int = 170):
    shape = t.shape
    t = t.reshape(-1)
    sgn = np.broadcast_to(sgn, shape).reshape(-1)
    big = 1e4 * (1 + np.abs(t))
    imag_end = t.imag
    start = t.real + 1j * (imag_end + sgn * big)
    roots = _cubic_roots(smap.cubic(start))
    labels = np.empty_like(roots)
    near_one = np.argmin(np.abs(roots - 1), axis=1)
    near_mone = np.argmin(np.abs(roots + 1), axis=1)
    idx = np.arange(len(t))
    rest = 3 - near_one - near_mone
    labels[:, 0] = roots[idx, near_one]
    labels[:, 2] = roots[idx, near_mone]
    labels[:, 1] = roots[idx, rest]
    # geometric approach: offset = big * q^k, then the final point
    fracs = np.concatenate([np.geomspace(1.0, 1e-12, base_steps), [0.0]])
    prev_frac = 1.0
    for frac in fracs[1:]:
        labels = _advance(smap, t, sgn, big, labels, prev_frac, frac, depth=0)
        prev_frac = frac
    return labels.reshape(shape + (3,))


def _advance(smap, t, sgn, big, labels, f0, f1, depth):
    pts = t.real + 1j * (t.imag + sgn * big * f1)
    new = _cubic_roots(smap.cubic(pts))
    out, ok = _match(labels, new)
    if ok.all() or depth > 20:
        return out
    bad = ~ok
    mid = 0.5 * (f0 + f1)
    sub = (t[bad], sgn[bad], big[bad])
    half = _advance(smap, *sub, labels[bad], f0, mid, depth + 1)
    out[bad] = _advance(smap, *sub, half, mid, f1, depth + 1)
    return out


def build_surface(a, b, c, d, bits: int = DEFAULT_BITS) -> SurfaceMap:
    aff, lam, mu = normalize_geometry(a, b, c, d, bits)
    crit = solve_critical_points(lam, mu, bits)
    smap = SurfaceMap(aff, lam, mu, crit, bits)
    vals = smap.critical_values()
    target = (-mu, mpmath.mpf(-1), mpmath.mpf(1), lam)
    with mpmath.workprec(bits):
        err = max(abs(v - w) for v, w in zip(vals, target))
    if err > mpmath.mpf(10) ** (-0.2 * bits):
        raise CriticalPointError(f"critical values miss the branch points by {mpmath.nstr(err, 5)}")
    return smap


# ---------------------------------------------------------------------------
# Contours
# ---------------------------------------------------------------------------


def tanh_sinh_theta(level: int = 6, cutoff: float = 1e-20):
    """Nodes theta in (0, pi) and weights for int_0^pi f(theta) d theta (double exponential rule).

    Also returns theta and pi - theta computed without cancellation.
    """
    h = 2.0 ** (-level)
    ks = np.arange(-int(4 / h), int(4 / h) + 1)
    u = ks * h
    e = np.exp(np.pi * np.sinh(u))
    # s = (1 + tanh(pi/2 sinh u)) / 2 = e / (1 + e);  1 - s = 1 / (1 + e)
    s_lo = e / (1 + e)
    s_hi = 1 / (1 + e)
    w = h * np.pi * np.cosh(u) * e / (1 + e) ** 2
    keep = (w > cutoff) & (s_lo > 0) & (s_hi > 0)
    theta = np.pi * s_lo[keep]
    theta_c = np.pi * s_hi[keep]
    return theta, theta_c, np.pi * w[keep]


@dataclass(frozen=True)
class ArcData:
    """Discretized image arc y(theta) of a real interval under a fixed branch."""

    name: str
    t: np.ndarray  # normalized real parameter
    t_minus_lo: np.ndarray
    hi_minus_t: np.ndarray
    y: np.ndarray
    dy: np.ndarray  # dy/dtheta times quadrature weight


def _arc(smap: SurfaceMap, lo, hi, sheet, side, crit_lo, crit_hi, level, name):
    theta, theta_c, w = tanh_sinh_theta(level)
    span = hi - lo
    t_lo = span * np.sin(theta / 2) ** 2
    t_hi = span * np.sin(theta_c / 2) ** 2
    t = np.where(t_lo < t_hi, lo + t_lo, hi - t_hi)
    interior = (t_lo > 1e-6 * span) & (t_hi > 1e-6 * span)
    y = np.empty(len(t), dtype=complex)
    y[interior] = smap.psi(t[interior] + 0j, side=side)[:, sheet]
    # near the branch points use the square-root expansion and polish in extended precision
    ref = smap.psi(np.array([lo + 1e-3 * span, hi - 1e-3 * span]) + 0j, side=side)[:, sheet]
    with mpmath.workprec(smap.bits):
        for i in np.nonzero(~interior)[0]:
            near_lo = t_lo[i] <= t_hi[i]
            yc = crit_lo if near_lo else crit_hi
            dt = mpmath.mpf(t_lo[i]) if near_lo else -mpmath.mpf(t_hi[i])
            d2 = (2 * smap.crit.A / (1 - yc) ** 3 - 2 * smap.crit.B / (1 + yc) ** 3) / smap.crit.kappa
            root = mpmath.sqrt(2 * dt / d2)
            anchor = ref[0] if near_lo else ref[1]
            guess = yc + root if abs(complex(yc + root) - anchor) < abs(complex(yc - root) - anchor) else yc - root
            tv = (mpmath.mpf(lo) + dt) if near_lo else (mpmath.mpf(hi) + dt)
            y[i] = complex(smap._polish(tv, mpmath.mpc(guess), 80))
    dtheta = 0.5 * span * np.where(theta < theta_c, np.sin(theta), np.sin(theta_c))
    dy = w * dtheta / smap.dH(y)
    return ArcData(name, t, t_lo, t_hi, y, dy)


@dataclass(frozen=True)
class Contours:
    gamma1_plus: ArcData
    gamma1_minus: ArcData
    gamma2_plus: ArcData
    gamma2_minus: ArcData


def build_contours(smap: SurfaceMap, level: int = 6) -> Contours:
    """Arcs psi_{0,+-}([1, lam]) and psi_{1,+-}([-mu, -1]), each running with increasing t."""
    c = smap.crit
    lam, mu = smap.fl["lam"], smap.fl["mu"]
    g1p = _arc(smap, 1.0, lam, 0, +1, c.a_h, c.b_h, level, "gamma1+")
    g1m = _arc(smap, 1.0, lam, 0, -1, c.a_h, c.b_h, level, "gamma1-")
    g2p = _arc(smap, -mu, -1.0, 1, +1, c.beta_h, c.alpha_h, level, "gamma2+")
    g2m = _arc(smap, -mu, -1.0, 1, -1, c.beta_h, c.alpha_h, level, "gamma2-")
    return Contours(g1p, g1m, g2p, g2m)
