"""Two-measure Nikishin system on disjoint intervals [c, d] < [a, b].

mu1 has density (x-a)^alpha (b-x)^beta h1(x) on [a, b]; sigma has density
(t-c)^gamma (d-t)^delta h2(t) on [c, d]; mu2 = w mu1 with w the Markov
function of sigma.  Numbers are stored as decimal strings and converted at
whatever precision the caller works in.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import mpmath

from .precision import DEFAULT_BITS, InvalidWeightError, gauss_jacobi, polyval


class GeometryError(ValueError):
    pass


class BranchCutError(ValueError):
    pass


def _as_str(x) -> str:
    if isinstance(x, str):
        return x.strip()
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return repr(x)


def _mp(x):
    if isinstance(x, str) and "/" in x:
        num, den = x.split("/")
        return mpmath.mpf(num) / mpmath.mpf(den)
    return mpmath.mpf(x)


@dataclass(frozen=True)
class NikishinSystem:
    a: str = "1"
    b: str = "2"
    c: str = "-5"
    d: str = "-1"
    alpha: str = "-1/2"
    beta: str = "-1/2"
    gamma: str = "-1/2"
    delta: str = "-1/2"
    h1: tuple = ("1",)
    h2: tuple = ("1",)

    def __post_init__(self):
        for name in ("a", "b", "c", "d", "alpha", "beta", "gamma", "delta"):
            object.__setattr__(self, name, _as_str(getattr(self, name)))
        object.__setattr__(self, "h1", tuple(_as_str(v) for v in self.h1))
        object.__setattr__(self, "h2", tuple(_as_str(v) for v in self.h2))
        self.validate()

    def validate(self, grid: int = 257):
        with mpmath.workprec(DEFAULT_BITS):
            a, b, c, d = self.endpoints()
            if not (c < d < a < b):
                raise GeometryError(f"need c < d < a < b, got c={self.c}, d={self.d}, a={self.a}, b={self.b}")
            for name in ("alpha", "beta", "gamma", "delta"):
                if _mp(getattr(self, name)) <= -1:
                    raise InvalidWeightError(f"exponent {name}={getattr(self, name)} must exceed -1")
            for coeffs, lo, hi, label in ((self.h1, a, b, "h1"), (self.h2, c, d, "h2")):
                cs = [_mp(v) for v in coeffs]
                if not cs or all(v == 0 for v in cs):
                    raise InvalidWeightError(f"{label} is identically zero")
                for k in range(grid):
                    x = lo + (hi - lo) * k / (grid - 1)
                    if polyval(cs, x) <= 0:
                        raise InvalidWeightError(f"{label} must be positive on its interval (fails at {mpmath.nstr(x, 8)})")

    def endpoints(self):
        """(a, b, c, d) as mpf at the current working precision."""
        return _mp(self.a), _mp(self.b), _mp(self.c), _mp(self.d)

    def exponents(self):
        return _mp(self.alpha), _mp(self.beta), _mp(self.gamma), _mp(self.delta)

    def h1_coeffs(self):
        return [_mp(v) for v in self.h1]

    def h2_coeffs(self):
        return [_mp(v) for v in self.h2]

    def content_hash(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def floats(self) -> dict:
        with mpmath.workprec(64):
            a, b, c, d = self.endpoints()
            al, be, ga, de = self.exponents()
            return {
                "a": float(a), "b": float(b), "c": float(c), "d": float(d),
                "alpha": float(al), "beta": float(be), "gamma": float(ga), "delta": float(de),
                "h1": [float(v) for v in self.h1_coeffs()],
                "h2": [float(v) for v in self.h2_coeffs()],
            }


@dataclass(frozen=True)
class MultiIndex:
    n: int
    m: int
    q1: Fraction = field(init=False)

    def __post_init__(self):
        if self.n < 0 or self.m < 0 or self.n + self.m < 1:
            raise ValueError(f"need n, m >= 0 and n + m >= 1, got ({self.n}, {self.m})")
        if self.n < self.m:
            raise ValueError(f"indices with n < m are not supported, got ({self.n}, {self.m})")
        object.__setattr__(self, "q1", Fraction(self.m, self.n + self.m))

    @property
    def size(self) -> int:
        return self.n + self.m


def weight1(sys: NikishinSystem, x):
    a, b, _, _ = sys.endpoints()
    al, be, _, _ = sys.exponents()
    return (x - a) ** al * (b - x) ** be * polyval(sys.h1_coeffs(), x)


def weight2(sys: NikishinSystem, t):
    _, _, c, d = sys.endpoints()
    _, _, ga, de = sys.exponents()
    return (t - c) ** ga * (d - t) ** de * polyval(sys.h2_coeffs(), t)


def sigma_rule(sys: NikishinSystem, order: int, bits: int = DEFAULT_BITS):
    """Nodes on [c, d] and weights absorbing (t-c)^gamma (d-t)^delta h2(t)."""
    rule = gauss_jacobi(order, sys.delta, sys.gamma, bits)
    with mpmath.workprec(bits):
        _, _, c, d = sys.endpoints()
        ts, ws = rule.map_to(c, d)
        h2 = sys.h2_coeffs()
        return ts, [w * polyval(h2, t) for t, w in zip(ts, ws)]


def mu1_rule(sys: NikishinSystem, order: int, bits: int = DEFAULT_BITS):
    """Nodes on [a, b] and weights absorbing the full w1 density."""
    rule = gauss_jacobi(order, sys.beta, sys.alpha, bits)
    with mpmath.workprec(bits):
        a, b, _, _ = sys.endpoints()
        xs, ws = rule.map_to(a, b)
        h1 = sys.h1_coeffs()
        return xs, [w * polyval(h1, x) for x, w in zip(xs, ws)]


def _on_cd(sys, z):
    _, _, c, d = sys.endpoints()
    z = mpmath.mpc(z)
    return z.imag == 0 and c <= z.real <= d


def markov_w_fixed(ts, ws, z):
    return mpmath.fsum(w / (z - t) for t, w in zip(ts, ws))


def markov_order_for(sys: NikishinSystem, points, bits: int = DEFAULT_BITS, start: int = 16, cap: int = 4096) -> int:
    """Smallest doubling order at which w is converged at every point in ``points``."""
    tol = mpmath.mpf(10) ** (-0.25 * bits)
    order = start
    with mpmath.workprec(bits):
        ts, ws = sigma_rule(sys, order, bits)
        prev = [markov_w_fixed(ts, ws, z) for z in points]
        while order < cap:
            order *= 2
            ts, ws = sigma_rule(sys, order, bits)
            cur = [markov_w_fixed(ts, ws, z) for z in points]
            if all(abs(c - p) <= tol * abs(c) for c, p in zip(cur, prev)):
                return order
            prev = cur
    return cap


def markov_w(sys: NikishinSystem, z, bits: int = DEFAULT_BITS):
    """w(z) = int dsigma(t) / (z - t) for z off [c, d]."""
    with mpmath.workprec(bits):
        if _on_cd(sys, z):
            raise BranchCutError("z lies on [c, d]; use markov_w_side")
        z = mpmath.mpmathify(z)
        order = markov_order_for(sys, [z], bits)
        ts, ws = sigma_rule(sys, order, bits)
        return markov_w_fixed(ts, ws, z)


def _weight2_gaps(sys: NikishinSystem, t, gap_lo, gap_hi):
    _, _, ga, de = sys.exponents()
    return gap_lo**ga * gap_hi**de * polyval(sys.h2_coeffs(), t)


def _endpoint_power(exponent) -> int:
    """k with k (1 + exponent) >= 1: u = v^k removes the quadrature tail lost near a u^exponent edge."""
    return max(1, int(mpmath.ceil(1 / (1 + exponent))))


def markov_w_side(sys: NikishinSystem, x, side: int, bits: int = DEFAULT_BITS):
    """Boundary value w(x + i0*side) for c < x < d (principal value plus half residue).

    Each half of the principal value is integrated in v = (distance to the
    outer endpoint)^(1/k), which keeps tanh-sinh accurate at the edge singularity.
    """
    with mpmath.workprec(bits + 20):
        _, _, c, d = sys.endpoints()
        _, _, ga, de = sys.exponents()
        x = mpmath.mpf(x)
        if not (c < x < d):
            raise ValueError("x must be interior to (c, d)")
        length = d - c
        fx = _weight2_gaps(sys, x, x - c, d - x)
        k_lo, k_hi = _endpoint_power(ga), _endpoint_power(de)

        def left(v):  # t = c + v^k
            u = v**k_lo
            return k_lo * v ** (k_lo - 1) * (_weight2_gaps(sys, c + u, u, length - u) - fx) / (x - c - u)

        def right(v):  # t = d - v^k
            u = v**k_hi
            return k_hi * v ** (k_hi - 1) * (_weight2_gaps(sys, d - u, length - u, u) - fx) / (x - d + u)

        pv = (
            mpmath.quad(left, [0, mpmath.root(x - c, k_lo)])
            + mpmath.quad(right, [0, mpmath.root(d - x, k_hi)])
            + fx * mpmath.log((x - c) / (d - x))
        )
        val = pv - side * 1j * mpmath.pi * fx
    with mpmath.workprec(bits):
        return +val


def sigma_mass(sys: NikishinSystem, bits: int = DEFAULT_BITS):
    with mpmath.workprec(bits):
        _, ws = sigma_rule(sys, 64, bits)
        return mpmath.fsum(ws)


def moment(sys: NikishinSystem, j: int, k: int, bits: int = DEFAULT_BITS, order: int | None = None):
    """int_a^b x^k dmu_j(x), j in {1, 2}."""
    if j not in (1, 2):
        raise ValueError("measure index must be 1 or 2")
    with mpmath.workprec(bits):
        if order is None:
            order = max(32, k + 8)
        xs, ws = mu1_rule(sys, order, bits)
        if j == 1:
            return mpmath.fsum(w * x**k for x, w in zip(xs, ws))
        a, _, _, _ = sys.endpoints()
        morder = markov_order_for(sys, [a], bits)
        ts, tw = sigma_rule(sys, morder, bits)
        return mpmath.fsum(w * x**k * markov_w_fixed(ts, tw, x) for x, w in zip(xs, ws))
