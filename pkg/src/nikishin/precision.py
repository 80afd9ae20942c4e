"""Extended-precision plumbing: Gauss-Jacobi rules, root finding, Chebyshev helpers.

Every routine takes an explicit ``bits`` argument and runs inside
``mpmath.workprec(bits)`` so callers never depend on the global mpmath state.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.special import roots_jacobi

DEFAULT_BITS = 256


class InvalidWeightError(ValueError):
    pass


class DegenerateInputError(ValueError):
    pass


class PrecisionWarning(UserWarning):
    pass


def to_mpf(x, bits: int = DEFAULT_BITS):
    """Convert a decimal string / int / float / mpf to mpf at ``bits``."""
    with mpmath.workprec(bits):
        if isinstance(x, str):
            return mpmath.mpf(x)
        return +mpmath.mpf(x)


def estimated_digits(cond: float, bits: int) -> float:
    """Correct decimal digits expected when solving with condition number ``cond``."""
    return bits * math.log10(2.0) - math.log10(max(cond, 1.0))


def warn_if_ill_conditioned(cond: float, bits: int, what: str) -> float:
    digits = estimated_digits(cond, bits)
    if digits < 10:
        warnings.warn(
            f"{what}: condition ~{cond:.3g} leaves ~{digits:.1f} digits at {bits} bits",
            PrecisionWarning,
            stacklevel=3,
        )
    return digits


# ---------------------------------------------------------------------------
# Gauss-Jacobi
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights on [-1, 1] for the weight (1-x)^p (1+x)^q."""

    kind: str
    p: object
    q: object
    nodes: tuple
    weights: tuple
    order: int
    bits: int

    def map_to(self, lo, hi):
        """Nodes and weights for the same weight transported to [lo, hi].

        The returned weights integrate f(x)(hi-x)^p (x-lo)^q dx.
        """
        with mpmath.workprec(self.bits):
            lo = mpmath.mpf(lo)
            hi = mpmath.mpf(hi)
            half = (hi - lo) / 2
            mid = (hi + lo) / 2
            scale = half ** (1 + self.p + self.q)
            xs = [mid + half * t for t in self.nodes]
            ws = [scale * w for w in self.weights]
        return xs, ws

    def as_float(self):
        return (
            np.array([float(t) for t in self.nodes]),
            np.array([float(w) for w in self.weights]),
        )


def _recurrence(n: int, p, q):
    """Coefficients with P_k = (A_k x + B_k) P_{k-1} - C_k P_{k-2}."""
    coefs = []
    for k in range(2, n + 1):
        s = 2 * k + p + q
        c1 = 2 * k * (k + p + q) * (s - 2)
        coefs.append(((s - 1) * s * (s - 2) / c1, (s - 1) * (p * p - q * q) / c1, 2 * (k + p - 1) * (k + q - 1) * s / c1))
    return coefs


def jacobi_eval(n: int, p, q, x, coefs=None):
    """P_n^{(p,q)}(x) and P_{n-1}^{(p,q)}(x) via the three-term recurrence."""
    if n == 0:
        return mpmath.mpf(1), mpmath.mpf(0)
    if coefs is None:
        coefs = _recurrence(n, p, q)
    p0 = mpmath.mpf(1)
    p1 = (p + 1) + (p + q + 2) * (x - 1) / 2
    for a, b, c in coefs:
        p0, p1 = p1, (a * x + b) * p1 - c * p0
    return p1, p0


def _jacobi_value_and_derivative(n, p, q, x, coefs=None):
    pn, pnm1 = jacobi_eval(n, p, q, x, coefs)
    s = 2 * n + p + q
    dp = (n * ((p - q) - s * x) * pn + 2 * (n + p) * (n + q) * pnm1) / (s * (1 - x * x))
    return pn, dp


@lru_cache(maxsize=256)
def _gauss_jacobi_cached(order: int, p_key: str, q_key: str, bits: int) -> QuadratureRule:
    with mpmath.workprec(bits + 20):
        p = mpmath.mpf(p_key)
        q = mpmath.mpf(q_key)
        coefs = _recurrence(order, p, q)
        guesses, _ = roots_jacobi(order, float(p), float(q))
        tol = mpmath.mpf(2) ** (-(bits + 10))
        nodes = []
        derivs = []
        for g in guesses:
            x = mpmath.mpf(g)
            dp = None
            for _ in range(100):
                pn, dp = _jacobi_value_and_derivative(order, p, q, x, coefs)
                step = pn / dp
                x -= step
                if abs(step) <= tol:
                    break
            nodes.append(x)
            derivs.append(dp)
        logc = (
            mpmath.loggamma(order + p + 1)
            + mpmath.loggamma(order + q + 1)
            - mpmath.loggamma(order + p + q + 1)
            - mpmath.loggamma(order + 1)
            + (p + q + 1) * mpmath.log(2)
        )
        c = mpmath.exp(logc)
        pairs = sorted(zip(nodes, derivs))
        nodes = [x for x, _ in pairs]
        # derivative at the converged node; last step was below tolerance so
        # the stale derivative is accurate to full precision
        weights = [c / ((1 - x * x) * dp * dp) for x, dp in pairs]
    with mpmath.workprec(bits):
        return QuadratureRule(
            kind="gauss-jacobi",
            p=+p,
            q=+q,
            nodes=tuple(+t for t in nodes),
            weights=tuple(+w for w in weights),
            order=order,
            bits=bits,
        )


def gauss_jacobi(order: int, p=0, q=0, bits: int = DEFAULT_BITS) -> QuadratureRule:
    """Gauss-Jacobi rule of ``order`` nodes for (1-x)^p (1+x)^q on [-1, 1]."""
    if order < 1:
        raise ValueError("order must be >= 1")
    with mpmath.workprec(bits):
        pm = mpmath.mpf(p) if not isinstance(p, str) else mpmath.mpf(p)
        qm = mpmath.mpf(q) if not isinstance(q, str) else mpmath.mpf(q)
        if pm <= -1 or qm <= -1:
            raise InvalidWeightError(f"Jacobi exponents must exceed -1, got ({p}, {q})")
        key_p = mpmath.nstr(pm, int(bits * 0.302) + 5)
        key_q = mpmath.nstr(qm, int(bits * 0.302) + 5)
    rule = _gauss_jacobi_cached(order, key_p, key_q, bits)
    if order > 1 and not all(w > 0 for w in rule.weights):
        raise InvalidWeightError("non-positive Gauss-Jacobi weight; Newton failed")
    return rule


def gauss_legendre(order: int, bits: int = DEFAULT_BITS) -> QuadratureRule:
    rule = gauss_jacobi(order, 0, 0, bits)
    return QuadratureRule("gauss-legendre", rule.p, rule.q, rule.nodes, rule.weights, order, bits)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


def polyval(coeffs: Sequence, x):
    """Horner evaluation; ``coeffs`` in increasing degree."""
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def polyval_deriv(coeffs: Sequence, x):
    v = 0
    d = 0
    for c in reversed(coeffs):
        d = d * x + v
        v = v * x + c
    return v, d


def poly_from_roots(roots: Sequence, lead=1):
    out = [lead]
    for r in roots:
        nxt = [0] * (len(out) + 1)
        for i, c in enumerate(out):
            nxt[i + 1] += c
            nxt[i] -= r * c
        out = nxt
    return out


def poly_roots(coeffs: Sequence, bits: int = DEFAULT_BITS, polish_steps: int = 60):
    """All complex roots of sum coeffs[k] x^k.

    Companion-matrix eigenvalues at working precision (mpmath balances the
    Hessenberg reduction internally), then Newton polishing on the original
    coefficients.
    """
    with mpmath.workprec(bits + 32):
        cs = [mpmath.mpmathify(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        if not cs:
            raise DegenerateInputError("zero polynomial has no finite root set")
        deg = len(cs) - 1
        if deg == 0:
            return []
        lead = cs[-1]
        monic = [c / lead for c in cs]
        if deg == 1:
            roots = [-monic[0]]
        else:
            comp = mpmath.zeros(deg, deg)
            for i in range(1, deg):
                comp[i, i - 1] = 1
            for i in range(deg):
                comp[i, deg - 1] = -monic[i]
            roots = list(mpmath.eig(comp, left=False, right=False))
        tol = mpmath.mpf(2) ** (-(bits + 16))
        polished = []
        for r in roots:
            z = mpmath.mpc(r)
            for _ in range(polish_steps):
                v, d = polyval_deriv(monic, z)
                if d == 0:
                    break
                step = v / d
                z -= step
                if abs(step) <= tol * max(1, abs(z)):
                    break
            polished.append(z)
    with mpmath.workprec(bits):
        return [+z for z in polished]


def real_roots_bracketed(
    f: Callable, lo, hi, grid: Sequence, bits: int = DEFAULT_BITS, df: Callable | None = None
):
    """Simple real roots of ``f`` on (lo, hi) located by sign changes on ``grid``.

    Each bracket is refined by bisection to ~double precision then polished by
    Newton (secant if no derivative is supplied) at working precision, with a
    bracket safeguard.
    """
    with mpmath.workprec(bits):
        vals = [f(x) for x in grid]
        roots = []
        for i in range(len(grid) - 1):
            a, b = grid[i], grid[i + 1]
            fa, fb = vals[i], vals[i + 1]
            if fa == 0:
                roots.append(a)
                continue
            if fa * fb > 0:
                continue
            for _ in range(60):
                mid = (a + b) / 2
                fm = f(mid)
                if fm == 0:
                    a = b = mid
                    break
                if fa * fm < 0:
                    b, fb = mid, fm
                else:
                    a, fa = mid, fm
            x = (a + b) / 2
            tol = mpmath.mpf(2) ** (-(bits - 8)) * max(1, abs(x))
            x_prev = a
            f_prev = f(a)
            for _ in range(40):
                fx = f(x)
                if fx == 0:
                    break
                if df is not None:
                    d = df(x)
                else:
                    d = (fx - f_prev) / (x - x_prev) if x != x_prev else 0
                if d == 0:
                    break
                nx = x - fx / d
                x_prev, f_prev = x, fx
                if abs(nx - x) <= tol:
                    x = nx
                    break
                x = nx
            roots.append(x)
        return roots


def chebyshev_grid(lo, hi, npts: int, bits: int = DEFAULT_BITS):
    """Chebyshev-extreme grid on [lo, hi] excluding the endpoints (npts points)."""
    with mpmath.workprec(bits):
        lo = mpmath.mpf(lo)
        hi = mpmath.mpf(hi)
        mid = (lo + hi) / 2
        half = (hi - lo) / 2
        return [mid - half * mpmath.cos(mpmath.pi * (k + mpmath.mpf(1) / 2) / npts) for k in range(npts)]


def chebyshev_values(kmax: int, s):
    """[T_0(s), ..., T_kmax(s)] by recurrence (works for mpf, mpc, float, arrays)."""
    out = [s * 0 + 1]
    if kmax >= 1:
        out.append(s)
    for _ in range(2, kmax + 1):
        out.append(2 * s * out[-1] - out[-2])
    return out


def clenshaw(coeffs: Sequence, s):
    """sum c_k T_k(s)."""
    b1 = 0
    b2 = 0
    for c in reversed(coeffs[1:]):
        b1, b2 = 2 * s * b1 - b2 + c, b1
    first = coeffs[0] if len(coeffs) else 0
    return s * b1 - b2 + first


def chebyshev_to_monomial(coeffs: Sequence, lo, hi, bits: int = DEFAULT_BITS):
    """Convert sum c_k T_k((2x-lo-hi)/(hi-lo)) to monomial coefficients in x."""
    with mpmath.workprec(bits):
        lo = mpmath.mpf(lo)
        hi = mpmath.mpf(hi)
        n = len(coeffs)
        if n == 0:
            return []
        # T_k in s as monomials
        tk = [[mpmath.mpf(1)], [mpmath.mpf(0), mpmath.mpf(1)]]
        for k in range(2, n):
            prev, prev2 = tk[-1], tk[-2]
            nxt = [mpmath.mpf(0)] * (k + 1)
            for i, c in enumerate(prev):
                nxt[i + 1] += 2 * c
            for i, c in enumerate(prev2):
                nxt[i] -= c
            tk.append(nxt)
        s_poly = [0] * n
        for k, c in enumerate(coeffs):
            for i, t in enumerate(tk[k]):
                s_poly[i] += c * t
        # substitute s = alpha x + beta
        alpha = 2 / (hi - lo)
        beta = -(hi + lo) / (hi - lo)
        out = [mpmath.mpf(0)] * n
        power = [mpmath.mpf(1)]
        for i in range(n):
            for j, c in enumerate(power):
                out[j] += s_poly[i] * c
            nxt = [mpmath.mpf(0)] * (len(power) + 1)
            for j, c in enumerate(power):
                nxt[j + 1] += alpha * c
                nxt[j] += beta * c
            power = nxt
        return out
