"""Exact finite-degree type I and type II polynomials from orthogonality systems.

Both polynomials of a type I pair and the type II polynomial are expanded in
Chebyshev polynomials shifted to [a, b]; the Gram systems are assembled by
Gauss-Jacobi quadrature against w1 and solved in extended precision.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import mpmath

from .precision import (
    DEFAULT_BITS,
    chebyshev_grid,
    chebyshev_to_monomial,
    chebyshev_values,
    clenshaw,
    polyval,
    real_roots_bracketed,
    warn_if_ill_conditioned,
)
from .system import (
    BranchCutError,
    MultiIndex,
    NikishinSystem,
    markov_order_for,
    markov_w,
    markov_w_fixed,
    mu1_rule,
    sigma_rule,
    weight1,
)

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-12
MAX_ESCALATIONS = 2


class PerfectnessError(RuntimeError):
    """The Gram system is numerically singular: precision is exhausted."""


class PrecisionExhaustedError(RuntimeError):
    pass


def _indices(idx):
    if isinstance(idx, MultiIndex):
        return idx.n, idx.m
    n, m = idx
    if n < 0 or m < 0 or n + m < 1:
        raise ValueError(f"invalid multi-index ({n}, {m})")
    return int(n), int(m)


def _unit(sys, x):
    a, b, _, _ = sys.endpoints()
    return (2 * x - a - b) / (b - a)


def _leading(sys, k):
    """Coefficient of x^k in the shifted Chebyshev polynomial of degree k."""
    a, b, _, _ = sys.endpoints()
    if k == 0:
        return mpmath.mpf(1)
    return mpmath.mpf(2) ** (k - 1) * (2 / (b - a)) ** k


@dataclass(frozen=True)
class QuadData:
    xs: tuple
    ws: tuple
    wx: tuple
    sigma_ts: tuple
    sigma_ws: tuple
    bits: int


@lru_cache(maxsize=64)
def quad_data(sys: NikishinSystem, order: int, bits: int) -> QuadData:
    """mu1 nodes/weights on [a, b] together with w at each node."""
    with mpmath.workprec(bits):
        xs, ws = mu1_rule(sys, order, bits)
        a, _, _, _ = sys.endpoints()
        sorder = markov_order_for(sys, [a], bits)
        ts, tw = sigma_rule(sys, sorder, bits)
        wx = [markov_w_fixed(ts, tw, x) for x in xs]
        return QuadData(tuple(xs), tuple(ws), tuple(wx), tuple(ts), tuple(tw), bits)


def _default_order(n, m):
    return 2 * (n + m) + 48


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------


def _solve_refined(mat, rhs, bits):
    with mpmath.workprec(bits):
        try:
            sol = mpmath.lu_solve(mat, rhs)
        except ZeroDivisionError as exc:
            raise PerfectnessError("Gram system is singular at working precision") from exc
    with mpmath.workprec(2 * bits):
        res = rhs - mat * sol
    with mpmath.workprec(bits):
        sol = sol + mpmath.lu_solve(mat, res)
        try:
            inv = mpmath.inverse(mat)
            cond = float(mpmath.mnorm(mat, 1) * mpmath.mnorm(inv, 1))
        except ZeroDivisionError as exc:
            raise PerfectnessError("Gram system is singular at working precision") from exc
    if cond > 2.0 ** (bits - 40):
        raise PerfectnessError(f"Gram condition number {cond:.3g} exceeds {bits}-bit capacity")
    warn_if_ill_conditioned(cond, bits, "Gram system")
    return sol, cond


# ---------------------------------------------------------------------------
# Type I
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypeISolution:
    sys: NikishinSystem
    n: int
    m: int
    a_cheb: tuple
    b_cheb: tuple
    a_coeffs: tuple
    b_coeffs: tuple
    kappa_check: float
    residual: float
    cond: float
    bits: int

    def A(self, z):
        with mpmath.workprec(self.bits):
            return clenshaw(list(self.a_cheb), _unit(self.sys, z)) if self.a_cheb else mpmath.mpf(0)

    def B(self, z):
        with mpmath.workprec(self.bits):
            return clenshaw(list(self.b_cheb), _unit(self.sys, z)) if self.b_cheb else mpmath.mpf(0)


def _type_I_system(sys, n, m, qd):
    size = n + m
    vals = [chebyshev_values(size - 1, _unit(sys, x)) for x in qd.xs]
    mat = mpmath.zeros(size, size)
    rhs = mpmath.zeros(size, 1)
    for k in range(size):
        for j in range(n):
            mat[k, j] = mpmath.fsum(w * v[k] * v[j] for w, v in zip(qd.ws, vals))
        for j in range(m):
            mat[k, n + j] = mpmath.fsum(w * wx * v[k] * v[j] for w, wx, v in zip(qd.ws, qd.wx, vals))
    rhs[size - 1] = _leading(sys, size - 1)
    return mat, rhs


def type_I_residuals(sol: TypeISolution, order: int | None = None):
    """Relative orthogonality residuals and the normalization integral.

    Uses a quadrature rule of a different order from the one used to solve.
    """
    n, m = sol.n, sol.m
    size = n + m
    if order is None:
        order = _default_order(n, m) + 40
    with mpmath.workprec(sol.bits):
        qd = quad_data(sol.sys, order, sol.bits)
        form = [sol.A(x) + wx * sol.B(x) for x, wx in zip(qd.xs, qd.wx)]
        res = []
        kappa = None
        for k in range(size):
            num = mpmath.fsum(w * f * x**k for w, f, x in zip(qd.ws, form, qd.xs))
            if k == size - 1:
                kappa = num
                continue
            den = mpmath.fsum(w * abs(f) * abs(x) ** k for w, f, x in zip(qd.ws, form, qd.xs))
            res.append(float(abs(num) / den))
        return res, kappa


def solve_type_I(sys: NikishinSystem, idx, bits: int = DEFAULT_BITS, order: int | None = None) -> TypeISolution:
    """kappa-normalized type I pair (A, B) with deg A <= n-1, deg B <= m-1."""
    n, m = _indices(idx)
    cur = bits
    sol = None
    for attempt in range(MAX_ESCALATIONS + 1):
        try:
            sol = _solve_type_I_once(sys, n, m, cur, order)
        except PerfectnessError as exc:
            if attempt == MAX_ESCALATIONS:
                raise
            log.info("type I (%d,%d) at %d bits: %s; escalating", n, m, cur, exc)
            cur *= 2
            continue
        if sol.residual <= RESIDUAL_TOL and abs(sol.kappa_check) <= RESIDUAL_TOL:
            return sol
        log.info("type I (%d,%d) residual %.2e at %d bits; escalating", n, m, sol.residual, cur)
        cur *= 2
    return sol


def _solve_type_I_once(sys, n, m, bits, order):
    if order is None:
        order = _default_order(n, m)
    with mpmath.workprec(bits):
        qd = quad_data(sys, order, bits)
        mat, rhs = _type_I_system(sys, n, m, qd)
        coef, cond = _solve_refined(mat, rhs, bits)
        a_cheb = tuple(coef[j] for j in range(n))
        b_cheb = tuple(coef[n + j] for j in range(m))
        a, b, _, _ = sys.endpoints()
        a_mono = tuple(chebyshev_to_monomial(list(a_cheb), a, b, bits)) if n else ()
        b_mono = tuple(chebyshev_to_monomial(list(b_cheb), a, b, bits)) if m else ()
        draft = TypeISolution(sys, n, m, a_cheb, b_cheb, a_mono, b_mono, 0.0, 0.0, cond, bits)
        res, kappa = type_I_residuals(draft)
        return TypeISolution(
            sys, n, m, a_cheb, b_cheb, a_mono, b_mono,
            float(kappa - 1), max(res) if res else 0.0, cond, bits,
        )


def linear_form(sys: NikishinSystem, sol: TypeISolution, z, bits: int | None = None):
    """A(z) + w(z) B(z) for z off [c, d]."""
    bits = bits or sol.bits
    with mpmath.workprec(bits):
        wz = markov_w(sys, z, bits) if sol.m else 0
        return sol.A(z) + wz * sol.B(z)


def linear_form_real(sol: TypeISolution, x, qd: QuadData):
    """Fast evaluation on the real line using the cached sigma rule."""
    with mpmath.workprec(max(qd.bits, sol.bits)):
        x = mpmath.mpmathify(x)
        wx = markov_w_fixed(qd.sigma_ts, qd.sigma_ws, x)
        return sol.A(x) + wx * sol.B(x)


def linear_form_zeros(sol: TypeISolution):
    """The n+m-1 zeros of A + wB in (a, b), by sign changes then Newton/secant."""
    sys = sol.sys
    size = sol.n + sol.m
    if size == 1:
        return []
    with mpmath.workprec(sol.bits):
        qd = quad_data(sys, _default_order(sol.n, sol.m), sol.bits)
        a, b, _, _ = sys.endpoints()
        grid = [a] + chebyshev_grid(a, b, 16 * size, sol.bits) + [b]
        # endpoints may be singular for the weight but the form itself is smooth
        roots = real_roots_bracketed(lambda x: linear_form_real(sol, x, qd), a, b, grid, sol.bits)
        roots = [r for r in roots if a < r < b]
        return sorted(roots)


def h_polynomial(sol: TypeISolution):
    """Monic polynomial (increasing-degree coefficients) vanishing at the zeros of A + wB in (a, b)."""
    zeros = linear_form_zeros(sol)
    want = sol.n + sol.m - 1
    if len(zeros) != want:
        raise PrecisionExhaustedError(f"found {len(zeros)} zeros of the linear form in (a, b), expected {want}")
    with mpmath.workprec(sol.bits):
        out = [mpmath.mpf(1)]
        for r in zeros:
            nxt = [mpmath.mpf(0)] * (len(out) + 1)
            for i, c in enumerate(out):
                nxt[i + 1] += c
                nxt[i] -= r * c
            out = nxt
        return out, zeros


def varying_sign(sol: TypeISolution, hcoeffs):
    """Sign making (A + wB)/H a positive density on [a, b], read off at the midpoint."""
    with mpmath.workprec(sol.bits):
        a, b, _, _ = sol.sys.endpoints()
        mid = (a + b) / 2
        qd = quad_data(sol.sys, _default_order(sol.n, sol.m), sol.bits)
        val = linear_form_real(sol, mid, qd) / polyval(hcoeffs, mid)
        return 1 if val > 0 else -1


def varying_orthogonality_residuals(sol: TypeISolution, hcoeffs, order: int = 128):
    """Relative size of int B x^k dsigma / H for k <= m-2."""
    with mpmath.workprec(sol.bits):
        ts, tw = sigma_rule(sol.sys, order, sol.bits)
        vals = [sol.B(t) / polyval(hcoeffs, t) for t in ts]
        out = []
        for k in range(sol.m - 1):
            num = mpmath.fsum(w * v * t**k for w, v, t in zip(tw, vals, ts))
            den = mpmath.fsum(w * abs(v) * abs(t) ** k for w, v, t in zip(tw, vals, ts))
            out.append(float(abs(num) / den))
        return out


def cauchy_of_B_over_H(sol: TypeISolution, hcoeffs, z, order: int = 256):
    """int B(t)/(z - t) dsigma(t)/H(t); equals (A + wB)/H off [c, d]."""
    with mpmath.workprec(sol.bits):
        ts, tw = sigma_rule(sol.sys, order, sol.bits)
        return mpmath.fsum(w * sol.B(t) / polyval(hcoeffs, t) / (z - t) for t, w in zip(ts, tw))


# ---------------------------------------------------------------------------
# Type II
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypeIIPolynomial:
    sys: NikishinSystem
    n: int
    m: int
    cheb: tuple
    coeffs: tuple
    monic: bool
    residual: float
    cond: float
    bits: int

    def __call__(self, z):
        with mpmath.workprec(self.bits):
            return clenshaw(list(self.cheb), _unit(self.sys, z))


def type_II_residuals(poly: TypeIIPolynomial, order: int | None = None):
    n, m = poly.n, poly.m
    if order is None:
        order = _default_order(n, m) + 40
    with mpmath.workprec(poly.bits):
        qd = quad_data(poly.sys, order, poly.bits)
        pv = [poly(x) for x in qd.xs]
        out = []
        for k in range(n):
            num = mpmath.fsum(w * p * x**k for w, p, x in zip(qd.ws, pv, qd.xs))
            den = mpmath.fsum(w * abs(p) * abs(x) ** k for w, p, x in zip(qd.ws, pv, qd.xs))
            out.append(float(abs(num) / den))
        for k in range(m):
            num = mpmath.fsum(w * wx * p * x**k for w, wx, p, x in zip(qd.ws, qd.wx, pv, qd.xs))
            den = mpmath.fsum(w * wx * abs(p) * abs(x) ** k for w, wx, p, x in zip(qd.ws, qd.wx, pv, qd.xs))
            out.append(float(abs(num) / den))
        return out


def solve_type_II(sys: NikishinSystem, idx, bits: int = DEFAULT_BITS, order: int | None = None) -> TypeIIPolynomial:
    """Monic P of degree n+m orthogonal to x^k, k < n, against mu1 and k < m against mu2."""
    n, m = _indices(idx)
    cur = bits
    poly = None
    for attempt in range(MAX_ESCALATIONS + 1):
        try:
            poly = _solve_type_II_once(sys, n, m, cur, order)
        except PerfectnessError as exc:
            if attempt == MAX_ESCALATIONS:
                raise
            log.info("type II (%d,%d) at %d bits: %s; escalating", n, m, cur, exc)
            cur *= 2
            continue
        if poly.residual <= RESIDUAL_TOL:
            return poly
        log.info("type II (%d,%d) residual %.2e at %d bits; escalating", n, m, poly.residual, cur)
        cur *= 2
    return poly


def _solve_type_II_once(sys, n, m, bits, order):
    size = n + m
    if order is None:
        order = _default_order(n, m)
    with mpmath.workprec(bits):
        qd = quad_data(sys, order, bits)
        vals = [chebyshev_values(size, _unit(sys, x)) for x in qd.xs]
        top = 1 / _leading(sys, size)
        mat = mpmath.zeros(size, size)
        rhs = mpmath.zeros(size, 1)
        for row in range(size):
            if row < n:
                k, dens = row, [w for w in qd.ws]
            else:
                k, dens = row - n, [w * wx for w, wx in zip(qd.ws, qd.wx)]
            for j in range(size):
                mat[row, j] = mpmath.fsum(dw * v[k] * v[j] for dw, v in zip(dens, vals))
            rhs[row] = -top * mpmath.fsum(dw * v[k] * v[size] for dw, v in zip(dens, vals))
        coef, cond = _solve_refined(mat, rhs, bits)
        cheb = tuple(list(coef[j] for j in range(size)) + [top])
        a, b, _, _ = sys.endpoints()
        mono = chebyshev_to_monomial(list(cheb), a, b, bits)
        mono[-1] = mpmath.mpf(1)
        draft = TypeIIPolynomial(sys, n, m, cheb, tuple(mono), True, 0.0, cond, bits)
        res = type_II_residuals(draft)
        return TypeIIPolynomial(sys, n, m, cheb, tuple(mono), True, max(res), cond, bits)


def type_II_zeros(poly: TypeIIPolynomial):
    """Real zeros of P in (a, b) by sign changes."""
    size = poly.n + poly.m
    with mpmath.workprec(poly.bits):
        a, b, _, _ = poly.sys.endpoints()
        grid = [a] + chebyshev_grid(a, b, 16 * size, poly.bits) + [b]
        roots = real_roots_bracketed(poly, a, b, grid, poly.bits)
        return sorted(r for r in roots if a < r < b)


def b_zeros(sol: TypeISolution):
    """Real zeros of B in (c, d)."""
    if sol.m <= 1:
        return []
    with mpmath.workprec(sol.bits):
        _, _, c, d = sol.sys.endpoints()
        grid = [c] + chebyshev_grid(c, d, 16 * sol.m, sol.bits) + [d]
        roots = real_roots_bracketed(sol.B, c, d, grid, sol.bits)
        return sorted(r for r in roots if c < r < d)


# ---------------------------------------------------------------------------
# The 3x3 matrix X
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class XData:
    base: TypeISolution
    up_n: TypeISolution
    up_m: TypeISolution
    c1: object
    c2: object


def build_X(sys: NikishinSystem, idx, bits: int = DEFAULT_BITS) -> XData:
    n, m = _indices(idx)
    base = solve_type_I(sys, (n, m), bits)
    up_n = solve_type_I(sys, (n + 1, m), bits)
    up_m = solve_type_I(sys, (n, m + 1), bits)
    with mpmath.workprec(bits):
        c1 = 1 / up_n.a_coeffs[-1]
        c2 = 1 / up_m.b_coeffs[-1]
    return XData(base, up_n, up_m, c1, c2)


def _cauchy_row(sol, z, qd):
    forms = [sol.A(x) + wx * sol.B(x) for x, wx in zip(qd.xs, qd.wx)]
    return mpmath.fsum(w * f / (z - x) for w, f, x in zip(qd.ws, forms, qd.xs))


def assemble_X(xd: XData, z, order: int | None = None):
    """X(z) for z at distance from [a, b] (Gauss quadrature for the Cauchy column)."""
    base = xd.base
    sys = base.sys
    with mpmath.workprec(base.bits):
        z = mpmath.mpmathify(z)
        a, b, _, _ = sys.endpoints()
        if mpmath.im(z) == 0 and a <= mpmath.re(z) <= b:
            raise BranchCutError("z lies on [a, b]; use one-sided limits")
        if order is None:
            order = _default_order(base.n, base.m) + 64
        qd = quad_data(sys, order, base.bits)
        rows = []
        for sol, scale in ((base, 1), (xd.up_n, xd.c1), (xd.up_m, xd.c2)):
            rows.append([scale * _cauchy_row(sol, z, qd), scale * sol.A(z), scale * sol.B(z)])
        return mpmath.matrix(rows)


def _weight_cauchy(sys, z, x_split, bits):
    """int w1(t) / (z - t) dt by tanh-sinh, split at the real part of z."""
    with mpmath.workprec(bits):
        a, b, _, _ = sys.endpoints()
        return mpmath.quad(lambda t: weight1(sys, t) / (z - t), [a, x_split, b])


def _form_complex(sol, z, qd):
    wz = markov_w_fixed(qd.sigma_ts, qd.sigma_ws, z)
    return sol.A(z) + wz * sol.B(z)


def _cauchy_split(sol, z, omega, qd):
    """Cauchy transform of (A + wB) w1 as a smooth difference quotient plus F(z) * omega."""
    fz = _form_complex(sol, z, qd)
    forms = [sol.A(x) + wx * sol.B(x) for x, wx in zip(qd.xs, qd.wx)]
    smooth = mpmath.fsum(w * (f - fz) / (z - x) for w, f, x in zip(qd.ws, forms, qd.xs))
    return smooth + fz * omega


def X_one_sided(xd: XData, x, side: int, bits: int = 192, eps0=None, levels: int = 8):
    """X_{+/-}(x) on (a, b): values at x + side*i*eps_k, Richardson-extrapolated to eps = 0."""
    base = xd.base
    sys = base.sys
    with mpmath.workprec(bits):
        x = mpmath.mpf(x)
        a, b, _, _ = sys.endpoints()
        if eps0 is None:
            eps0 = (b - a) / 64
        eps = [mpmath.mpf(eps0) / 2**k for k in range(levels)]
        pts = [x + side * 1j * e for e in eps]
        omegas = [_weight_cauchy(sys, z, x, bits) for z in pts]
        qd = quad_data(sys, _default_order(base.n, base.m) + 64, base.bits)
        rows = []
        for sol, scale in ((base, 1), (xd.up_n, xd.c1), (xd.up_m, xd.c2)):
            samples = [scale * _cauchy_split(sol, z, om, qd) for z, om in zip(pts, omegas)]
            rows.append([_richardson(samples), scale * sol.A(x), scale * sol.B(x)])
        return mpmath.matrix(rows)


def _richardson(samples):
    """Neville extrapolation to h = 0 for samples at h, h/2, h/4, ... (polynomial in h)."""
    table = list(samples)
    nlev = len(table)
    for j in range(1, nlev):
        fac = mpmath.mpf(2) ** j
        table = [(fac * table[i + 1] - table[i]) / (fac - 1) for i in range(len(table) - 1)]
    return table[0]


def X_jump_matrix(sys: NikishinSystem, x, qd: QuadData):
    with mpmath.workprec(qd.bits):
        w1 = weight1(sys, x)
        wx = markov_w_fixed(qd.sigma_ts, qd.sigma_ws, x)
        tpi = 2j * mpmath.pi
        return mpmath.matrix([[1, 0, 0], [-tpi * w1, 1, 0], [-tpi * wx * w1, 0, 1]])


def validate_X_jump(xd: XData, x, bits: int = 192) -> float:
    """Relative residual ||X+ - X- J|| / ||X+|| at x in (a, b)."""
    sys = xd.base.sys
    with mpmath.workprec(bits):
        x = mpmath.mpf(x)
        plus = X_one_sided(xd, x, 1, bits)
        minus = X_one_sided(xd, x, -1, bits)
        qd = quad_data(sys, _default_order(xd.base.n, xd.base.m), xd.base.bits)
        jump = X_jump_matrix(sys, x, qd)
        return float(mpmath.mnorm(plus - minus * jump, 1) / mpmath.mnorm(plus, 1))


def det3(mat, bits: int = DEFAULT_BITS):
    """Cofactor determinant; avoids pivot-threshold shortcuts on badly scaled rows."""
    with mpmath.workprec(bits):
        return (
            mat[0, 0] * (mat[1, 1] * mat[2, 2] - mat[1, 2] * mat[2, 1])
            - mat[0, 1] * (mat[1, 0] * mat[2, 2] - mat[1, 2] * mat[2, 0])
            + mat[0, 2] * (mat[1, 0] * mat[2, 1] - mat[1, 1] * mat[2, 0])
        )
