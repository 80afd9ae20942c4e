"""Build the index-independent objects for one ray and run the experiments on them."""

from __future__ import annotations

import logging
import pickle
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np
from scipy import integrate

from . import exact
from .asymptotics import AsymptoticModel
from .config import ExperimentConfig
from .equilibrium import EquilibriumSolution, solve_equilibrium
from .global_parametrix import GlobalParametrix, build_global_parametrix, det3
from .local_parametrix import build_edge_parametrix, det2, psi_jump_residual, psi_model
from .surface import SurfaceMap, build_surface
from .system import NikishinSystem
from .szego import SzegoTriple, build_szego

log = logging.getLogger(__name__)

CACHE_VERSION = 1


class BuildError(RuntimeError):
    """A build-time invariant failed; the message carries the residual."""


@dataclass
class PipelineState:
    system: NikishinSystem
    q1: Fraction
    bits: int
    eq: EquilibriumSolution
    smap: SurfaceMap
    szego: SzegoTriple
    gp: GlobalParametrix
    residuals: dict = field(default_factory=dict)
    from_cache: bool = False

    @property
    def model(self) -> AsymptoticModel:
        return AsymptoticModel(self.system, self.eq, self.gp)


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------


def _cache_path(cache_dir: Path, system: NikishinSystem, q1: Fraction, bits: int) -> Path:
    return cache_dir / f"pipeline-{system.content_hash()}-q{q1.numerator}_{q1.denominator}-{bits}b-v{CACHE_VERSION}.pkl"


def equilibrium_mass(eq: EquilibriumSolution, i: int) -> float:
    """Total mass by adaptive quadrature with the inverse square-root edges as an algebraic weight."""
    meas = eq.measure(i)
    val, _ = integrate.quad(lambda x: float(meas.smooth_part(np.array([x]))[0]), meas.lo, meas.hi,
                            weight="alg", wvar=(-0.5, -0.5), epsabs=1e-15, epsrel=1e-14)
    return float(val)


def build_residuals(eq, smap, szego, gp, system) -> dict:
    """Invariants every freshly built pipeline must satisfy."""
    f = system.floats()
    a, b, c, d = f["a"], f["b"], f["c"], f["d"]
    out = {}
    for i in (1, 2):
        out[f"equilibrium_mass_{i}"] = abs(equilibrium_mass(eq, i) - 1.0)
    out["equilibrium_variational"] = max(eq.variational_residuals())
    with mpmath.workprec(smap.bits):
        target = (-smap.mu, mpmath.mpf(-1), mpmath.mpf(1), smap.lam)
        out["surface_critical_values"] = float(max(abs(v - w) for v, w in zip(smap.critical_values(), target)))
    zs = np.array([b + (b - a), 0.5 * (a + b) + 1j, 0.5 * (d + a) - 0.5j, 0.5 * (c + d) + 2j, a - 0.3 + 0.1j])
    out["szego_product"] = float(np.abs(szego.all_D(zs).prod(axis=1) - 1).max())
    out["outer_determinant"] = float(np.abs(det3(gp.N0(zs)) - 1).max())
    return out


def build_pipeline(system: NikishinSystem, q1, bits: int = 256, cache_dir=None, tol: float = 1e-8) -> PipelineState:
    """Equilibrium, surface, Szego triple and outer parametrix for the ray m/(n+m) = q1."""
    q1 = Fraction(q1)
    path = None
    if cache_dir is not None:
        cache_dir = Path(cache_dir)
        path = _cache_path(cache_dir, system, q1, bits)
        if path.exists():
            with open(path, "rb") as fh:
                state = pickle.load(fh)
            state.from_cache = True
            log.info("cache hit: %s", path.name)
            return state
    f = system.floats()
    log.info("building equilibrium (q1 = %s)", q1)
    eq = solve_equilibrium(f["a"], f["b"], f["c"], f["d"], q1)
    log.info("building surface at %d bits", bits)
    with mpmath.workprec(bits):
        ends = system.endpoints()
    smap = build_surface(*ends, bits=bits)
    log.info("building Szego functions")
    szego = build_szego(smap, system)
    gp = build_global_parametrix(smap, szego)
    res = build_residuals(eq, smap, szego, gp, system)
    for name, val in res.items():
        limit = 10.0 ** (-0.2 * bits) if name == "surface_critical_values" else tol
        if not val <= limit:
            raise BuildError(f"build invariant {name} failed: residual {val:.3e} > {limit:.1e}")
    state = PipelineState(system, q1, bits, eq, smap, szego, gp, res)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            pickle.dump(state, fh)
        log.info("cached pipeline to %s", path.name)
    return state


# ---------------------------------------------------------------------------
# exact solutions (cached on disk as well)
# ---------------------------------------------------------------------------


def _exact_cached(kind, system, n, m, bits, cache_dir):
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"exact-{kind}-{system.content_hash()}-{n}_{m}-{bits}b-v{CACHE_VERSION}.pkl"
        if path.exists():
            with open(path, "rb") as fh:
                return pickle.load(fh)
    sol = exact.solve_type_I(system, (n, m), bits) if kind == "I" else exact.solve_type_II(system, (n, m), bits)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            pickle.dump(sol, fh)
    return sol


def exact_pair(system, n, m, bits, cache_dir=None):
    """(type I solution, type II polynomial), or None when the solver runs out of precision."""
    try:
        return _exact_cached("I", system, n, m, bits, cache_dir), _exact_cached("II", system, n, m, bits, cache_dir)
    except (exact.PerfectnessError, exact.PrecisionExhaustedError) as exc:
        log.warning("index (%d,%d) skipped: %s", n, m, exc)
        return None


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------

QUANTITIES = ("B", "form", "P")


@dataclass(frozen=True)
class ComparisonRecord:
    n: int
    m: int
    quantity: str
    region: str
    z: complex
    exact: complex
    predicted: complex
    rel_err: float
    bits: int


def relative_error(exact_val, pred_val) -> float:
    return float(abs(exact_val - pred_val) / abs(exact_val))


def compare_at(state: PipelineState, sols, n, m, z) -> list:
    model = state.model
    sol1, poly = sols
    with mpmath.workprec(state.bits):
        zmp = mpmath.mpc(z)
        ex = {
            "B": sol1.B(zmp),
            "form": exact.linear_form(state.system, sol1, zmp, state.bits),
            "P": poly(zmp),
        }
        pred = {
            "B": model.B_off(n, m, z),
            "form": model.linear_form_off(n, m, z),
            "P": model.P_off(n, m, z),
        }
        out = []
        for q in QUANTITIES:
            out.append(ComparisonRecord(n, m, q, pred[q].region, complex(z), complex(ex[q]), complex(pred[q].value),
                                        relative_error(ex[q], pred[q].value), state.bits))
        return out


def fit_slope(ns, errs) -> float:
    """Least-squares slope of log(err) against log(n)."""
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(errs, float)), 1)[0])


def rate_ok(slope: float, cfg: ExperimentConfig) -> bool:
    target, band = cfg.tol("rate_target"), cfg.tol("rate_band")
    if cfg.tolerances["rate_mode"] == "band":
        return abs(slope - target) <= band
    return slope <= target + band


def run_comparison(state: PipelineState, cfg: ExperimentConfig, cache_dir=None):
    records = []
    used = []
    for n, m in cfg.indices:
        sols = exact_pair(state.system, n, m, state.bits, cache_dir)
        if sols is None:
            continue
        used.append((n, m))
        for z in cfg.off_cut_points():
            records.extend(compare_at(state, sols, n, m, z))
        log.info("compared (%d,%d)", n, m)
    series = {}
    for r in records:
        series.setdefault((r.quantity, r.z), []).append(r)
    fits = []
    ok = len(used) >= 2
    for (q, z), rs in sorted(series.items(), key=lambda kv: (QUANTITIES.index(kv[0][0]), kv[0][1].real, kv[0][1].imag)):
        ns = [r.n for r in rs]
        errs = [r.rel_err for r in rs]
        slope = fit_slope(ns, errs) if len(ns) >= 2 else float("nan")
        at16 = next((r.rel_err for r in rs if (r.n, r.m) == (16, 16)), None)
        passed = bool(len(ns) >= 2 and rate_ok(slope, cfg) and (at16 is None or at16 <= cfg.tol("err_at_16")))
        ok &= passed
        fits.append({"quantity": q, "z": [z.real, z.imag], "slope": slope, "err_at_16": at16, "pass": passed})
    summary = {"indices": [list(i) for i in used], "fits": fits, "pass": bool(ok)}
    return records, summary


# ---------------------------------------------------------------------------
# zero distributions
# ---------------------------------------------------------------------------


def ks_distance(zeros, cdf) -> float:
    """sup |F_N - F| for the normalized counting measure of ``zeros`` against the CDF ``cdf``."""
    x = np.sort(np.asarray(zeros, dtype=float))
    n = len(x)
    if n == 0:
        return 1.0
    f = cdf(x)
    k = np.arange(1, n + 1)
    return float(max(np.max(np.abs(k / n - f)), np.max(np.abs((k - 1) / n - f))))


def equilibrium_cdf(eq: EquilibriumSolution, i: int):
    return lambda x: 1.0 - eq.phi(i, x)


def run_zero_study(state: PipelineState, cfg: ExperimentConfig, cache_dir=None):
    rows = []
    for n, m in cfg.zero_indices:
        sols = exact_pair(state.system, n, m, state.bits, cache_dir)
        if sols is None:
            continue
        sol1, poly = sols
        pz = [float(x) for x in exact.type_II_zeros(poly)]
        bz = [float(x) for x in exact.b_zeros(sol1)]
        rows.append({
            "n": n, "m": m,
            "p_zero_count": len(pz), "b_zero_count": len(bz),
            "ks_p_nu1": ks_distance(pz, equilibrium_cdf(state.eq, 1)),
            "ks_b_nu2": ks_distance(bz, equilibrium_cdf(state.eq, 2)),
        })
        log.info("zeros (%d,%d): KS %.4f / %.4f", n, m, rows[-1]["ks_p_nu1"], rows[-1]["ks_b_nu2"])
    limit = cfg.tol("ks_final")
    checks = {}
    for key in ("ks_p_nu1", "ks_b_nu2"):
        vals = [r[key] for r in rows]
        checks[key] = {
            "final": vals[-1] if vals else None,
            "final_ok": bool(vals and vals[-1] <= limit),
            "decreasing": bool(all(u > v for u, v in zip(vals, vals[1:]))),
        }
    ok = bool(rows) and all(c["final_ok"] and c["decreasing"] for c in checks.values())
    return rows, {"rows": rows, "checks": checks, "pass": ok}


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------

IDENTITIES = (
    "model_determinant",
    "model_jumps",
    "outer_determinant",
    "outer_jump_ab",
    "outer_jump_cd",
    "outer_weighted_jumps",
    "szego_product",
    "szego_boundary",
    "surface_inverse",
    "surface_critical_values",
    "equilibrium_variational",
    "edge_prefactor_continuity",
)

# what each identity asserts, reported alongside any failure
IDENTITY_MEANING = {
    "model_determinant": "det Psi(zeta) = 1 for the Bessel model matrix",
    "model_jumps": "Psi_+ = Psi_- J on the three model rays",
    "outer_determinant": "det N_0(z) = 1",
    "outer_jump_ab": "N_0 jump on (a, b): swap of the first two columns with a sign",
    "outer_jump_cd": "N_0 jump on (c, d): swap of the last two columns with a sign",
    "outer_weighted_jumps": "N_+ = N_- J with the weights v1, v2 on both intervals",
    "szego_product": "D_0 D_1 D_2 = 1",
    "szego_boundary": "boundary relations of D_0, D_1, D_2 across (a, b) and (c, d)",
    "surface_inverse": "H(psi_j(x)) = x on every sheet",
    "surface_critical_values": "critical values of H are the four branch points",
    "equilibrium_variational": "variational equalities of the vector equilibrium problem",
    "edge_prefactor_continuity": "analytic prefactor of the edge parametrix has no jump across (a, b)",
}


def _interior(lo, hi, k):
    return lo + (hi - lo) * (np.arange(1, k + 1) / (k + 1))


def szego_boundary_residual(szego: SzegoTriple, system: NikishinSystem, k: int = 5) -> float:
    f = system.floats()
    worst = 0.0
    xs = _interior(f["a"], f["b"], k)
    up, dn = szego.all_D(xs + 0j, side=1), szego.all_D(xs + 0j, side=-1)
    v1 = szego.v1.weight(xs + 0j)
    rel = lambda p, q: np.abs(p - q) / np.abs(p)  # noqa: E731
    worst = max(worst, rel(dn[:, 1], v1 * up[:, 0]).max(), rel(up[:, 1], v1 * dn[:, 0]).max(), rel(up[:, 2], dn[:, 2]).max())
    xs = _interior(f["c"], f["d"], k)
    up, dn = szego.all_D(xs + 0j, side=1), szego.all_D(xs + 0j, side=-1)
    v2 = szego.v2.weight(xs + 0j)
    worst = max(worst, rel(up[:, 0], dn[:, 0]).max(), rel(dn[:, 2], v2 * up[:, 1]).max(), rel(up[:, 2], v2 * dn[:, 1]).max())
    return float(worst)


def model_sample_points(count: int = 50):
    """Points spread over the three sectors with moduli from 1e-3 to 1e6."""
    mods = np.logspace(-3, 6, count)
    angles = np.pi * (-0.95 + 1.9 * ((np.arange(count) * 0.6180339887498949) % 1.0))
    return mods * np.exp(1j * angles)


def model_determinant_residual(orders=(-0.5, 0.0, 0.5, 2.0), count: int = 50) -> float:
    worst = 0.0
    pts = model_sample_points(count)
    for order in orders:
        for z in pts:
            with mpmath.workprec(116):
                worst = max(worst, float(abs(det2(psi_model(order, mpmath.mpc(z))) - 1)))
    return worst


def model_jump_residual(orders=(-0.5, 0.0, 0.5, 2.0), radii=np.logspace(-3, 3, 20)) -> float:
    return max(psi_jump_residual(o, ray, r) for o in orders for ray in (1, 2, 3) for r in radii)


def run_identity_suite(state: PipelineState, cfg: ExperimentConfig):
    system, gp, szego, smap, eq = state.system, state.gp, state.szego, state.smap, state.eq
    f = system.floats()
    a, b, c, d = f["a"], f["b"], f["c"], f["d"]
    res = {}
    res["model_determinant"] = model_determinant_residual((f["beta"], f["delta"]))
    res["model_jumps"] = model_jump_residual((f["beta"], f["delta"]), radii=np.logspace(-3, 3, 7))
    rng = np.random.default_rng(20240601)
    zs = (rng.uniform(c - 1, b + 1, 50) + 1j * rng.uniform(-3, 3, 50))
    res["outer_determinant"] = float(np.abs(det3(gp.N0(zs)) - 1).max())
    res["outer_jump_ab"] = gp.jump_residual(_interior(a, b, 10), "ab")
    res["outer_jump_cd"] = gp.jump_residual(_interior(c, d, 10), "cd")
    res["outer_weighted_jumps"] = max(gp.jump_residual(_interior(a, b, 10), "ab", "N"),
                                      gp.jump_residual(_interior(c, d, 10), "cd", "N"))
    res["szego_product"] = float(np.abs(szego.all_D(zs[:20]).prod(axis=1) - 1).max())
    res["szego_boundary"] = szego_boundary_residual(szego, system)
    ts = smap.to_normalized(np.linspace(c - 2, b + 2, 200) + 0.37j)
    ys = smap.psi(ts)
    res["surface_inverse"] = float(max(np.abs(smap.H(ys[:, j]) - ts).max() / np.abs(ts).max() for j in range(3)))
    res["surface_critical_values"] = state.residuals.get("surface_critical_values", float("nan"))
    res["equilibrium_variational"] = max(eq.variational_residuals())
    k = 8
    edge = build_edge_parametrix("b", (state.q1.denominator - state.q1.numerator) * k, state.q1.numerator * k,
                                 system, eq, gp)
    xs = b - edge.radius * np.array([0.3, 0.5, 0.7])
    jumps = []
    for x in xs:
        up, dn = edge.E(x + 1e-11j), edge.E(x - 1e-11j)
        jumps.append(np.abs(up - dn).max() / np.abs(up).max())
    res["edge_prefactor_continuity"] = float(max(jumps))
    table = []
    ok = True
    for name in IDENTITIES:
        tol = cfg.tol(name)
        passed = bool(res[name] <= tol)
        ok &= passed
        entry = {"name": name, "residual": res[name], "tolerance": tol, "pass": passed}
        if not passed:
            entry["violated"] = IDENTITY_MEANING[name]
            log.error("identity %s failed (%s): %.3e > %.1e", name, IDENTITY_MEANING[name], res[name], tol)
        table.append(entry)
    return table, {"identities": table, "pass": ok}
