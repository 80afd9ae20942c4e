"""Command-line runner: ``nikishin {build,compare,zeros,identities,all}``.

Exit status is 0 when every check passes, 1 on a tolerance failure and 2 on
a configuration or build error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import exact
from .config import ConfigError, ExperimentConfig, load_config, parse_index
from .pipeline import (
    BuildError,
    build_pipeline,
    equilibrium_cdf,
    exact_pair,
    run_comparison,
    run_identity_suite,
    run_zero_study,
)
from .precision import InvalidWeightError
from .system import GeometryError

log = logging.getLogger("nikishin")

COMPARE_COLUMNS = ("index_n", "index_m", "region", "re_z", "im_z", "re_exact", "im_exact", "re_pred", "im_pred", "rel_err")
ZERO_COLUMNS = ("index_n", "index_m", "polynomial", "zero", "counting_cdf", "equilibrium_cdf")
IDENTITY_COLUMNS = ("name", "residual", "tolerance", "pass")

EXIT_OK, EXIT_TOLERANCE, EXIT_ERROR = 0, 1, 2


def _num(x) -> str:
    return repr(float(x))


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_block(cfg: ExperimentConfig) -> dict:
    s = cfg.system
    return {
        "system": {k: getattr(s, k) for k in ("a", "b", "c", "d", "alpha", "beta", "gamma", "delta")}
        | {"h1": list(s.h1), "h2": list(s.h2)},
        "system_hash": s.content_hash(),
        "q1": f"{cfg.q1.numerator}/{cfg.q1.denominator}",
        "precision": cfg.precision,
        "indices": [list(i) for i in cfg.indices],
        "zero_indices": [list(i) for i in cfg.zero_indices],
        "tolerances": dict(cfg.tolerances),
    }


def _compare(state, cfg, out: Path, cache):
    records, summary = run_comparison(state, cfg, cache)
    rows = [
        (r.n, r.m, f"{r.quantity}:{r.region}", _num(r.z.real), _num(r.z.imag), _num(r.exact.real), _num(r.exact.imag),
         _num(r.predicted.real), _num(r.predicted.imag), _num(r.rel_err))
        for r in records
    ]
    _write_csv(out / "compare.csv", COMPARE_COLUMNS, rows)
    return summary


def _zeros(state, cfg, out: Path, cache):
    rows, summary = run_zero_study(state, cfg, cache)
    plot_rows = []
    for n, m in cfg.zero_indices:
        sols = exact_pair(state.system, n, m, state.bits, cache)
        if sols is None:
            continue
        sol1, poly = sols
        for label, zeros, i in (("P", exact.type_II_zeros(poly), 1), ("B", exact.b_zeros(sol1), 2)):
            xs = np.array([float(x) for x in zeros])
            ref = equilibrium_cdf(state.eq, i)(xs) if len(xs) else []
            for k, (x, f) in enumerate(zip(xs, ref), start=1):
                plot_rows.append((n, m, label, _num(x), _num(k / len(xs)), _num(f)))
    _write_csv(out / "zeros.csv", ZERO_COLUMNS, plot_rows)
    return summary


def _identities(state, cfg, out: Path):
    table, summary = run_identity_suite(state, cfg)
    _write_csv(out / "identities.csv", IDENTITY_COLUMNS,
               [(e["name"], _num(e["residual"]), _num(e["tolerance"]), str(e["pass"]).lower()) for e in table])
    return summary


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nikishin", description="Exact vs asymptotic experiments for a two-interval Nikishin system.")
    p.add_argument("command", choices=("build", "compare", "zeros", "identities", "all"))
    p.add_argument("--config", type=Path, help="sectioned key-value config file (defaults built in)")
    p.add_argument("--precision", type=int, help="working precision in bits")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--index", action="append", default=[], metavar="n,m", help="multi-index (repeatable)")
    p.add_argument("--verbose", action="store_true")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        indices = [parse_index(s) for s in args.index]
        cfg = cfg.with_overrides(precision=args.precision, out=args.out, indices=indices)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        cache = out / "cache"
        state = build_pipeline(cfg.system, cfg.q1, cfg.precision, cache_dir=cache, tol=cfg.tol("build"))
    except (ConfigError, GeometryError, InvalidWeightError, BuildError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if state.from_cache:
        log.info("pipeline loaded from cache; builds skipped")

    summary = {"config": _config_block(cfg), "build": {"residuals": state.residuals, "pass": True}}
    wanted = {
        "build": (),
        "compare": ("compare",),
        "zeros": ("zeros",),
        "identities": ("identities",),
        "all": tuple(e for e in ("compare", "zeros", "identities") if e in cfg.experiments),
    }[args.command]
    try:
        if "compare" in wanted:
            summary["compare"] = _compare(state, cfg, out, cache)
        if "zeros" in wanted:
            summary["zeros"] = _zeros(state, cfg, out, cache)
        if "identities" in wanted:
            summary["identities"] = _identities(state, cfg, out)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    ok = all(part["pass"] for key, part in summary.items() if key != "config")
    summary["pass"] = ok
    _write_json(out / f"summary-{args.command}.json", summary)
    for key in ("build", "compare", "zeros", "identities"):
        if key in summary:
            print(f"{key}: {'pass' if summary[key]['pass'] else 'FAIL'}")
    return EXIT_OK if ok else EXIT_TOLERANCE


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
