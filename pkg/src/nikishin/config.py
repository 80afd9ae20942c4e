"""Experiment configuration read from a sectioned key-value text file.

Example::

    [system]
    a = 1
    b = 2
    c = -5
    d = -1
    alpha = -1/2
    beta = -1/2
    gamma = -1/2
    delta = -1/2
    h1 = 1
    h2 = 1

    [ray]
    q1 = 1/2
    indices = 4,4; 8,8; 16,16; 24,24
    zero_indices = 4,4; 8,8; 12,12; 16,16; 20,20

    [run]
    precision = 256
    out = results
    experiments = compare, zeros, identities

    [tolerances]
    rate_mode = at-least

Numbers stay as the strings written in the file; conversion happens at the
working precision of whoever consumes them.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .system import MultiIndex, NikishinSystem

EXPERIMENTS = ("compare", "zeros", "identities")

DEFAULT_INDICES = ((4, 4), (8, 8), (16, 16), (24, 24))
DEFAULT_ZERO_INDICES = ((4, 4), (8, 8), (12, 12), (16, 16), (20, 20))

DEFAULT_TOLERANCES = {
    # comparison: the fitted slope of log(err) against log(n)
    "rate_mode": "at-least",  # "band": |slope - target| <= band; "at-least": slope <= target + band
    "rate_target": "-1",
    "rate_band": "0.3",
    "err_at_16": "0.1",
    # zero study
    "ks_final": "0.1",
    # identity suite
    "model_determinant": "1e-10",
    "model_jumps": "1e-10",
    "outer_determinant": "1e-10",
    "outer_jump_ab": "1e-8",
    "outer_jump_cd": "1e-8",
    "outer_weighted_jumps": "1e-8",
    "szego_product": "1e-8",
    "szego_boundary": "1e-8",
    "surface_inverse": "1e-12",
    "surface_critical_values": "1e-20",
    "equilibrium_variational": "1e-10",
    "edge_prefactor_continuity": "1e-8",
    # build-time invariants
    "build": "1e-8",
}


class ConfigError(ValueError):
    pass


def parse_index_list(text: str) -> tuple:
    """'4,4; 8,8' -> ((4, 4), (8, 8))."""
    out = []
    for chunk in text.replace("\n", ";").split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        out.append(parse_index(chunk))
    return tuple(out)


def parse_index(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"index must look like 'n,m', got {text!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"index must be two integers, got {text!r}") from exc


def _coeffs(text: str) -> tuple:
    return tuple(p.strip() for p in text.split(",") if p.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    system: NikishinSystem = field(default_factory=NikishinSystem)
    q1: Fraction = Fraction(1, 2)
    indices: tuple = DEFAULT_INDICES
    zero_indices: tuple = DEFAULT_ZERO_INDICES
    precision: int = 256
    out: Path = Path("results")
    experiments: tuple = EXPERIMENTS
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    points: tuple = ()  # off-cut evaluation points; empty means derived from the geometry

    def __post_init__(self):
        if not (0 < self.q1 <= Fraction(1, 2)):
            raise ConfigError(f"q1 must lie in (0, 1/2], got {self.q1}")
        for label, idxs in (("indices", self.indices), ("zero_indices", self.zero_indices)):
            for n, m in idxs:
                try:
                    idx = MultiIndex(n, m)
                except ValueError as exc:
                    raise ConfigError(str(exc)) from exc
                if idx.q1 != self.q1:
                    raise ConfigError(f"{label}: ({n},{m}) has m/(n+m) = {idx.q1}, not q1 = {self.q1}")
        unknown = set(self.experiments) - set(EXPERIMENTS)
        if unknown:
            raise ConfigError(f"unknown experiments: {sorted(unknown)}")
        if self.precision < 64:
            raise ConfigError("precision must be at least 64 bits")

    def tol(self, key: str) -> float:
        return float(self.tolerances[key])

    def with_overrides(self, precision=None, out=None, indices=None) -> "ExperimentConfig":
        kw = {}
        if precision is not None:
            kw["precision"] = int(precision)
        if out is not None:
            kw["out"] = Path(out)
        if indices:
            kw["indices"] = tuple(indices)
            kw["zero_indices"] = tuple(indices)
        return replace(self, **kw) if kw else self

    def off_cut_points(self) -> tuple:
        """Five points at least one half-interval away from both cuts."""
        if self.points:
            return self.points
        f = self.system.floats()
        a, b, c, d = f["a"], f["b"], f["c"], f["d"]
        reach = max((b - a) / 2, (d - c) / 2)
        mid1, mid2, gap = (a + b) / 2, (c + d) / 2, (d + a) / 2
        return (
            complex(b + reach, 0),
            complex(mid1, reach),
            complex(gap, reach),
            complex(mid2, reach),
            complex(mid1, -reach),
        )


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser.read(path)
    return config_from_parser(parser)


def config_from_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    parser.read_string(text)
    return config_from_parser(parser)


def config_from_parser(parser: configparser.ConfigParser) -> ExperimentConfig:
    kw = {}
    try:
        if parser.has_section("system"):
            sec = dict(parser["system"])
            sys_kw = {k: sec[k] for k in ("a", "b", "c", "d", "alpha", "beta", "gamma", "delta") if k in sec}
            for k in ("h1", "h2"):
                if k in sec:
                    sys_kw[k] = _coeffs(sec[k])
            extra = set(sec) - set(sys_kw) - {"h1", "h2"}
            if extra:
                raise ConfigError(f"unknown keys in [system]: {sorted(extra)}")
            kw["system"] = NikishinSystem(**sys_kw)
        if parser.has_section("ray"):
            sec = parser["ray"]
            if "q1" in sec:
                kw["q1"] = Fraction(sec["q1"].strip())
            if "indices" in sec:
                kw["indices"] = parse_index_list(sec["indices"])
            if "zero_indices" in sec:
                kw["zero_indices"] = parse_index_list(sec["zero_indices"])
            if "points" in sec:
                kw["points"] = tuple(complex(p.strip().replace(" ", "")) for p in sec["points"].split(";") if p.strip())
        if parser.has_section("run"):
            sec = parser["run"]
            if "precision" in sec:
                kw["precision"] = int(sec["precision"])
            if "out" in sec:
                kw["out"] = Path(sec["out"].strip())
            if "experiments" in sec:
                kw["experiments"] = tuple(e.strip() for e in sec["experiments"].split(",") if e.strip())
        if parser.has_section("tolerances"):
            tols = dict(DEFAULT_TOLERANCES)
            for key, val in parser["tolerances"].items():
                if key not in tols:
                    raise ConfigError(f"unknown tolerance {key!r}")
                tols[key] = val.strip()
            kw["tolerances"] = tols
    except ConfigError:
        raise
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(**kw)
