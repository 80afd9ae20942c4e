import csv
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nikishin.cli import COMPARE_COLUMNS, ZERO_COLUMNS, run
from nikishin.config import ConfigError, ExperimentConfig, config_from_text, load_config, parse_index_list
from nikishin.pipeline import fit_slope, ks_distance, rate_ok


def test_index_lists():
    assert parse_index_list("4,4; 8,8\n 16,16") == ((4, 4), (8, 8), (16, 16))
    for bad in ("4", "4,x", "1,2,3"):
        with pytest.raises(ConfigError):
            parse_index_list(bad)


def test_defaults():
    cfg = ExperimentConfig()
    assert cfg.q1 == Fraction(1, 2) and cfg.precision == 256
    assert cfg.indices[-1] == (24, 24) and cfg.zero_indices[-1] == (20, 20)
    assert len(cfg.off_cut_points()) == 5


def test_off_cut_points_keep_half_an_interval_away():
    cfg = ExperimentConfig()
    reach = 2.0  # half of the longer interval [-5, -1]
    for z in cfg.off_cut_points():
        for lo, hi in ((1, 2), (-5, -1)):
            dist = abs(z - min(max(z.real, lo), hi))
            assert dist >= reach - 1e-12


def test_full_text_round_trip(tmp_path):
    text = """
[system]
a = 0
b = 3
c = -4
d = -2
alpha = 0
h2 = 2, 1/10

[ray]
q1 = 1/3
indices = 4,2; 8,4
zero_indices = 6,3
points = 5+0j; 1+1j

[run]
precision = 128
out = elsewhere
experiments = compare

[tolerances]
rate_band = 0.5
"""
    path = tmp_path / "c.ini"
    path.write_text(text)
    cfg = load_config(path)
    assert cfg.system.b == "3" and cfg.system.alpha == "0" and cfg.system.h2 == ("2", "1/10")
    assert cfg.q1 == Fraction(1, 3) and cfg.indices == ((4, 2), (8, 4))
    assert cfg.off_cut_points() == (5 + 0j, 1 + 1j)
    assert cfg.precision == 128 and str(cfg.out) == "elsewhere" and cfg.experiments == ("compare",)
    assert cfg.tol("rate_band") == 0.5 and cfg.tol("rate_target") == -1


@pytest.mark.parametrize("text,needle", [
    ("[ray]\nq1 = 2/3", "q1"),
    ("[ray]\nindices = 8,4", "not q1"),
    ("[run]\nexperiments = compare, dance", "unknown experiments"),
    ("[run]\nprecision = 32", "precision"),
    ("[tolerances]\nspeed = 1", "unknown tolerance"),
    ("[system]\ncolour = red", "unknown keys"),
    ("[run]\nprecision = lots", "invalid literal"),
])
def test_config_errors(text, needle):
    with pytest.raises(ConfigError, match=needle):
        config_from_text(text)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.ini")


def test_overrides():
    cfg = ExperimentConfig().with_overrides(precision=128, indices=[(2, 2)])
    assert cfg.precision == 128 and cfg.indices == ((2, 2),) and cfg.zero_indices == ((2, 2),)


def test_ks_distance_oracle():
    uniform = lambda x: np.clip(x, 0, 1)  # noqa: E731
    assert ks_distance([0.5], uniform) == pytest.approx(0.5)
    n = 40
    assert ks_distance((np.arange(n) + 0.5) / n, uniform) == pytest.approx(0.5 / n)
    assert ks_distance([], uniform) == 1.0


@given(st.lists(st.floats(0, 1), min_size=1, max_size=50))
def test_ks_distance_matches_brute_force(zeros):
    uniform = lambda x: np.clip(x, 0, 1)  # noqa: E731
    x = np.sort(zeros)
    grid = np.union1d(np.linspace(0, 1, 2001), x)
    emp_right = np.searchsorted(x, grid, side="right") / len(x)
    emp_left = np.searchsorted(x, grid, side="left") / len(x)
    brute = max(np.abs(emp_right - grid).max(), np.abs(emp_left - grid).max())
    assert ks_distance(zeros, uniform) == pytest.approx(brute, abs=1e-12)


def test_slope_fit_and_rate_modes():
    ns = np.array([4, 8, 16, 24])
    assert fit_slope(ns, 3.0 / ns) == pytest.approx(-1)
    band = config_from_text("[tolerances]\nrate_mode = band")
    at_least = ExperimentConfig()
    assert rate_ok(-1.2, band) and not rate_ok(-3.0, band)
    assert rate_ok(-3.0, at_least) and not rate_ok(-0.5, at_least)


# -- command line ----------------------------------------------------------------

SMALL = ["--index", "4,4", "--index", "8,8"]


def _run(tmp, *args):
    return run([*args, "--out", str(tmp), "--precision", "256"])


@pytest.fixture(scope="module")
def shared_out(tmp_path_factory, state):
    return tmp_path_factory.mktemp("cli")


def test_build_then_cache_hit(shared_out, capsys):
    assert _run(shared_out, "build") == 0
    assert _run(shared_out, "build") == 0
    out = capsys.readouterr().out
    assert out.count("build: pass") == 2
    summary = json.loads((shared_out / "summary-build.json").read_text())
    assert summary["pass"] and summary["config"]["q1"] == "1/2"


def test_compare_and_zeros_outputs(shared_out):
    assert _run(shared_out, "compare", *SMALL) == 0
    with open(shared_out / "compare.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == COMPARE_COLUMNS
    assert len(rows) == 1 + 2 * 5 * 3
    assert {r[2] for r in rows[1:]} == {"B:off-cut", "form:off-cut", "P:off-cut"}
    assert _run(shared_out, "zeros", *SMALL) == 0
    with open(shared_out / "zeros.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == ZERO_COLUMNS
    assert sum(r[2] == "P" for r in rows[1:]) == 8 + 16


def test_reports_are_reproducible(shared_out, tmp_path):
    assert _run(shared_out, "compare", *SMALL) == 0
    first = (shared_out / "compare.csv").read_bytes(), (shared_out / "summary-compare.json").read_bytes()
    assert _run(tmp_path, "compare", *SMALL) == 0
    second = (tmp_path / "compare.csv").read_bytes(), (tmp_path / "summary-compare.json").read_bytes()
    assert first == second


def test_exit_codes(shared_out, tmp_path, capsys):
    assert _run(shared_out, "compare", "--index", "8,4") == 2
    assert "not q1" in capsys.readouterr().err
    bad = tmp_path / "bad.ini"
    bad.write_text("[system]\na = -2\nb = 2\n")
    assert _run(shared_out, "build", "--config", str(bad)) == 2
    assert _run(shared_out, "build", "--config", str(tmp_path / "missing.ini")) == 2
    strict = tmp_path / "strict.ini"
    strict.write_text("[tolerances]\nrate_target = -50\nrate_band = 0\n")
    assert _run(shared_out, "compare", "--config", str(strict), *SMALL) == 1
    assert "compare: FAIL" in capsys.readouterr().out
