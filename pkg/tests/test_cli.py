import io
import math

import numpy as np
import pytest

from ojastream import BasisSpike, oja_run, read_replay, thm12_schedule, write_replay
from ojastream.cli import main
from ojastream.errors import ConfigError
from ojastream.harness import (COLUMNS, CSV_TAG, ExperimentConfig, cmd_bounds, cmd_run, cmd_verify,
                               load_config, parse_config_text, read_rows, run_rows, write_rows)
from ojastream.oja import Constant
from ojastream.rng import derive_trial_seed


def run_cli(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def strip_wall_time(path):
    lines = path.read_text().splitlines()
    return [",".join(line.split(",")[:-1]) for line in lines]


# -- configuration ---------------------------------------------------------------

def test_config_file_and_overrides(tmp_path):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text("# experiment\ndistribution = basis_spike\nd = 12   # dimension\n"
                        "algorithm = [oja, batch]\nn_grid = [100, 200]\nsigma = 0.4\nout = 'a#b.csv'\n")
    cfg = load_config(cfg_file, {"trials": 3, "d": None})
    assert (cfg.d, cfg.sigma, cfg.trials) == (12, 0.4, 3)
    assert cfg.algorithm == ["oja", "batch"] and cfg.n_grid == [100, 200]
    assert cfg.out == "a#b.csv" and cfg.delta == 0.25
    cfg = load_config(cfg_file, {"n_grid": [50]})
    assert cfg.n_grid == [50]


@pytest.mark.parametrize("text, where", [
    ("d = 4\nbogus = 1\n", ":2:"),
    ("d = 4\nno equals sign\n", ":2:"),
    ("n_grid = [10, 5]\n", ":1:"),
    ("trials = 0\n", ":1:"),
    ("delta = 1.5\n", ":1:"),
    ("algorithm = [oja, magic]\n", ":1:"),
])
def test_config_errors_carry_line(tmp_path, text, where):
    p = tmp_path / "bad.cfg"
    p.write_text(text)
    with pytest.raises(ConfigError) as info:
        load_config(p)
    assert where in str(info.value)
    code, _ = run_cli("run", "--config", str(p))
    assert code == 2


def test_parse_config_text_literals():
    vals = parse_config_text("n_grid = [1, 2]\nschedule = thm12\ncap_steps = true\nalgorithm = [oja, batch]\n")
    assert vals["n_grid"] == ([1, 2], 1)
    assert vals["schedule"] == ("thm12", 2)
    assert vals["cap_steps"] == (True, 3)
    assert vals["algorithm"][0] == ["oja", "batch"]


def test_missing_config_file_is_config_error():
    code, _ = run_cli("run", "--config", "/nonexistent/x.cfg")
    assert code == 2


# -- run -------------------------------------------------------------------------

def test_single_trial_matches_library(tmp_path):
    path = tmp_path / "const.ojst"
    write_replay(path, np.diag([2.0, 1.0])[None])
    out = tmp_path / "res.csv"
    code, _ = run_cli("run", "--distribution", "replay", "--replay", str(path), "--schedule", "constant",
                      "--eta", "0.1", "--n", "200", "--trials", "1", "--seed", "9", "--out", str(out),
                      "--workers", "1")
    assert code == 0
    rows = read_rows(out)
    assert len(rows) == 1
    ref = oja_run(read_replay(path), Constant(0.1), 200, derive_trial_seed(9, 0, 0))
    assert rows[0].sin_sq == ref.sin_sq_final
    assert rows[0].seed == derive_trial_seed(9, 0, 0)
    assert (tmp_path / "res.summary.csv").exists()


def test_csv_schema_and_round_trip(tmp_path):
    cfg = ExperimentConfig(d=6, n_grid=[300, 600], trials=4, seed=3, workers=1)
    rows = run_rows(cfg, "oja")
    path = tmp_path / "r.csv"
    write_rows(path, rows)
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_TAG
    assert lines[1] == ",".join(COLUMNS) == "algorithm,d,n,trial_index,seed,sin_sq,rayleigh,wall_time_ns"
    back = read_rows(path)
    assert back == rows
    assert [(r.n, r.trial_index) for r in rows] == [(n, t) for n in (300, 600) for t in range(4)]
    dist = BasisSpike(6, 0.5)
    sched = thm12_schedule(dist.ground_truth(), dist.bounds())
    assert rows[5].sin_sq == oja_run(dist, sched, 600, derive_trial_seed(3, 1, 1)).sin_sq_final


def test_run_deterministic_and_worker_independent(tmp_path):
    base = ["run", "--d", "8", "--n", "256,512,1024", "--trials", "6", "--seed", "77",
            "--algo", "oja,batch,block_power"]
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    assert run_cli(*base, "--out", str(a), "--workers", "1")[0] == 0
    assert run_cli(*base, "--out", str(b), "--workers", "1")[0] == 0
    assert run_cli(*base, "--out", str(c), "--workers", "2")[0] == 0
    for algo in ("oja", "batch", "block_power"):
        fa, fb, fc = (p.with_name(f"{p.stem}.{algo}.csv") for p in (a, b, c))
        assert strip_wall_time(fa) == strip_wall_time(fb) == strip_wall_time(fc)
        assert fa.with_name(fa.stem + ".summary.csv").exists()


def test_summary_fields():
    cfg = ExperimentConfig(d=10, n_grid=[2**14], trials=20, seed=1, workers=1)
    rows, summary = cmd_run(cfg)["oja"]
    s = summary[0]
    errs = np.array([r.sin_sq for r in rows])
    assert s["median"] == np.median(errs) and s["p25"] <= s["median"] <= s["p75"]
    assert {"frac_le_thm11", "frac_le_thm41", "frac_le_thm12"} <= set(s)
    assert all(0 <= s[k] <= 1 for k in s if k.startswith("frac_le"))


def test_boosted_run(tmp_path):
    code, text = run_cli("run", "--d", "6", "--n", "2000", "--trials", "2", "--algo", "boosted",
                         "--copies", "3", "--workers", "1")
    assert code == 0 and "median" in text


def test_bounded_feature_needs_diag():
    code, _ = run_cli("run", "--distribution", "bounded_feature", "--n", "10", "--trials", "1")
    assert code == 2


def test_degenerate_gap_exit_code(tmp_path):
    p = tmp_path / "tie.cfg"
    p.write_text("distribution = bounded_feature\ndiag = [1.0, 1.0]\nn_grid = [10]\ntrials = 1\nworkers = 1\n")
    code, _ = run_cli("run", "--config", str(p))
    assert code == 4


# -- verify ----------------------------------------------------------------------

def test_verify_zero_schedule_trivial():
    cfg = ExperimentConfig(d=6, schedule="zero", steps=50, verify_trials=200, pm_trials=2000)
    rows = cmd_verify(cfg)
    lemma = {r.name: r for r in rows if r.name.startswith("lemma")}
    assert all(r.passed for r in rows)
    for name in ("lemma51", "lemma53", "lemma54"):
        assert lemma[name].estimate == pytest.approx(lemma[name].bound)


def test_verify_default_suite_passes():
    code, text = run_cli("verify", "--d", "8", "--sigma", "0.5", "--schedule", "thm13", "--seed", "1")
    assert code == 0, text
    assert text.count("pass") >= 8


def test_verify_inflated_steps_flag_hypothesis():
    code, text = run_cli("verify", "--d", "8", "--schedule", "constant", "--eta", "1.0", "--trials", "100")
    assert code == 3
    assert "hypothesis_violated" in text


# -- bounds ----------------------------------------------------------------------

def test_bounds_zero_concentration():
    cfg = ExperimentConfig(distribution="bounded_feature", diag=[1.0, 0.0], n_grid=[10, 100])
    rows = cmd_bounds(cfg)
    assert all(r["thm11"] == 0.0 for r in rows)


def test_bounds_flags_small_n():
    cfg = ExperimentConfig(d=10, n_grid=[100, 2**20])
    rows = cmd_bounds(cfg)
    assert "thm41:InsufficientSamples" in rows[0]["flags"]
    assert "thm41" in rows[1]


def test_bounds_monotone_over_grid():
    code, text = run_cli("bounds", "--d", "10", "--sigma", "0.5", "--n", ",".join(str(2**k) for k in range(10, 18)))
    assert code == 0
    cfg = ExperimentConfig(d=10, n_grid=[2**k for k in range(10, 18)])
    rows = cmd_bounds(cfg)
    for key in ("thm11", "thm41", "main1"):
        col = [r[key] for r in rows if key in r]
        assert len(col) >= 2, key
        assert all(b < a for a, b in zip(col, col[1:])), key
    assert any("main1:NonpositiveQ" in r["flags"] for r in rows) or all("main1" in r for r in rows)
    assert not math.isnan(rows[-1]["thm11"])


def test_check_model_cli():
    assert run_cli("check-model", "--d", "5", "--trials", "5000")[0] == 0
    code, text = run_cli("check-model", "--distribution", "bounded_feature", "--d", "3")
    assert code == 2
