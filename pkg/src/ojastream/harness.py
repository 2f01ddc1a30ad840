"""Seeded trial ensembles, lemma checks and bound tables, with CSV output.

Configuration is a flat text file of ``key = value`` lines (``#`` starts a
comment; values are Python literals or bare words)::

    distribution = basis_spike
    d = 20
    sigma = 0.5
    algorithm = [oja, batch, block_power]
    schedule = thm12
    n_grid = [1024, 2048, 4096]
    trials = 200
    seed = 12345

Every trial's seed is ``derive_trial_seed(seed, trial_index, n_index)``, so all
algorithms at the same ``(n, trial)`` see the same samples, and results do not
depend on worker count or scheduling order.
"""

import ast
import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import theory
from .baselines import batch_topvec, block_power
from .boost import boosted_estimate
from .errors import ConfigError, HypothesisViolated, InsufficientSamples, NonpositiveQ, OjaStreamError
from .linalg import rayleigh
from .model import BasisSpike, BoundedFeature, empirical_check
from .oja import (Constant, check_thm13_samples, oja_run, step_cap, step_sizes,
                  thm12_schedule, thm13_schedule, thm41_schedule)
from .replay import read_replay
from .rng import derive_trial_seed, make_rng

CSV_TAG = "# oja-stream v1"
COLUMNS = ["algorithm", "d", "n", "trial_index", "seed", "sin_sq", "rayleigh", "wall_time_ns"]
ALGORITHMS = ("oja", "batch", "block_power", "boosted")
SCHEDULES = ("thm12", "thm13", "thm41", "constant", "zero")


@dataclass
class ExperimentConfig:
    distribution: str = "basis_spike"
    d: int = 10
    sigma: float = 0.5
    diag: list = None
    replay: str = None
    algorithm: list = field(default_factory=lambda: ["oja"])
    schedule: str = "thm12"
    alpha: float = None
    eta: float = None
    cap_steps: bool = False
    n_grid: list = field(default_factory=lambda: [1024])
    trials: int = 10
    seed: int = 0
    delta: float = 0.25
    C: float = 1.0
    num_blocks: int = None
    copies: int = 11
    checkpoints: list = field(default_factory=list)
    out: str = None
    workers: int = None
    steps: int = 500
    verify_trials: int = 2000
    verify_seeds: int = 1
    pm_deltas: list = field(default_factory=lambda: [0.5, 0.25, 0.1])
    pm_trials: int = 10000
    c_cal: float = 64.0

    def __post_init__(self):
        if isinstance(self.algorithm, str):
            self.algorithm = [self.algorithm]
        self.algorithm = [str(a) for a in self.algorithm]
        self.validate()

    def validate(self):
        for a in self.algorithm:
            if a not in ALGORITHMS:
                raise ConfigError(f"field 'algorithm': unknown algorithm {a!r} (expected one of {ALGORITHMS})")
        if self.schedule not in SCHEDULES:
            raise ConfigError(f"field 'schedule': unknown schedule {self.schedule!r}")
        if self.distribution not in ("basis_spike", "bounded_feature", "replay"):
            raise ConfigError(f"field 'distribution': unknown distribution {self.distribution!r}")
        grid = list(self.n_grid)
        if not grid or any(int(n) != n or n < 1 for n in grid):
            raise ConfigError("field 'n_grid': must be a nonempty list of positive integers")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("field 'n_grid': must be strictly increasing")
        self.n_grid = [int(n) for n in grid]
        if self.trials < 1:
            raise ConfigError("field 'trials': must be at least 1")
        if not 0 < self.delta < 1:
            raise ConfigError("field 'delta': must lie in (0, 1)")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("field 'workers': must be at least 1")


_FIELD_TYPES = {f.name: f for f in fields(ExperimentConfig)}


def _strip_comment(line):
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch == "#":
            return line[:i]
    return line


def _literal(text):
    text = text.strip()
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        pass
    if text.startswith("[") and text.endswith("]"):
        return [_literal(part) for part in text[1:-1].split(",") if part.strip()]
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    if text.lower() in ("none", "null"):
        return None
    return text


def parse_config_text(text, source="<config>"):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{source}:{lineno}: field {key!r}: unknown key")
        values[key] = (_literal(val), lineno)
    return values


def load_config(path=None, overrides=None):
    """Build a config from an optional file plus ``overrides`` (already-typed values)."""
    raw = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        raw = parse_config_text(text, str(path))
    kwargs = {k: v for k, (v, _) in raw.items()}
    for k, v in (overrides or {}).items():
        if v is not None:
            kwargs[k] = v
    if "n" in kwargs:
        kwargs["n_grid"] = [kwargs.pop("n")]
    try:
        cfg = ExperimentConfig(**kwargs)
    except ConfigError as exc:
        msg = str(exc)
        for key, (_, lineno) in raw.items():
            if f"'{key}'" in msg:
                raise ConfigError(f"{path}:{lineno}: {msg}") from None
        raise
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def build_distribution(cfg):
    try:
        if cfg.distribution == "basis_spike":
            return BasisSpike(int(cfg.d), float(cfg.sigma))
        if cfg.distribution == "bounded_feature":
            if not cfg.diag:
                raise ConfigError("field 'diag': required for bounded_feature")
            return BoundedFeature(tuple(cfg.diag))
        if not cfg.replay:
            raise ConfigError("field 'replay': required for replay distribution")
        return read_replay(cfg.replay)
    except (ValueError, OSError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"distribution: {exc}") from exc


def build_schedule(cfg, dist):
    truth, mb = dist.ground_truth(), dist.bounds()
    if cfg.schedule == "thm12":
        return thm12_schedule(truth, mb)
    if cfg.schedule == "thm13":
        return thm13_schedule(truth, mb)
    if cfg.schedule == "thm41":
        if cfg.alpha is None:
            raise ConfigError("field 'alpha': required for the thm41 schedule")
        return thm41_schedule(truth, mb, float(cfg.alpha), cfg.delta)
    if cfg.schedule == "constant":
        if cfg.eta is None:
            raise ConfigError("field 'eta': required for the constant schedule")
        return Constant(float(cfg.eta))
    return None


@dataclass
class ResultRow:
    algorithm: str
    d: int
    n: int
    trial_index: int
    seed: int
    sin_sq: float
    rayleigh: float
    wall_time_ns: int


def _run_one(cfg, dist, schedule, algo, n, n_index, trial):
    seed = derive_trial_seed(cfg.seed, trial, n_index)
    start = time.perf_counter_ns()
    if algo == "oja":
        res = oja_run(dist, schedule, n, seed, cfg.checkpoints and [c for c in cfg.checkpoints if c <= n])
        w, err = res.w_final, res.sin_sq_final
    elif algo == "batch":
        w, err = batch_topvec(dist, n, seed)
    elif algo == "block_power":
        w, err = block_power(dist, n, cfg.num_blocks, seed)
    else:
        w, err = boosted_estimate(dist, schedule, n, cfg.copies, seed)
    elapsed = time.perf_counter_ns() - start
    return ResultRow(algo, dist.d, n, trial, seed, err, rayleigh(w, dist.ground_truth().sigma), elapsed)


def _run_task(args):
    cfg, algo, n, n_index, trials = args
    dist = build_distribution(cfg)
    schedule = build_schedule(cfg, dist) if algo in ("oja", "boosted") else None
    return [_run_one(cfg, dist, schedule, algo, n, n_index, t) for t in trials]


def run_rows(cfg, algo, workers=None):
    """All ``(n, trial)`` rows for one algorithm, ordered by ``(n, trial_index)``."""
    workers = workers or cfg.workers or default_workers()
    dist = build_distribution(cfg)
    schedule = build_schedule(cfg, dist) if algo in ("oja", "boosted") else None
    if algo in ("oja", "boosted") and schedule is None:
        raise ConfigError(f"field 'schedule': {cfg.schedule!r} cannot drive a run")
    if cfg.schedule == "thm13" and algo in ("oja", "boosted"):
        for n in cfg.n_grid:
            check_thm13_samples(n, schedule.beta, dist.d)
    tasks = []
    for n_index, n in enumerate(cfg.n_grid):
        idx = list(range(cfg.trials))
        per = max(1, math.ceil(len(idx) / (4 * workers)))
        tasks += [(cfg, algo, n, n_index, idx[i:i + per]) for i in range(0, len(idx), per)]
    if workers == 1:
        out = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_run_task, tasks))
    rows = [r for chunk in out for r in chunk]
    rows.sort(key=lambda r: (cfg.n_grid.index(r.n), r.trial_index))
    return rows


def write_rows(path, rows):
    with open(path, "w", newline="") as fh:
        fh.write(CSV_TAG + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        for r in rows:
            writer.writerow([r.algorithm, r.d, r.n, r.trial_index, r.seed,
                             f"{r.sin_sq:.17g}", f"{r.rayleigh:.17g}", r.wall_time_ns])


def read_rows(path):
    with open(path, newline="") as fh:
        tag = fh.readline().rstrip("\n")
        if tag != CSV_TAG:
            raise ValueError(f"{path}: missing '{CSV_TAG}' header")
        reader = csv.DictReader(fh)
        return [ResultRow(r["algorithm"], int(r["d"]), int(r["n"]), int(r["trial_index"]), int(r["seed"]),
                          float(r["sin_sq"]), float(r["rayleigh"]), int(r["wall_time_ns"])) for r in reader]


def _bound_values(cfg, dist, schedule, n):
    """Closed-form error bounds at ``n`` that are computable for this configuration (C = cfg.C)."""
    truth, mb = dist.ground_truth(), dist.bounds()
    out = {}
    try:
        out["thm11"] = theory.bernstein_wedin_bound(mb.v_bound, mb.m_bound, truth.gap, dist.d, cfg.delta, n).value
    except OjaStreamError:
        pass
    if schedule is not None and cfg.schedule in ("thm12", "thm13", "thm41"):
        try:
            out["thm41"] = theory.thm41_bound(mb.v_bound, truth.gap, dist.d, schedule.alpha, schedule.beta,
                                              n, cfg.delta, cfg.C).value
        except OjaStreamError:
            pass
        if cfg.schedule == "thm12":
            out["thm12"] = theory.thm12_bound(mb.v_bound, truth.gap, dist.d, schedule.beta, n, cfg.C).value
        if cfg.schedule == "thm13":
            out["thm13"] = theory.thm13_bound(mb.v_bound, truth.gap, n, cfg.C).value
    return out


def summarize(cfg, rows):
    dist = build_distribution(cfg)
    try:
        schedule = build_schedule(cfg, dist)
    except (OjaStreamError, ConfigError):
        schedule = None
    summary = []
    for n in cfg.n_grid:
        errs = np.array([r.sin_sq for r in rows if r.n == n])
        if not errs.size:
            continue
        p25, med, p75 = np.percentile(errs, [25, 50, 75])
        entry = {"algorithm": rows[0].algorithm, "d": dist.d, "n": n, "trials": errs.size,
                 "median": med, "p25": p25, "p75": p75}
        for name, val in _bound_values(cfg, dist, schedule, n).items():
            entry[f"frac_le_{name}"] = float(np.mean(errs <= val))
        summary.append(entry)
    return summary


def write_summary(path, summary):
    keys = []
    for s in summary:
        keys += [k for k in s if k not in keys]
    with open(path, "w", newline="") as fh:
        fh.write(CSV_TAG + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(keys)
        for s in summary:
            writer.writerow([f"{s[k]:.17g}" if isinstance(s.get(k), float) else s.get(k, "") for k in keys])


def output_paths(out, algorithms):
    """Result file per algorithm: ``out`` itself for one, ``<stem>.<algo><suffix>`` for several."""
    out = Path(out)
    if len(algorithms) == 1:
        return {algorithms[0]: out}
    return {a: out.with_name(f"{out.stem}.{a}{out.suffix or '.csv'}") for a in algorithms}


def cmd_run(cfg):
    """Run every configured algorithm; writes CSV + ``.summary.csv`` when ``cfg.out`` is set."""
    results = {}
    paths = output_paths(cfg.out, cfg.algorithm) if cfg.out else {}
    for algo in cfg.algorithm:
        rows = run_rows(cfg, algo)
        results[algo] = (rows, summarize(cfg, rows))
        if algo in paths:
            path = paths[algo]
            path.parent.mkdir(parents=True, exist_ok=True)
            write_rows(path, rows)
            write_summary(path.with_name(path.stem + ".summary.csv"), results[algo][1])
    return results


@dataclass
class VerifyRow:
    name: str
    estimate: float
    bound: float
    std_error: float
    status: str
    seed: int
    note: str = ""

    @property
    def passed(self):
        return self.status == "pass"


def verify_etas(cfg, dist):
    if cfg.schedule == "zero":
        return np.zeros(cfg.steps)
    schedule = build_schedule(cfg, dist)
    cap = step_cap(dist.bounds()) if cfg.cap_steps else None
    return step_sizes(schedule, cfg.steps, cap)


def _verdict_row(verdict, seed, note=""):
    return VerifyRow(verdict.name, verdict.estimate, verdict.bound, verdict.std_error,
                     "pass" if verdict.passed else "fail", seed, note)


def cmd_verify(cfg):
    """Model check, the four moment lemmas and the one-step power-method lemma."""
    dist = build_distribution(cfg)
    rows = []
    seed0 = derive_trial_seed(cfg.seed, 0, 0)
    rep = empirical_check(dist, max(100, cfg.verify_trials), make_rng(seed0))
    rows.append(VerifyRow("model", rep.max_deviation, rep.m_bound, 0.0,
                          "pass" if rep.ok else "fail", seed0, "; ".join(rep.violations)))
    etas = verify_etas(cfg, dist)
    lemmas = (theory.mc_lemma51, theory.mc_lemma52, theory.mc_lemma53, theory.mc_lemma54)
    for s in range(cfg.verify_seeds):
        seed = derive_trial_seed(cfg.seed, s, 1)
        products = None
        for fn in lemmas:
            name = fn.__name__.replace("mc_", "")
            try:
                if products is None:
                    products = theory.operator_products(dist, etas, cfg.verify_trials, seed)
                rows.append(_verdict_row(fn(dist, etas, cfg.verify_trials, seed, products=products), seed))
            except HypothesisViolated as exc:
                rows.append(VerifyRow(name, math.nan, math.nan, math.nan, "hypothesis_violated", seed, str(exc)))
            except (OjaStreamError, ValueError, FloatingPointError) as exc:
                rows.append(VerifyRow(name, math.nan, math.nan, math.nan, "error", seed, str(exc)))
        b = np.diag(np.r_[10.0, np.ones(dist.d - 1)])
        e1 = np.eye(dist.d)[0]
        for delta in cfg.pm_deltas:
            v = theory.mc_one_step_pm(b, e1, delta, cfg.pm_trials, seed, cfg.c_cal)
            rows.append(_verdict_row(v, seed, f"delta={delta} min_c_cal={v.extra['min_c_cal']:.4g}"))
    return rows


def cmd_bounds(cfg):
    """One row per ``n`` with every evaluable bound and its subterms."""
    dist = build_distribution(cfg)
    truth, mb = dist.ground_truth(), dist.bounds()
    schedule = build_schedule(cfg, dist)
    rows = []
    for n in cfg.n_grid:
        row = {"n": n, "flags": []}
        rep = theory.bernstein_wedin_bound(mb.v_bound, mb.m_bound, truth.gap, dist.d, cfg.delta, n)
        row["thm11"] = rep.value
        row.update({f"thm11_{k}": v for k, v in rep.terms.items()})
        if schedule is not None and hasattr(schedule, "alpha"):
            try:
                rep = theory.thm41_bound(mb.v_bound, truth.gap, dist.d, schedule.alpha, schedule.beta,
                                         n, cfg.delta, cfg.C)
                row["thm41"] = rep.value
                row.update({f"thm41_{k}": v for k, v in rep.terms.items()})
            except InsufficientSamples:
                row["flags"].append("thm41:InsufficientSamples")
        if schedule is not None:
            etas = step_sizes(schedule, n)
            try:
                rep = theory.main1_bound(etas, truth.lambda1, truth.lambda2, mb.v_bound, mb.v_bar,
                                         dist.d, cfg.delta, cfg.C)
                row["main1"] = rep.value
                row["main1_Q"] = rep.terms["Q"]
            except NonpositiveQ:
                row["flags"].append("main1:NonpositiveQ")
        row["flags"] = ";".join(row["flags"])
        rows.append(row)
    return rows


def default_workers():
    return os.cpu_count() or 1
