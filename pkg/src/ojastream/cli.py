"""Command-line front end: ``oja-stream {run,verify,bounds,check-model}``.

Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 numeric error.
"""

import argparse
import math
import sys

from . import harness
from .errors import ConfigError, OjaStreamError
from .model import empirical_check
from .rng import derive_trial_seed, make_rng

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY, EXIT_NUMERIC = 0, 2, 3, 4


def _csv_list(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def _int_list(text):
    return [int(x) for x in _csv_list(text)]


def build_parser():
    parser = argparse.ArgumentParser(prog="oja-stream", description="Streaming PCA experiments with Oja's algorithm.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "run estimators over n_grid x trials and write CSV"),
                            ("verify", "Monte Carlo lemma checks"),
                            ("bounds", "evaluate the theoretical error bounds"),
                            ("check-model", "check a distribution's M and V empirically")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--distribution", choices=["basis_spike", "bounded_feature", "replay"])
        p.add_argument("--replay", help="replay stream file")
        p.add_argument("--d", type=int)
        p.add_argument("--sigma", type=float)
        p.add_argument("--n", type=_int_list, help="sample count(s), comma separated")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--algo", type=_csv_list, help="oja, batch, block_power, boosted (comma separated)")
        p.add_argument("--schedule", choices=list(harness.SCHEDULES))
        p.add_argument("--alpha", type=float)
        p.add_argument("--eta", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--copies", type=int)
        p.add_argument("--num-blocks", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--out")
    return parser


def _overrides(args):
    ov = {"distribution": args.distribution, "replay": args.replay, "d": args.d, "sigma": args.sigma,
          "trials": args.trials, "seed": args.seed, "algorithm": args.algo, "schedule": args.schedule,
          "alpha": args.alpha, "eta": args.eta, "delta": args.delta, "copies": args.copies,
          "num_blocks": args.num_blocks, "workers": args.workers, "out": args.out}
    if args.n is not None:
        ov["n_grid"] = args.n
    return ov


def _fmt(x):
    if isinstance(x, float):
        return "nan" if math.isnan(x) else f"{x:.6g}"
    return str(x)


def _table(rows, keys, out):
    out.write("  ".join(keys) + "\n")
    for r in rows:
        out.write("  ".join(_fmt(r.get(k, "")) for k in keys) + "\n")


def _run(cfg, out):
    results = harness.cmd_run(cfg)
    for algo, (_, summary) in results.items():
        keys = []
        for s in summary:
            keys += [k for k in s if k not in keys]
        _table(summary, keys, out)
    return EXIT_OK


def _verify(cfg, out):
    rows = harness.cmd_verify(cfg)
    _table([vars(r) for r in rows], ["name", "estimate", "bound", "std_error", "status", "seed", "note"], out)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VERIFY


def _bounds(cfg, out):
    rows = harness.cmd_bounds(cfg)
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    _table(rows, keys, out)
    return EXIT_OK


def _check_model(cfg, out):
    dist = harness.build_distribution(cfg)
    rep = empirical_check(dist, max(100, cfg.trials), make_rng(derive_trial_seed(cfg.seed, 0, 0)))
    for k in ("trials", "max_deviation", "m_bound", "second_moment_left", "second_moment_right",
              "v_bound", "mean_deviation"):
        out.write(f"{k} = {_fmt(getattr(rep, k))}\n")
    for v in rep.violations:
        out.write(f"VIOLATION: {v}\n")
    return EXIT_OK if rep.ok else EXIT_VERIFY


COMMANDS = {"run": _run, "verify": _verify, "bounds": _bounds, "check-model": _check_model}


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = harness.load_config(args.config, _overrides(args))
        return COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (OjaStreamError, ArithmeticError, FloatingPointError) as exc:
        sys.stderr.write(f"numeric error: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
