"""Command-line entry point: ``restartkit run|sweep|regimes|generate``."""

import argparse
import json
import sys

import numpy as np

from .dynamics import export_regime_csv, regime_sweep
from .exceptions import InputError, NumericError
from .experiments import (
    EXPERIMENTS,
    ExperimentConfig,
    export_traces,
    export_trajectories,
    run_experiment,
    sweep,
)
from .oracles import gen_boxqp, gen_lasso, gen_logsumexp, gen_quadratic, save_problem

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

_RUN_KEYS = ("experiment", "seed", "n", "m", "s", "rho", "cond", "noise_sigma",
             "max_iters", "restart", "min_interval")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _add_problem_args(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--cond", type=float)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float)


def build_parser():
    parser = _Parser(prog="restartkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one experiment lineup")
    run.add_argument("--experiment", choices=EXPERIMENTS)
    _add_problem_args(run)
    run.add_argument("--max-iters", dest="max_iters", type=int)
    run.add_argument("--restart", help="none | fixed:<k> | func | grad")
    run.add_argument("--min-interval", dest="min_interval", type=int)
    run.add_argument("--config", help="JSON file with the same keys; flags override it")
    run.add_argument("--out", help="trace file (CSV or JSON)")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--summary", help="write the summary JSON here instead of stdout")
    run.add_argument("--trajectory", help="iterate coordinates for trajectory_2d")

    sw = sub.add_parser("sweep", help="rerun an experiment over a parameter list")
    sw.add_argument("--experiment", choices=EXPERIMENTS)
    _add_problem_args(sw)
    sw.add_argument("--max-iters", dest="max_iters", type=int)
    sw.add_argument("--restart")
    sw.add_argument("--min-interval", dest="min_interval", type=int)
    sw.add_argument("--config")
    sw.add_argument("--param", required=True, help="name=v1,v2,...")
    sw.add_argument("--summary")

    reg = sub.add_parser("regimes", help="tabulate mode regimes over a beta grid")
    reg.add_argument("--betas", default="0:1:21", help="start:stop:num or v1,v2,...")
    reg.add_argument("--lam-ratios", dest="lam_ratios", default="0.001,0.01,0.1,0.5,1")
    reg.add_argument("--out", required=True)

    gen = sub.add_parser("generate", help="write a seeded problem instance as JSON")
    gen.add_argument("--problem", required=True,
                     choices=("quadratic", "logsumexp", "lasso", "boxqp"))
    _add_problem_args(gen)
    gen.add_argument("--with-linear", dest="with_linear", action="store_true")
    gen.add_argument("--out", required=True)
    return parser


def _grid(text):
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InputError(f"bad grid {text!r}; expected start:stop:num")
        return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
    return np.array([float(v) for v in text.split(",") if v])


def _experiment_config(args):
    doc = {}
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise InputError("config file must hold a JSON object")
        doc = {k.replace("-", "_"): v for k, v in doc.items()}
    for key in _RUN_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            doc[key] = val
    if "experiment" not in doc:
        raise InputError("--experiment is required (flag or config key)")
    try:
        return ExperimentConfig.from_dict(doc)
    except TypeError as exc:
        raise InputError(str(exc)) from exc


def _emit(doc, path):
    text = json.dumps(doc, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_run(args):
    cfg = _experiment_config(args)
    traces, summary = run_experiment(cfg)
    if args.out:
        export_traces(traces, args.out, args.format)
    if args.trajectory:
        if cfg.experiment != "trajectory_2d":
            raise InputError("--trajectory only applies to trajectory_2d")
        export_trajectories(traces, args.trajectory)
    _emit(summary.to_dict(), args.summary)


def _coerce(name, raw):
    if name in ("seed", "n", "m", "s", "max_iters", "min_interval"):
        return int(raw)
    if name == "restart":
        return raw
    return float(raw)


def _cmd_sweep(args):
    cfg = _experiment_config(args)
    if "=" not in args.param:
        raise InputError("--param must look like name=v1,v2,...")
    name, raw = args.param.split("=", 1)
    name = name.strip().replace("-", "_")
    try:
        values = [_coerce(name, v) for v in raw.split(",") if v]
    except ValueError as exc:
        raise InputError(f"bad value in --param: {exc}") from exc
    if not values:
        raise InputError("--param lists no values")
    summaries = sweep(cfg, name, values)
    _emit({"param": name, "values": values,
           "summaries": [s.to_dict() for s in summaries]}, args.summary)


def _cmd_regimes(args):
    export_regime_csv(regime_sweep(_grid(args.betas), _grid(args.lam_ratios)), args.out)


def _cmd_generate(args):
    seed = 0 if args.seed is None else args.seed
    kind = args.problem

    def need(name):
        val = getattr(args, name)
        if val is None:
            raise InputError(f"--{name.replace('_', '-')} is required for {kind}")
        return val

    if kind == "quadratic":
        prob = gen_quadratic(need("n"), need("cond"), seed, with_linear=args.with_linear)
    elif kind == "logsumexp":
        prob = gen_logsumexp(need("n"), need("m"), need("rho"), seed)
    elif kind == "lasso":
        sigma = 0.1 if args.noise_sigma is None else args.noise_sigma
        prob = gen_lasso(need("n"), need("m"), need("s"), need("rho"), sigma, seed)
    else:
        prob = gen_boxqp(need("n"), need("cond"), seed)
    save_problem(prob, args.out)


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "regimes": _cmd_regimes,
             "generate": _cmd_generate}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        _COMMANDS[args.command](args)
    except NumericError as exc:
        print(f"restartkit: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, OSError) as exc:
        print(f"restartkit: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
