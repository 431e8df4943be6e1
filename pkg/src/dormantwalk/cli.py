"""Command-line front end: ``dormantwalk <subcommand> [flags]``.

Subcommands: simulate, exact, green, renewal, asympt, compare, accept.
Parameters come from ``--config`` (a flat JSON object whose keys are the
long flag names with dashes replaced by underscores) and are overridden by
explicit flags.  Output is CSV (default), TSV or JSON, to ``--out`` or
stdout.

Exit codes: 0 success, 1 invalid input, 2 numerical non-convergence,
3 acceptance failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import acceptance, exact, green, renewal
from .asymptotics import baseline_asymptotic, crossover, responsive_asymptotic
from .model import estimate_survival
from .params import InvalidParameterError, ModelParams, NonConvergenceError
from .records import ResultRecord, write_record

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGENCE, EXIT_ACCEPTANCE = 0, 1, 2, 3

PARAM_KEYS = ("d", "kappa", "rho", "gamma", "s0", "s1")
DEFAULTS = {
    "d": 1, "kappa": 1.0, "rho": 1.0, "gamma": 1.0, "s0": 1.0, "s1": 1.0,
    "t_grid": [10.0, 20.0, 50.0], "paths": 100_000, "seed": 1, "radius": None,
    "lambda": [1e-6], "estimator": "exposure", "x": None, "convention": "resolvent",
    "format": "csv", "out": None, "criteria": None,
}


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model and run parameters")
    g.add_argument("--config", help="JSON file with default values for any flag")
    g.add_argument("--d", type=int)
    for name in ("kappa", "rho", "gamma", "s0", "s1"):
        g.add_argument(f"--{name}", type=float)
    g.add_argument("--t", "--t-grid", dest="t_grid", type=_floats,
                   help="comma-separated evaluation times")
    g.add_argument("--paths", type=int, help="Monte Carlo paths")
    g.add_argument("--seed", type=int, help="master seed")
    g.add_argument("--radius", type=int, help="box radius of the exact solver")
    g.add_argument("--lambda", dest="lambda", type=_floats, help="comma-separated lambda values")
    g.add_argument("--estimator", choices=("exposure", "hard_kill", "both"))
    g.add_argument("--x", type=_ints, help="lattice site, comma-separated")
    g.add_argument("--convention", choices=("resolvent", "generating", "occupation"))
    g.add_argument("--out", help="output path (default stdout)")
    g.add_argument("--format", choices=("csv", "tsv", "json"))

    parser = argparse.ArgumentParser(prog="dormantwalk", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "Monte Carlo survival on a time grid",
        "exact": "bracketed survival from the truncated master equation",
        "green": "lattice Green kernel values",
        "renewal": "clock escape probability, Z1 expansion and escape probability",
        "asympt": "closed-form asymptotics for all models and readings",
        "compare": "exact survival against the asymptotic predictions",
        "accept": "run the acceptance criteria",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common], help=text)
        if name == "accept":
            p.add_argument("--criteria", type=_ints, help="subset, e.g. 1,2,9")
    return parser


def resolve_config(args) -> dict:
    config = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParameterError(f"cannot read config {args.config!r}: {exc}")
        if not isinstance(loaded, dict):
            raise InvalidParameterError("the config file must hold a JSON object")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise InvalidParameterError(f"unknown config keys: {sorted(unknown)}")
        config.update(loaded)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    config["command"] = args.command
    for key in ("t_grid", "lambda"):
        if not isinstance(config[key], list):
            config[key] = [config[key]]
        config[key] = [float(v) for v in config[key]]
    return config


def params_of(config) -> ModelParams:
    return ModelParams(**{k: config[k] for k in PARAM_KEYS})


def _run_config(config):
    # the part of the config that determines results
    return {k: v for k, v in config.items() if k not in ("out", "format")}


def cmd_simulate(config) -> ResultRecord:
    params = params_of(config)
    modes = ("exposure", "hard_kill") if config["estimator"] == "both" else (config["estimator"],)
    rows = []
    for i, mode in enumerate(modes):
        # each estimator gets its own derived stream so the two are independent
        seed = config["seed"] + i
        for e in estimate_survival(params, config["t_grid"], config["paths"], seed, mode):
            rows.append([mode, e.time, e.mean, e.stderr, e.n_paths, seed])
    return ResultRecord("simulate", _run_config(config),
                        ["estimator", "t", "survival", "stderr", "paths", "seed"], rows,
                        config["seed"])


def cmd_exact(config) -> ResultRecord:
    params = params_of(config)
    curve = exact.survival(params, config["radius"], sorted(config["t_grid"]))
    rows = [[float(t), float(lo), float(up), float(up - lo)]
            for t, lo, up in zip(curve.times, curve.lower, curve.upper)]
    return ResultRecord("exact", _run_config(config), ["t", "lower", "upper", "gap"], rows,
                        None)


def cmd_green(config) -> ResultRecord:
    d = config["d"]
    if d < 1:
        raise InvalidParameterError(f"d must be >= 1, got {d}")
    x = tuple(config["x"] or (0,) * d)
    if len(x) != d:
        raise InvalidParameterError(f"--x has {len(x)} coordinates but d = {d}")
    rows = []
    conv = config["convention"]
    xs = ";".join(map(str, x))
    if conv == "occupation":
        rows.append([d, conv, xs, 0.0, green.green_d3(x, "occupation"), float("nan")])
    else:
        for lam in config["lambda"]:
            if conv == "resolvent":
                g = green.green_resolvent(d, x, lam)
            else:
                g = green.green_generating(d, x, lam)
            rows.append([d, g.convention, xs, g.parameter, g.value, g.est_error])
    return ResultRecord("green", _run_config(config),
                        ["dim", "convention", "x", "parameter", "value", "est_error"], rows)


def cmd_renewal(config) -> ResultRecord:
    params = params_of(config)
    rows = []
    for clock in ("s1", "s0"):
        if (params.s1 if clock == "s1" else params.s0) > 0:
            rows.append(["clock_escape", f"clock={clock}", float("nan"),
                         renewal.clock_escape_probability(params, clock)])
    if params.d <= 2:
        readings = ("harmonic",) if params.d == 1 else ("resolvent", "generating", "harmonic")
        for lam in config["lambda"]:
            for form in ("stated", "derived"):
                for reading in readings if form == "stated" else ("harmonic",):
                    label = form if params.d == 1 else f"{form}:{reading}"
                    rows.append(["z1_laplace", label, lam,
                                 renewal.z1_laplace_expansion(params, lam, form, reading)])
    else:
        for reading in ("occupation", "discrete", "derived"):
            esc = renewal.escape_probability_d3(params, reading)
            rows.append(["escape_probability", reading, float("nan"), esc.value])
            rows.append(["renewal_green", reading, float("nan"), esc.renewal_green])
    return ResultRecord("renewal", _run_config(config),
                        ["quantity", "reading", "lambda", "value"], rows)


def cmd_asympt(config) -> ResultRecord:
    params = params_of(config)
    t = config["t_grid"][-1] if params.d <= 2 else None
    rows = []
    resp = responsive_asymptotic(params, t)
    for name, value in resp.readings.items():
        rows.append(["responsive", name, value, _at_t(value, params.d, t)])
    none = baseline_asymptotic(params, "none", t)
    rows.append(["none", "closed_form", none.leading_value, none.value_at_t])
    if params.s1 > 0:
        st = baseline_asymptotic(params, "stochastic", t)
        rows.append(["stochastic", "closed_form", st.leading_value, st.value_at_t])
    cross = crossover(params)
    rows.append(["crossover", "d1_threshold", cross.d1_threshold, float(cross.d1_responsive_wins)])
    for k, v in cross.d2_c2.items():
        rows.append(["crossover", f"d2_C2_{k}", v, float(cross.d2_responsive_wins[k])])
    for k, v in cross.d3_large_s1_limit.items():
        rows.append(["crossover", f"d3_large_s1_limit_{k}", v,
                     float(cross.d3_condition_holds[k])])
    return ResultRecord("asympt", _run_config(config),
                        ["model", "reading", "leading_value", "value_at_t"], rows)


def _at_t(value, d, t):
    if d >= 3:
        return value
    return value / math.sqrt(math.pi * t) if d == 1 else value / math.log(t)


def cmd_compare(config) -> ResultRecord:
    params = params_of(config)
    times = sorted(config["t_grid"])
    curve = exact.survival(params, config["radius"], times)
    resp = responsive_asymptotic(params)
    none = baseline_asymptotic(params, "none")
    names = list(resp.readings)
    rows = []
    for t, lo, up in zip(curve.times, curve.lower, curve.upper):
        t, up = float(t), float(up)
        usable = params.d != 2 or t > 1
        row = [t, up, float(up - float(lo))]
        for name in names:
            row.append(_at_t(resp.readings[name], params.d, t) if usable else float("nan"))
        row.append(_at_t(none.leading_value, params.d, t) if usable else float("nan"))
        # the ratio exact / prediction tends to 1 when the reading is right
        for name in names:
            row.append(up / row[3 + names.index(name)] if usable else float("nan"))
        rows.append(row)
    columns = (["t", "exact", "gap"] + [f"pred_{n}" for n in names] + ["pred_none"]
               + [f"ratio_{n}" for n in names])
    return ResultRecord("compare", _run_config(config), columns, rows)


def cmd_accept(config):
    results = acceptance.run_all(config["criteria"], echo=print)
    rows = [[r.number, r.title, int(r.passed), r.summary, r.seconds] for r in results]
    record = ResultRecord("accept", _run_config(config),
                          ["criterion", "title", "passed", "summary", "seconds"], rows)
    return record, all(r.passed for r in results)


COMMANDS = {
    "simulate": cmd_simulate,
    "exact": cmd_exact,
    "green": cmd_green,
    "renewal": cmd_renewal,
    "asympt": cmd_asympt,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        config = resolve_config(args)
        if args.command == "accept":
            record, passed = cmd_accept(config)
            if config["out"]:
                write_record(record, config["out"], config["format"])
            return EXIT_OK if passed else EXIT_ACCEPTANCE
        record = COMMANDS[args.command](config)
        write_record(record, config["out"], config["format"])
    except NonConvergenceError as exc:
        print(f"dormantwalk: numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (InvalidParameterError, ValueError, TypeError, MemoryError, KeyError) as exc:
        print(f"dormantwalk: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
