"""Command-line entry point: ``glv-econ <command> [--config FILE] [flags]``.

Every option can come from a flat ``key = value`` config file or a flag;
flags win. Exit codes: 0 ok, 2 configuration error, 3 runtime error,
4 fit did not converge.
"""
import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import distfit, dynamics, engine, io, metrics, sweep
from .econ import (ConstantSpec, FixedPerAgent, FixedUniform, NormalSpec, StochasticPerStep,
                   derive_ratios, PopulationState)
from .exceptions import ConfigError, GLVEconError, NonConvergence
from .policy import PolicySpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_NONCONVERGENCE = 4

# hill_alpha in CLI reports always uses the reference tail size, so toy runs
# smaller than the tail report it as absent instead of rescaling
CLI_N_TAIL = metrics.REFERENCE_TAIL


def parse_range(text):
    """``lo:hi:step`` (inclusive) or a comma-separated list of floats."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be lo:hi:step, got {text!r}")
        lo, hi, step = (float(p) for p in parts)
        if not step > 0 or hi < lo:
            raise ConfigError(f"bad range {text!r}")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return tuple(round(lo + i * step, 10) for i in range(n))
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"expected numbers, got {text!r}") from None


def parse_ints(text):
    try:
        return tuple(int(p) for p in str(text).split(",") if p.strip())
    except ValueError:
        raise ConfigError(f"expected integers, got {text!r}") from None


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


@dataclass(frozen=True)
class Option:
    key: str
    type: object = str
    default: object = None
    help: str = ""
    choices: tuple = None


SIMULATE_OPTIONS = (
    Option("model", str, "1a", "preset model or 'custom'", ("1a", "1b", "1c", "1d", "custom")),
    Option("seed", int, None, "random seed (required)"),
    Option("agents", int, None, "number of agents"),
    Option("iterations", int, None, "number of iterations"),
    Option("rho", float, None, "profit ratio"),
    Option("total_income", float, None, "profit pool per iteration; needed when rho = 1"),
    Option("wage_mean", float, None, "mean wage"),
    Option("wage_sd", float, None, "wage standard deviation; 0 for identical wages"),
    Option("consumption", str, None, "consumption rule", ("stochastic", "per-agent", "uniform")),
    Option("consumption_mean", float, None, "mean consumption rate"),
    Option("consumption_sd", float, None, "consumption sd (relative for 'stochastic')"),
    Option("policy", str, None, "policy to apply", ("none", "compulsory-saving")),
    Option("threshold", float, 0.9, "policy wealth threshold as a fraction of mean wealth"),
    Option("cut", float, 0.2, "policy consumption cut fraction"),
    Option("geometric_snapshots", int, 0, "extra geometrically spaced wealth snapshots"),
    Option("snapshots", parse_ints, (), "extra snapshot iterations, comma separated"),
    Option("out_dir", str, ".", "output directory"),
    Option("prefix", str, "", "file name prefix"),
)

SWEEP_OPTIONS = (
    Option("base", str, "1c", "base model", ("1a", "1b", "1c", "1d")),
    Option("seed", int, None, "base seed (required); replicate k uses seed + k"),
    Option("rho", parse_range, tuple(np.round(np.arange(0.0, 1.0001, 0.05), 2)), "profit ratios, lo:hi:step or list"),
    Option("v", parse_range, None, "relative consumption spreads; default keeps the base model's"),
    Option("replicates", int, 5, "seeds per cell"),
    Option("agents", int, None, "number of agents"),
    Option("iterations", int, None, "number of iterations"),
    Option("workers", int, None, "worker processes (default from the environment)"),
    Option("out", str, "sweep.csv", "output CSV"),
    Option("law_out", str, None, "optional JSON with the fitted tail-exponent law"),
)

FIT_OPTIONS = (
    Option("family", str, "glv", "density family", tuple(f.value for f in distfit.Family)),
    Option("input", str, None, "histogram CSV (bin_lo,bin_hi,count) or a CSV of values"),
    Option("column", str, None, "value column when --input holds raw values"),
    Option("bins", int, 100, "bins used when --input holds raw values"),
    Option("assumed_error", float, distfit.DEFAULT_ASSUMED_ERROR, "per-bin error in chi-squared"),
    Option("max_evaluations", int, distfit.MAX_EVALUATIONS, "optimizer budget"),
    Option("out", str, None, "output JSON (default stdout)"),
    Option("pdf_out", str, None, "optional CSV of the fitted density at bin centers"),
)

METRICS_OPTIONS = (
    Option("input", str, None, "CSV of values"),
    Option("column", str, None, "value column (default wealth or the only column)"),
    Option("n_tail", int, CLI_N_TAIL, "agents in the tail exponent estimate"),
    Option("out", str, None, "output JSON (default stdout)"),
    Option("histogram", str, None, "optional histogram CSV"),
    Option("bins", int, 100, "histogram bins"),
)

LV_OPTIONS = (
    Option("a", float, 1.0, "prey growth rate"),
    Option("c", float, 1.0, "predator death rate"),
    Option("alpha", float, 1.0, "predation rate"),
    Option("gamma", float, 1.0, "predator conversion rate"),
    Option("x0", float, 2.0, "initial prey"),
    Option("y0", float, 1.0, "initial predators"),
    Option("dt", float, 1e-3, "step size"),
    Option("steps", int, 100_000, "number of steps"),
    Option("record_every", int, 1, "keep every n-th state"),
    Option("out", str, "lv.csv", "output CSV"),
)

CITY_OPTIONS = (
    Option("lambda_mean", float, 1.0, "mean growth factor"),
    Option("lambda_sd", float, 0.1, "growth factor sd"),
    Option("a_mean", float, 0.1, "mean immigration rate"),
    Option("a_sd", float, 0.0, "immigration rate sd"),
    Option("c_mean", float, 0.1, "mean crowding rate"),
    Option("c_sd", float, 0.0, "crowding rate sd"),
    Option("cities", int, 10_000, "number of cities"),
    Option("steps", int, 10_000, "number of steps"),
    Option("seed", int, 0, "random seed"),
    Option("initial", float, 1.0, "initial population"),
    Option("shared_lambda", _bool, False, "draw one growth factor per step for all cities"),
    Option("out", str, "city.csv", "trajectory CSV"),
    Option("final_out", str, "city_final.csv", "final populations CSV"),
)


def resolve(options, flags, config_path=None):
    """Merge defaults, config file and flags (in increasing priority)."""
    by_key = {o.key: o for o in options}
    values = {o.key: o.default for o in options}
    if config_path:
        try:
            raw = io.load_config(config_path)
        except OSError as exc:
            raise ConfigError(f"cannot read config {config_path}: {exc}") from None
        unknown = sorted(set(raw) - set(by_key))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for key, text in raw.items():
            values[key] = _convert(by_key[key], text)
    for key, value in flags.items():
        values[key] = value
    for key, value in values.items():
        opt = by_key[key]
        if opt.choices and value is not None and value not in opt.choices:
            raise ConfigError(f"{key} must be one of {', '.join(opt.choices)}, got {value!r}")
    return values


def _convert(opt, text):
    try:
        return opt.type(text)
    except ConfigError:
        raise
    except (TypeError, ValueError):
        raise ConfigError(f"invalid value for {opt.key}: {text!r}") from None


def _flag_type(opt):
    def convert(text):
        try:
            return _convert(opt, text)
        except ConfigError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    convert.__name__ = opt.key
    return convert


def _add_options(parser, options):
    parser.add_argument("--config", help="flat key = value file; flags override it")
    for opt in options:
        parser.add_argument("--" + opt.key.replace("_", "-"), dest=opt.key, type=_flag_type(opt),
                            default=argparse.SUPPRESS, help=opt.help, metavar=opt.key.upper())


def _summary(text):
    print(text, file=sys.stderr)


def _require(values, key, command):
    if values[key] is None:
        raise ConfigError(f"{command} needs --{key.replace('_', '-')} (flag or config key)")
    return values[key]


# ---------------------------------------------------------------- simulate

def build_params(values):
    """EconParams from resolved simulate options."""
    seed = _require(values, "seed", "simulate")
    name = values["model"]
    base = engine.preset("1c" if name == "custom" else name, seed=seed).params
    changes = {}
    if values["agents"] is not None:
        changes["n_agents"] = values["agents"]
    if values["iterations"] is not None:
        changes["n_iterations"] = values["iterations"]
    if values["rho"] is not None:
        changes["profit_ratio"] = values["rho"]

    wage = base.wage_spec
    mean = values["wage_mean"] if values["wage_mean"] is not None else wage.mean
    sd = values["wage_sd"] if values["wage_sd"] is not None else getattr(wage, "sd", 0.0)
    changes["wage_spec"] = ConstantSpec(mean) if sd == 0 else NormalSpec(mean, sd)

    cons = base.consumption_spec
    kind = values["consumption"] or {StochasticPerStep: "stochastic", FixedPerAgent: "per-agent",
                                     FixedUniform: "uniform"}[type(cons)]
    c_mean = values["consumption_mean"] if values["consumption_mean"] is not None else cons.mean
    c_sd = values["consumption_sd"]
    if kind == "stochastic":
        changes["consumption_spec"] = StochasticPerStep(
            c_mean, c_sd if c_sd is not None else getattr(cons, "relative_sd", 0.0))
    elif kind == "per-agent":
        changes["consumption_spec"] = FixedPerAgent(c_mean, c_sd if c_sd is not None else getattr(cons, "sd", 0.0))
    else:
        if c_sd:
            raise ConfigError("uniform consumption takes no consumption_sd")
        changes["consumption_spec"] = FixedUniform(c_mean)

    rho = changes.get("profit_ratio", base.profit_ratio)
    if values["total_income"] is not None:
        if rho < 1.0:
            raise ConfigError("total_income only applies at rho = 1")
        changes["total_income_per_step"] = values["total_income"]
    elif rho == 1.0:
        wages = engine.draw_wages(base.with_(**{**changes, "profit_ratio": 0.5}))
        changes["total_income_per_step"] = sweep.RHO_ONE_POOL_FACTOR * float(wages.sum())

    if values["policy"] not in (None, "none"):
        changes["policy"] = PolicySpec(values["policy"], values["threshold"], values["cut"])
    changes["geometric_snapshots"] = values["geometric_snapshots"]
    changes["snapshot_iterations"] = values["snapshots"]
    return base.with_(**changes)


def simulation_report(result, model="custom", n_tail=CLI_N_TAIL):
    """The metrics JSON document for one run."""
    p = result.params
    w, y, e = result.final_wealth, result.final_income, result.wages
    mw = metrics.compute_metrics(w, n_tail)
    my = metrics.compute_metrics(y, n_tail)
    state = PopulationState(t=p.n_iterations, wealth=w, wages=e)
    stationarity = engine.detect_stationarity(result)
    doc = {
        "model": model,
        "seed": p.seed,
        "n_agents": p.n_agents,
        "n_iterations": p.n_iterations,
        "profit_ratio": p.profit_ratio,
        "n_tail": n_tail,
        "gini_wealth": mw.gini,
        "gini_income": my.gini,
        "decile_wealth": mw.decile_ratio,
        "decile_income": my.decile_ratio,
        "poverty_wealth": mw.poverty_ratio,
        "poverty_income": my.poverty_ratio,
        "max_min_wealth": metrics.max_min_ratio(w),
        "ratios": vars(derive_ratios(p, state)),
        "stationarity": vars(stationarity),
        "floor_events": result.floor_events,
        "policy": p.policy.to_dict() if p.policy is not None else None,
    }
    if e.sum() > 0:
        doc["gini_earnings"] = metrics.gini(e)
    # absent rather than null: the tail does not exist at this population size
    if mw.hill_alpha is not None:
        doc["hill_alpha_wealth"] = mw.hill_alpha
    if my.hill_alpha is not None:
        doc["hill_alpha_income"] = my.hill_alpha
    return doc


def cmd_simulate(values):
    params = build_params(values)
    result = engine.run(params)
    out = Path(values["out_dir"])
    pre = values["prefix"]
    io.write_csv(out / f"{pre}wealth.csv", ("rank", "wealth", "income"),
                 io.wealth_rows(result.final_wealth, result.final_income))
    agg = result.aggregate_series
    io.write_csv(out / f"{pre}aggregates.csv",
                 ("t", "total_wealth", "total_consumption", "total_income", "profit_rate"),
                 zip(range(1, len(agg) + 1), agg.total_wealth, agg.total_consumption,
                     agg.total_income, agg.profit_rate))
    doc = simulation_report(result, values["model"])
    io.write_json(out / f"{pre}metrics.json", doc)
    _summary(f"simulate {values['model']} seed={params.seed}: gini wealth {doc['gini_wealth']:.4f}, "
             f"income {doc['gini_income']:.4f}; wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------- sweep

def cmd_sweep(values):
    seed = _require(values, "seed", "sweep")
    overrides = {}
    if values["agents"] is not None:
        overrides["n_agents"] = values["agents"]
    if values["iterations"] is not None:
        overrides["n_iterations"] = values["iterations"]
    base = engine.preset(values["base"], seed=seed, **overrides)
    spec = sweep.SweepSpec(base=base, rho_values=values["rho"], v_values=values["v"],
                           replicates=values["replicates"])
    table = sweep.run_sweep(spec, workers=values["workers"])
    io.atomic_write_text(values["out"], table.to_csv())
    msg = f"sweep: {len(table)} cells x {spec.replicates} seeds -> {values['out']}"
    if values["law_out"]:
        law = sweep.fit_alpha_law(table)
        io.write_json(values["law_out"], law.to_dict())
        msg += f"; alpha law c={law.c:.3f} p={law.p:.3f}"
    _summary(msg)
    return EXIT_OK


# ---------------------------------------------------------------- fit

def _load_histogram(values):
    path = _require(values, "input", "fit")
    if io.is_histogram_file(path):
        return io.read_histogram(path, values["assumed_error"])
    data = io.read_values(path, values["column"])
    return distfit.histogram(data, n_bins=values["bins"], assumed_error=values["assumed_error"])


def cmd_fit(values):
    hist = _load_histogram(values)
    res = distfit.fit(hist, values["family"], max_evaluations=values["max_evaluations"])
    doc = distfit.params_to_dict(res.params)
    doc.update(reduced_chi2=res.reduced_chi2, iterations=res.iterations, converged=res.converged)
    _emit_json(values["out"], doc)
    if values["pdf_out"]:
        centers = hist.centers
        io.write_csv(values["pdf_out"], ("w", "count", "fitted"),
                     zip(centers, hist.counts, distfit.expected_counts(hist, res.params)))
    _summary(f"fit {res.family.value}: reduced chi2 {res.reduced_chi2:.6g} after {res.iterations} evaluations")
    if not res.converged:
        raise NonConvergence(f"{res.family.value} fit did not converge", best=res)
    return EXIT_OK


def _emit_json(path, doc):
    if path:
        io.write_json(path, doc)
    else:
        sys.stdout.write(io.json_text(doc))


# ---------------------------------------------------------------- metrics

def cmd_metrics(values):
    path = _require(values, "input", "metrics")
    x = io.read_values(path, values["column"])
    rep = metrics.compute_metrics(x, values["n_tail"])
    doc = {"n": int(x.size), "gini": rep.gini, "decile_ratio": rep.decile_ratio,
           "poverty_ratio": rep.poverty_ratio, "n_tail": rep.n_tail}
    if rep.hill_alpha is not None:
        doc["hill_alpha"] = rep.hill_alpha
    _emit_json(values["out"], doc)
    if values["histogram"]:
        io.write_histogram(values["histogram"], distfit.histogram(x, n_bins=values["bins"]))
    _summary(f"metrics: n={x.size} gini {rep.gini:.4f} decile {rep.decile_ratio:.4g}")
    return EXIT_OK


# ---------------------------------------------------------------- lv, city

def cmd_lv(values):
    p = dynamics.LVParams(values["a"], values["c"], values["alpha"], values["gamma"])
    traj = dynamics.lv_trajectory(values["x0"], values["y0"], p, values["dt"], values["steps"],
                                  values["record_every"])
    io.write_csv(values["out"], ("t", "x", "y"), zip(traj.t, traj.x, traj.y))
    _summary(f"lv: {values['steps']} steps, invariant drift {traj.max_relative_drift(p):.3e} -> {values['out']}")
    return EXIT_OK


def cmd_city(values):
    params = dynamics.CityModelParams(
        lambda_spec=dynamics.RateSpec(values["lambda_mean"], values["lambda_sd"]),
        a_spec=dynamics.RateSpec(values["a_mean"], values["a_sd"]),
        c_spec=dynamics.RateSpec(values["c_mean"], values["c_sd"]),
        n_cities=values["cities"], n_steps=values["steps"], seed=values["seed"],
        initial_population=values["initial"], lambda_per_city=not values["shared_lambda"],
    )
    res = dynamics.run_city_model(params)
    io.write_csv(values["out"], ("t", "mean_pop", "max_pop"),
                 zip(range(1, params.n_steps + 1), res.mean_series, res.max_series))
    io.write_csv(values["final_out"], ("population",), ((v,) for v in res.populations))
    _summary(f"city: {params.n_cities} cities, final mean {res.mean_series[-1]:.4g}, "
             f"max {res.max_series[-1]:.4g} -> {values['out']}")
    return EXIT_OK


COMMANDS = {
    "simulate": (SIMULATE_OPTIONS, cmd_simulate, "run one economy and write wealth, metrics and aggregates"),
    "sweep": (SWEEP_OPTIONS, cmd_sweep, "run a profit-ratio / consumption-spread grid"),
    "fit": (FIT_OPTIONS, cmd_fit, "fit a density family to a histogram"),
    "metrics": (METRICS_OPTIONS, cmd_metrics, "inequality statistics of a column of values"),
    "lv": (LV_OPTIONS, cmd_lv, "integrate the predator-prey system"),
    "city": (CITY_OPTIONS, cmd_city, "run the city-size model"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="glv-econ", description="Wealth and income distribution models.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (options, _, help_text) in COMMANDS.items():
        _add_options(sub.add_parser(name, help=help_text, description=help_text), options)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    flags = dict(vars(args))
    command = flags.pop("command")
    config = flags.pop("config", None)
    options, handler, _ = COMMANDS[command]
    try:
        values = resolve(options, flags, config)
        return handler(values)
    except ConfigError as exc:
        print(f"glv-econ {command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"glv-econ {command}: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (GLVEconError, ArithmeticError, ValueError, OSError) as exc:
        print(f"glv-econ {command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
