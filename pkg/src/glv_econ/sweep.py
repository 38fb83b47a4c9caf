"""Profit-ratio and consumption-spread sweeps, and the empirical tail-exponent law.

A sweep runs the engine on every (rho, v, replicate) cell, where ``v`` is the
standard deviation of the per-agent consumption rate relative to its mean, and
averages inequality metrics over replicates.
"""
import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, check_array

from . import engine, metrics
from .econ import FixedPerAgent
from .exceptions import ConfigError, InsufficientGrid

CSV_HEADER = (
    "rho", "v", "seed_count", "gini_wealth", "gini_income", "decile_wealth", "decile_income",
    "poverty_wealth", "poverty_income", "alpha_wealth", "alpha_defined",
)
MAX_V = 0.25
# A single agent holding more than this share of all wealth marks a condensed
# economy, where the top order statistics no longer trace a power tail.
CONDENSATION_SHARE = 0.01
# Limit pool at rho = 1, in units of the total wage bill: the rho = 0.9 pool.
RHO_ONE_POOL_FACTOR = 9.0
THREADS_ENV = "GLV_ECON_THREADS"

# Tail slopes reported for the 1C model at rho = 0.1 ... 0.6.
REFERENCE_TAIL_SLOPES = {0.1: 17.42, 0.2: 14.81, 0.3: 12.20, 0.4: 9.59, 0.5: 6.97, 0.6: 4.23}


@dataclass(frozen=True)
class SweepSpec:
    base: engine.ModelPreset = field(default_factory=lambda: engine.preset("1c"))
    rho_values: tuple = tuple(np.round(np.arange(0.0, 1.0001, 0.05), 2))
    v_values: Optional[tuple] = (0.05, 0.10, 0.15, 0.20, 0.25)
    replicates: int = 5

    def __post_init__(self):
        if isinstance(self.base, (str, engine.ModelName)):
            object.__setattr__(self, "base", engine.preset(self.base))
        rhos = tuple(float(r) for r in self.rho_values)
        if not rhos or any(not 0.0 <= r <= 1.0 for r in rhos):
            raise ConfigError("rho values must lie in [0, 1]")
        object.__setattr__(self, "rho_values", rhos)
        if self.v_values is not None:
            vs = tuple(float(v) for v in self.v_values)
            if not vs or any(not 0.0 < v <= MAX_V + 1e-12 for v in vs):
                raise ConfigError(f"v values must lie in (0, {MAX_V}]")
            if not isinstance(self.base.params.consumption_spec, FixedPerAgent):
                raise ConfigError("v sweeps need a base model with per-agent consumption rates")
            object.__setattr__(self, "v_values", vs)
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")

    @property
    def base_v(self):
        spec = self.base.params.consumption_spec
        return round(spec.sd / spec.mean, 12) if isinstance(spec, FixedPerAgent) else math.nan

    def cells(self):
        vs = self.v_values if self.v_values is not None else (self.base_v,)
        return [(rho, v) for rho in sorted(set(self.rho_values)) for v in sorted(set(vs))]


@dataclass(frozen=True)
class SweepRow:
    rho: float
    v: float
    seed_count: int
    gini_wealth: float
    gini_income: float
    decile_wealth: float
    decile_income: float
    poverty_wealth: float
    poverty_income: float
    alpha_wealth: Optional[float]
    alpha_defined: bool
    alpha_income: Optional[float] = None
    max_wealth_share: float = math.nan
    alpha_wealth_sd: float = math.nan


@dataclass(frozen=True)
class SweepTable:
    rows: tuple

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def row(self, rho, v=None):
        for r in self.rows:
            if math.isclose(r.rho, rho, abs_tol=1e-9) and (v is None or math.isclose(r.v, v, abs_tol=1e-9)):
                return r
        raise KeyError((rho, v))

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([_fmt(getattr(r, k)) for k in CSV_HEADER])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ConfigError(f"unexpected sweep header {reader.fieldnames}")
        rows = []
        for rec in reader:
            alpha = rec["alpha_wealth"]
            rows.append(SweepRow(
                rho=float(rec["rho"]), v=float(rec["v"]), seed_count=int(rec["seed_count"]),
                gini_wealth=float(rec["gini_wealth"]), gini_income=float(rec["gini_income"]),
                decile_wealth=float(rec["decile_wealth"]), decile_income=float(rec["decile_income"]),
                poverty_wealth=float(rec["poverty_wealth"]), poverty_income=float(rec["poverty_income"]),
                alpha_wealth=float(alpha) if alpha else None,
                alpha_defined=rec["alpha_defined"].strip().lower() == "true",
            ))
        return cls(rows=tuple(rows))


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    return str(value)


def cell_params(spec, rho, v, replicate):
    """EconParams for one sweep cell; replicate k uses seed ``base_seed + k``."""
    base = spec.base.params
    changes = dict(profit_ratio=rho, seed=base.seed + replicate, total_income_per_step=None)
    cons = base.consumption_spec
    if isinstance(cons, FixedPerAgent) and not math.isnan(v):
        changes["consumption_spec"] = FixedPerAgent(cons.mean, v * cons.mean)
    if rho == 1.0:
        wages = engine.draw_wages(base.with_(seed=changes["seed"], profit_ratio=0.5))
        changes["total_income_per_step"] = RHO_ONE_POOL_FACTOR * float(wages.sum())
    return base.with_(**changes)


def _run_cell(params):
    res = engine.run(params)
    w, y = res.final_wealth, res.final_income
    share = float(w.max() / w.sum())
    n_tail = metrics.default_n_tail(w.size)
    defined = params.profit_ratio > 0 and share < CONDENSATION_SHARE
    alpha_w = alpha_y = None
    try:
        alpha_w = metrics.hill_alpha(w, n_tail)
        alpha_y = metrics.hill_alpha(y, n_tail)
    except (metrics.TooFewAgents, metrics.DegenerateTail, ValueError):
        defined = False
    return dict(
        gini_wealth=metrics.gini(w), gini_income=metrics.gini(y),
        decile_wealth=metrics.decile_ratio(w), decile_income=metrics.decile_ratio(y),
        poverty_wealth=metrics.poverty_ratio(w), poverty_income=metrics.poverty_ratio(y),
        alpha_wealth=alpha_w, alpha_income=alpha_y, defined=defined, share=share,
    )


def worker_count():
    env = os.environ.get(THREADS_ENV)
    if env:
        n = int(env)
        if n < 1:
            raise ConfigError(f"{THREADS_ENV} must be >= 1")
        return n
    return os.cpu_count() or 1


def _mean(values):
    return float(np.mean(values))


def run_sweep(spec, workers=None):
    """Run every cell and average over replicates; rows are ordered by (rho, v)."""
    jobs = {}
    for rho, v in spec.cells():
        for k in range(spec.replicates):
            jobs[(rho, v, k)] = cell_params(spec, rho, v, k)
    workers = worker_count() if workers is None else workers
    keys = list(jobs)
    try:
        if workers > 1 and len(keys) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outputs = dict(zip(keys, pool.map(_run_cell, [jobs[k] for k in keys])))
        else:
            outputs = {k: _run_cell(jobs[k]) for k in keys}
    except Exception as exc:
        raise type(exc)(f"sweep failed: {exc}") from exc

    rows = []
    for rho, v in spec.cells():
        reps = [outputs[(rho, v, k)] for k in range(spec.replicates)]
        defined = all(r["defined"] for r in reps)
        alphas = [r["alpha_wealth"] for r in reps]
        alpha_ok = all(a is not None for a in alphas)
        income_alphas = [r["alpha_income"] for r in reps]
        rows.append(SweepRow(
            rho=rho, v=v, seed_count=spec.replicates,
            gini_wealth=_mean([r["gini_wealth"] for r in reps]),
            gini_income=_mean([r["gini_income"] for r in reps]),
            decile_wealth=_mean([r["decile_wealth"] for r in reps]),
            decile_income=_mean([r["decile_income"] for r in reps]),
            poverty_wealth=_mean([r["poverty_wealth"] for r in reps]),
            poverty_income=_mean([r["poverty_income"] for r in reps]),
            alpha_wealth=_mean(alphas) if defined and alpha_ok else None,
            alpha_defined=defined,
            alpha_income=_mean(income_alphas) if all(a is not None for a in income_alphas) else None,
            max_wealth_share=_mean([r["share"] for r in reps]),
            alpha_wealth_sd=float(np.std(alphas)) if alpha_ok else math.nan,
        ))
    return SweepTable(rows=tuple(rows))


class AlphaLawRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``alpha = c (1 - rho) / v**p`` in log space.

    ``X`` has columns (rho, v); ``y`` holds tail exponents.
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        if X.shape[1] != 2:
            raise ValueError("X must have two columns: rho and v")
        rho, v = X[:, 0], X[:, 1]
        if np.any(rho >= 1) or np.any(v <= 0) or np.any(y <= 0):
            raise ValueError("need rho < 1, v > 0 and positive alpha")
        design = np.column_stack([np.ones_like(v), -np.log(v)])
        target = np.log(y) - np.log1p(-rho)
        (log_c, p), *_ = np.linalg.lstsq(design, target, rcond=None)
        self.c_ = float(math.exp(log_c))
        self.p_ = float(p)
        self.n_features_in_ = 2
        return self

    def predict(self, X):
        check_is_fitted(self, "c_")
        X = check_array(X, dtype=float)
        return self.c_ * (1.0 - X[:, 0]) / X[:, 1] ** self.p_


@dataclass(frozen=True)
class AlphaLaw:
    c: float
    p: float
    r2_linear: float
    r2_by_v: dict
    slope_by_v: dict
    n_points: int

    def to_dict(self):
        d = asdict(self)
        d["r2_by_v"] = {str(k): val for k, val in self.r2_by_v.items()}
        d["slope_by_v"] = {str(k): val for k, val in self.slope_by_v.items()}
        return d


def _linear_r2(x, y):
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    return float(1.0 - np.sum(resid ** 2) / ss_tot), float(slope)


def fit_alpha_law(table, rho_range=(0.1, 0.6), min_v=3, min_rho=5):
    """Fit the tail-exponent law over well-defined cells inside ``rho_range``.

    ``r2_linear`` is the smallest per-``v`` linear R-squared of alpha against
    rho among the ``v`` values with at least ``min_rho`` defined cells.
    """
    lo, hi = rho_range
    pts = [(r.rho, r.v, r.alpha_wealth) for r in table
           if r.alpha_defined and r.alpha_wealth is not None and lo - 1e-9 <= r.rho <= hi + 1e-9]
    by_v = {}
    for rho, v, a in pts:
        by_v.setdefault(v, []).append((rho, a))
    covered = {v: sorted(p) for v, p in by_v.items() if len(p) >= min_rho}
    if len(covered) < min_v:
        raise InsufficientGrid(
            f"need {min_v} v values with {min_rho} defined rho cells in {rho_range}, have {len(covered)}")
    r2_by_v, slope_by_v = {}, {}
    for v, p in sorted(by_v.items()):
        if len(p) >= 3:
            arr = np.array(sorted(p))
            r2_by_v[v], slope_by_v[v] = _linear_r2(arr[:, 0], arr[:, 1])
    X = np.array([(rho, v) for rho, v, _ in pts])
    y = np.array([a for _, _, a in pts])
    reg = AlphaLawRegressor().fit(X, y)
    return AlphaLaw(c=reg.c_, p=reg.p_, r2_linear=min(r2_by_v[v] for v in covered),
                    r2_by_v=r2_by_v, slope_by_v=slope_by_v, n_points=len(pts))


def match_reference_v(table, reference=REFERENCE_TAIL_SLOPES, min_points=None):
    """The swept ``v`` whose alpha row is closest (RMS) to ``reference`` {rho: alpha}.

    A ``v`` qualifies when at least ``min_points`` reference cells carry an
    alpha (default: a majority); condensed cells have none.
    """
    if min_points is None:
        min_points = len(reference) // 2 + 1
    best = None
    for v in sorted({r.v for r in table}):
        errs = []
        for rho, target in reference.items():
            try:
                row = table.row(rho, v)
            except KeyError:
                continue
            if row.alpha_wealth is not None:
                errs.append((row.alpha_wealth - target) ** 2)
        if errs and len(errs) >= min_points:
            rms = math.sqrt(sum(errs) / len(errs))
            if best is None or rms < best[1]:
                best = (v, rms)
    if best is None:
        raise InsufficientGrid(f"no v value has alpha at {min_points} reference rho values")
    return best
