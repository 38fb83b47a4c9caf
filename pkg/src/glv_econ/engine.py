"""Agent update loop.

Each iteration every agent receives its wage, a share of a fixed profit pool
proportional to its wealth, and consumes a fraction ``omega`` of its wealth::

    w' = w + e + Pi * w / W - omega * w

Total income per iteration is therefore constant; total wealth adjusts until
consumption matches it.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import stats

from . import stochastic
from .econ import (
    AggregateSeries,
    ConstantSpec,
    EconParams,
    FixedPerAgent,
    FixedUniform,
    NormalSpec,
    PopulationState,
    RunResult,
    StochasticPerStep,
)
from .exceptions import ConfigError, NonFiniteWealth, ZeroWealth
from .policy import apply_policy_block
from .stochastic import Channel

CONSUMPTION_FLOOR = 0.001
WAGE_FLOOR_FRACTION = 1e-3
WEALTH_FLOOR_FRACTION = 1e-6
FIXEDNESS_TOL = 1e-9
FIXEDNESS_WINDOW = 100
KS_THRESHOLD = 0.02

# trait slots on the TRAIT_INIT channel; keeps wage and consumption draws independent
_WAGE_SLOT = 0
_OMEGA_SLOT = 1


class ModelName(str, Enum):
    M1A = "1a"
    M1B = "1b"
    M1C = "1c"
    M1D = "1d"


@dataclass(frozen=True)
class ModelPreset:
    name: ModelName
    params: EconParams


_PRESETS = {
    ModelName.M1A: dict(wage_spec=ConstantSpec(100.0), consumption_spec=StochasticPerStep(0.30, 1.0 / 3.0)),
    ModelName.M1B: dict(wage_spec=NormalSpec(100.0, 25.0), consumption_spec=FixedUniform(0.20)),
    ModelName.M1C: dict(wage_spec=ConstantSpec(100.0), consumption_spec=FixedPerAgent(0.20, 0.02)),
    ModelName.M1D: dict(wage_spec=NormalSpec(100.0, 10.0), consumption_spec=FixedPerAgent(0.20, 0.02)),
}


def preset(name, seed=0, **overrides):
    """Build one of the four reference models; ``overrides`` replace EconParams fields."""
    name = ModelName(str(name).lower().lstrip("m"))
    fields = dict(n_agents=10_000, n_iterations=10_000, profit_ratio=0.5, seed=seed)
    fields.update(_PRESETS[name])
    fields.update(overrides)
    return ModelPreset(name=name, params=EconParams(**fields))


def _draw_trait(spec, seed, slot, n, floor):
    if isinstance(spec, ConstantSpec):
        return np.full(n, float(spec.value))
    base = stochastic.agent_hashes(seed, Channel.TRAIT_INIT, np.arange(n))
    return stochastic.truncated_normal_block(base, slot, spec.mean, spec.sd, floor)


def draw_wages(params):
    """Per-agent earning ability. Fixed for the whole run."""
    spec = params.wage_spec
    return _draw_trait(spec, params.seed, _WAGE_SLOT, params.n_agents, WAGE_FLOOR_FRACTION * spec.mean)


def initialize(params):
    """Initial population: identical wealth at the aggregate equilibrium."""
    n = params.n_agents
    ability = draw_wages(params)
    paid = ability if params.profit_ratio < 1.0 else np.zeros(n)
    spec = params.consumption_spec
    omega = None
    if isinstance(spec, FixedPerAgent):
        omega = _draw_trait(NormalSpec(spec.mean, spec.sd), params.seed, _OMEGA_SLOT, n, CONSUMPTION_FLOOR)
    total_income = paid.sum() + params.profit_pool(paid.sum())
    w0 = total_income / n / params.mean_consumption_rate
    return PopulationState(t=0, wealth=np.full(n, w0), wages=paid, consumption_propensity=omega)


class _Stepper:
    """Holds the per-run constants so the hot loop only does array arithmetic."""

    def __init__(self, params, state):
        self.params = params
        self.wages = np.asarray(state.wages)
        self.pool = params.profit_pool(float(self.wages.sum()))
        self.spec = params.consumption_spec
        self.policy = params.policy
        self.omega_fixed = None
        if isinstance(self.spec, FixedPerAgent):
            self.omega_fixed = np.asarray(state.consumption_propensity)
        elif isinstance(self.spec, FixedUniform):
            self.omega_fixed = np.full(state.n_agents, self.spec.value)
        self.base = None
        if isinstance(self.spec, StochasticPerStep):
            self.base = stochastic.agent_hashes(params.seed, Channel.CONSUMPTION_DRAW, np.arange(state.n_agents))
        self.floor_value = WEALTH_FLOOR_FRACTION * float(np.mean(state.wealth))

    def omega(self, w, t, total_wealth):
        if self.base is not None:
            s = self.spec
            omega = stochastic.truncated_normal_block(self.base, t, s.base, s.base * s.relative_sd, CONSUMPTION_FLOOR)
        else:
            omega = self.omega_fixed
        if self.policy is not None:
            omega = apply_policy_block(self.policy, w, total_wealth / w.size, omega)
        return omega

    def advance(self, w, t):
        with np.errstate(over="ignore"):
            total = w.sum()
        if not total > 0:
            raise ZeroWealth(f"total wealth {total} at iteration {t}")
        omega = self.omega(w, t, total)
        # overflow surfaces as NonFiniteWealth below
        with np.errstate(over="ignore", invalid="ignore"):
            profits = w * (self.pool / total)
            consumption = omega * w
            new = w + self.wages + profits - consumption
        low = new <= 0.0
        n_floor = int(np.count_nonzero(low))
        if n_floor:
            new[low] = self.floor_value
        if not np.isfinite(new).all():
            raise NonFiniteWealth(f"non-finite wealth at iteration {t}", iteration=t)
        return new, profits, float(consumption.sum()), float(total), n_floor


def step(state, params, t=None):
    """Advance the population by one iteration and return the new state."""
    t = state.t if t is None else t
    stepper = _Stepper(params, state)
    new, _, _, _, _ = stepper.advance(np.array(state.wealth), t)
    return PopulationState(t=t + 1, wealth=new, wages=state.wages,
                           consumption_propensity=state.consumption_propensity)


def snapshot_schedule(n_iterations, n_geometric=0, extra=()):
    points = {n_iterations // 2, n_iterations, *extra}
    if n_geometric:
        points.update(np.unique(np.geomspace(1, n_iterations, n_geometric).astype(int)).tolist())
    return sorted(p for p in points if p >= 1)


def run(model, initial_wealth=None):
    """Iterate a preset or an :class:`EconParams` for ``n_iterations`` steps.

    ``initial_wealth`` (scalar or per-agent array) replaces the equilibrium start.
    """
    params = model.params if isinstance(model, ModelPreset) else model
    state = initialize(params)
    if initial_wealth is not None:
        start = np.broadcast_to(np.asarray(initial_wealth, dtype=float), state.wealth.shape)
        if not np.all(start > 0):
            raise ConfigError("initial wealth must be positive")
        state = PopulationState(t=0, wealth=start, wages=state.wages,
                                consumption_propensity=state.consumption_propensity)
    stepper = _Stepper(params, state)
    T = params.n_iterations
    schedule = set(snapshot_schedule(T, params.geometric_snapshots, params.snapshot_iterations))
    total_w = np.empty(T)
    total_c = np.empty(T)
    income_total = float(stepper.wages.sum() + stepper.pool)
    rate = np.empty(T)
    snapshots = {}
    floor_events = 0
    settled_at = 0
    tail_change = 0.0

    w = np.array(state.wealth)
    profits = np.zeros_like(w)
    for t in range(T):
        new, profits, total_c[t], total_w[t], n_floor = stepper.advance(w, t)
        floor_events += n_floor
        change = float(np.max(np.abs(new - w) / w))
        if change >= FIXEDNESS_TOL:
            settled_at = t + 1
        if t >= T - FIXEDNESS_WINDOW:
            tail_change = max(tail_change, change)
        rate[t] = stepper.pool / total_w[t]
        w = new
        if t + 1 in schedule:
            snapshots[t + 1] = w.copy()

    return RunResult(
        params=params,
        final_wealth=w,
        final_income=stepper.wages + profits,
        wages=stepper.wages,
        consumption_propensity=state.consumption_propensity,
        wealth_snapshots=snapshots,
        aggregate_series=AggregateSeries(
            total_wealth=total_w,
            total_consumption=total_c,
            total_income=np.full(T, income_total),
            profit_rate=rate,
        ),
        floor_events=floor_events,
        tail_max_rel_change=tail_change,
        deterministic=not isinstance(params.consumption_spec, StochasticPerStep),
        extra={"settled_at": settled_at, "profit_pool": stepper.pool},
    )


@dataclass(frozen=True)
class StationarityReport:
    converged: bool
    at_iteration: int
    ks_statistic: float
    fixed: bool


def detect_stationarity(result, ks_threshold=KS_THRESHOLD, fixed_tol=FIXEDNESS_TOL):
    """Compare the midpoint and final wealth snapshots.

    Deterministic runs must additionally be frozen: no agent's wealth moved by
    more than ``fixed_tol`` (relative) over the last iterations.
    """
    snaps = result.wealth_snapshots
    if len(snaps) < 2:
        raise ValueError("stationarity check needs at least two snapshots")
    final_t = max(snaps)
    final = snaps[final_t]
    mid_t = min(snaps, key=lambda k: abs(k - final_t // 2))
    ks = _ks(snaps[mid_t], final)
    if result.deterministic:
        fixed = result.tail_max_rel_change < fixed_tol
        settled = result.extra.get("settled_at", mid_t)
        return StationarityReport(converged=bool(ks < ks_threshold and fixed), at_iteration=int(settled),
                                  ks_statistic=ks, fixed=bool(fixed))
    at = final_t
    for t in sorted(snaps):
        if _ks(snaps[t], final) < ks_threshold:
            at = t
            break
    return StationarityReport(converged=bool(ks < ks_threshold), at_iteration=int(at), ks_statistic=ks, fixed=False)


def _ks(a, b):
    if np.ptp(a) == 0 and np.ptp(b) == 0 and a[0] == b[0]:
        return 0.0
    return float(stats.ks_2samp(a, b, method="asymp").statistic)
