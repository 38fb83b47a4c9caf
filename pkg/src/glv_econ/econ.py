"""Domain types for the wealth/income model.

Symbols follow the usual notation: wages ``e``, profits ``pi``, consumption
rate ``omega``, profit ratio ``rho``, total income ``Y``.
"""
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .exceptions import ConfigError, ZeroWealth
from .policy import PolicySpec
from .validation import check_fraction, check_int, check_positive


@dataclass(frozen=True)
class ConstantSpec:
    value: float

    def __post_init__(self):
        check_positive(self.value, "constant value")

    @property
    def mean(self):
        return self.value


@dataclass(frozen=True)
class NormalSpec:
    mean: float
    sd: float

    def __post_init__(self):
        check_positive(self.mean, "normal mean")
        check_positive(self.sd, "normal sd", strict=False)


DistributionSpec = Union[ConstantSpec, NormalSpec]


@dataclass(frozen=True)
class StochasticPerStep:
    """Fresh consumption rate every iteration: ``base * z``, z ~ N(1, relative_sd)."""

    base: float
    relative_sd: float

    def __post_init__(self):
        check_positive(self.base, "consumption base")
        check_positive(self.relative_sd, "consumption relative_sd", strict=False)

    @property
    def mean(self):
        return self.base


@dataclass(frozen=True)
class FixedPerAgent:
    """Consumption rate drawn once per agent from N(mean, sd)."""

    mean: float
    sd: float

    def __post_init__(self):
        check_positive(self.mean, "consumption mean")
        check_positive(self.sd, "consumption sd", strict=False)


@dataclass(frozen=True)
class FixedUniform:
    value: float

    def __post_init__(self):
        check_positive(self.value, "consumption rate")

    @property
    def mean(self):
        return self.value


ConsumptionSpec = Union[StochasticPerStep, FixedPerAgent, FixedUniform]


@dataclass(frozen=True)
class EconParams:
    """Scalar constants of one simulation.

    ``total_income_per_step`` is only used at ``profit_ratio == 1``, where no
    wages are paid and the profit pool cannot be derived from them.
    """

    n_agents: int = 10_000
    n_iterations: int = 10_000
    wage_spec: DistributionSpec = ConstantSpec(100.0)
    consumption_spec: ConsumptionSpec = FixedUniform(0.2)
    profit_ratio: float = 0.5
    seed: int = 0
    total_income_per_step: Optional[float] = None
    policy: Optional[PolicySpec] = None
    geometric_snapshots: int = 0
    snapshot_iterations: tuple = ()

    def __post_init__(self):
        check_int(self.n_agents, "n_agents", 2)
        check_int(self.n_iterations, "n_iterations", 1)
        check_int(self.geometric_snapshots, "geometric_snapshots", 0)
        check_fraction(self.profit_ratio, "profit_ratio")
        object.__setattr__(self, "snapshot_iterations", tuple(int(t) for t in self.snapshot_iterations))
        if any(not 1 <= t <= self.n_iterations for t in self.snapshot_iterations):
            raise ConfigError("snapshot iterations must lie in [1, n_iterations]")
        check_int(self.seed, "seed", 0)
        if self.seed >= 1 << 64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if not isinstance(self.wage_spec, (ConstantSpec, NormalSpec)):
            raise ConfigError(f"unsupported wage_spec {self.wage_spec!r}")
        if not isinstance(self.consumption_spec, (StochasticPerStep, FixedPerAgent, FixedUniform)):
            raise ConfigError(f"unsupported consumption_spec {self.consumption_spec!r}")
        if self.profit_ratio == 1.0:
            if self.total_income_per_step is None:
                raise ConfigError("profit_ratio = 1 requires an explicit total_income_per_step")
            check_positive(self.total_income_per_step, "total_income_per_step")
        elif self.total_income_per_step is not None:
            raise ConfigError("total_income_per_step is derived from wages when profit_ratio < 1")

    @property
    def mean_consumption_rate(self):
        return self.consumption_spec.mean

    def profit_pool(self, total_wages):
        """Profits paid out per iteration, Sum(e) * rho / (1 - rho)."""
        if self.profit_ratio == 1.0:
            return float(self.total_income_per_step)
        return total_wages * self.profit_ratio / (1.0 - self.profit_ratio)

    def with_(self, **changes):
        return replace(self, **changes)


def _readonly(arr):
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class PopulationState:
    t: int
    wealth: np.ndarray
    wages: np.ndarray
    consumption_propensity: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "wealth", _readonly(self.wealth))
        object.__setattr__(self, "wages", _readonly(self.wages))
        if self.consumption_propensity is not None:
            object.__setattr__(self, "consumption_propensity", _readonly(self.consumption_propensity))
        if self.wealth.shape != self.wages.shape:
            raise ConfigError("wealth and wages must have the same length")

    @property
    def n_agents(self):
        return self.wealth.size


@dataclass(frozen=True)
class AggregateSeries:
    """Per-iteration totals: wealth before the step, consumption, income, realized profit rate."""

    total_wealth: np.ndarray
    total_consumption: np.ndarray
    total_income: np.ndarray
    profit_rate: np.ndarray

    def __len__(self):
        return self.total_wealth.size


@dataclass(frozen=True)
class RunResult:
    params: EconParams
    final_wealth: np.ndarray
    final_income: np.ndarray
    wages: np.ndarray
    consumption_propensity: Optional[np.ndarray]
    wealth_snapshots: dict
    aggregate_series: AggregateSeries
    floor_events: int = 0
    tail_max_rel_change: float = float("nan")
    deterministic: bool = True
    extra: dict = field(default_factory=dict)

    @property
    def profits(self):
        return self.final_income - self.wages


@dataclass(frozen=True)
class RatioReport:
    profit_rate: float
    income_rate: float
    bowley_ratio: float
    profit_ratio: float


def ratios_from_totals(total_wealth, total_income, total_profit):
    """Profit rate, income rate, Bowley ratio and profit ratio from aggregates."""
    if total_wealth == 0:
        raise ZeroWealth("total wealth is zero")
    r = total_profit / total_wealth
    gamma = total_income / total_wealth
    rho = total_profit / total_income
    return RatioReport(profit_rate=r, income_rate=gamma, bowley_ratio=1.0 - rho, profit_ratio=rho)


def derive_ratios(params, state):
    total_wealth = float(np.sum(state.wealth))
    total_wages = float(np.sum(state.wages))
    total_profit = params.profit_pool(total_wages)
    return ratios_from_totals(total_wealth, total_wages + total_profit, total_profit)
