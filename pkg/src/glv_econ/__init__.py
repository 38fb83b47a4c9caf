"""Agent-based wealth and income distribution models.

Simulate economies where agents earn wages, share a profit pool in proportion
to their wealth and consume a fraction of it; measure inequality; fit
candidate densities to the resulting distributions.
"""
from .distfit import (DistributionFitter, Family, FitResult, GLVParams, Histogram, LogNormalParams,
                      MaxwellBoltzmannParams, ParetoTailParams, fit, histogram, sample_glv)
from .dynamics import (CityModelParams, GLVSystem, LVParams, RateSpec, lv_invariant, lv_step_rk4,
                       lv_trajectory, run_city_model)
from .econ import (ConstantSpec, EconParams, FixedPerAgent, FixedUniform, NormalSpec, PopulationState,
                   RatioReport, RunResult, StochasticPerStep, derive_ratios, ratios_from_totals)
from .engine import ModelName, detect_stationarity, initialize, preset, run, step
from .exceptions import (AllZero, ConfigError, DegenerateTail, DimensionMismatch, Divergence, EmptyInput,
                         GLVEconError, InsufficientGrid, NonConvergence, NonFiniteWealth, TooFewAgents,
                         ZeroWealth)
from .metrics import (HillTailEstimator, MetricsReport, compute_metrics, decile_ratio, gini, hill_alpha,
                      poverty_ratio)
from .policy import PolicyKind, PolicySpec
from .sweep import AlphaLaw, AlphaLawRegressor, SweepSpec, SweepTable, fit_alpha_law, run_sweep

__version__ = "0.1.0"
