"""Predator-prey dynamics and the multiplicative city-population model."""
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, DimensionMismatch, Divergence
from .validation import check_int, check_positive

DIVERGENCE_LIMIT = 1e300
CITY_FLOOR_FRACTION = 1e-9


@dataclass(frozen=True)
class LVParams:
    """dx/dt = x (a - alpha y), dy/dt = y (-c + gamma x)."""

    a: float
    c: float
    alpha_int: float
    gamma_int: float

    def __post_init__(self):
        for name in ("a", "c", "alpha_int", "gamma_int"):
            check_positive(getattr(self, name), name)

    @property
    def fixed_point(self):
        return self.c / self.gamma_int, self.a / self.alpha_int

    def stable_dt(self, x0, y0):
        """Largest step satisfying the positivity guideline dt * max rate < 0.1."""
        return 0.1 / max(self.a, self.c, self.alpha_int * y0, self.gamma_int * x0)


def lv_derivative(x, y, p):
    return x * (p.a - p.alpha_int * y), y * (-p.c + p.gamma_int * x)


def lv_step_rk4(state, params, dt):
    """One classical Runge-Kutta step of the two-species system."""
    x, y = state
    if x < 0 or y < 0:
        raise ConfigError("populations must be nonnegative")
    if not dt > 0:
        raise ConfigError("dt must be positive")
    k1x, k1y = lv_derivative(x, y, params)
    k2x, k2y = lv_derivative(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y, params)
    k3x, k3y = lv_derivative(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y, params)
    k4x, k4y = lv_derivative(x + dt * k3x, y + dt * k3y, params)
    return (x + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x),
            y + dt / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y))


def lv_invariant(state, params):
    """Conserved quantity V = gamma x - c ln x + alpha y - a ln y."""
    x, y = state
    if not (x > 0 and y > 0):
        raise ConfigError("invariant needs strictly positive populations")
    p = params
    return p.gamma_int * x - p.c * math.log(x) + p.alpha_int * y - p.a * math.log(y)


@dataclass(frozen=True)
class LVTrajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray

    def invariant(self, params):
        p = params
        return p.gamma_int * self.x - p.c * np.log(self.x) + p.alpha_int * self.y - p.a * np.log(self.y)

    def max_relative_drift(self, params):
        v = self.invariant(params)
        return float(np.max(np.abs(v - v[0])) / abs(v[0]))


def lv_trajectory(x0, y0, params, dt, steps, record_every=1):
    """Integrate ``steps`` RK4 steps, keeping every ``record_every``-th state."""
    check_int(steps, "steps", 1)
    check_int(record_every, "record_every", 1)
    n_rec = steps // record_every + 1
    t = np.empty(n_rec)
    xs = np.empty(n_rec)
    ys = np.empty(n_rec)
    state = (float(x0), float(y0))
    t[0], xs[0], ys[0] = 0.0, state[0], state[1]
    k = 1
    for i in range(1, steps + 1):
        state = lv_step_rk4(state, params, dt)
        if i % record_every == 0:
            t[k], xs[k], ys[k] = i * dt, state[0], state[1]
            k += 1
    return LVTrajectory(t=t[:k], x=xs[:k], y=ys[:k])


@dataclass(frozen=True)
class GLVSystem:
    r: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        r = np.atleast_1d(np.asarray(self.r, dtype=float))
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if r.ndim != 1 or A.shape != (r.size, r.size):
            raise DimensionMismatch(f"r has {r.size} species but A has shape {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ConfigError("interaction matrix must be finite")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "A", A)

    @classmethod
    def from_lv(cls, params):
        """Two-species system equivalent to the classical predator-prey pair."""
        return cls(r=[params.a, -params.c], A=[[0.0, -params.alpha_int], [params.gamma_int, 0.0]])


def glv_derivative(x, sys):
    """dx_i/dt = x_i (r_i + sum_j A_ij x_j)."""
    x = np.asarray(x, dtype=float)
    if x.shape != sys.r.shape:
        raise DimensionMismatch(f"state has shape {x.shape}, system expects {sys.r.shape}")
    return x * (sys.r + sys.A @ x)


@dataclass(frozen=True)
class RateSpec:
    mean: float
    sd: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.mean) or self.sd < 0:
            raise ConfigError(f"invalid rate spec {self}")


@dataclass(frozen=True)
class CityModelParams:
    """Parameters of ``w' = lambda w + a wbar - c wbar w``.

    ``a`` and ``c`` are drawn once per step for all cities. ``lambda`` is drawn
    per city and step when ``lambda_per_city`` is set; a single shared draw
    multiplies every city alike and cannot sustain a spread of sizes.
    """

    lambda_spec: RateSpec = RateSpec(1.0, 0.1)
    a_spec: RateSpec = RateSpec(0.1)
    c_spec: RateSpec = RateSpec(0.1)
    n_cities: int = 10_000
    n_steps: int = 10_000
    seed: int = 0
    initial_population: float = 1.0
    lambda_per_city: bool = True

    def __post_init__(self):
        check_int(self.n_cities, "n_cities", 1)
        check_int(self.n_steps, "n_steps", 1)
        check_int(self.seed, "seed", 0)
        check_positive(self.initial_population, "initial_population")


@dataclass(frozen=True)
class CityRunResult:
    populations: np.ndarray
    mean_series: np.ndarray
    max_series: np.ndarray
    floor_events: int = 0
    extra: dict = field(default_factory=dict)

    def mean_drift(self, fraction=0.1):
        """Relative change of the mean population over the last ``fraction`` of steps."""
        k = max(2, int(len(self.mean_series) * fraction))
        tail = self.mean_series[-k:]
        return float(abs(tail[-1] - tail[0]) / abs(tail.mean()))


def _draw(rng, spec, size=None):
    if spec.sd == 0:
        return spec.mean if size is None else np.full(size, spec.mean)
    return rng.normal(spec.mean, spec.sd, size)


def run_city_model(params):
    """Iterate the city-size difference equation and return final populations."""
    rng = np.random.default_rng(params.seed)
    n = params.n_cities
    w = np.full(n, float(params.initial_population))
    means = np.empty(params.n_steps)
    maxes = np.empty(params.n_steps)
    floor_events = 0
    for t in range(params.n_steps):
        wbar = w.mean()
        lam = _draw(rng, params.lambda_spec, n if params.lambda_per_city else None)
        a = _draw(rng, params.a_spec)
        c = _draw(rng, params.c_spec)
        new = lam * w + a * wbar - c * wbar * w
        low = new <= 0
        if low.any():
            floor_events += int(low.sum())
            new[low] = CITY_FLOOR_FRACTION * wbar
        top = new.max()
        if not np.isfinite(top) or top > DIVERGENCE_LIMIT:
            raise Divergence(f"population exceeded {DIVERGENCE_LIMIT:g} at step {t}", step=t)
        w = new
        means[t] = w.mean()
        maxes[t] = top
    return CityRunResult(populations=w, mean_series=means, max_series=maxes, floor_events=floor_events)
