"""Densities and binned chi-squared fitting for wealth/income histograms.

The GLV density ``K exp(-(alpha-1)/(w/L)) / (w/L)**(1+alpha)`` is, once
normalized, an inverse-gamma law with shape ``alpha`` and scale
``(alpha-1) L``; bin probabilities use the regularized incomplete gamma
function instead of quadrature.
"""
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import ClassVar

import numpy as np
from scipy import optimize, special
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigError, EmptyInput, NonConvergence
from .validation import check_vector

DEFAULT_ASSUMED_ERROR = 100.0
MAX_EVALUATIONS = 100_000
N_RESTARTS = 5
_SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


class Family(str, Enum):
    GLV = "glv"
    LOGNORMAL = "lognormal"
    MAXWELL_BOLTZMANN = "maxwell-boltzmann"
    PARETO_TAIL = "pareto"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        aliases = {"maxboltz": "maxwell-boltzmann", "mb": "maxwell-boltzmann", "log-normal": "lognormal",
                   "paretotail": "pareto", "pareto-tail": "pareto"}
        value = str(value).lower().replace("_", "-")
        return cls(aliases.get(value, value))


def _positive(w):
    w = np.asarray(w, dtype=float)
    return w, w > 0


@dataclass(frozen=True)
class GLVParams:
    K: float
    L: float
    alpha: float
    family: ClassVar[Family] = Family.GLV

    def __post_init__(self):
        if not (self.K > 0 and self.L > 0 and self.alpha > 1):
            raise ConfigError(f"GLV needs K > 0, L > 0, alpha > 1; got {self}")

    @staticmethod
    def normalizing_K(L, alpha):
        return math.exp(alpha * math.log(alpha - 1.0) - special.gammaln(alpha)) / L

    @classmethod
    def normalized(cls, L, alpha):
        return cls(K=cls.normalizing_K(L, alpha), L=L, alpha=alpha)

    @property
    def mass(self):
        """Total integral of the density (1 when K is the normalizing constant)."""
        return self.K / self.normalizing_K(self.L, self.alpha)

    @property
    def mode(self):
        return self.L * (self.alpha - 1.0) / (self.alpha + 1.0)

    def pdf(self, w):
        w, ok = _positive(w)
        x = np.where(ok, w, 1.0) / self.L
        val = self.K * np.exp(-(self.alpha - 1.0) / x - (1.0 + self.alpha) * np.log(x))
        return np.where(ok, val, 0.0)

    def cdf(self, w):
        w, ok = _positive(w)
        scale = (self.alpha - 1.0) * self.L
        val = special.gammaincc(self.alpha, scale / np.where(ok, w, 1.0))
        return self.mass * np.where(ok, val, 0.0)


@dataclass(frozen=True)
class LogNormalParams:
    mu: float
    sigma: float
    family: ClassVar[Family] = Family.LOGNORMAL

    def __post_init__(self):
        if not self.sigma > 0:
            raise ConfigError("log-normal sigma must be positive")

    @property
    def mode(self):
        return math.exp(self.mu - self.sigma ** 2)

    def pdf(self, w):
        w, ok = _positive(w)
        ws = np.where(ok, w, 1.0)
        z = (np.log(ws) - self.mu) / self.sigma
        val = np.exp(-0.5 * z * z) / (ws * self.sigma * math.sqrt(2.0 * math.pi))
        return np.where(ok, val, 0.0)

    def cdf(self, w):
        w, ok = _positive(w)
        z = (np.log(np.where(ok, w, 1.0)) - self.mu) / self.sigma
        return np.where(ok, special.ndtr(z), 0.0)


@dataclass(frozen=True)
class MaxwellBoltzmannParams:
    """Speed-distribution shape ``sqrt(2/pi) w^2 exp(-w^2 / 2a^2) / a^3``."""

    a: float
    family: ClassVar[Family] = Family.MAXWELL_BOLTZMANN

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigError("Maxwell-Boltzmann scale must be positive")

    @property
    def mean(self):
        return 2.0 * self.a * _SQRT_2_OVER_PI

    def pdf(self, w):
        w, ok = _positive(w)
        x = np.where(ok, w, 0.0) / self.a
        return np.where(ok, _SQRT_2_OVER_PI * x * x * np.exp(-0.5 * x * x) / self.a, 0.0)

    def cdf(self, w):
        w, ok = _positive(w)
        x = np.where(ok, w, 0.0) / self.a
        val = special.erf(x / math.sqrt(2.0)) - _SQRT_2_OVER_PI * x * np.exp(-0.5 * x * x)
        return np.where(ok, val, 0.0)


@dataclass(frozen=True)
class ParetoTailParams:
    """Pareto density ``alpha x_min^alpha / w^(alpha+1)`` for ``w >= x_min``."""

    alpha: float
    x_min: float
    family: ClassVar[Family] = Family.PARETO_TAIL

    def __post_init__(self):
        if not (self.alpha > 0 and self.x_min > 0):
            raise ConfigError("Pareto tail needs alpha > 0 and x_min > 0")

    def pdf(self, w):
        w = np.asarray(w, dtype=float)
        ok = w >= self.x_min
        ws = np.where(ok, w, self.x_min)
        return np.where(ok, self.alpha / self.x_min * (ws / self.x_min) ** (-self.alpha - 1.0), 0.0)

    def cdf(self, w):
        w = np.asarray(w, dtype=float)
        ok = w >= self.x_min
        ws = np.where(ok, w, self.x_min)
        return np.where(ok, 1.0 - (ws / self.x_min) ** (-self.alpha), 0.0)


def params_to_dict(params):
    out = {"family": params.family.value}
    out.update(asdict(params))
    return out


def params_from_dict(data):
    data = dict(data)
    family = Family.parse(data.pop("family"))
    cls = _PARAM_TYPES[family]
    return cls(**{k: float(v) for k, v in data.items()})


def glv_pdf(w, params):
    return params.pdf(w)


def lognormal_pdf(w, params):
    return params.pdf(w)


def maxboltz_pdf(w, params):
    return params.pdf(w)


@dataclass(frozen=True)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    assumed_error: float = DEFAULT_ASSUMED_ERROR

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts, dtype=float)
        if edges.ndim != 1 or counts.ndim != 1 or counts.size != edges.size - 1:
            raise ConfigError("histogram needs len(counts) == len(bin_edges) - 1")
        if np.any(np.diff(edges) <= 0):
            raise ConfigError("bin edges must be strictly ascending")
        if np.any(counts < 0):
            raise ConfigError("counts must be nonnegative")
        if not self.assumed_error > 0:
            raise ConfigError("assumed_error must be positive")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self):
        return float(self.counts.sum())

    @property
    def centers(self):
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    @property
    def n_bins(self):
        return self.counts.size


def histogram(values, n_bins=None, bin_width=None, range=None, assumed_error=DEFAULT_ASSUMED_ERROR):
    """Equal-width histogram.

    A value goes to bin ``floor((v - lo) / width)``, clamped to the last bin,
    so values on an interior edge land in the bin to their right. Values
    outside an explicit ``range`` are dropped.
    """
    x = check_vector(values, min_length=1)
    if (n_bins is None) == (bin_width is None):
        raise ConfigError("give exactly one of n_bins or bin_width")
    lo, hi = (float(x.min()), float(x.max())) if range is None else map(float, range)
    if range is not None:
        x = x[(x >= lo) & (x <= hi)]
        if x.size == 0:
            raise EmptyInput("no values inside the histogram range")
    if hi <= lo:
        hi = lo + (abs(lo) if lo else 1.0)
    if bin_width is not None:
        if not bin_width > 0:
            raise ConfigError("bin_width must be positive")
        n_bins = max(2, int(math.ceil((hi - lo) / bin_width)))
        hi = lo + n_bins * bin_width
    elif n_bins < 2:
        raise ConfigError("n_bins must be >= 2")
    width = (hi - lo) / n_bins
    idx = np.clip(np.floor((x - lo) / width).astype(np.int64), 0, n_bins - 1)
    counts = np.bincount(idx, minlength=n_bins).astype(float)
    edges = lo + width * np.arange(n_bins + 1)
    edges[-1] = hi
    return Histogram(bin_edges=edges, counts=counts, assumed_error=assumed_error)


# Each family maps to: parameter type, unconstrained-vector encoder/decoder.
def _enc_glv(p):
    return np.array([math.log(p.K), math.log(p.L), math.log(p.alpha - 1.0)])


def _dec_glv(v):
    return GLVParams(K=math.exp(v[0]), L=math.exp(v[1]), alpha=1.0 + math.exp(v[2]))


def _enc_ln(p):
    return np.array([p.mu, math.log(p.sigma)])


def _dec_ln(v):
    return LogNormalParams(mu=float(v[0]), sigma=math.exp(v[1]))


def _enc_mb(p):
    return np.array([math.log(p.a)])


def _dec_mb(v):
    return MaxwellBoltzmannParams(a=math.exp(v[0]))


def _enc_par(p):
    return np.array([math.log(p.alpha), math.log(p.x_min)])


def _dec_par(v):
    return ParetoTailParams(alpha=math.exp(v[0]), x_min=math.exp(v[1]))


_PARAM_TYPES = {
    Family.GLV: GLVParams,
    Family.LOGNORMAL: LogNormalParams,
    Family.MAXWELL_BOLTZMANN: MaxwellBoltzmannParams,
    Family.PARETO_TAIL: ParetoTailParams,
}
_CODECS = {
    Family.GLV: (_enc_glv, _dec_glv),
    Family.LOGNORMAL: (_enc_ln, _dec_ln),
    Family.MAXWELL_BOLTZMANN: (_enc_mb, _dec_mb),
    Family.PARETO_TAIL: (_enc_par, _dec_par),
}
N_PARAMS = {Family.GLV: 3, Family.LOGNORMAL: 2, Family.MAXWELL_BOLTZMANN: 1, Family.PARETO_TAIL: 2}


def expected_counts(hist, params):
    """Model count per bin: total count times the density mass in the bin."""
    return hist.total * np.diff(params.cdf(hist.bin_edges))


def chi_squared(hist, params):
    resid = (hist.counts - expected_counts(hist, params)) / hist.assumed_error
    return float(np.dot(resid, resid))


def reduced_chi_squared(hist, params):
    return chi_squared(hist, params) / (hist.n_bins - N_PARAMS[params.family])


def initial_params(hist, family):
    """Moment-based starting point from the binned data."""
    family = Family.parse(family)
    c, n = hist.centers, hist.counts
    mean = float(np.dot(c, n) / n.sum())
    var = float(np.dot((c - mean) ** 2, n) / n.sum())
    var = var if var > 0 else (0.1 * mean) ** 2
    if family is Family.GLV:
        # inverse-gamma moments: mean = L, var = L^2 / (alpha - 2)
        return GLVParams.normalized(L=mean, alpha=2.0 + mean * mean / var)
    if family is Family.LOGNORMAL:
        pos = c > 0
        logs = np.log(c[pos])
        m = float(np.dot(logs, n[pos]) / n[pos].sum())
        s = math.sqrt(max(float(np.dot((logs - m) ** 2, n[pos]) / n[pos].sum()), 1e-6))
        return LogNormalParams(mu=m, sigma=s)
    if family is Family.MAXWELL_BOLTZMANN:
        return MaxwellBoltzmannParams(a=mean / (2.0 * _SQRT_2_OVER_PI))
    occupied = hist.bin_edges[:-1][n > 0]
    return ParetoTailParams(alpha=1.5, x_min=float(occupied[0]) if occupied[0] > 0 else float(c[0]))


@dataclass(frozen=True)
class FitResult:
    params: object
    reduced_chi2: float
    iterations: int
    converged: bool = True
    init_reduced_chi2: float = math.nan
    extra: dict = field(default_factory=dict)

    @property
    def family(self):
        return self.params.family

    def to_dict(self):
        out = params_to_dict(self.params)
        out.update(reduced_chi2=self.reduced_chi2, iterations=self.iterations, converged=self.converged)
        return out


def fit(hist, family, init=None, max_evaluations=MAX_EVALUATIONS, n_restarts=N_RESTARTS, raise_on_failure=False):
    """Minimize the binned chi-squared with restarted Nelder-Mead.

    Restarts begin from the best point so far, jittered by a fixed-seed
    perturbation, so results are deterministic given ``init``.
    """
    family = Family.parse(family)
    k = N_PARAMS[family]
    if np.count_nonzero(hist.counts) < k + 1:
        raise ConfigError(f"{family.value} fit needs at least {k + 1} nonempty bins")
    if hist.n_bins <= k:
        raise ConfigError("need more bins than parameters")
    init = initial_params(hist, family) if init is None else init
    if init.family is not family:
        raise ConfigError(f"init params are {init.family.value}, expected {family.value}")
    encode, decode = _CODECS[family]
    dof = hist.n_bins - k

    def objective(v):
        try:
            return chi_squared(hist, decode(v))
        except (ConfigError, OverflowError, ValueError):
            return math.inf

    best_v = encode(init)
    init_value = objective(best_v)
    best = init_value
    evaluations = 0
    jitter = np.random.default_rng(20_240_601)
    for attempt in range(n_restarts):
        budget = max_evaluations - evaluations
        if budget <= 0:
            break
        start = best_v if attempt == 0 else best_v + jitter.normal(0.0, 0.1, size=k)
        res = optimize.minimize(objective, start, method="Nelder-Mead",
                                options=dict(maxfev=budget, xatol=1e-10, fatol=1e-12, adaptive=k > 2))
        evaluations += int(res.nfev)
        if res.fun < best:
            best, best_v = float(res.fun), np.asarray(res.x)
    converged = evaluations < max_evaluations
    result = FitResult(params=decode(best_v), reduced_chi2=best / dof, iterations=evaluations,
                       converged=converged, init_reduced_chi2=init_value / dof)
    if not converged and raise_on_failure:
        raise NonConvergence(f"{family.value} fit used its {max_evaluations} evaluations", best=result)
    return result


def sample_glv(n, L, alpha, seed=0):
    """Draw GLV variates by rejection from a shifted-Pareto (Lomax) envelope.

    The envelope shares the GLV power-law decay, so the acceptance ratio
    stays bounded at both ends.
    """
    if not (L > 0 and alpha > 1):
        raise ConfigError("sample_glv needs L > 0 and alpha > 1")
    rng = np.random.default_rng(seed)
    target = GLVParams.normalized(1.0, alpha)
    s = (alpha - 1.0) / (alpha + 1.0) + 1.0

    def envelope(x):
        return alpha / s * (1.0 + x / s) ** (-alpha - 1.0)

    grid = np.geomspace(1e-4, 1e4, 20_001)
    bound = 1.05 * float(np.max(target.pdf(grid) / envelope(grid)))
    out = np.empty(0)
    while out.size < n:
        m = 2 * (n - out.size) + 64
        x = s * (rng.random(m) ** (-1.0 / alpha) - 1.0)
        keep = rng.random(m) * bound * envelope(x) <= target.pdf(x)
        out = np.concatenate([out, x[keep]])
    return L * out[:n]


class DistributionFitter(BaseEstimator):
    """Chi-squared fit of one density family to a sample.

    Parameters
    ----------
    family : {"glv", "lognormal", "maxwell-boltzmann", "pareto"}
    n_bins : int
        Equal-width bins spanning the sample.
    assumed_error : float
        Per-bin measurement standard deviation used in the chi-squared.
    init : params object or None
        Starting point; moment-based when None.
    max_evaluations : int

    Attributes
    ----------
    params_, reduced_chi2_, histogram_, n_iter_, converged_
    """

    def __init__(self, family="glv", n_bins=100, assumed_error=DEFAULT_ASSUMED_ERROR, init=None,
                 max_evaluations=MAX_EVALUATIONS):
        self.family = family
        self.n_bins = n_bins
        self.assumed_error = assumed_error
        self.init = init
        self.max_evaluations = max_evaluations

    def fit(self, X, y=None):
        hist = histogram(X, n_bins=self.n_bins, assumed_error=self.assumed_error)
        return self.fit_histogram(hist)

    def fit_histogram(self, hist):
        res = fit(hist, self.family, init=self.init, max_evaluations=self.max_evaluations)
        self.histogram_ = hist
        self.result_ = res
        self.params_ = res.params
        self.reduced_chi2_ = res.reduced_chi2
        self.n_iter_ = res.iterations
        self.converged_ = res.converged
        return self

    def pdf(self, X):
        check_is_fitted(self, "params_")
        return self.params_.pdf(np.asarray(X, dtype=float))

    def score_samples(self, X):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(X))

    def score(self, X, y=None):
        """Negative reduced chi-squared of ``X`` binned like the training data."""
        check_is_fitted(self, "params_")
        edges = self.histogram_.bin_edges
        hist = histogram(X, n_bins=edges.size - 1, range=(edges[0], edges[-1]), assumed_error=self.assumed_error)
        return -reduced_chi_squared(hist, self.params_)
