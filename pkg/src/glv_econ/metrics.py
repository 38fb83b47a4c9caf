"""Inequality and tail statistics over wealth or income vectors."""
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import AllZero, DegenerateTail, TooFewAgents
from .validation import check_vector

REFERENCE_POPULATION = 10_000
REFERENCE_TAIL = 400


def default_n_tail(n):
    """400 points at 10,000 agents, the same 4% fraction otherwise."""
    return REFERENCE_TAIL if n == REFERENCE_POPULATION else int(round(n * REFERENCE_TAIL / REFERENCE_POPULATION))


def gini(values):
    """Gini coefficient via the sorted-rank identity (O(n log n))."""
    x = np.sort(check_vector(values, min_length=2, nonnegative=True, error=TooFewAgents))
    total = x.sum()
    if total == 0:
        raise AllZero("Gini is undefined for an all-zero vector")
    n = x.size
    ranks = np.arange(1, n + 1)
    g = float(np.dot(2 * ranks - n - 1, x) / (n * total))
    return min(max(g, 0.0), 1.0)


def decile_ratio(values):
    """Mean of the top tenth over mean of the bottom tenth; +inf if the bottom mean is zero."""
    x = np.sort(check_vector(values, min_length=10, error=TooFewAgents))
    k = x.size // 10
    bottom = x[:k].mean()
    top = x[-k:].mean()
    if bottom == 0:
        return math.inf
    with np.errstate(over="ignore"):
        return float(np.float64(top) / bottom)


def poverty_ratio(values):
    """Fraction of entries below half the mean."""
    x = check_vector(values, min_length=1)
    return float(np.count_nonzero(x < x.mean() / 2.0) / x.size)


def max_min_ratio(values):
    x = check_vector(values, min_length=1)
    lo = x.min()
    return math.inf if lo == 0 else float(x.max() / lo)


def hill_alpha(values, n_tail=None):
    """Hill tail exponent over the ``n_tail`` largest values.

    ``alpha = 1 + n / sum(log(x_i / x_min))`` with ``x_min`` the smallest value
    in the tail. Returned positive: the magnitude of the log-log density slope
    of a Pareto tail.
    """
    x = check_vector(values, min_length=2)
    if n_tail is None:
        n_tail = default_n_tail(x.size)
    if n_tail < 2:
        raise ValueError(f"n_tail must be >= 2, got {n_tail}")
    positive = x[x > 0]
    if positive.size < n_tail:
        raise TooFewAgents(f"need {n_tail} positive values for the tail, have {positive.size}")
    tail = np.partition(positive, positive.size - n_tail)[-n_tail:]
    logs = np.log(tail / tail.min())
    s = logs.sum()
    if s == 0:
        raise DegenerateTail("all tail values are equal")
    return float(1.0 + n_tail / s)


def tail_span(values, n_tail=None):
    """Ratio between the largest and smallest of the ``n_tail`` top values."""
    x = check_vector(values, min_length=2)
    n_tail = default_n_tail(x.size) if n_tail is None else n_tail
    tail = np.sort(x)[-n_tail:]
    return math.inf if tail[0] <= 0 else float(tail[-1] / tail[0])


@dataclass(frozen=True)
class MetricsReport:
    gini: float
    decile_ratio: float
    poverty_ratio: float
    hill_alpha: Optional[float]
    n_tail: int

    def to_dict(self):
        return asdict(self)


def compute_metrics(values, n_tail=None):
    """All four statistics; ``hill_alpha`` is None when the tail cannot be formed."""
    x = check_vector(values, min_length=10, error=TooFewAgents)
    n_tail = default_n_tail(x.size) if n_tail is None else n_tail
    try:
        alpha = hill_alpha(x, n_tail)
    except (TooFewAgents, DegenerateTail, ValueError):
        alpha = None
    return MetricsReport(
        gini=gini(x),
        decile_ratio=decile_ratio(x),
        poverty_ratio=poverty_ratio(x),
        hill_alpha=alpha,
        n_tail=n_tail,
    )


class HillTailEstimator(BaseEstimator):
    """Estimator wrapper around :func:`hill_alpha`.

    Parameters
    ----------
    n_tail : int or None
        Number of top order statistics. ``None`` uses the 4% default.

    Attributes
    ----------
    alpha_ : float
    alpha_stderr_ : float
        Asymptotic standard error ``(alpha - 1) / sqrt(n_tail)``.
    x_min_ : float
        Smallest value in the tail.
    """

    def __init__(self, n_tail=None):
        self.n_tail = n_tail

    def fit(self, X, y=None):
        x = check_vector(X, name="X", min_length=2)
        self.n_tail_ = default_n_tail(x.size) if self.n_tail is None else int(self.n_tail)
        self.alpha_ = hill_alpha(x, self.n_tail_)
        self.alpha_stderr_ = (self.alpha_ - 1.0) / math.sqrt(self.n_tail_)
        self.x_min_ = float(np.sort(x)[-self.n_tail_])
        return self

    def survival(self, X):
        """Pareto survival function of the fitted tail, 1 below ``x_min_``."""
        check_is_fitted(self, "alpha_")
        x = np.asarray(X, dtype=float)
        return np.where(x < self.x_min_, 1.0, (np.maximum(x, self.x_min_) / self.x_min_) ** (1.0 - self.alpha_))
