"""Input validation helpers shared by the estimators and metric functions."""
import numbers

import numpy as np

from .exceptions import ConfigError, EmptyInput


def check_vector(values, name="values", min_length=1, nonnegative=False, error=EmptyInput):
    """Return ``values`` as a finite 1-D float array.

    Accepts lists, arrays, pandas Series and column vectors of shape (n, 1).
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise error(f"{name} needs at least {min_length} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    if nonnegative and np.any(arr < 0):
        raise ValueError(f"{name} must be nonnegative")
    return arr


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ConfigError(f"{name} must be a finite real, got {value!r}")
    if value < 0 or (strict and value == 0):
        raise ConfigError(f"{name} must be {'> 0' if strict else '>= 0'}, got {value}")
    return float(value)


def check_fraction(value, name, low=0.0, high=1.0, open_low=False, open_high=False):
    value = float(value)
    too_low = value <= low if open_low else value < low
    too_high = value >= high if open_high else value > high
    if too_low or too_high or not np.isfinite(value):
        lb = "(" if open_low else "["
        rb = ")" if open_high else "]"
        raise ConfigError(f"{name} must lie in {lb}{low}, {high}{rb}, got {value}")
    return value


def check_int(value, name, minimum):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return int(value)
