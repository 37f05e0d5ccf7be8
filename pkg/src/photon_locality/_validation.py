"""Small input-validation helpers shared by the public functions and estimators."""

import math

import numpy as np

from .exceptions import ParameterError


def check_positive(name, value):
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ParameterError(f"{name} must be a finite positive number, got {value!r}")
    return value


def check_nonnegative(name, value, allow_inf=False):
    value = float(value)
    if math.isnan(value) or value < 0 or (math.isinf(value) and not allow_inf):
        raise ParameterError(f"{name} must be a non-negative number, got {value!r}")
    return value


def check_time_grid(times, name="times"):
    """Return ``times`` as a finite 1-D float array, rejecting empty input."""
    arr = np.atleast_1d(np.asarray(times, dtype=float))
    if arr.ndim != 1:
        raise ParameterError(f"{name} must be one-dimensional")
    if arr.size == 0:
        raise ParameterError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} contains non-finite values")
    return arr


def check_window(window):
    lo, hi = (float(w) for w in window)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise ParameterError(f"window must be an increasing finite pair, got {window!r}")
    return lo, hi
