"""Small input checks shared by the harness, the estimators and the CLI."""
import numbers

import numpy as np

from .errors import UsageError


def check_positive_array(values, name="values", min_size=1):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise UsageError(f"{name} must be one-dimensional")
    if arr.size < min_size:
        raise UsageError(f"{name} needs at least {min_size} entries, got {arr.size}")
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise UsageError(f"{name} must be finite and positive")
    return arr


def check_epsilons(eps, descending=True):
    arr = check_positive_array(eps, "epsilons")
    if descending and np.any(np.diff(arr) >= 0):
        raise UsageError("epsilons must be strictly descending")
    return arr


def check_matrix(M, size=None, name="matrix"):
    A = np.atleast_2d(np.asarray(M, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise UsageError(f"{name} must be square, got shape {A.shape}")
    if size is not None and A.shape[0] != size:
        raise UsageError(f"{name} must be {size}x{size}")
    if not np.all(np.isfinite(A)):
        raise UsageError(f"{name} must be finite")
    return A


def check_int(value, name, minimum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise UsageError(f"{name} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise UsageError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_real(value, name, positive=False):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise UsageError(f"{name} must be a number, got {value!r}")
    value = float(value)
    if not np.isfinite(value) or (positive and value <= 0):
        raise UsageError(f"{name} must be {'positive and ' if positive else ''}finite")
    return value


def check_keys(section, allowed, where):
    """Reject unknown keys (configs fail fast on typos)."""
    if not isinstance(section, dict):
        raise UsageError(f"{where} must be a JSON object")
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise UsageError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    return section
