"""Input validation helpers shared by the estimators and the functional API."""

import numpy as np


def check_field(f, name="field", ndim=2):
    """Return ``f`` as a finite complex128 array with ``ndim`` dimensions."""
    arr = np.asarray(f)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}D, got shape {arr.shape}")
    if 0 in arr.shape:
        raise ValueError(f"{name} has a zero dimension: {arr.shape}")
    arr = arr.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_intensities(intensities):
    """Validate a ``(J, M, M)`` stack of nonnegative finite intensities."""
    arr = np.asarray(intensities, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[0] == 0 or arr.shape[1] != arr.shape[2] or arr.shape[1] == 0:
        raise ValueError(f"intensities must have shape (J, M, M), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("intensities contain non-finite values")
    if np.any(arr < 0):
        raise ValueError("intensities must be nonnegative")
    return arr


def check_positions(positions):
    """Return positions as a ``(J, 2)`` int64 array."""
    arr = np.asarray(positions)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
        raise ValueError(f"positions must have shape (J, 2), got {arr.shape}")
    if not np.all(np.equal(np.mod(arr, 1), 0)):
        raise ValueError("positions must be integer pixel offsets")
    return arr.astype(np.int64)


def check_real(value, name, low=None, high=None, low_open=False):
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if low is not None and (value < low or (low_open and value == low)):
        raise ValueError(f"{name} out of range: {value}")
    if high is not None and value > high:
        raise ValueError(f"{name} out of range: {value}")
    return value
