"""Input validation helpers shared by the public API."""

from __future__ import annotations

import math

import numpy as np

STATE_DIM = 4
PX, VX, PY, VY = 0, 1, 2, 3
POS = [PX, PY]
VEL = [VX, VY]


def check_state(x, name: str = "state") -> np.ndarray:
    """Return ``x`` as a finite float array of shape (4,) or (n, 4)."""
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1:] != (STATE_DIM,) or arr.ndim not in (1, 2):
        raise ValueError(f"{name} must have shape (4,) or (n, 4), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def check_points(z, name: str = "points") -> np.ndarray:
    """Return ``z`` as a finite (n, 2) float array; empty input gives shape (0, 2)."""
    arr = np.asarray(z, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 2))
    if arr.ndim == 1 and arr.shape == (2,):
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"{name} must have shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def check_probability(value, name: str, *, low_open=False, high_open=False) -> float:
    v = float(value)
    lo_ok = v > 0.0 if low_open else v >= 0.0
    hi_ok = v < 1.0 if high_open else v <= 1.0
    if not (math.isfinite(v) and lo_ok and hi_ok):
        lo = "(" if low_open else "["
        hi = ")" if high_open else "]"
        raise ValueError(f"{name} must lie in {lo}0, 1{hi}, got {value!r}")
    return v


def check_positive(value, name: str, *, strict: bool = True) -> float:
    v = float(value)
    ok = v > 0.0 if strict else v >= 0.0
    if not (math.isfinite(v) and ok):
        bound = "> 0" if strict else ">= 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value!r}")
    return v


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or int(value) != value or int(value) < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)
