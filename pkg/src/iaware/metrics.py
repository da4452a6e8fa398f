"""OSPA, windowed track-level OSPA (OSPA2), and cardinality error."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from ._validation import check_points, check_positive, check_positive_int


@dataclass(frozen=True)
class OspaParams:
    c: float = 100.0
    p: float = 2.0
    window: int = 5

    def __post_init__(self):
        check_positive(self.c, "c")
        if not float(self.p) >= 1.0:
            raise ValueError(f"p must be >= 1, got {self.p!r}")
        check_positive_int(self.window, "window")


@dataclass(frozen=True)
class OspaResult:
    """Total error with its localization and cardinality parts.

    The parts share the total's normalization, so
    ``total**p == localization**p + cardinality**p``.
    """

    total: float
    localization: float
    cardinality: float


def _ospa_from_costs(D: np.ndarray, c: float, p: float) -> OspaResult:
    """OSPA from an (m, n) matrix of base distances already cut off at ``c``."""
    m, n = D.shape
    if m > n:
        D = D.T
        m, n = n, m
    if n == 0:
        return OspaResult(0.0, 0.0, 0.0)
    card = c**p * (n - m)
    if m:
        cost = D**p
        rows, cols = linear_sum_assignment(cost)
        loc = float(cost[rows, cols].sum())
    else:
        loc = 0.0
    return OspaResult(
        total=((loc + card) / n) ** (1.0 / p),
        localization=(loc / n) ** (1.0 / p),
        cardinality=(card / n) ** (1.0 / p),
    )


def ospa(truth, estimates, params: OspaParams = OspaParams()) -> OspaResult:
    """OSPA distance between two finite sets of 2-D points."""
    X = check_points(truth, "truth")
    Y = check_points(estimates, "estimates")
    D = np.minimum(params.c, cdist(X, Y)) if len(X) and len(Y) else np.zeros((len(X), len(Y)))
    return _ospa_from_costs(D, params.c, params.p)


def _window_base_distance(a: Mapping[int, np.ndarray], b: Mapping[int, np.ndarray], frames, c: float) -> float:
    total, count = 0.0, 0
    for k in frames:
        in_a, in_b = k in a, k in b
        if in_a and in_b:
            total += min(c, float(np.hypot(*(np.asarray(a[k]) - np.asarray(b[k])))))
            count += 1
        elif in_a or in_b:
            total += c
            count += 1
    return total / count


def ospa2(
    truth_tracks: Mapping[object, Mapping[int, np.ndarray]],
    est_tracks: Mapping[object, Mapping[int, np.ndarray]],
    at_frame: int,
    params: OspaParams = OspaParams(),
) -> OspaResult:
    """Track-level OSPA over the window ``[at_frame - window + 1, at_frame]``.

    Each argument maps a track id to ``{frame: (x, y)}``. Only tracks present
    somewhere in the window take part. The base distance between a truth and
    an estimated track is the mean, over window frames where at least one of
    them exists, of the cut-off point distance, counting ``c`` for frames
    where only one exists.
    """
    frames = range(at_frame - params.window + 1, at_frame + 1)

    def active(tracks):
        return [s for _, s in sorted(tracks.items(), key=lambda kv: str(kv[0])) if any(k in s for k in frames)]

    A, B = active(truth_tracks), active(est_tracks)
    D = np.array([[_window_base_distance(a, b, frames, params.c) for b in B] for a in A]).reshape(len(A), len(B))
    return _ospa_from_costs(D, params.c, params.p)


def cardinality_error(truth_count: int, estimated_count: int) -> int:
    """Truth count minus estimated count; negative means over-estimation."""
    if truth_count < 0 or estimated_count < 0:
        raise ValueError("counts must be non-negative")
    return int(truth_count) - int(estimated_count)
