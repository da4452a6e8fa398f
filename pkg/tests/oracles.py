"""Independent reference implementations used to check the library.

Deliberately naive: exhaustive enumeration, explicit loops, no shared code
with the package beyond plain data.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def ospa_bruteforce(X, Y, c: float, p: float) -> tuple[float, float, float]:
    """OSPA by enumerating every injective assignment of the smaller set."""
    X = [tuple(map(float, x)) for x in X]
    Y = [tuple(map(float, y)) for y in Y]
    if len(X) > len(Y):
        X, Y = Y, X
    m, n = len(X), len(Y)
    if n == 0:
        return 0.0, 0.0, 0.0
    best = math.inf
    for perm in itertools.permutations(range(n), m):
        s = 0.0
        for i, j in enumerate(perm):
            d = math.sqrt((X[i][0] - Y[j][0]) ** 2 + (X[i][1] - Y[j][1]) ** 2)
            s += min(c, d) ** p
        best = min(best, s)
    card = c**p * (n - m)
    return (
        ((best + card) / n) ** (1 / p),
        (best / n) ** (1 / p),
        (card / n) ** (1 / p),
    )


def association_bruteforce(miss, assign):
    """Marginals by listing every joint hypothesis explicitly.

    A hypothesis maps each track to -1 (missed) or a measurement index, with
    no measurement used twice.
    """
    miss = np.asarray(miss, float)
    assign = np.asarray(assign, float)
    n, m = assign.shape
    total = 0.0
    p_miss = np.zeros(n)
    p_assign = np.zeros((n, m))
    for hyp in itertools.product(range(-1, m), repeat=n):
        used = [j for j in hyp if j >= 0]
        if len(used) != len(set(used)):
            continue
        w = 1.0
        for i, j in enumerate(hyp):
            w *= miss[i] if j < 0 else assign[i, j]
        if w == 0.0:
            continue
        total += w
        for i, j in enumerate(hyp):
            if j < 0:
                p_miss[i] += w
            else:
                p_assign[i, j] += w
    return p_miss / total, p_assign / total


def missed_detection_r(r: float, p_d: float) -> float:
    """Existence after an empty scan, from the two single-track hypotheses.

    Hypothesis A: target absent, weight (1 - r).
    Hypothesis B: target present but undetected, weight r (1 - p_d).
    """
    absent = 1.0 - r
    undetected = r * (1.0 - p_d)
    return undetected / (absent + undetected)


def front_vehicle_bruteforce(subject_state, others: dict, d_th, alpha_th, beta_th, use_front=True):
    """Front vehicle by checking each predicate per candidate with plain trig."""

    def angle(u, v):
        nu = math.hypot(*u)
        nv = math.hypot(*v)
        if nu == 0 or nv == 0:
            return None
        c = (u[0] * v[0] + u[1] * v[1]) / (nu * nv)
        return math.degrees(math.acos(max(-1.0, min(1.0, c))))

    sx, svx, sy, svy = map(float, subject_state)
    best = None
    for label in sorted(others):
        ox, ovx, oy, ovy = map(float, others[label])
        d = math.hypot(ox - sx, oy - sy)
        if d > d_th:
            continue
        a = angle((svx, svy), (ovx, ovy))
        if a is None or a > alpha_th:
            continue
        if use_front:
            b = angle((svx, svy), (ox - sx, oy - sy))
            if b is None or b > beta_th:
                continue
        if best is None or d < best[0]:
            best = (d, label)
    return None if best is None else best[1]


def ncv_matrices(T: float, s2: float):
    """F and Q of the NCV model written out entry by entry."""
    F = np.array(
        [
            [1, T, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 1, T],
            [0, 0, 0, 1],
        ],
        float,
    )
    a, b, c = s2 * T**3 / 3, s2 * T**2 / 2, s2 * T
    Q = np.array(
        [
            [a, b, 0, 0],
            [b, c, 0, 0],
            [0, 0, a, b],
            [0, 0, b, c],
        ],
        float,
    )
    return F, Q
