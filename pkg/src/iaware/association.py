"""Measurement gating, track grouping, and exact association marginals."""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np


class AssociationTooLargeError(RuntimeError):
    """A gated group exceeds the size limits for exact enumeration."""


def gate_threshold(gate_prob: float) -> float:
    """Squared Mahalanobis radius enclosing ``gate_prob`` of a 2-D Gaussian."""
    # chi-square with 2 dof has CDF 1 - exp(-x/2)
    return -2.0 * math.log1p(-gate_prob)


def gate(means, covs, z, obs_noise_var: float, gate_prob: float) -> np.ndarray:
    """Boolean (n_tracks, n_meas) matrix of measurement-in-gate flags.

    ``means`` is (n, 2) predicted positions and ``covs`` (n, 2, 2) their
    covariances; the innovation covariance adds ``obs_noise_var * I``.
    """
    means = np.asarray(means, dtype=float).reshape(-1, 2)
    z = np.asarray(z, dtype=float).reshape(-1, 2)
    if means.shape[0] == 0 or z.shape[0] == 0:
        return np.zeros((means.shape[0], z.shape[0]), dtype=bool)
    S = np.asarray(covs, dtype=float).reshape(-1, 2, 2) + obs_noise_var * np.eye(2)
    nu = z[None, :, :] - means[:, None, :]
    sol = np.linalg.solve(S[:, None, :, :], nu[..., None])[..., 0]
    d2 = np.einsum("nmi,nmi->nm", nu, sol)
    return d2 <= gate_threshold(gate_prob)


def group_tracks(gated: np.ndarray) -> list[tuple[list[int], list[int]]]:
    """Connected components of tracks that share gated measurements.

    Returns ``(track_indices, measurement_indices)`` pairs, one per component
    with at least one track, in order of each component's first track.
    Measurements gated to no track are not reported.
    """
    n, m = gated.shape
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for j in range(m):
        rows = np.flatnonzero(gated[:, j])
        for i in rows[1:]:
            a, b = find(rows[0]), find(i)
            if a != b:
                parent[max(a, b)] = min(a, b)
    comps: dict[int, list[int]] = defaultdict(list)
    for i in range(n):
        comps[find(i)].append(i)
    groups = []
    for root in sorted(comps):
        tracks = comps[root]
        meas = sorted(set(np.flatnonzero(gated[tracks].any(axis=0)).tolist()))
        groups.append((tracks, meas))
    return groups


def _hypothesis_total(rows, miss, assign, start_mask: int) -> float:
    # sum over injective partial assignments of `rows`, measurements in start_mask already taken
    states = {start_mask: 1.0}
    for i in rows:
        nz = np.flatnonzero(assign[i])
        nxt: dict[int, float] = defaultdict(float)
        for mask, w in states.items():
            nxt[mask] += w * miss[i]
            for j in nz:
                bit = 1 << int(j)
                if not mask & bit:
                    nxt[mask | bit] += w * assign[i, j]
        states = nxt
    return math.fsum(states.values())


def association_marginals(miss, assign) -> tuple[np.ndarray, np.ndarray]:
    """Marginal probabilities of each track's association.

    A joint hypothesis gives each track either no measurement (weight
    ``miss[i]``) or a distinct measurement ``j`` (weight ``assign[i, j]``);
    its probability is the normalized product of those weights. All
    hypotheses are summed exactly, with partial sums shared across
    hypotheses that have used the same measurement subset.

    Returns
    -------
    p_miss : ndarray, shape (n,)
    p_assign : ndarray, shape (n, m)
        ``p_miss[i] + p_assign[i].sum() == 1`` for every track.
    """
    miss = np.asarray(miss, dtype=float)
    assign = np.asarray(assign, dtype=float)
    n, m = assign.shape
    if n == 0:
        return np.zeros(0), np.zeros((0, m))
    # row scaling leaves every marginal unchanged and keeps products in range
    scale = np.maximum(miss, assign.max(axis=1, initial=0.0))
    scale[scale == 0] = 1.0
    miss = miss / scale
    assign = assign / scale[:, None]

    total = _hypothesis_total(range(n), miss, assign, 0)
    if not total > 0:
        raise ValueError("all association hypotheses have zero weight")
    p_miss = np.empty(n)
    p_assign = np.zeros((n, m))
    for i in range(n):
        others = [k for k in range(n) if k != i]
        p_miss[i] = miss[i] * _hypothesis_total(others, miss, assign, 0) / total
        for j in np.flatnonzero(assign[i]):
            p_assign[i, j] = assign[i, j] * _hypothesis_total(others, miss, assign, 1 << int(j)) / total
    return p_miss, p_assign
