"""Interaction-aware particle weighting.

A track's predicted particles are re-weighted by how well each one keeps the
distance the track had, at the previous frame, to an anchor target:

* ``swarm``: the anchor is the nearest other estimated target;
* ``front_vehicle``: the anchor is the closest target that is near, heading
  the same way, and located ahead.

The anchor's previous estimate is moved forward with the noise-free motion
model, and a particle's factor is a zero-mean Gaussian density (std
``sigma_d``) of the change in distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._validation import POS, VEL, check_positive, check_state
from .motion import NCVParams, noise_free_predict
from .rfs import Label, MultiTargetEstimate

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class InteractionModel(str, Enum):
    NONE = "none"
    SWARM = "swarm"
    FRONT_VEHICLE = "front_vehicle"


@dataclass(frozen=True)
class InteractionConfig:
    """Thresholds of the interaction models (distances in scene units, angles in degrees)."""

    enabled_model: InteractionModel = InteractionModel.NONE
    d_th: float = 50.0
    alpha_th: float = 15.0
    beta_th: float = 60.0
    sigma_d: float = 5.0
    use_front_filter: bool = True

    def __post_init__(self):
        object.__setattr__(self, "enabled_model", InteractionModel(self.enabled_model))
        check_positive(self.d_th, "d_th")
        check_positive(self.sigma_d, "sigma_d")
        for name in ("alpha_th", "beta_th"):
            v = float(getattr(self, name))
            if not 0.0 < v < 180.0:
                raise ValueError(f"{name} must lie in (0, 180) degrees, got {v!r}")


@dataclass(frozen=True, eq=False)
class InteractionContext:
    """Previous-frame estimates of every target except ``excluded``.

    The subject is dropped on construction, so callers may pass the full
    estimate set.
    """

    estimates: MultiTargetEstimate
    excluded: Label

    def __post_init__(self):
        excluded = Label(*self.excluded)
        object.__setattr__(self, "excluded", excluded)
        if excluded in self.estimates:
            object.__setattr__(self, "estimates", self.estimates.without(excluded))

    def __len__(self) -> int:
        return len(self.estimates)

    def state_of(self, label: Label) -> np.ndarray:
        return self.estimates.state_of(label)


def euclidean_distance(a, b) -> float | np.ndarray:
    """Position distance; velocities are ignored. Broadcasts over leading rows."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = a[..., POS] - b[..., POS]
    return np.hypot(d[..., 0], d[..., 1])


def nearest_neighbor(query, ctx: InteractionContext) -> tuple[Label, float] | None:
    """Closest context estimate to ``query`` and its distance; ties go to the smaller label."""
    if len(ctx) == 0:
        return None
    d = euclidean_distance(ctx.estimates.states, check_state(query))
    # labels are sorted, so argmin's first-hit rule breaks ties by label
    i = int(np.argmin(d))
    return ctx.estimates.labels[i], float(d[i])


def swarm_weight_factor(particle, d_hat: float, neighbor_pred, sigma_d: float):
    """Gaussian density ``N(d_hat - dist(particle, neighbor_pred); 0, sigma_d**2)``."""
    return np.exp(_log_swarm_weight(particle, d_hat, neighbor_pred, sigma_d))


def _log_swarm_weight(particle, d_hat, neighbor_pred, sigma_d):
    sigma_d = check_positive(sigma_d, "sigma_d")
    e = d_hat - euclidean_distance(particle, neighbor_pred)
    return -0.5 * (e / sigma_d) ** 2 - math.log(sigma_d) - _LOG_SQRT_2PI


def velocity_angle(v1, v2) -> float:
    """Angle in degrees between two 2-vectors.

    Raises
    ------
    ValueError
        If either vector has zero norm.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    n1 = math.hypot(v1[0], v1[1])
    n2 = math.hypot(v2[0], v2[1])
    if n1 == 0.0 or n2 == 0.0:
        raise ValueError("velocity_angle needs non-zero vectors")
    c = (v1[0] * v2[0] + v1[1] * v2[1]) / (n1 * n2)
    return math.degrees(math.acos(min(1.0, max(-1.0, c))))


def near_set(subject: Label, subject_state, ctx: InteractionContext, d_th: float) -> frozenset:
    """Labels of context estimates within ``d_th`` (inclusive) of the subject."""
    if Label(*subject) in ctx.estimates:
        raise ValueError("context must exclude the subject")
    if len(ctx) == 0:
        return frozenset()
    d = euclidean_distance(ctx.estimates.states, check_state(subject_state))
    return frozenset(l for l, di in zip(ctx.estimates.labels, d) if di <= d_th)


def _is_zero(v) -> bool:
    return v[0] == 0.0 and v[1] == 0.0


def filter_same_direction(subject_vel, candidates, ctx: InteractionContext, alpha_th: float) -> frozenset:
    """Candidates whose velocity is within ``alpha_th`` degrees of the subject's."""
    subject_vel = np.asarray(subject_vel, dtype=float)
    if _is_zero(subject_vel):
        return frozenset()
    keep = set()
    for l in candidates:
        v = ctx.state_of(l)[VEL]
        if not _is_zero(v) and velocity_angle(subject_vel, v) <= alpha_th:
            keep.add(l)
    return frozenset(keep)


def filter_in_front(subject_state, candidates, ctx: InteractionContext, beta_th: float) -> frozenset:
    """Candidates whose relative position is within ``beta_th`` degrees of the subject's heading."""
    s = check_state(subject_state)
    heading = s[VEL]
    if _is_zero(heading):
        return frozenset()
    keep = set()
    for l in candidates:
        rel = ctx.state_of(l)[POS] - s[POS]
        if not _is_zero(rel) and velocity_angle(heading, rel) <= beta_th:
            keep.add(l)
    return frozenset(keep)


def front_vehicle(subject: Label, subject_state, ctx: InteractionContext, cfg: InteractionConfig) -> Label | None:
    """The closest near, same-direction, in-front target of ``subject``, if any."""
    s = check_state(subject_state)
    cand = near_set(subject, s, ctx, cfg.d_th)
    cand = filter_same_direction(s[VEL], cand, ctx, cfg.alpha_th)
    if cfg.use_front_filter:
        cand = filter_in_front(s, cand, ctx, cfg.beta_th)
    if not cand:
        return None
    return min(cand, key=lambda l: (float(euclidean_distance(s, ctx.state_of(l))), l))


def interaction_anchor(
    cfg: InteractionConfig, subject: Label, ctx: InteractionContext, subject_prev_estimate
) -> tuple[Label, float] | None:
    """Anchor label and previous distance ``d_hat`` for the configured model, or None."""
    model = cfg.enabled_model
    if model is InteractionModel.NONE:
        return None
    if model is InteractionModel.SWARM:
        return nearest_neighbor(subject_prev_estimate, ctx)
    anchor = front_vehicle(subject, subject_prev_estimate, ctx, cfg)
    if anchor is None:
        return None
    return anchor, float(euclidean_distance(subject_prev_estimate, ctx.state_of(anchor)))


def log_interaction_factor(
    cfg: InteractionConfig,
    subject: Label,
    particles,
    ctx: InteractionContext,
    motion: NCVParams,
    subject_prev_estimate,
) -> np.ndarray | None:
    """Log of the interaction factor per particle, or None when no interaction applies."""
    found = interaction_anchor(cfg, subject, ctx, subject_prev_estimate)
    if found is None:
        return None
    anchor, d_hat = found
    neighbor_pred = noise_free_predict(ctx.state_of(anchor), motion)
    return _log_swarm_weight(particles, d_hat, neighbor_pred, cfg.sigma_d)


def interaction_factor(
    model: InteractionConfig,
    subject: Label,
    particle,
    ctx: InteractionContext,
    motion: NCVParams,
    subject_prev_estimate,
):
    """Multiplicative weight factor for one particle (or each row of an array).

    Equals 1 when the model is ``none`` or when no anchor target exists.
    """
    particle = check_state(particle)
    logg = log_interaction_factor(model, subject, particle, ctx, motion, subject_prev_estimate)
    if logg is None:
        return 1.0 if particle.ndim == 1 else np.ones(particle.shape[0])
    return np.exp(logg)
