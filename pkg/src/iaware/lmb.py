"""Sequential Monte Carlo LMB filter with interaction-aware prediction."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace

import numpy as np

from . import rng as streams
from ._validation import (
    POS,
    check_points,
    check_positive,
    check_positive_int,
    check_probability,
    check_state,
)
from .association import AssociationTooLargeError, association_marginals, gate, group_tracks
from .interaction import (
    InteractionConfig,
    InteractionContext,
    InteractionModel,
    log_interaction_factor,
)
from .motion import NCVParams, make_ncv, sample_transition
from .rfs import (
    BernoulliTrack,
    ExtractionMode,
    Label,
    LMBDensity,
    MultiTargetEstimate,
    Threshold,
    extract_estimates,
)
from .rng import RandomSource

UNDERFLOW_FLOOR = 1e-300
# clutter intensity used in place of zero so that assignment weights stay finite
KAPPA_FLOOR = 1e-12


class FrameOrderError(ValueError):
    """A scan arrived with a frame index not after the previous one."""


@dataclass(frozen=True, eq=False)
class BirthComponent:
    r_b: float
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        check_probability(self.r_b, "r_b", low_open=True, high_open=True)
        mean = check_state(self.mean, "birth mean")
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (4, 4) or not np.allclose(cov, cov.T):
            raise ValueError("birth covariance must be a symmetric 4x4 matrix")
        chol = np.linalg.cholesky(cov)  # raises for non-SPD input
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", chol)


@dataclass(frozen=True)
class BirthModel:
    components: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @classmethod
    def from_diagonal(cls, entries, r_b: float = 0.2) -> "BirthModel":
        """Build from ``(mean, std)`` pairs with diagonal covariance ``diag(std**2)``."""
        comps = [BirthComponent(r_b, np.asarray(m, float), np.diag(np.square(np.asarray(s, float)))) for m, s in entries]
        return cls(tuple(comps))


@dataclass(frozen=True, eq=False)
class Scan:
    """Measurements ``z = (x, y)`` received at one frame."""

    frame: int
    measurements: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def __post_init__(self):
        if int(self.frame) != self.frame or self.frame < 0:
            raise ValueError(f"frame must be a non-negative integer, got {self.frame!r}")
        object.__setattr__(self, "frame", int(self.frame))
        z = check_points(self.measurements, "measurements").copy()
        z.setflags(write=False)
        object.__setattr__(self, "measurements", z)

    def __len__(self) -> int:
        return self.measurements.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Scan):
            return NotImplemented
        return self.frame == other.frame and np.array_equal(self.measurements, other.measurements)

    __hash__ = None


@dataclass(frozen=True)
class FilterConfig:
    """All model parameters of the filter.

    ``clutter_region`` is ``(xmin, xmax, ymin, ymax)``. Defaults follow the
    aerial vehicle-tracking setup: unit time step, NCV intensity 7,
    observation variance 3, detection 0.995, survival 0.99, 200 particles,
    and pruning below 1e-4.
    """

    p_s: float = 0.99
    p_d: float = 0.995
    clutter_rate: float = 5.0
    clutter_region: tuple = (0.0, 500.0, -30.0, 30.0)
    obs_noise_var: float = 3.0
    num_particles: int = 200
    prune_threshold: float = 1e-4
    gate_prob: float = 0.999
    interaction: InteractionConfig = InteractionConfig()
    motion: NCVParams = field(default_factory=lambda: make_ncv(1.0, 7.0))
    birth: BirthModel = BirthModel()
    warmup_frames: int = 5
    extraction: ExtractionMode = Threshold(0.5)
    max_group_tracks: int = 8
    max_group_measurements: int = 10

    def __post_init__(self):
        check_probability(self.p_s, "p_s", low_open=True)
        check_probability(self.p_d, "p_d", low_open=True)
        check_positive(self.clutter_rate, "clutter_rate", strict=False)
        region = tuple(float(v) for v in self.clutter_region)
        if len(region) != 4:
            raise ValueError("clutter_region must be (xmin, xmax, ymin, ymax)")
        object.__setattr__(self, "clutter_region", region)
        if self.clutter_rate > 0 and self.clutter_area <= 0:
            raise ValueError("clutter_region must have positive area when clutter_rate > 0")
        check_positive(self.obs_noise_var, "obs_noise_var")
        check_positive_int(self.num_particles, "num_particles")
        check_probability(self.prune_threshold, "prune_threshold", high_open=True)
        check_probability(self.gate_prob, "gate_prob", low_open=True, high_open=True)
        if int(self.warmup_frames) != self.warmup_frames or self.warmup_frames < 0:
            raise ValueError("warmup_frames must be a non-negative integer")
        check_positive_int(self.max_group_tracks, "max_group_tracks")
        check_positive_int(self.max_group_measurements, "max_group_measurements")

    @property
    def clutter_area(self) -> float:
        x0, x1, y0, y1 = self.clutter_region
        return max(0.0, x1 - x0) * max(0.0, y1 - y0)

    @property
    def clutter_intensity(self) -> float:
        if self.clutter_rate == 0:
            return 0.0
        return self.clutter_rate / self.clutter_area

    def with_interaction(self, **changes) -> "FilterConfig":
        return replace(self, interaction=replace(self.interaction, **changes))


@dataclass
class PredictStats:
    """Per-frame counters filled in by :func:`predict`."""

    underflow: Counter = field(default_factory=Counter)
    interaction_pairs: int = 0


@dataclass(frozen=True)
class FrameDiagnostics:
    frame: int
    num_tracks: int
    num_estimates: int
    underflow_events: int
    interaction_pairs: int
    interaction_active: bool


@dataclass(frozen=True)
class FilterState:
    """Posterior after the last processed frame plus run bookkeeping."""

    posterior: LMBDensity = LMBDensity()
    estimates: MultiTargetEstimate = MultiTargetEstimate()
    frame: int | None = None
    frames_processed: int = 0
    underflow: Counter = field(default_factory=Counter)
    last_diagnostics: FrameDiagnostics | None = None


def _label_key(label: Label) -> tuple[int, int]:
    return (label.birth_time, label.birth_index)


def predict(
    prior: LMBDensity,
    prev_estimates: MultiTargetEstimate,
    cfg: FilterConfig,
    rng: RandomSource,
    *,
    frame: int = 0,
    interaction: bool = True,
    stats: PredictStats | None = None,
) -> LMBDensity:
    """Predict every track one frame ahead.

    Existence becomes ``p_s * r``. Particles are drawn from the NCV model and,
    when an interaction model is active, re-weighted by the interaction
    factor relative to the previous-frame estimates ``prev_estimates``.
    """
    stats = stats if stats is not None else PredictStats()
    icfg = cfg.interaction
    active = interaction and icfg.enabled_model is not InteractionModel.NONE
    out = []
    for track in prior.tracks:
        gen = rng.stream(streams.PROPAGATE, frame, *_label_key(track.label))
        particles = sample_transition(track.particles, cfg.motion, gen)
        weights = track.weights
        # only labels with a previous estimate have an x_hat to measure distances from
        if active and track.label in prev_estimates:
            ctx = InteractionContext(prev_estimates, track.label)
            own = prev_estimates.state_of(track.label)
            logg = log_interaction_factor(icfg, track.label, particles, ctx, cfg.motion, own)
            if logg is not None:
                stats.interaction_pairs += 1
                weights = _reweight(weights, logg, track.label, stats)
        out.append(BernoulliTrack(track.label, cfg.p_s * track.r, particles, weights))
    return LMBDensity(tuple(out))


def _reweight(weights: np.ndarray, logg: np.ndarray, label: Label, stats: PredictStats) -> np.ndarray:
    # factors relative to the largest; a common factor is exactly 1 and cancels
    rel = np.exp(logg - np.max(logg))
    if np.all(rel == 1.0):
        return weights
    w = weights * rel
    total = w.sum()
    if not total >= UNDERFLOW_FLOOR:
        stats.underflow[label] += 1
        return weights
    return w / total


def append_birth(predicted: LMBDensity, cfg: FilterConfig, frame: int, rng: RandomSource) -> LMBDensity:
    """Append one new track per birth component, labeled ``(frame, index)``."""
    if not cfg.birth.components:
        return predicted
    J = cfg.num_particles
    born = []
    for idx, comp in enumerate(cfg.birth.components):
        gen = rng.stream(streams.BIRTH, frame, idx)
        particles = comp.mean + gen.standard_normal((J, 4)) @ comp._chol.T
        born.append(BernoulliTrack(Label(frame, idx), comp.r_b, particles, np.full(J, 1.0 / J)))
    return predicted + LMBDensity(tuple(born))


def _cloud_moments(track: BernoulliTrack) -> tuple[np.ndarray, np.ndarray]:
    pos = track.particles[:, POS]
    mu = track.weights @ pos
    d = pos - mu
    cov = (track.weights[:, None] * d).T @ d
    return mu, cov


def _missed_update(track: BernoulliTrack, p_d: float) -> BernoulliTrack:
    r = track.r
    denom = 1.0 - r * p_d
    r_new = 0.0 if denom == 0.0 else r * (1.0 - p_d) / denom
    return track.replace(r=min(1.0, r_new))


def update(predicted: LMBDensity, scan: Scan, cfg: FilterConfig) -> LMBDensity:
    """Bayes update of the predicted LMB with one scan.

    Measurement-to-track hypotheses are enumerated exactly inside each group
    of tracks that share gated measurements; the resulting mixture is
    collapsed back to one Bernoulli component per label by matching each
    label's existence probability and particle weights.
    """
    tracks = list(predicted.tracks)
    z = scan.measurements
    p_d = cfg.p_d
    if not tracks:
        return predicted
    if z.shape[0] == 0:
        return LMBDensity(tuple(_missed_update(t, p_d) for t in tracks))

    moments = [_cloud_moments(t) for t in tracks]
    gated = gate(
        np.array([m[0] for m in moments]),
        np.array([m[1] for m in moments]),
        z,
        cfg.obs_noise_var,
        cfg.gate_prob,
    )
    kappa = max(cfg.clutter_intensity, KAPPA_FLOOR)
    var = cfg.obs_noise_var
    norm = 1.0 / (2.0 * math.pi * var)

    out: list[BernoulliTrack | None] = [None] * len(tracks)
    for rows, cols in group_tracks(gated):
        if not cols:
            for i in rows:
                out[i] = _missed_update(tracks[i], p_d)
            continue
        if len(rows) > cfg.max_group_tracks or len(cols) > cfg.max_group_measurements:
            raise AssociationTooLargeError(
                f"frame {scan.frame}: gated group of {len(rows)} tracks and {len(cols)} measurements "
                f"exceeds the exact-enumeration limit ({cfg.max_group_tracks} tracks, "
                f"{cfg.max_group_measurements} measurements)"
            )
        zg = z[cols]
        liks = []
        assign = np.zeros((len(rows), len(cols)))
        miss = np.empty(len(rows))
        for a, i in enumerate(rows):
            t = tracks[i]
            diff = t.particles[:, None, POS] - zg[None, :, :]
            lik = norm * np.exp(-0.5 * np.einsum("jmk,jmk->jm", diff, diff) / var)
            liks.append(lik)
            marg = t.weights @ lik
            mask = gated[i, cols] & (marg > 0)
            assign[a] = np.where(mask, t.r * p_d * marg / kappa, 0.0)
            miss[a] = 1.0 - t.r * p_d
        p_miss, p_assign = association_marginals(miss, assign)
        for a, i in enumerate(rows):
            t = tracks[i]
            exist_if_missed = 0.0 if miss[a] == 0.0 else t.r * (1.0 - p_d) / miss[a]
            miss_mass = p_miss[a] * exist_if_missed
            used = np.flatnonzero(p_assign[a] > 0)
            if used.size == 0:
                out[i] = t.replace(r=min(1.0, miss_mass))
                continue
            lik = liks[a][:, used]
            marg = t.weights @ lik
            # p(x) [miss_mass + sum_j P(i->j) g_j(x) / int g_j p]
            w = t.weights * (miss_mass + lik @ (p_assign[a, used] / marg))
            r_new = miss_mass + p_assign[a, used].sum()
            total = w.sum()
            weights = w / total if total > 0 else t.weights
            out[i] = t.replace(r=min(1.0, r_new), weights=weights)
    return LMBDensity(tuple(out))


def prune(lmb: LMBDensity, threshold: float) -> LMBDensity:
    """Drop tracks with ``r < threshold``, keeping the order of the rest."""
    check_probability(threshold, "threshold", high_open=True)
    return LMBDensity(tuple(t for t in lmb.tracks if t.r >= threshold))


def resample(track: BernoulliTrack, rng: np.random.Generator, num_particles: int | None = None) -> BernoulliTrack:
    """Systematic resampling to ``num_particles`` (default: current count) equal-weight particles."""
    J = num_particles or track.num_particles
    cdf = np.cumsum(track.weights)
    cdf[-1] = 1.0
    u = (rng.random() + np.arange(J)) / J
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, track.num_particles - 1)
    return track.replace(particles=track.particles[idx], weights=np.full(J, 1.0 / J))


def step(state: FilterState, scan: Scan, cfg: FilterConfig, rng: RandomSource) -> FilterState:
    """One full recursion: predict, birth, update, prune, resample, extract."""
    if state.frame is not None and scan.frame <= state.frame:
        raise FrameOrderError(f"scan frame {scan.frame} does not follow frame {state.frame}")
    frame = scan.frame
    prev_estimates = state.estimates
    active = state.frames_processed >= cfg.warmup_frames
    stats = PredictStats()

    lmb = predict(state.posterior, prev_estimates, cfg, rng, frame=frame, interaction=active, stats=stats)
    lmb = append_birth(lmb, cfg, frame, rng)
    lmb = update(lmb, scan, cfg)
    lmb = prune(lmb, cfg.prune_threshold)
    lmb = LMBDensity(
        tuple(
            resample(t, rng.stream(streams.RESAMPLE, frame, *_label_key(t.label)), cfg.num_particles)
            for t in lmb.tracks
        )
    )
    estimates = extract_estimates(lmb, cfg.extraction)
    diag = FrameDiagnostics(
        frame=frame,
        num_tracks=len(lmb),
        num_estimates=len(estimates),
        underflow_events=sum(stats.underflow.values()),
        interaction_pairs=stats.interaction_pairs,
        interaction_active=active and cfg.interaction.enabled_model is not InteractionModel.NONE,
    )
    return FilterState(
        posterior=lmb,
        estimates=estimates,
        frame=frame,
        frames_processed=state.frames_processed + 1,
        underflow=state.underflow + stats.underflow,
        last_diagnostics=diag,
    )


def run_filter(scans, cfg: FilterConfig, rng: RandomSource) -> tuple[list[MultiTargetEstimate], list[FrameDiagnostics], FilterState]:
    """Run :func:`step` over ``scans``; returns per-frame estimates, diagnostics, and the final state."""
    state = FilterState()
    estimates, diags = [], []
    for scan in scans:
        state = step(state, scan, cfg, rng)
        estimates.append(state.estimates)
        diags.append(state.last_diagnostics)
    return estimates, diags, state
