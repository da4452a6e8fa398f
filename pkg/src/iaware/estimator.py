"""scikit-learn style wrapper around the functional filter.

The filter is an online estimator: ``partial_fit`` consumes one scan,
``fit`` consumes a whole sequence from a fresh state, and ``predict``
returns the per-frame estimates of everything seen so far.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .interaction import InteractionConfig
from .lmb import BirthModel, FilterConfig, FilterState, Scan, step
from .motion import make_ncv
from .rfs import Threshold, parse_extraction
from .rng import RandomSource


def as_scan(obj, frame: int | None = None) -> Scan:
    """Coerce a :class:`Scan`, a ``(frame, points)`` pair, or bare points."""
    if isinstance(obj, Scan):
        return obj
    if isinstance(obj, tuple) and len(obj) == 2 and not hasattr(obj[0], "__len__"):
        return Scan(int(obj[0]), obj[1])
    if frame is None:
        raise ValueError("bare measurement arrays need an explicit frame index")
    return Scan(frame, obj)


def as_scans(seq) -> list[Scan]:
    """Coerce a sequence of scans; bare point arrays get frames 0, 1, ..."""
    return [as_scan(s, k) for k, s in enumerate(seq)]


class InteractionAwareLMB(BaseEstimator):
    """SMC LMB tracker with optional swarm or front-vehicle interaction.

    Parameters mirror :class:`~iaware.lmb.FilterConfig` plus the interaction
    settings; ``interaction="none"`` gives the plain LMB filter.

    Attributes set by fitting: ``state_`` (last :class:`FilterState`),
    ``estimates_`` (list of per-frame estimates), ``frames_``,
    ``diagnostics_``, ``config_``.
    """

    def __init__(
        self,
        interaction="none",
        *,
        p_s=0.99,
        p_d=0.995,
        clutter_rate=5.0,
        clutter_region=(0.0, 500.0, -30.0, 30.0),
        obs_noise_var=3.0,
        num_particles=200,
        prune_threshold=1e-4,
        gate_prob=0.999,
        T=1.0,
        sigma_motion_sq=7.0,
        birth=None,
        warmup_frames=5,
        extraction="threshold:0.5",
        d_th=50.0,
        alpha_th=15.0,
        beta_th=60.0,
        sigma_d=5.0,
        use_front_filter=True,
        random_state=0,
    ):
        self.interaction = interaction
        self.p_s = p_s
        self.p_d = p_d
        self.clutter_rate = clutter_rate
        self.clutter_region = clutter_region
        self.obs_noise_var = obs_noise_var
        self.num_particles = num_particles
        self.prune_threshold = prune_threshold
        self.gate_prob = gate_prob
        self.T = T
        self.sigma_motion_sq = sigma_motion_sq
        self.birth = birth
        self.warmup_frames = warmup_frames
        self.extraction = extraction
        self.d_th = d_th
        self.alpha_th = alpha_th
        self.beta_th = beta_th
        self.sigma_d = sigma_d
        self.use_front_filter = use_front_filter
        self.random_state = random_state

    def build_config(self) -> FilterConfig:
        extraction = parse_extraction(self.extraction) if isinstance(self.extraction, str) else self.extraction
        return FilterConfig(
            p_s=self.p_s,
            p_d=self.p_d,
            clutter_rate=self.clutter_rate,
            clutter_region=tuple(self.clutter_region),
            obs_noise_var=self.obs_noise_var,
            num_particles=self.num_particles,
            prune_threshold=self.prune_threshold,
            gate_prob=self.gate_prob,
            interaction=InteractionConfig(
                enabled_model=self.interaction,
                d_th=self.d_th,
                alpha_th=self.alpha_th,
                beta_th=self.beta_th,
                sigma_d=self.sigma_d,
                use_front_filter=self.use_front_filter,
            ),
            motion=make_ncv(self.T, self.sigma_motion_sq),
            birth=self.birth if self.birth is not None else BirthModel(),
            warmup_frames=self.warmup_frames,
            extraction=extraction if extraction is not None else Threshold(0.5),
        )

    def _reset(self):
        seed = self.random_state
        if seed is None or int(seed) != seed or seed < 0:
            raise ValueError("random_state must be a non-negative integer")
        self.config_ = self.build_config()
        self._rng = RandomSource(int(seed))
        self.state_ = FilterState()
        self.frames_, self.estimates_, self.diagnostics_, self.existence_ = [], [], [], []

    def partial_fit(self, scan, frame: int | None = None):
        """Process one scan; the first call starts from an empty posterior."""
        if not hasattr(self, "state_"):
            self._reset()
        if frame is None and not isinstance(scan, (Scan, tuple)):
            frame = 0 if self.state_.frame is None else self.state_.frame + 1
        s = as_scan(scan, frame)
        self.state_ = step(self.state_, s, self.config_, self._rng)
        self.frames_.append(s.frame)
        self.estimates_.append(self.state_.estimates)
        self.existence_.append({t.label: t.r for t in self.state_.posterior})
        self.diagnostics_.append(self.state_.last_diagnostics)
        return self

    def fit(self, scans, y=None):
        """Run over ``scans`` from scratch. ``y`` is ignored."""
        self._reset()
        for s in as_scans(scans):
            self.partial_fit(s)
        return self

    def predict(self, scans=None):
        """Per-frame estimates; with ``scans``, fit on them first."""
        if scans is not None:
            self.fit(scans)
        check_is_fitted(self, "state_")
        return list(self.estimates_)

    def fit_predict(self, scans, y=None):
        return self.fit(scans).predict()

    @property
    def posterior_(self):
        check_is_fitted(self, "state_")
        return self.state_.posterior
