"""Synthetic ground truth (swarm and road traffic) and detection simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import POS, check_positive, check_positive_int
from .lmb import BirthModel, FilterConfig, Scan
from .motion import NCVParams, make_ncv, noise_free_predict, sample_transition
from .rfs import Label


@dataclass(frozen=True, eq=False)
class GroundTruthTrack:
    """True trajectory defined on frames ``[birth_frame, death_frame)``."""

    label: Label
    birth_frame: int
    states: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "label", Label(*self.label))
        states = np.asarray(self.states, dtype=float).reshape(-1, 4)
        if states.shape[0] == 0:
            raise ValueError("a ground-truth track needs at least one state")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def death_frame(self) -> int:
        return self.birth_frame + self.states.shape[0]

    @property
    def frames(self) -> range:
        return range(self.birth_frame, self.death_frame)

    def alive(self, frame: int) -> bool:
        return self.birth_frame <= frame < self.death_frame

    def state_at(self, frame: int) -> np.ndarray:
        if not self.alive(frame):
            raise KeyError(frame)
        return self.states[frame - self.birth_frame]

    def by_frame(self) -> dict[int, np.ndarray]:
        return {k: self.states[k - self.birth_frame] for k in self.frames}

    def __eq__(self, other):
        if not isinstance(other, GroundTruthTrack):
            return NotImplemented
        return (
            self.label == other.label
            and self.birth_frame == other.birth_frame
            and np.array_equal(self.states, other.states)
        )

    __hash__ = None


@dataclass(frozen=True)
class ScenarioConfig:
    """Scenario geometry and dynamics.

    ``motion`` is the truth-side process model (zero noise gives clean
    trajectories). Swarm fields: ``spacing``, ``jitter``, ``heading_deg``,
    ``gain``, ``birth_stagger``, ``lifetime``, ``origin``. Road fields:
    ``lanes``, ``opposing_lanes``, ``lane_width``, ``gap``, ``road_length``,
    ``brake_frame``, ``brake_intensity``, ``brake_lane``, ``follow_speed_gain``,
    ``follow_gap_gain``. ``speed`` and ``max_speed`` apply to both.
    """

    kind: str = "vehicles"
    num_frames: int = 50
    num_targets: int = 10
    motion: NCVParams = field(default_factory=lambda: make_ncv(1.0, 0.0))
    speed: float = 10.0
    max_speed: float = 40.0
    # swarm
    spacing: float = 30.0
    jitter: float = 2.0
    heading_deg: float = 0.0
    gain: float = 0.3
    birth_stagger: int = 0
    lifetime: int | None = None
    origin: tuple = (50.0, 50.0)
    # vehicles
    lanes: int = 2
    opposing_lanes: int = 1
    lane_width: float = 8.0
    gap: float = 35.0
    road_length: float = 500.0
    brake_frame: int | None = None
    brake_intensity: float = 0.5
    brake_lane: int = 0
    follow_speed_gain: float = 0.9
    follow_gap_gain: float = 0.05

    def __post_init__(self):
        if self.kind not in ("swarm", "vehicles"):
            raise ValueError(f"kind must be 'swarm' or 'vehicles', got {self.kind!r}")
        check_positive_int(self.num_frames, "num_frames")
        check_positive_int(self.num_targets, "num_targets")
        check_positive(self.max_speed, "max_speed")
        check_positive(self.speed, "speed", strict=False)
        if not 0.0 <= self.brake_intensity <= 1.0:
            raise ValueError("brake_intensity must lie in [0, 1]")
        if self.lanes < 1 or self.opposing_lanes < 0:
            raise ValueError("need at least one lane and a non-negative opposing lane count")


def _clip_speed(v: np.ndarray, vmax: float) -> np.ndarray:
    n = np.hypot(v[..., 0], v[..., 1])
    scale = np.where(n > vmax, vmax / np.where(n > 0, n, 1.0), 1.0)
    return v * scale[..., None]


def _grid_offsets(cfg: ScenarioConfig) -> np.ndarray:
    side = math.ceil(math.sqrt(cfg.num_targets))
    idx = np.arange(cfg.num_targets)
    return np.stack([idx % side, idx // side], axis=1) * cfg.spacing


def _swarm_velocity(cfg: ScenarioConfig) -> np.ndarray:
    h = math.radians(cfg.heading_deg)
    return cfg.speed * np.array([math.cos(h), math.sin(h)])


def _swarm_nominal_births(cfg: ScenarioConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Birth frame, death frame, and noise-free birth state of every swarm member."""
    n = cfg.num_targets
    births = np.arange(n) * cfg.birth_stagger
    deaths = np.full(n, cfg.num_frames)
    if cfg.lifetime is not None:
        deaths = np.minimum(deaths, births + cfg.lifetime)
    v = _swarm_velocity(cfg)
    pos = np.asarray(cfg.origin, float) + _grid_offsets(cfg) + births[:, None] * cfg.motion.T * v
    states = np.column_stack([pos[:, 0], np.full(n, v[0]), pos[:, 1], np.full(n, v[1])])
    return births, deaths, states


def simulate_swarm(cfg: ScenarioConfig, rng: np.random.Generator) -> list[GroundTruthTrack]:
    """Targets on a jittered grid moving with a common velocity.

    Each frame every live target gets a velocity correction
    ``gain * (mean_v - v) + gain * (d0 - d) * u / T``, where ``d`` is the
    distance to its nearest live neighbour along unit vector ``u`` and ``d0``
    the distance it had when born; then it moves by the NCV model.
    """
    if cfg.kind != "swarm":
        raise ValueError("simulate_swarm needs kind='swarm'")
    births, deaths, x = _swarm_nominal_births(cfg)
    x = x.copy()
    j = cfg.jitter
    x[:, POS] += rng.uniform(-j, j, size=(cfg.num_targets, 2)) if j > 0 else 0.0
    n, T = cfg.num_targets, cfg.motion.T
    d0 = np.full(n, np.nan)
    history = np.full((cfg.num_frames, n, 4), np.nan)

    for k in range(cfg.num_frames):
        alive = np.flatnonzero((births <= k) & (k < deaths))
        for i in alive:
            if births[i] == k:
                others = [a for a in alive if a != i and births[a] < k] or [a for a in alive if a != i]
                if others:
                    d0[i] = np.min(np.hypot(*(x[others][:, POS] - x[i, POS]).T))
        history[k, alive] = x[alive]
        if k + 1 == cfg.num_frames:
            break
        nxt = alive
        if nxt.size:
            pos = x[nxt][:, POS]
            vel = x[nxt][:, 1::2]
            dv = np.zeros_like(vel)
            if nxt.size > 1:
                diff = pos[:, None, :] - pos[None, :, :]
                dist = np.hypot(diff[..., 0], diff[..., 1])
                np.fill_diagonal(dist, np.inf)
                nn = np.argmin(dist, axis=1)
                d = dist[np.arange(nxt.size), nn]
                u = diff[np.arange(nxt.size), nn] / np.where(d > 0, d, 1.0)[:, None]
                err = np.where(np.isnan(d0[nxt]), 0.0, d0[nxt] - d)
                dv = cfg.gain * (vel.mean(axis=0) - vel) + cfg.gain * err[:, None] * u / T
            state = x[nxt].copy()
            state[:, 1::2] = _clip_speed(vel + dv, cfg.max_speed)
            moved = sample_transition(state, cfg.motion, rng) if cfg.motion.sigma_motion_sq > 0 else noise_free_predict(state, cfg.motion)
            moved[:, 1::2] = _clip_speed(moved[:, 1::2], cfg.max_speed)
            x[nxt] = moved

    tracks = []
    for i in range(n):
        b, e = int(births[i]), int(min(deaths[i], cfg.num_frames))
        if b < e:
            tracks.append(GroundTruthTrack(Label(b, i), b, history[b:e, i]))
    return tracks


def _lane_layout(cfg: ScenarioConfig):
    total = cfg.lanes + cfg.opposing_lanes
    lane = np.arange(cfg.num_targets) % total
    order = np.arange(cfg.num_targets) // total
    direction = np.where(lane < cfg.lanes, 1.0, -1.0)
    return lane, order, direction


def simulate_vehicles(cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> list[GroundTruthTrack]:
    """Platoons on a straight multi-lane road, with an optional braking event.

    Vehicles are dealt round-robin to lanes; ``opposing_lanes`` carry
    traffic in the -x direction. Each platoon starts with followers ``gap``
    apart upstream of its lead, all at ``speed``; lane ``l`` is shifted
    upstream by ``l * gap / n_lanes`` so that lanes do not enter in step. From
    ``brake_frame`` on, the lead of ``brake_lane`` drives at
    ``(1 - brake_intensity) * speed``; followers adjust speed by
    ``follow_speed_gain * (v_lead - v) + follow_gap_gain * (gap - gap0)``
    per frame. Truth is recorded while a vehicle is on ``[0, road_length]``.
    The scene is deterministic; ``rng`` is accepted for interface symmetry.
    """
    if cfg.kind != "vehicles":
        raise ValueError("simulate_vehicles needs kind='vehicles'")
    del rng
    T = cfg.motion.T
    lane, order, direction = _lane_layout(cfg)
    n = cfg.num_targets
    s = -order * cfg.gap - lane * cfg.gap / (cfg.lanes + cfg.opposing_lanes)
    v = np.full(n, float(min(cfg.speed, cfg.max_speed)))
    leader = np.full(n, -1)
    for i in range(n):
        ahead = np.flatnonzero((lane == lane[i]) & (order == order[i] - 1))
        if ahead.size:
            leader[i] = ahead[0]
    rows: dict[int, list] = {i: [] for i in range(n)}
    first: dict[int, int] = {}

    for k in range(cfg.num_frames):
        for i in range(n):
            if 0.0 <= s[i] <= cfg.road_length:
                if i in first and first[i] + len(rows[i]) != k:
                    continue  # never re-enter
                first.setdefault(i, k)
                px = s[i] if direction[i] > 0 else cfg.road_length - s[i]
                rows[i].append([px, direction[i] * v[i], lane[i] * cfg.lane_width, 0.0])
        if k + 1 == cfg.num_frames:
            break
        v_new = v.copy()
        for i in range(n):
            if leader[i] < 0:
                braking = cfg.brake_frame is not None and lane[i] == cfg.brake_lane and k + 1 >= cfg.brake_frame
                if braking:
                    v_new[i] = (1.0 - cfg.brake_intensity) * min(cfg.speed, cfg.max_speed)
            else:
                j = leader[i]
                a = cfg.follow_speed_gain * (v[j] - v[i]) + cfg.follow_gap_gain * ((s[j] - s[i]) - cfg.gap)
                v_new[i] = min(cfg.max_speed, max(0.0, v[i] + a))
        v = v_new
        s = s + v * T

    return [GroundTruthTrack(Label(first[i], i), first[i], rows[i]) for i in range(n) if rows[i]]


def simulate(cfg: ScenarioConfig, rng: np.random.Generator) -> list[GroundTruthTrack]:
    if cfg.kind == "swarm":
        return simulate_swarm(cfg, rng)
    return simulate_vehicles(cfg, rng)


def scene_region(cfg: ScenarioConfig, margin: float = 20.0) -> tuple:
    """Rectangle ``(xmin, xmax, ymin, ymax)`` covering the scene.

    For swarms this is the box swept by the nominal (noise-free) formation,
    padded by ``margin`` plus the jitter.
    """
    if cfg.kind == "vehicles":
        lanes = cfg.lanes + cfg.opposing_lanes
        return (0.0, float(cfg.road_length), -cfg.lane_width, lanes * cfg.lane_width)
    _, _, states = _swarm_nominal_births(cfg)
    start = states[:, POS]
    drift = _swarm_velocity(cfg) * cfg.motion.T * (cfg.num_frames - 1)
    pts = np.vstack([start, np.asarray(cfg.origin, float) + _grid_offsets(cfg) + drift])
    pad = margin + cfg.jitter
    lo, hi = pts.min(axis=0) - pad, pts.max(axis=0) + pad
    return (float(lo[0]), float(hi[0]), float(lo[1]), float(hi[1]))


def default_birth_model(cfg: ScenarioConfig, r_b: float = 0.2) -> BirthModel:
    """Birth components where targets of this scenario appear.

    Road scenes get one component per lane entry; swarms one per member at its
    nominal (jitter-free) birth position.
    """
    if cfg.kind == "vehicles":
        entries = []
        half = cfg.speed * cfg.motion.T / 2.0
        lanes = cfg.lanes + cfg.opposing_lanes
        for l in range(lanes):
            d = 1.0 if l < cfg.lanes else -1.0
            x0 = half if d > 0 else cfg.road_length - half
            mean = [x0, d * cfg.speed, l * cfg.lane_width, 0.0]
            std = [max(half, 3.0), max(2.0, cfg.speed / 2.0), 2.0, 0.5]
            entries.append((mean, std))
        return BirthModel.from_diagonal(entries, r_b)
    _, _, states = _swarm_nominal_births(cfg)
    std = [cfg.jitter + 3.0, 2.0, cfg.jitter + 3.0, 2.0]
    return BirthModel.from_diagonal([(s, std) for s in states], r_b)


def generate_scan(truth: list[GroundTruthTrack], frame: int, cfg: FilterConfig, rng: np.random.Generator) -> Scan:
    """Noisy detections of live targets plus Poisson clutter, in shuffled order."""
    alive = [t.state_at(frame)[POS] for t in sorted(truth, key=lambda t: t.label) if t.alive(frame)]
    pos = np.array(alive).reshape(-1, 2)
    detected = rng.random(len(pos)) < cfg.p_d
    z = pos[detected] + math.sqrt(cfg.obs_noise_var) * rng.standard_normal((int(detected.sum()), 2))
    n_clutter = rng.poisson(cfg.clutter_rate) if cfg.clutter_rate > 0 else 0
    x0, x1, y0, y1 = cfg.clutter_region
    clutter = np.column_stack([rng.uniform(x0, x1, n_clutter), rng.uniform(y0, y1, n_clutter)])
    allz = np.vstack([z, clutter.reshape(-1, 2)])
    return Scan(frame, allz[rng.permutation(len(allz))])
