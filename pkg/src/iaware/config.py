"""Flat ``key = value`` run configuration with dotted section prefixes.

Example::

    seed = 7
    scenario.kind = vehicles
    scenario.num_frames = 50
    scenario.num_targets = 10
    scenario.brake_frame = 25
    filter.interaction.model = front_vehicle
    metrics.c = 100

Lines starting with ``#`` are comments. Unknown keys are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .interaction import InteractionConfig
from .lmb import BirthComponent, BirthModel, FilterConfig
from .metrics import OspaParams
from .motion import make_ncv
from .rfs import parse_extraction
from .scenario import ScenarioConfig, default_birth_model, scene_region


class ConfigError(ValueError):
    """Invalid or missing configuration key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key '{key}': {message}")


REQUIRED = ("seed", "scenario.kind", "scenario.num_frames", "scenario.num_targets")

_SCENARIO_FLOATS = (
    "speed", "max_speed", "spacing", "jitter", "heading_deg", "gain", "lane_width", "gap",
    "road_length", "brake_intensity", "follow_speed_gain", "follow_gap_gain",
)
_SCENARIO_INTS = ("num_frames", "num_targets", "birth_stagger", "lanes", "opposing_lanes", "brake_lane")
_SCENARIO_OPT_INTS = ("lifetime", "brake_frame")

_FILTER_FLOATS = ("p_s", "p_d", "clutter_rate", "obs_noise_var", "prune_threshold", "gate_prob")
_FILTER_INTS = ("num_particles", "warmup_frames", "max_group_tracks", "max_group_measurements")

_DEFAULTS = {
    "scenario.T": "1",
    "scenario.sigma_motion_sq": "0",
    "filter.T": "1",
    "filter.sigma_motion_sq": "7",
    "filter.clutter_region": "auto",
    "filter.extraction": "threshold:0.5",
    "filter.birth": "auto",
    "filter.birth.r_b": "0.2",
    "filter.interaction.model": "auto",
    "output.dir": "out",
}

_KNOWN = (
    set(REQUIRED)
    | set(_DEFAULTS)
    | {f"scenario.{k}" for k in _SCENARIO_FLOATS + _SCENARIO_INTS + _SCENARIO_OPT_INTS + ("origin",)}
    | {f"filter.{k}" for k in _FILTER_FLOATS + _FILTER_INTS}
    | {f"filter.interaction.{k}" for k in ("d_th", "alpha_th", "beta_th", "sigma_d", "use_front_filter")}
    | {f"metrics.{k}" for k in ("c", "p", "window")}
)
_BIRTH_KEY = re.compile(r"^filter\.birth\.(\d+)$")


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig
    filter: FilterConfig
    metrics: OspaParams
    seed: int
    output_dir: Path

    @property
    def extraction(self):
        return self.filter.extraction


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines into a dict (later duplicates are errors)."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(key or f"line {lineno}", f"{source}:{lineno}: expected 'key = value'")
        if key in out:
            raise ConfigError(key, f"{source}:{lineno}: duplicate key")
        out[key] = value.strip()
    return out


def _get(raw, key, conv, what):
    try:
        return conv(raw[key])
    except (ValueError, TypeError) as exc:
        raise ConfigError(key, f"expected {what}, got {raw[key]!r} ({exc})") from None


def _int(text: str) -> int:
    return int(text)


def _opt_int(text: str):
    return None if text.lower() in ("none", "") else int(text)


def _floats(n: int):
    def conv(text: str):
        vals = tuple(float(v) for v in text.split(","))
        if len(vals) != n:
            raise ValueError(f"need {n} comma-separated numbers")
        return vals

    return conv


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true/false")


def build(raw: dict[str, str], seed_override: int | None = None) -> RunConfig:
    """Validate ``raw`` key/value pairs and build a :class:`RunConfig`."""
    for key in raw:
        if key not in _KNOWN and not _BIRTH_KEY.match(key):
            raise ConfigError(key, "unknown key")
    for key in REQUIRED:
        if key not in raw and not (key == "seed" and seed_override is not None):
            raise ConfigError(key, "required key is missing")
    raw = {**_DEFAULTS, **raw}
    seed = seed_override if seed_override is not None else _get(raw, "seed", _int, "an integer")
    if seed < 0:
        raise ConfigError("seed", "must be non-negative")

    sc = {"kind": raw["scenario.kind"]}
    for k in _SCENARIO_FLOATS:
        if f"scenario.{k}" in raw:
            sc[k] = _get(raw, f"scenario.{k}", float, "a number")
    for k in _SCENARIO_INTS:
        if f"scenario.{k}" in raw:
            sc[k] = _get(raw, f"scenario.{k}", _int, "an integer")
    for k in _SCENARIO_OPT_INTS:
        if f"scenario.{k}" in raw:
            sc[k] = _get(raw, f"scenario.{k}", _opt_int, "an integer or 'none'")
    if "scenario.origin" in raw:
        sc["origin"] = _get(raw, "scenario.origin", _floats(2), "'x,y'")
    sc["motion"] = _guard("scenario.T", lambda: make_ncv(
        _get(raw, "scenario.T", float, "a number"),
        _get(raw, "scenario.sigma_motion_sq", float, "a number"),
    ))
    scenario = _guard("scenario.kind", lambda: ScenarioConfig(**sc), raw, "scenario.")

    fk = {}
    for k in _FILTER_FLOATS:
        if f"filter.{k}" in raw:
            fk[k] = _get(raw, f"filter.{k}", float, "a number")
    for k in _FILTER_INTS:
        if f"filter.{k}" in raw:
            fk[k] = _get(raw, f"filter.{k}", _int, "an integer")
    fk["motion"] = _guard("filter.T", lambda: make_ncv(
        _get(raw, "filter.T", float, "a number"),
        _get(raw, "filter.sigma_motion_sq", float, "a number"),
    ))
    region = raw["filter.clutter_region"]
    fk["clutter_region"] = scene_region(scenario) if region == "auto" else _get(
        raw, "filter.clutter_region", _floats(4), "'xmin,xmax,ymin,ymax' or 'auto'"
    )
    fk["extraction"] = _get(raw, "filter.extraction", parse_extraction, "'threshold[:tau]' or 'map'")
    fk["birth"] = _birth(raw, scenario)
    fk["interaction"] = _interaction(raw, scenario)
    filt = _guard("filter", lambda: FilterConfig(**fk), raw, "filter.")

    mk = {}
    for k, conv in (("c", float), ("p", float), ("window", _int)):
        if f"metrics.{k}" in raw:
            mk[k] = _get(raw, f"metrics.{k}", conv, "a number")
    metrics = _guard("metrics", lambda: OspaParams(**mk), raw, "metrics.")
    return RunConfig(scenario, filt, metrics, int(seed), Path(raw["output.dir"]))


def _guard(key, fn, raw=None, prefix=None):
    """Run a constructor, reporting a ValueError against the offending key.

    Validation messages start with the field name, so with ``prefix`` the
    error is pinned on ``prefix + field`` when that key was given.
    """
    try:
        return fn()
    except ConfigError:
        raise
    except ValueError as exc:
        msg = str(exc)
        if prefix is not None:
            field_key = prefix + msg.split(" ", 1)[0]
            if field_key in raw:
                key = field_key
        raise ConfigError(key, msg) from None


def _birth(raw, scenario) -> BirthModel:
    r_b = _get(raw, "filter.birth.r_b", float, "a number")
    explicit = sorted((int(m.group(1)), k) for k in raw if (m := _BIRTH_KEY.match(k)))
    mode = raw["filter.birth"]
    if explicit:
        comps = []
        for _, key in explicit:
            vals = _get(raw, key, _floats(8), "'px,vx,py,vy,std_px,std_vx,std_py,std_vy'")
            comps.append(_guard(key, lambda: BirthComponent(r_b, np.array(vals[:4]), np.diag(np.square(vals[4:])))))
        return BirthModel(tuple(comps))
    if mode == "auto":
        return _guard("filter.birth.r_b", lambda: default_birth_model(scenario, r_b))
    if mode == "none":
        return BirthModel()
    raise ConfigError("filter.birth", f"expected 'auto', 'none', or filter.birth.N entries, got {mode!r}")


def _interaction(raw, scenario) -> InteractionConfig:
    model = raw["filter.interaction.model"]
    if model == "auto":
        model = "swarm" if scenario.kind == "swarm" else "front_vehicle"
    kw = {"enabled_model": model}
    for k in ("d_th", "alpha_th", "beta_th", "sigma_d"):
        key = f"filter.interaction.{k}"
        if key in raw:
            kw[k] = _get(raw, key, float, "a number")
    if "filter.interaction.use_front_filter" in raw:
        kw["use_front_filter"] = _get(raw, "filter.interaction.use_front_filter", _bool, "true/false")
    return _guard("filter.interaction.model", lambda: InteractionConfig(**kw), raw, "filter.interaction.")


def load(path, seed_override: int | None = None) -> RunConfig:
    path = Path(path)
    return build(parse_text(path.read_text(), str(path)), seed_override)


def with_model(cfg: RunConfig, model: str) -> RunConfig:
    return replace(cfg, filter=cfg.filter.with_interaction(enabled_model=model))
