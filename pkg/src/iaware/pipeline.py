"""Simulation, tracking, evaluation, and paired comparison runs."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import rng as streams
from ._validation import POS
from .config import RunConfig, with_model
from .interaction import InteractionModel
from .lmb import FilterConfig, FilterState, FrameDiagnostics, Scan, step
from .metrics import OspaParams, cardinality_error, ospa, ospa2
from .rfs import Label, MultiTargetEstimate
from .rng import RandomSource
from .scenario import GroundTruthTrack, generate_scan, simulate

log = logging.getLogger(__name__)

METRIC_KEYS = ("ospa_total", "ospa_loc", "ospa_card", "ospa2_total", "ospa2_loc", "ospa2_card", "card_error")


def simulate_run(cfg: RunConfig) -> tuple[list[GroundTruthTrack], list[Scan]]:
    """Ground truth and one scan per frame, all drawn from ``cfg.seed``."""
    src = RandomSource(cfg.seed)
    truth = simulate(cfg.scenario, src.stream(streams.SCENARIO))
    scans = [
        generate_scan(truth, k, cfg.filter, src.stream(streams.SCAN, k))
        for k in range(cfg.scenario.num_frames)
    ]
    return truth, scans


@dataclass
class TrackRun:
    frames: list[int] = field(default_factory=list)
    estimates: list[MultiTargetEstimate] = field(default_factory=list)
    existence: list[dict] = field(default_factory=list)
    diagnostics: list[FrameDiagnostics] = field(default_factory=list)
    underflow_total: int = 0
    wall_time_s: float = 0.0

    def table(self) -> dict[int, list[tuple[Label, np.ndarray, float]]]:
        return {
            k: [(l, s, r[l]) for l, s in est]
            for k, est, r in zip(self.frames, self.estimates, self.existence)
        }


def track(scans, filter_cfg: FilterConfig, seed: int) -> TrackRun:
    """Run the filter over ``scans`` with random streams derived from ``seed``."""
    src = RandomSource(seed)
    state = FilterState()
    run = TrackRun()
    t0 = time.perf_counter()
    for scan in scans:
        state = step(state, scan, filter_cfg, src)
        run.frames.append(scan.frame)
        run.estimates.append(state.estimates)
        run.existence.append({t.label: t.r for t in state.posterior})
        run.diagnostics.append(state.last_diagnostics)
        log.debug("frame %d: %d tracks, %d estimates", scan.frame, len(state.posterior), len(state.estimates))
    run.wall_time_s = time.perf_counter() - t0
    run.underflow_total = sum(state.underflow.values())
    return run


def _truth_series(truth: list[GroundTruthTrack]) -> dict:
    return {t.label: {k: s[POS] for k, s in t.by_frame().items()} for t in truth}


def _est_series(table) -> dict:
    series: dict = {}
    for k, rows in table.items():
        for label, s, *_ in rows:
            series.setdefault(label, {})[k] = np.asarray(s)[POS]
    return series


class FrameMismatchError(ValueError):
    pass


def evaluate(
    truth_frames, truth: list[GroundTruthTrack], est_frames, est_table, params: OspaParams = OspaParams()
) -> tuple[list[dict], dict]:
    """Per-frame metric rows and their run means.

    ``est_table`` maps each frame to rows ``(label, state, ...)``.
    """
    tf, ef = set(truth_frames), set(est_frames)
    if tf != ef:
        raise FrameMismatchError(
            f"frame mismatch: missing from tracks {sorted(tf - ef)}, missing from truth {sorted(ef - tf)}"
        )
    ts, es = _truth_series(truth), _est_series(est_table)
    rows = []
    for k in sorted(tf):
        X = np.array([s[POS] for t in truth if t.alive(k) for s in [t.state_at(k)]]).reshape(-1, 2)
        Y = np.array([np.asarray(s)[POS] for _, s, *_ in est_table.get(k, [])]).reshape(-1, 2)
        o = ospa(X, Y, params)
        o2 = ospa2(ts, es, k, params)
        rows.append({
            "frame": k,
            "ospa_total": o.total,
            "ospa_loc": o.localization,
            "ospa_card": o.cardinality,
            "ospa2_total": o2.total,
            "ospa2_loc": o2.localization,
            "ospa2_card": o2.cardinality,
            "card_error": cardinality_error(len(X), len(Y)),
        })
    summary = {f"mean_{key}": float(np.mean([r[key] for r in rows])) if rows else 0.0 for key in METRIC_KEYS}
    summary["frames"] = len(rows)
    return rows, summary


@dataclass
class Comparison:
    truth: list[GroundTruthTrack]
    scans: list[Scan]
    baseline: TrackRun
    interaction: TrackRun
    baseline_rows: list[dict]
    interaction_rows: list[dict]
    paired_rows: list[dict]
    summary: dict


def compare(cfg: RunConfig, truth=None, scans=None) -> Comparison:
    """Run the baseline and interaction-aware filters on one shared scan stream.

    Mean differences are ``baseline - interaction``, so positive values mean
    the interaction-aware filter has the lower error.
    """
    if truth is None or scans is None:
        truth, scans = simulate_run(cfg)
    model = cfg.filter.interaction.enabled_model
    if model is InteractionModel.NONE:
        raise ValueError("compare needs an interaction model other than 'none'")
    base_cfg = with_model(cfg, "none").filter
    frames = [s.frame for s in scans]
    base = track(scans, base_cfg, cfg.seed)
    inter = track(scans, cfg.filter, cfg.seed)
    b_rows, _ = evaluate(frames, truth, base.frames, base.table(), cfg.metrics)
    i_rows, _ = evaluate(frames, truth, inter.frames, inter.table(), cfg.metrics)
    paired = []
    for b, i in zip(b_rows, i_rows):
        row = {"frame": b["frame"]}
        for key in METRIC_KEYS:
            row[f"baseline_{key}"] = b[key]
            row[f"interaction_{key}"] = i[key]
        paired.append(row)
    summary = {}
    for key in METRIC_KEYS:
        bm = float(np.mean([r[key] for r in b_rows])) if b_rows else 0.0
        im = float(np.mean([r[key] for r in i_rows])) if i_rows else 0.0
        summary[f"baseline_mean_{key}"] = bm
        summary[f"interaction_mean_{key}"] = im
        summary[f"mean_diff_{key}"] = bm - im
    bc = float(np.mean([abs(r["card_error"]) for r in b_rows])) if b_rows else 0.0
    ic = float(np.mean([abs(r["card_error"]) for r in i_rows])) if i_rows else 0.0
    summary["mean_diff_abs_card_error"] = bc - ic
    return Comparison(truth, scans, base, inter, b_rows, i_rows, paired, summary)
