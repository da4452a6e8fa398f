"""Command-line front end: ``iaware {simulate,track,evaluate,compare}``.

Set ``IAWARE_LOG`` (e.g. ``DEBUG`` or ``INFO``) for diagnostic output on stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import config as config_mod
from . import io
from .association import AssociationTooLargeError
from .metrics import OspaParams
from .pipeline import compare, evaluate, simulate_run, track

log = logging.getLogger("iaware")

DIAG_COLUMNS = ("frame", "num_tracks", "num_estimates", "underflow_events", "interaction_pairs", "interaction_active")


def _out_dir(args, cfg=None) -> Path:
    if args.out:
        return io.ensure_dir(args.out)
    return io.ensure_dir(cfg.output_dir if cfg is not None else "out")


def cmd_simulate(args) -> int:
    cfg = config_mod.load(args.config, args.seed)
    out = _out_dir(args, cfg)
    truth, scans = simulate_run(cfg)
    frames = range(cfg.scenario.num_frames)
    io.write_truth(truth, out / "truth.csv", frames)
    io.write_scans(scans, out / "scans.csv")
    n_meas = sum(len(s) for s in scans)
    print(f"simulated {len(truth)} targets over {len(scans)} frames, {n_meas} measurements -> {out}")
    return 0


def _write_track_outputs(run, out: Path, stem: str, timing: bool) -> None:
    io.write_tracks(run.frames, run.estimates, run.existence, out / f"{stem}.csv")
    rows = [
        {
            "frame": d.frame,
            "num_tracks": d.num_tracks,
            "num_estimates": d.num_estimates,
            "underflow_events": d.underflow_events,
            "interaction_pairs": d.interaction_pairs,
            "interaction_active": int(d.interaction_active),
        }
        for d in run.diagnostics
    ]
    io.write_metrics(rows, out / f"{stem}_diagnostics.csv", DIAG_COLUMNS)
    if timing:
        io.write_summary({"wall_time_s": run.wall_time_s, "frames": len(run.frames)}, out / f"{stem}_timing.csv")


def cmd_track(args) -> int:
    cfg = config_mod.load(args.config, args.seed)
    if not args.scans:
        raise SystemExit("track: --scans PATH is required")
    try:
        scans = io.read_scans(args.scans)
    except OSError as exc:
        raise OSError(f"cannot read scans file {args.scans}: {exc.strerror}") from None
    out = _out_dir(args, cfg)
    run = track(scans, cfg.filter, cfg.seed)
    _write_track_outputs(run, out, "tracks", args.timing)
    log.info("tracked %d frames in %.3f s", len(run.frames), run.wall_time_s)
    print(f"tracked {len(run.frames)} frames, {sum(len(e) for e in run.estimates)} estimates -> {out}")
    return 0


def _metrics_params(args) -> OspaParams:
    if args.config:
        return config_mod.load(args.config, args.seed if args.seed is not None else 0).metrics
    return OspaParams()


def cmd_evaluate(args) -> int:
    if not args.truth or not args.tracks:
        raise SystemExit("evaluate: --truth PATH and --tracks PATH are required")
    params = _metrics_params(args) if args.config else OspaParams()
    truth_frames, truth = io.read_truth_table(args.truth)
    est_frames, table = io.read_tracks(args.tracks)
    rows, summary = evaluate(truth_frames, truth, est_frames, table, params)
    out = io.ensure_dir(args.out or "out")
    io.write_metrics(rows, out / "metrics.csv")
    io.write_summary(summary, out / "metrics_summary.csv")
    print(f"evaluated {len(rows)} frames: mean OSPA {summary['mean_ospa_total']:.4f} -> {out}")
    return 0


def cmd_compare(args) -> int:
    cfg = config_mod.load(args.config, args.seed)
    out = _out_dir(args, cfg)
    truth = scans = None
    if args.scans or args.truth:
        if not (args.scans and args.truth):
            raise SystemExit("compare: give both --scans and --truth, or neither")
        truth, scans = io.read_truth(args.truth), io.read_scans(args.scans)
    res = compare(cfg, truth, scans)
    frames = [s.frame for s in res.scans]
    io.write_truth(res.truth, out / "truth.csv", frames)
    io.write_scans(res.scans, out / "scans.csv")
    _write_track_outputs(res.baseline, out, "tracks_baseline", args.timing)
    _write_track_outputs(res.interaction, out, "tracks_interaction", args.timing)
    io.write_metrics(res.baseline_rows, out / "metrics_baseline.csv")
    io.write_metrics(res.interaction_rows, out / "metrics_interaction.csv")
    cols = ["frame"] + [k for k in res.paired_rows[0] if k != "frame"] if res.paired_rows else ["frame"]
    io.write_metrics(res.paired_rows, out / "compare.csv", cols)
    io.write_summary(res.summary, out / "compare_summary.csv")
    print(
        f"mean OSPA difference (baseline - interaction): {res.summary['mean_diff_ospa_total']:.4f}; "
        f"OSPA cardinality: {res.summary['mean_diff_ospa_card']:.4f} -> {out}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="iaware", description="Interaction-aware LMB tracking toolkit")
    sub = p.add_subparsers(dest="command", required=True)
    commands = {
        "simulate": (cmd_simulate, "generate ground truth and scans from a config"),
        "track": (cmd_track, "run the filter over a scans file"),
        "evaluate": (cmd_evaluate, "score a tracks file against ground truth"),
        "compare": (cmd_compare, "baseline vs interaction-aware filter on the same scans"),
    }
    for name, (fn, help_) in commands.items():
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=name != "evaluate", help="run configuration file")
        sp.add_argument("--scans", help="scans file")
        sp.add_argument("--truth", help="ground-truth file")
        sp.add_argument("--tracks", help="track estimates file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--timing", action="store_true", help="also write wall-clock timing files")
        sp.set_defaults(func=fn)
    return p


def main(argv=None) -> int:
    level = os.environ.get("IAWARE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AssociationTooLargeError as exc:
        print(f"error: {exc}; raise filter.max_group_tracks / filter.max_group_measurements", file=sys.stderr)
        return 2
    except (config_mod.ConfigError, io.ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
