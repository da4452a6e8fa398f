"""Labeled random finite set data model in particle form."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from ._validation import STATE_DIM, check_probability, check_state

WEIGHT_TOL = 1e-9


class Label(NamedTuple):
    """Track label ``(birth_time, birth_index)``; ordered lexicographically."""

    birth_time: int
    birth_index: int

    def __str__(self) -> str:
        return f"{self.birth_time}:{self.birth_index}"

    @classmethod
    def parse(cls, text: str) -> "Label":
        t, _, i = text.strip().partition(":")
        if not _ or not t.isdigit() or not i.isdigit():
            raise ValueError(f"malformed label {text!r}, expected 'birth_time:birth_index'")
        return cls(int(t), int(i))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class BernoulliTrack:
    """A possibly existing target: existence probability and a weighted particle cloud.

    ``particles`` has shape (J, 4) with columns ``[px, vx, py, vy]`` and
    ``weights`` has shape (J,) summing to one.
    """

    label: Label
    r: float
    particles: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "label", Label(*self.label))
        object.__setattr__(self, "r", check_probability(self.r, "r"))
        parts = check_state(self.particles, "particles")
        if parts.ndim == 1:
            parts = parts[None, :]
        if parts.shape[0] == 0:
            raise ValueError("a track needs at least one particle")
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (parts.shape[0],):
            raise ValueError(f"weights shape {w.shape} does not match {parts.shape[0]} particles")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and non-negative")
        if abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1 (got {w.sum():.17g})")
        object.__setattr__(self, "particles", _frozen(parts))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def num_particles(self) -> int:
        return self.particles.shape[0]

    def replace(self, **changes) -> "BernoulliTrack":
        kw = dict(label=self.label, r=self.r, particles=self.particles, weights=self.weights)
        kw.update(changes)
        return BernoulliTrack(**kw)

    def __eq__(self, other):
        if not isinstance(other, BernoulliTrack):
            return NotImplemented
        return (
            self.label == other.label
            and self.r == other.r
            and np.array_equal(self.particles, other.particles)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None


@dataclass(frozen=True)
class LMBDensity:
    """Labeled multi-Bernoulli density: a collection of uniquely labeled tracks."""

    tracks: tuple = ()

    def __post_init__(self):
        tracks = tuple(self.tracks)
        labels = [t.label for t in tracks]
        if len(set(labels)) != len(labels):
            dup = sorted({l for l in labels if labels.count(l) > 1})
            raise ValueError(f"duplicate labels in LMB density: {[str(l) for l in dup]}")
        object.__setattr__(self, "tracks", tracks)

    def __len__(self) -> int:
        return len(self.tracks)

    def __iter__(self) -> Iterator[BernoulliTrack]:
        return iter(self.tracks)

    @property
    def labels(self) -> list[Label]:
        return [t.label for t in self.tracks]

    @property
    def existence(self) -> np.ndarray:
        return np.array([t.r for t in self.tracks], dtype=float)

    def __add__(self, other: "LMBDensity") -> "LMBDensity":
        return LMBDensity(self.tracks + other.tracks)


@dataclass(frozen=True, eq=False)
class MultiTargetEstimate:
    """Extracted point estimates ``{(label, state)}``, kept sorted by label."""

    labels: tuple = ()
    states: np.ndarray = field(default_factory=lambda: np.zeros((0, STATE_DIM)))

    def __post_init__(self):
        labels = [Label(*l) for l in self.labels]
        states = np.asarray(self.states, dtype=float).reshape(-1, STATE_DIM)
        if len(labels) != states.shape[0]:
            raise ValueError("labels and states differ in length")
        if len(set(labels)) != len(labels):
            raise ValueError("estimate labels must be distinct")
        order = sorted(range(len(labels)), key=labels.__getitem__)
        object.__setattr__(self, "labels", tuple(labels[i] for i in order))
        object.__setattr__(self, "states", _frozen(states[order]))

    @classmethod
    def from_items(cls, items) -> "MultiTargetEstimate":
        items = list(items)
        if not items:
            return cls()
        labels, states = zip(*items)
        return cls(labels, np.array(states, dtype=float))

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(zip(self.labels, self.states))

    def __contains__(self, label) -> bool:
        return Label(*label) in self.labels

    def state_of(self, label: Label) -> np.ndarray:
        return self.states[self.labels.index(Label(*label))]

    def without(self, label: Label) -> "MultiTargetEstimate":
        keep = [i for i, l in enumerate(self.labels) if l != label]
        return MultiTargetEstimate(tuple(self.labels[i] for i in keep), self.states[keep])

    def __eq__(self, other):
        if not isinstance(other, MultiTargetEstimate):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.states, other.states)

    __hash__ = None


@dataclass(frozen=True)
class Threshold:
    """Keep tracks whose existence probability exceeds ``tau``."""

    tau: float = 0.5

    def __post_init__(self):
        check_probability(self.tau, "tau", low_open=True, high_open=True)


@dataclass(frozen=True)
class MAPCardinality:
    """Keep the ``round(sum r)`` tracks with the largest existence probability."""


ExtractionMode = Threshold | MAPCardinality


def weighted_mean(track: BernoulliTrack) -> np.ndarray:
    """Particle-weighted mean state of a track."""
    w = track.weights
    if abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise ValueError("track weights are not normalized")
    return w @ track.particles


def estimated_cardinality(lmb: LMBDensity) -> float:
    """Expected number of targets, the sum of existence probabilities."""
    return float(math.fsum(t.r for t in lmb.tracks))


def map_cardinality(lmb: LMBDensity) -> int:
    # round half up
    return int(math.floor(estimated_cardinality(lmb) + 0.5))


def extract_estimates(lmb: LMBDensity, mode: ExtractionMode = Threshold(0.5)) -> MultiTargetEstimate:
    """Point estimates of the targets deemed to exist under ``mode``."""
    if isinstance(mode, Threshold):
        chosen: Sequence[BernoulliTrack] = [t for t in lmb.tracks if t.r > mode.tau]
    elif isinstance(mode, MAPCardinality):
        n = map_cardinality(lmb)
        ranked = sorted(lmb.tracks, key=lambda t: (-t.r, t.label))
        chosen = ranked[:n]
    else:
        raise TypeError(f"unknown extraction mode {mode!r}")
    return MultiTargetEstimate.from_items((t.label, weighted_mean(t)) for t in chosen)


def parse_extraction(text: str) -> ExtractionMode:
    """Parse ``threshold`` / ``threshold:0.6`` / ``map``."""
    kind, _, arg = text.strip().lower().partition(":")
    if kind == "threshold":
        return Threshold(float(arg)) if arg else Threshold()
    if kind in ("map", "map_cardinality"):
        return MAPCardinality()
    raise ValueError(f"unknown extraction mode {text!r}")
