"""Particle LMB multi-target tracking where neighbouring targets shape the prediction."""

from .estimator import InteractionAwareLMB
from .interaction import InteractionConfig, InteractionModel
from .lmb import BirthComponent, BirthModel, FilterConfig, FilterState, Scan, run_filter, step
from .metrics import OspaParams, ospa, ospa2
from .motion import make_ncv, sample_transition
from .rfs import BernoulliTrack, Label, LMBDensity, MAPCardinality, MultiTargetEstimate, Threshold
from .rng import RandomSource
from .scenario import GroundTruthTrack, ScenarioConfig, simulate

__all__ = [
    "BernoulliTrack",
    "BirthComponent",
    "BirthModel",
    "FilterConfig",
    "FilterState",
    "GroundTruthTrack",
    "InteractionAwareLMB",
    "InteractionConfig",
    "InteractionModel",
    "LMBDensity",
    "Label",
    "MAPCardinality",
    "MultiTargetEstimate",
    "OspaParams",
    "RandomSource",
    "Scan",
    "ScenarioConfig",
    "Threshold",
    "make_ncv",
    "ospa",
    "ospa2",
    "run_filter",
    "sample_transition",
    "simulate",
    "step",
]

__version__ = "0.1.0"
