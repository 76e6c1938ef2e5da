"""Edge-state Metropolis-Hastings sampling of DAG structure on a candidate skeleton."""
from .graph import ABSENT, FORWARD, REVERSE, CandidateGraph, EdgeConstraint, Prior
from .sampler import McmcConfig, PosteriorTable, Trace, infer, run
from .score import DataMatrix

__all__ = ["ABSENT", "FORWARD", "REVERSE", "CandidateGraph", "EdgeConstraint", "Prior",
           "McmcConfig", "PosteriorTable", "Trace", "infer", "run", "DataMatrix"]
__version__ = "0.1.0"
