"""Competitive online regression in reproducing kernel Hilbert spaces.

Defensive-forecasting and aggregating predictors, numeric regret-bound
evaluators, and a harness that audits realized games against the bounds and
against hindsight comparators.
"""

from . import aggregating, bounds, comparators, defensive, harness, kernels
from .backend import COMPILED
from .game import GameTranscript, ProtocolError

__version__ = "0.1.0"

__all__ = [
    "COMPILED",
    "GameTranscript",
    "ProtocolError",
    "aggregating",
    "bounds",
    "comparators",
    "defensive",
    "harness",
    "kernels",
]
