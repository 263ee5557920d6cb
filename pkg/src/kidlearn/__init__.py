"""Curriculum sequencing for the money game.

Core pieces: a hierarchical activity space, a learning-progress bandit
with zone-of-proximal-development regulation (ZPDES), a hand-authored
linear baseline, the money-game content domain, simulated learners, and
the batch experiment harness. A FastAPI service exposes live tutoring
sessions and batch runs; the command line is a thin client over it.
"""

__version__ = "0.1.0"

from .space import (Activity, ActivitySpace, Parameter, ParameterGroup,
                    ParameterValue, assemble_activity, validate_space)
from .bandit import BanditConfig, ExpertWeights, StochasticActivitySpace
from .zpdes import ZpdRules, ZpdesPolicy
from .predef import PredefPolicy, PredefSequence, PredefStep

__all__ = [
    "Activity", "ActivitySpace", "Parameter", "ParameterGroup",
    "ParameterValue", "assemble_activity", "validate_space",
    "BanditConfig", "ExpertWeights", "StochasticActivitySpace",
    "ZpdRules", "ZpdesPolicy",
    "PredefPolicy", "PredefSequence", "PredefStep",
    "__version__",
]
