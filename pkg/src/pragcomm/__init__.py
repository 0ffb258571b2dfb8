"""Adaptive emergence of pragmatic communication protocols in referential games."""

from . import kernel
from .beliefs import BeliefNet, literal_update, net_update, pretrain_bayesian, uniform_belief
from .errors import (
    ConfigError,
    DataError,
    DimensionError,
    NumericError,
    PragcommError,
    ProtocolError,
    TrainingError,
)
from .evalsuite import covariance_analysis, evaluate, stability_eval, validity_eval
from .game import Game, apply_equivalence, sample_game, step, total_gain
from .oracle import LiteralOracleStudent, LiteralOracleTeacher, oracle_pair
from .rtd import ConceptClass, game_levels, rtd, teaching_dimension, teaching_hierarchy
from .spaces import Instance, InstanceSpace, enumerate_space
from .student import StudentModel, returns
from .teacher import ReplayBuffer, TeacherModel, Transition
from .trainer import ProtocolPair, TrainConfig, build_pair, run_episode, train

__version__ = "0.1.0"

__all__ = [
    "BeliefNet",
    "ConceptClass",
    "ConfigError",
    "DataError",
    "DimensionError",
    "Game",
    "Instance",
    "InstanceSpace",
    "LiteralOracleStudent",
    "LiteralOracleTeacher",
    "NumericError",
    "PragcommError",
    "ProtocolError",
    "ProtocolPair",
    "ReplayBuffer",
    "StudentModel",
    "TeacherModel",
    "TrainConfig",
    "TrainingError",
    "Transition",
    "apply_equivalence",
    "build_pair",
    "covariance_analysis",
    "enumerate_space",
    "evaluate",
    "game_levels",
    "kernel",
    "literal_update",
    "net_update",
    "oracle_pair",
    "pretrain_bayesian",
    "rtd",
    "run_episode",
    "sample_game",
    "stability_eval",
    "step",
    "teaching_dimension",
    "teaching_hierarchy",
    "total_gain",
    "train",
    "uniform_belief",
    "validity_eval",
]
