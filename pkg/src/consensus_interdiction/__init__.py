"""Simulator and strategy library for the link-interdiction averaging game.

A network designer may reweight up to ell links while an adversary breaks
up to ell links, both acting over continuous-time distributed averaging on
a weighted graph. The package implements the ranking-based optimal
strategies for both orders of play, exhaustive oracles to validate them at
desk scale, and the saddle-point-equilibrium certificate.
"""

from .config import MODES, ConfigError, GameConfig, parse_config, serialize_config, to_document
from .dynamics import (
    AdjointTrajectory,
    ControlPair,
    Kernel,
    Trajectory,
    UNIT_KERNEL,
    adjoint_integrate,
    assemble_matrix,
    check_system_matrix,
    cost,
    sensitivity_values,
    integrate,
    negative_gaps,
    trajectory_to_csv,
    validate_control,
)
from .game import GameResult, IntervalPlay, run, upper_lower_values
from .graph import EdgeId, Graph, canonical_edge, is_connected
from .oracle import (
    BruteForceReport,
    SensitivityBoundReport,
    MeetingTimeReport,
    SpeCertificate,
    brute_force_value,
    sensitivity_bound_check,
    sensitivity_bound,
    meeting_time_bound,
    spe_check,
    two_node_cost,
)
from .strategies import (
    EnumerationGuardError,
    RankedLinks,
    StrategyOutcome,
    adversary_first_move_maxmin,
    adversary_response_minmax,
    designer_first_move_minmax,
    designer_response_maxmin,
    select_most_negative,
)

__version__ = "0.1.0"

__all__ = [
    "AdjointTrajectory",
    "BruteForceReport",
    "ConfigError",
    "ControlPair",
    "EdgeId",
    "EnumerationGuardError",
    "SensitivityBoundReport",
    "GameConfig",
    "GameResult",
    "Graph",
    "IntervalPlay",
    "Kernel",
    "MODES",
    "MeetingTimeReport",
    "RankedLinks",
    "SpeCertificate",
    "StrategyOutcome",
    "Trajectory",
    "UNIT_KERNEL",
    "adjoint_integrate",
    "adversary_first_move_maxmin",
    "adversary_response_minmax",
    "assemble_matrix",
    "brute_force_value",
    "canonical_edge",
    "check_system_matrix",
    "cost",
    "designer_first_move_minmax",
    "designer_response_maxmin",
    "sensitivity_bound_check",
    "sensitivity_values",
    "integrate",
    "is_connected",
    "sensitivity_bound",
    "meeting_time_bound",
    "negative_gaps",
    "parse_config",
    "run",
    "select_most_negative",
    "serialize_config",
    "spe_check",
    "to_document",
    "trajectory_to_csv",
    "two_node_cost",
    "upper_lower_values",
    "validate_control",
]
