"""Solver for adversarial graph traversal games with two-sided private types."""

from .analysis import (DeceptionReport, SolveCache, VoiReport, belief_trajectories, belief_update,
                       brute_force_value, deception_deltas, shapley_value_iteration, solve_voi, value_1S,
                       value_2S, value_CI, voi_report)
from .best_response import best_response, full_exploitability
from .cfr import CfrConfig, cfr_solve
from .extensive import (BehavioralStrategy, InfoKey, PureStrategy, build_full_game, build_restricted_game,
                        default_strategy, evaluate_profile, extend_strategy, simulate_playout)
from .game import BLUE, RED, Game, GameSpec, GameState, horizon_bounds, validate_spec
from .scenario import FIXTURES, load_scenario, save_scenario
from .xdo import XdoConfig, XdoResult, xdo_solve

__all__ = [
    "BLUE", "RED", "BehavioralStrategy", "CfrConfig", "DeceptionReport", "FIXTURES", "Game", "GameSpec",
    "GameState", "InfoKey", "PureStrategy", "SolveCache", "VoiReport", "XdoConfig", "XdoResult",
    "belief_trajectories", "belief_update", "best_response", "brute_force_value", "build_full_game",
    "build_restricted_game", "cfr_solve", "deception_deltas", "default_strategy", "evaluate_profile",
    "extend_strategy", "full_exploitability", "horizon_bounds", "load_scenario", "save_scenario",
    "shapley_value_iteration", "simulate_playout", "solve_voi", "validate_spec", "value_1S", "value_2S",
    "value_CI", "voi_report", "xdo_solve",
]
