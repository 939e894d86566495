"""Cooperative equilibria of finite normal-form games."""

from .cpt import CptParams, Prospect, decision_weights, prospect_value, value_fn, weight_fn
from .deletion import DeletionTrace, iterate_deletion, super_dominates
from .equilibrium import EquilibriumSet, acceptable_equilibria, nash_equilibria, nash_set
from .errors import (CapacityError, ConsistencyError, CoopEqError, CptUnavailableError,
                     InfeasibleError, ValidationError)
from .game import (CoalitionGame, CoalitionStructure, ExplicitGame, MixedProfile,
                   enumerate_coalition_structures, expected_gain)
from .gameio import dumps_game, game_from_json, game_to_json, load_game, loads_game
from .generators import make_standard_game
from .solver import (CooperativeSolution, cooperative_equilibrium_cpt, equilibrium_in_beliefs,
                     exact_cooperative_equilibrium, induced_game,
                     quantal_coalition_distribution)
from .valuation import StructureReport, analyze_all, analyze_structure, coalition_value

__all__ = [
    "CapacityError", "CoalitionGame", "CoalitionStructure", "ConsistencyError",
    "CooperativeSolution", "CoopEqError", "CptParams", "CptUnavailableError", "DeletionTrace",
    "EquilibriumSet", "ExplicitGame", "InfeasibleError", "MixedProfile", "Prospect",
    "StructureReport", "ValidationError", "acceptable_equilibria", "analyze_all",
    "analyze_structure", "coalition_value", "cooperative_equilibrium_cpt", "decision_weights",
    "dumps_game", "enumerate_coalition_structures", "equilibrium_in_beliefs",
    "exact_cooperative_equilibrium", "expected_gain", "game_from_json", "game_to_json",
    "induced_game", "iterate_deletion", "load_game", "loads_game", "make_standard_game",
    "nash_equilibria", "nash_set", "prospect_value", "quantal_coalition_distribution",
    "super_dominates", "value_fn", "weight_fn",
]
