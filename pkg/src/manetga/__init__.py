"""MANET routing-attack simulator with genetic link-weight optimisation."""

from .gaopt import GaParams, evolve, evaluate
from .scenario import Scenario, ScenarioError, parse_scenario, render

__all__ = ["GaParams", "Scenario", "ScenarioError", "evaluate", "evolve", "parse_scenario", "render"]
__version__ = "0.1.0"
