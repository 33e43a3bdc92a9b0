"""Matrix product operator constructions, uniform-MPS imaginary-time ground
states and thermodynamic-limit evaluators, each checked against dense oracles."""

__version__ = "0.1.0"

from .expfit import ExpSumFit, fit, fit_power_law
from .gates import GateMPO, TrotterPlan, trotter_plan
from .hamiltonians import HamiltonianMPO
from .imps import UniformMPS, ground_state_search

__all__ = [
    "__version__",
    "ExpSumFit",
    "fit",
    "fit_power_law",
    "GateMPO",
    "TrotterPlan",
    "trotter_plan",
    "HamiltonianMPO",
    "UniformMPS",
    "ground_state_search",
]
