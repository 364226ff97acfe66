"""
Estimation Module
Restarted CMA-ES maximum-likelihood fitting.
"""

from src.estimation.cmaes import CMAES, CMAESParameters, CmaesConfig, CmaesOutcome, cmaes_minimize
from src.estimation.estimator import FitResult, NegativeLogLikelihood, RestartResult, estimate, restart_seed

__all__ = [
    "CMAES",
    "CMAESParameters",
    "CmaesConfig",
    "CmaesOutcome",
    "cmaes_minimize",
    "FitResult",
    "NegativeLogLikelihood",
    "RestartResult",
    "estimate",
    "restart_seed",
]
