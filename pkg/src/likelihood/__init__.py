"""
Likelihood Module
Exact-model log-likelihood by the backward coefficient scheme, and its
Monte-Carlo oracle.
"""

from src.likelihood.engine import (
    LikelihoodConfig,
    LikelihoodEngine,
    LikelihoodResult,
    default_degree,
    log_likelihood,
    prepare_log,
)
from src.likelihood.monte_carlo import mc_log_likelihood
from src.likelihood.multi_index import MultiIndexPoly, MultiIndexSet, get_index_set
from src.likelihood.ode import (
    BLOWUP_THRESHOLD,
    CoefficientODE,
    check_coefficients,
    integrate_interval,
    jump_update,
    ode_rhs,
    shift_coeffs,
)

__all__ = [
    "LikelihoodConfig",
    "LikelihoodEngine",
    "LikelihoodResult",
    "default_degree",
    "log_likelihood",
    "prepare_log",
    "mc_log_likelihood",
    "MultiIndexPoly",
    "MultiIndexSet",
    "get_index_set",
    "BLOWUP_THRESHOLD",
    "CoefficientODE",
    "check_coefficients",
    "integrate_interval",
    "jump_update",
    "ode_rhs",
    "shift_coeffs",
]
