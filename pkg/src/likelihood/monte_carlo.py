"""
Monte-Carlo Likelihood
Brute-force estimate of the same likelihood by averaging

    Z = exp( sum_m ln Lambda^{z_m}(X_{m-1}, S_{t_m} - P_{m-1})
             + sum over intervals of int (1 - Lambda_tot(X, S_u - P)) du )

over simulated efficient-price paths started at S_0 = P_0. Used to validate
the coefficient scheme, not for estimation.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from src.errors import InactiveEventError
from src.likelihood.engine import prepare_log

if TYPE_CHECKING:
    from src.models.presets import MarketModel
    from src.simulation.state import EventLog

logger = logging.getLogger("likelihood.monte_carlo")


def mc_log_likelihood(
    log: EventLog,
    model: MarketModel,
    n_paths: int = 1000,
    substeps: int = 10,
    seed: Optional[int] = 0,
) -> Tuple[float, float]:
    """
    Monte-Carlo log-likelihood.

    Args:
        log: Observed event log
        model: Market model at the parameter point
        n_paths: Number of efficient-price paths
        substeps: Quadrature subintervals per inter-event interval (trapezoid rule)
        seed: Random seed

    Returns:
        (log of the sample mean of Z, delta-method standard error)
    """
    if n_paths < 2 or substeps < 1:
        raise ValueError("Need n_paths >= 2 and substeps >= 1")
    data = prepare_log(log, model)
    rng = np.random.default_rng(seed)
    intensity = model.intensity
    sigma = np.asarray(model.sigma, dtype=float)
    dim = model.dim

    bounds = np.concatenate([[0.0], data.times, [data.horizon]])
    s = np.tile(data.prices[0], (n_paths, 1))
    log_z = np.zeros(n_paths)
    with np.errstate(over="ignore", invalid="ignore"):
        for m in range(len(bounds) - 1):
            t_lo, t_hi = bounds[m], bounds[m + 1]
            x = data.states[m]
            price = data.prices[m]
            grid = np.linspace(t_lo, t_hi, substeps + 1)
            dts = np.diff(grid)
            noise = rng.standard_normal((substeps, n_paths, dim))
            increments = np.einsum("kpd,ed->kpe", noise, sigma) * np.sqrt(dts)[:, None, None]
            path = np.concatenate([s[None], s[None] + np.cumsum(increments, axis=0)], axis=0)
            ys = (path - price).reshape(-1, dim)
            total = intensity.rates_block(x, ys).sum(axis=1).reshape(substeps + 1, n_paths)
            integrand = 1.0 - total
            log_z += np.sum(0.5 * (integrand[1:] + integrand[:-1]) * dts[:, None], axis=0)
            s = path[-1]
            if m < len(data.events):
                z = data.events[m]
                if z is not None:
                    if not intensity.channel(z).is_active(x):
                        raise InactiveEventError(f"Event {z!r} at t={t_hi} is inactive in its pre-jump state")
                    coeffs = intensity.jump_coeffs(z, x, intensity.degree).coeffs
                    monomials = intensity.index_set.monomials(s - price)
                    log_z += monomials @ coeffs

    estimate = float(logsumexp(log_z) - np.log(n_paths))
    weights = np.exp(log_z - np.max(log_z))
    mean = weights.mean()
    stderr = float(weights.std(ddof=1) / (np.sqrt(n_paths) * mean)) if mean > 0 else float("inf")
    logger.debug(f"MC log-likelihood {estimate:.6f} +/- {stderr:.2e} from {n_paths} paths")
    return estimate, stderr
