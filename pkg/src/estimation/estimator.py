"""
Maximum-Likelihood Estimator
Fits a preset's free parameters to an event log by minimizing the negative
log-likelihood with restarted CMA-ES in unconstrained coordinates.

Example usage:
    fit = estimate(log, get_preset("model1"), CmaesConfig(restarts=3, seed=11))
    fit.theta["limit.alpha2"], fit.log_likelihood
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional

import numpy as np

from src.errors import ParameterFaultError
from src.estimation.cmaes import CmaesConfig, cmaes_minimize
from src.likelihood.engine import LikelihoodConfig, log_likelihood_prepared, prepare_log
from src.models.presets import ModelPreset, get_preset
from src.simulation.state import EventLog


class NegativeLogLikelihood:
    """Picklable objective: unconstrained coordinates -> -log-likelihood (+inf on faults)."""

    def __init__(
        self,
        log: EventLog,
        preset_id: str,
        options: Optional[Mapping[str, Any]] = None,
        config: Optional[LikelihoodConfig] = None,
    ):
        self.preset_id = preset_id
        self.options = dict(options or {})
        self.config = config or LikelihoodConfig()
        preset = get_preset(preset_id)
        self.spec = preset.theta_spec(self.options)
        reference = preset.build(preset.default_theta(self.options), self.options)
        self.prepared = prepare_log(log, reference)

    def __call__(self, coords: np.ndarray) -> float:
        # Parameters outside the model domain score +inf; log errors propagate.
        try:
            values = self.spec.from_unconstrained(coords)
            model = get_preset(self.preset_id).build(values, self.options)
        except (ValueError, FloatingPointError):
            return float("inf")
        try:
            value = log_likelihood_prepared(self.prepared, model, self.config).value
        except (ParameterFaultError, FloatingPointError):
            return float("inf")
        return -value if np.isfinite(value) else float("inf")


@dataclass
class RestartResult:
    seed: int
    theta: Dict[str, float]
    log_likelihood: float
    evaluations: int
    iterations: int
    stop: Dict[str, float]
    budget_exhausted: bool
    history: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "theta": self.theta,
            "log_likelihood": self.log_likelihood,
            "evaluations": self.evaluations,
            "iterations": self.iterations,
            "stop": self.stop,
            "budget_exhausted": self.budget_exhausted,
            "trajectory": [-v if np.isfinite(v) else None for v in self.history],
        }


@dataclass
class FitResult:
    preset_id: str
    theta: Dict[str, float]
    log_likelihood: float
    restarts: List[RestartResult]
    evaluations: int
    wall_time: float = 0.0

    def to_dict(self, include_timing: bool = False) -> Dict[str, Any]:
        data = {
            "preset": self.preset_id,
            "theta": self.theta,
            "log_likelihood": self.log_likelihood,
            "evaluations": self.evaluations,
            "restarts": [r.to_dict() for r in self.restarts],
        }
        if include_timing:
            data["wall_time"] = self.wall_time
        return data

    def restart_table(self) -> List[Dict[str, Any]]:
        """One flat row per restart, for CSV export."""
        rows = []
        for i, r in enumerate(self.restarts):
            row = {"restart": i, "seed": r.seed, "log_likelihood": r.log_likelihood, "evaluations": r.evaluations}
            row.update(r.theta)
            rows.append(row)
        return rows


def restart_seed(seed: int, index: int) -> int:
    if index == 0:
        return int(seed)
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint32)[0])


def estimate(
    log: EventLog,
    preset: ModelPreset,
    config: Optional[CmaesConfig] = None,
    likelihood_config: Optional[LikelihoodConfig] = None,
    options: Optional[Mapping[str, Any]] = None,
    start: Optional[Mapping[str, float]] = None,
    jobs: int = 1,
) -> FitResult:
    """
    Maximum-likelihood fit of `preset` to `log`.

    Args:
        log: Observed event log
        preset: Model family
        config: CMA-ES settings
        likelihood_config: Numerical likelihood settings
        options: Structural preset options (defaults to the log header's)
        start: Named starting point; defaults to the preset's data-driven neutral point
        jobs: Worker processes evaluating each generation

    Returns:
        FitResult with the best restart and every restart's optimum

    Raises:
        InactiveEventError, InvalidStateError: the log does not fit the preset
    """
    logger = logging.getLogger("estimation.estimator")
    config = config or CmaesConfig()
    options = dict(options if options is not None else (log.header.options or {}))
    objective = NegativeLogLikelihood(log, preset.preset_id, options, likelihood_config)
    spec = objective.spec
    start_values = dict(start) if start is not None else preset.neutral_theta(log, options)
    x0 = spec.to_unconstrained(spec.from_dict(start_values, defaults=preset.default_values(options)))
    n_restarts = config.restarts or (3 if preset.n_assets(options) == 1 else 6)
    start_score = objective(x0)
    if not np.isfinite(start_score):
        logger.warning(f"Starting point of {preset.preset_id} has zero likelihood under the log")

    logger.info(f"Estimating {preset.preset_id} ({len(spec)} parameters) with {n_restarts} restarts")
    began = time.perf_counter()
    restarts: List[RestartResult] = []
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for r in range(n_restarts):
            seed = restart_seed(config.seed, r)
            outcome = cmaes_minimize(objective, x0, config, seed=seed, population_map=pool.map if pool else None)
            theta = spec.to_dict(spec.from_unconstrained(outcome.x))
            loglik = -outcome.f if np.isfinite(outcome.f) else float("-inf")
            restarts.append(
                RestartResult(seed, theta, loglik, outcome.evaluations, outcome.iterations,
                              outcome.stop, outcome.budget_exhausted, outcome.history)
            )
            logger.info(f"Restart {r + 1}/{n_restarts}: log-likelihood {loglik:.6f} after {outcome.evaluations} evaluations")
    finally:
        if pool is not None:
            pool.shutdown()

    best = max(restarts, key=lambda r: r.log_likelihood)
    fit = FitResult(
        preset_id=preset.preset_id,
        theta=dict(best.theta),
        log_likelihood=best.log_likelihood,
        restarts=restarts,
        evaluations=sum(r.evaluations for r in restarts),
        wall_time=time.perf_counter() - began,
    )
    logger.info(f"Best log-likelihood {fit.log_likelihood:.6f} over {fit.evaluations} evaluations")
    return fit
