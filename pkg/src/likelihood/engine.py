"""
Likelihood Engine
Observed-data log-likelihood of an event log under a market model.

The likelihood is u(0, 0) where u(t, y) = exp(-A(t, y)) solves a backward
equation between jumps and is multiplied by the jump intensity at each jump.
A is carried as a truncated polynomial in y = S - P, so the backward sweep is:

    a <- 0 on [t_M, T]
    for m = M..1:
        integrate back over the interval after jump m (potential from X_m)
        re-center by P_{m-1} - P_m on each moved axis
        a <- a - log-intensity coefficients of z_m at X_{m-1}
    integrate back over [0, t_1]
    log-likelihood = -a_0(0)

Example usage:
    engine = LikelihoodEngine(log, get_preset("model1"))
    engine.evaluate(theta).value
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Dict, List, Mapping, Optional

import numpy as np

from src.errors import InactiveEventError, InvalidStateError, ParameterFaultError
from src.likelihood.multi_index import MultiIndexPoly, get_index_set
from src.likelihood.ode import CoefficientODE, jump_update, shift_coeffs

if TYPE_CHECKING:
    from src.models.presets import MarketModel, ModelPreset
    from src.simulation.state import EventLog

METHODS = ("euler", "rk4")


def default_degree(dim: int) -> int:
    return 10 if dim == 1 else 6 if dim == 2 else 4


@dataclass
class LikelihoodConfig:
    """
    Args:
        n_deg: Truncation degree (even); None picks 10 for one asset, 6 for two
        max_step: Largest ODE substep
        min_substeps: Fewest substeps per inter-event interval
        method: "euler" or "rk4"
    """

    n_deg: Optional[int] = None
    max_step: float = 1e-3
    min_substeps: int = 10
    method: str = "euler"

    def __post_init__(self):
        if self.n_deg is not None and (self.n_deg < 2 or self.n_deg % 2):
            raise ValueError(f"Truncation degree must be an even integer >= 2, got {self.n_deg}")
        if not self.max_step > 0:
            raise ValueError(f"ODE step must be > 0, got {self.max_step}")
        if self.min_substeps < 1:
            raise ValueError(f"min_substeps must be >= 1, got {self.min_substeps}")
        if self.method not in METHODS:
            raise ValueError(f"Unknown integration method {self.method!r}; expected {METHODS}")

    def degree_for(self, dim: int) -> int:
        return self.n_deg if self.n_deg is not None else default_degree(dim)


@dataclass
class LikelihoodResult:
    value: float
    a0: List[float]
    intervals: int
    substeps: int
    jumps: int
    cache_hits: int
    n_deg: int
    method: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "a0": self.a0,
            "intervals": self.intervals,
            "substeps": self.substeps,
            "jumps": self.jumps,
            "cache_hits": self.cache_hits,
            "n_deg": self.n_deg,
            "method": self.method,
        }


@dataclass
class PreparedLog:
    """Event log with model states restored, ready for repeated evaluation."""

    times: np.ndarray
    prices: np.ndarray
    events: List[Optional[str]]
    states: List[Any]
    horizon: float


def prepare_log(log: EventLog, model: MarketModel) -> PreparedLog:
    """
    Restore the model state after every jump and check the log is usable.

    Raises:
        InvalidStateError: malformed log (non-increasing times, wrong shapes)
    """
    times = log.times
    if times.size and (np.any(np.diff(times) <= 0) or times[0] <= 0):
        raise InvalidStateError("Event times must be strictly increasing and positive")
    if times.size and times[-1] > log.horizon:
        raise InvalidStateError(f"Event at t={times[-1]} beyond horizon {log.horizon}")
    prices = log.prices()
    if prices.shape[1] != model.dim:
        raise InvalidStateError(f"Log has {prices.shape[1]} assets, model has {model.dim}")
    states = [model.dynamics.restore(log.header.x0)]
    states += [model.dynamics.restore(r.x) for r in log.records]
    events = [r.z for r in log.records]
    return PreparedLog(times, prices, events, states, float(log.horizon))


class LikelihoodEngine:
    """
    Repeated likelihood evaluation of one event log over parameter points.

    Args:
        log: Observed event log
        preset: Model family; `build` is called for every parameter point
        options: Structural preset options
        config: Numerical settings
    """

    def __init__(
        self,
        log: EventLog,
        preset: ModelPreset,
        options: Optional[Mapping[str, Any]] = None,
        config: Optional[LikelihoodConfig] = None,
    ):
        self.logger = logging.getLogger("likelihood.engine")
        self.preset = preset
        self.options = dict(options or log.header.options or {})
        self.config = config or LikelihoodConfig()
        self.log = log
        reference = preset.build(preset.default_theta(self.options), self.options)
        self.prepared = prepare_log(log, reference)

    def evaluate(self, theta) -> LikelihoodResult:
        model = self.preset.build(theta, self.options)
        return log_likelihood_prepared(self.prepared, model, self.config)

    def value(self, theta) -> float:
        """Log-likelihood, or -inf when the parameters make the scheme blow up."""
        try:
            return self.evaluate(theta).value
        except ParameterFaultError as e:
            self.logger.debug(f"Parameter fault: {e}")
            return float("-inf")


def log_likelihood(log: EventLog, model: MarketModel, config: Optional[LikelihoodConfig] = None) -> LikelihoodResult:
    """
    Log-likelihood of `log` under `model`.

    Raises:
        ParameterFaultError: coefficients blew up
        InactiveEventError: a recorded event is inactive at its pre-jump state
    """
    return log_likelihood_prepared(prepare_log(log, model), model, config or LikelihoodConfig())


def log_likelihood_prepared(data: PreparedLog, model: MarketModel, config: LikelihoodConfig) -> LikelihoodResult:
    logger = logging.getLogger("likelihood.engine")
    n_deg = config.degree_for(model.dim)
    iset = get_index_set(model.dim, n_deg)
    ode = CoefficientODE(iset, model.covariance)
    intensity = model.intensity
    cache: Dict[Any, np.ndarray] = {}
    hits = 0

    def potential(x) -> np.ndarray:
        nonlocal hits
        try:
            hash(x)
            key = x
        except TypeError:
            key = None
        if key is not None and key in cache:
            hits += 1
            return cache[key]
        coeffs = intensity.taylor_sum_coeffs(x, n_deg).coeffs
        if key is not None:
            cache[key] = coeffs
        return coeffs

    def integrate(a: np.ndarray, x, t_lo: float, t_hi: float) -> np.ndarray:
        nonlocal substeps
        a, n = ode.integrate(a, potential(x), t_lo, t_hi, config.max_step, config.min_substeps, config.method)
        substeps += n
        return a

    substeps = 0
    n_jumps = len(data.events)
    a = np.zeros(iset.size)
    t_last = data.times[-1] if n_jumps else 0.0
    a = integrate(a, data.states[-1], float(t_last), data.horizon)
    for m in range(n_jumps, 0, -1):
        before = data.prices[m - 1]
        after = data.prices[m]
        poly = MultiIndexPoly(iset, a)
        for axis in np.nonzero(before != after)[0]:
            poly = shift_coeffs(poly, int(axis), float(before[axis] - after[axis]))
        z = data.events[m - 1]
        x_before = data.states[m - 1]
        if z is None:
            poly = jump_update(poly, None)
        else:
            if z not in intensity.names:
                raise InactiveEventError(f"Event {z!r} at t={data.times[m - 1]} is not part of {model.preset_id}")
            if not intensity.channel(z).is_active(x_before):
                raise InactiveEventError(f"Event {z!r} at t={data.times[m - 1]} is inactive in its pre-jump state")
            poly = jump_update(poly, intensity.jump_coeffs(z, x_before, n_deg))
        t_lo = float(data.times[m - 2]) if m >= 2 else 0.0
        a = integrate(poly.coeffs, x_before, t_lo, float(data.times[m - 1]))

    value = float(-a[0])
    logger.debug(f"log-likelihood {value:.6f} over {n_jumps} jumps, {substeps} substeps, {hits} cache hits")
    return LikelihoodResult(
        value=value,
        a0=[float(v) for v in a[: model.dim + 1]],
        intervals=n_jumps + 1,
        substeps=substeps,
        jumps=n_jumps,
        cache_hits=hits,
        n_deg=n_deg,
        method=config.method,
    )
