"""
Lyapunov Drift Check
Evaluates the generator of a signal-driven model on the candidate function

    V(y, x) = prod_i exp(U(y^i)),  U(y) = |y|                      for |y| >= 1
                                   U(y) = 3/8 + 3y^2/4 - y^4/8     on [-1, 1]

over a grid of y values and caller-supplied signal values, and reports
K = max(LV + V). V does not depend on the signal, so signal redraws add
nothing; a jump of asset i by one tick in direction s moves y^i by -s * tick.

Example usage:
    report = lyapunov_drift_check(model2_preset(), np.linspace(-30, 30, 61), signal_values=np.linspace(-3, 3, 7))
    report.k, report.y_star
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from src.errors import NonCompliantModelError
from src.models.intensity import PriceJumpChannel
from src.models.presets import MarketModel

logger = logging.getLogger("evaluation.lyapunov")


def lyapunov_u(y):
    y = np.asarray(y, dtype=float)
    inner = 3.0 / 8.0 + 0.75 * y ** 2 - y ** 4 / 8.0
    return np.where(np.abs(y) >= 1.0, np.abs(y), inner)


def lyapunov_u_prime(y):
    y = np.asarray(y, dtype=float)
    return np.where(np.abs(y) >= 1.0, np.sign(y), 1.5 * y - 0.5 * y ** 3)


def lyapunov_u_second(y):
    y = np.asarray(y, dtype=float)
    return np.where(np.abs(y) >= 1.0, 0.0, 1.5 - 1.5 * y ** 2)


def lyapunov_v(y) -> np.ndarray:
    """V at points y of shape (m, d)."""
    return np.exp(np.sum(lyapunov_u(np.atleast_2d(y)), axis=1))


def diffusion_term(y, covariance: np.ndarray) -> np.ndarray:
    """1/2 tr(C Hess V) at points y of shape (m, d)."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    grad = lyapunov_u_prime(y)
    second = lyapunov_u_second(y)
    hess = grad[:, :, None] * grad[:, None, :]
    idx = np.arange(y.shape[1])
    hess[:, idx, idx] += second
    return 0.5 * np.einsum("ij,mij->m", covariance, hess) * lyapunov_v(y)


def generator_drift(model: MarketModel, y, x) -> np.ndarray:
    """LV at points y (m, d) for a fixed signal state x."""
    if model.family != "signal":
        raise NonCompliantModelError(f"Drift check needs a signal-driven model, got {model.preset_id}")
    y = np.atleast_2d(np.asarray(y, dtype=float))
    v = lyapunov_v(y)
    out = diffusion_term(y, model.covariance)
    rates = model.intensity.rates_block(x, y)
    ticks = np.asarray(model.ticks)
    for k, channel in enumerate(model.intensity.channels):
        if not isinstance(channel, PriceJumpChannel):
            raise NonCompliantModelError(f"Channel {channel.name} is not a price jump")
        moved = y.copy()
        moved[:, channel.asset] -= channel.direction * ticks[channel.asset]
        out += rates[:, k] * (lyapunov_v(moved) - v)
    return out


@dataclass
class LyapunovReport:
    k: float
    y_star: Optional[float]
    finite: bool
    grid_points: int
    signal_points: int
    radii: List[float]
    worst_by_radius: List[float]
    preset_id: str = ""

    @property
    def drift_negative_outside_box(self) -> bool:
        return self.y_star is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "preset": self.preset_id,
            "K": self.k,
            "y_star": self.y_star,
            "finite": self.finite,
            "drift_negative_outside_box": self.drift_negative_outside_box,
            "grid_points": self.grid_points,
            "signal_points": self.signal_points,
            "radii": self.radii,
            "worst_by_radius": self.worst_by_radius,
        }


def _signal_states(model: MarketModel, signal_values: Optional[Sequence[float]]):
    dynamics = model.dynamics
    if model.family != "signal":
        raise NonCompliantModelError(f"Drift check needs a signal-driven model, got {model.preset_id}")
    if signal_values is None:
        if dynamics.distribution == "normal":
            raise NonCompliantModelError(
                "Gaussian signals are unbounded; pass truncated signal values to check the drift"
            )
        signal_values = np.linspace(-1.0, 1.0, 5)
    values = [float(v) for v in signal_values]
    if dynamics.distribution == "uniform" and any(abs(v) > 1.0 for v in values):
        raise NonCompliantModelError(f"Imbalance signal values must lie in [-1, 1], got {values}")
    per_asset = list(itertools.product(values, repeat=dynamics.signal_dim))
    return list(itertools.product(per_asset, repeat=dynamics.n_assets))


def lyapunov_drift_check(
    model: MarketModel,
    y_grid: Sequence[float],
    signal_values: Optional[Sequence[float]] = None,
) -> LyapunovReport:
    """
    Grid evaluation of LV + V.

    Args:
        model: Signal-driven market model
        y_grid: One-dimensional grid used on every axis (price units)
        signal_values: Values each signal component ranges over; required for
            unbounded (Gaussian) signals

    Returns:
        LyapunovReport with K = max(LV + V) and the smallest grid radius y*
        beyond which LV + V <= 0 at every grid point (None when there is none)

    Raises:
        NonCompliantModelError: unbounded signal without truncation, or K not finite
    """
    states = _signal_states(model, signal_values)
    axis = np.unique(np.asarray(y_grid, dtype=float))
    points = np.array(list(itertools.product(axis, repeat=model.dim)))
    radius = np.max(np.abs(points), axis=1)

    worst = np.full(points.shape[0], -np.inf)
    with np.errstate(over="ignore", invalid="ignore"):
        for x in states:
            worst = np.maximum(worst, generator_drift(model, points, x) + lyapunov_v(points))
    k = float(np.max(worst))
    if not np.isfinite(k):
        raise NonCompliantModelError(f"LV + V is not finite on the grid for {model.preset_id}")

    radii = sorted(set(np.abs(axis)))
    by_radius = [float(np.max(worst[radius >= r])) for r in radii]
    y_star = None
    for r, value in zip(radii, by_radius):
        if value <= 0.0:
            y_star = float(r)
            break
    logger.info(f"Drift check on {points.shape[0]} points x {len(states)} signals: K={k:.4g}, y*={y_star}")
    return LyapunovReport(k, y_star, True, int(points.shape[0]), len(states),
                          [float(r) for r in radii], by_radius, model.preset_id)
