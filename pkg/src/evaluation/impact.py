"""
Market Impact
Mean path of the reference price after a single buy market order, averaged
over independent paths:

    burn-in -> record P_{0-} -> buy `size` units at t=0 -> P_t - P_{0-} on a grid
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.errors import InvalidStateError
from src.lob.types import Side
from src.models.presets import MarketModel
from src.simulation.engine import MarketSimulator
from src.simulation.replication import derive_seed
from src.simulation.state import SimConfig

logger = logging.getLogger("evaluation.impact")

DEFAULT_BURN_IN = 100.0


@dataclass
class ImpactCurve:
    times: np.ndarray
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    reps: int
    size: int
    burn_in: float
    preset_id: str = ""

    def peak(self) -> Tuple[float, float]:
        """(time, value) of the largest mean impact."""
        i = int(np.argmax(self.mean))
        return float(self.times[i]), float(self.mean[i])

    def value_at(self, t: float) -> float:
        """Mean impact at time t, linearly interpolated on the grid."""
        if not self.times[0] <= t <= self.times[-1]:
            raise ValueError(f"Time {t} outside the impact grid [{self.times[0]}, {self.times[-1]}]")
        return float(np.interp(t, self.times, self.mean))

    def to_dict(self) -> Dict[str, Any]:
        peak_time, peak_value = self.peak()
        return {
            "preset": self.preset_id,
            "size": self.size,
            "reps": self.reps,
            "burn_in": self.burn_in,
            "times": self.times.tolist(),
            "mean": self.mean.tolist(),
            "ci_low": self.ci_low.tolist(),
            "ci_high": self.ci_high.tolist(),
            "peak_time": peak_time,
            "peak_value": peak_value,
        }

    def rows(self) -> List[Dict[str, float]]:
        return [
            {"t": float(t), "mean": float(m), "ci_low": float(lo), "ci_high": float(hi)}
            for t, m, lo, hi in zip(self.times, self.mean, self.ci_low, self.ci_high)
        ]


def impact_path(args) -> np.ndarray:
    """P_t - P_{0-} on the grid for one path (asset 0)."""
    model, config, seed, size, grid, burn_in = args
    sim = MarketSimulator(model, config)
    sim.reset(seed)
    sim.run_until(burn_in)
    p_before = sim.model.prices(sim.state.grid)[0]
    if size > 0:
        sim.market_order(0, Side.ASK, size)
    out = np.empty(len(grid))
    for i, t in enumerate(grid):
        sim.run_until(burn_in + t)
        out[i] = sim.model.prices(sim.state.grid)[0] - p_before
    return out


def market_impact(
    model: MarketModel,
    size: int = 100,
    grid: Sequence[float] = tuple(np.linspace(0.0, 240.0, 49)),
    reps: int = 20000,
    seed: int = 0,
    burn_in: float = DEFAULT_BURN_IN,
    double_burn_in: bool = False,
    config: Optional[SimConfig] = None,
    jobs: int = 1,
    progress: bool = False,
) -> ImpactCurve:
    """
    Mean impact curve of a buy market order of `size` units.

    Args:
        model: Queue-reactive model (impact preset)
        size: Order size; 0 gives the no-order baseline
        grid: Increasing times after the order, starting at 0 or later
        reps: Independent paths
        seed: Master seed
        burn_in: Simulated time before the order
        double_burn_in: Use twice the burn-in (sensitivity check)
        config: Simulation settings (scheme, step)
        jobs: Worker processes
    """
    if model.family != "qr":
        raise InvalidStateError(f"Market impact needs a queue-reactive model, got {model.preset_id}")
    if size < 0:
        raise ValueError(f"Order size must be >= 0, got {size}")
    times = np.asarray(grid, dtype=float)
    if times.size == 0 or np.any(np.diff(times) <= 0) or times[0] < 0:
        raise ValueError("Impact grid must be non-empty, increasing and non-negative")
    if reps < 1:
        raise ValueError(f"Need at least one replicate, got {reps}")
    burn = burn_in * (2.0 if double_burn_in else 1.0)
    config = config or SimConfig(scheme="thinning")
    horizon = burn + float(times[-1])
    config = SimConfig(**{**config.to_dict(), "horizon": horizon, "seed": seed})

    tasks = [(model, config, derive_seed(seed, i), int(size), times, burn) for i in range(reps)]
    logger.info(f"Impact of size {size} over {reps} paths (burn-in {burn}s)")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            paths = list(tqdm(pool.map(impact_path, tasks, chunksize=max(1, reps // (4 * jobs))),
                              total=reps, disable=not progress, desc="impact"))
    else:
        paths = [impact_path(t) for t in tqdm(tasks, disable=not progress, desc="impact")]
    samples = np.vstack(paths)
    mean = samples.mean(axis=0)
    half = 1.96 * samples.std(axis=0, ddof=1) / np.sqrt(reps) if reps > 1 else np.zeros_like(mean)
    return ImpactCurve(times, mean, mean - half, mean + half, int(reps), int(size), burn, model.preset_id)
