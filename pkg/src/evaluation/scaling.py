"""
Scaling Check
Empirical check that the rescaled reference and efficient prices
(P_{nt} - P_0)/sqrt(n) and (S_{nt} - S_0)/sqrt(n) get close as n grows:

    P( sup_{[0, nT]} |S - P| >= sqrt(n) * eps )

is estimated for each n from independent paths. The gap is measured in ticks
of each asset and the sup is taken over the simulator's fine time grid.
"""

import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from scipy.stats import binomtest

from src.models.presets import MarketModel
from src.simulation.replication import derive_seed, run_replicates
from src.simulation.state import SimConfig, SimulationResult

logger = logging.getLogger("evaluation.scaling")


def max_gap(result: SimulationResult) -> float:
    """Largest |S - P| in ticks over all assets of one path."""
    return float(np.max(result.max_gap_ticks))


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> List[float]:
    if trials == 0:
        return [0.0, 1.0]
    ci = binomtest(int(successes), int(trials)).proportion_ci(confidence_level=confidence, method="wilson")
    return [float(ci.low), float(ci.high)]


@dataclass
class ScalingReport:
    eps: float
    horizon: float
    n_list: List[int]
    probabilities: List[float]
    intervals: List[List[float]]
    exceedances: List[int]
    reps: int
    preset_id: str = ""

    def is_non_increasing(self, slack: float = 0.0) -> bool:
        """Whether the exceedance frequency never rises by more than `slack` along n."""
        p = np.asarray(self.probabilities)
        return bool(np.all(np.diff(p) <= slack))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "preset": self.preset_id,
            "eps": self.eps,
            "horizon": self.horizon,
            "n_list": self.n_list,
            "probabilities": self.probabilities,
            "intervals": self.intervals,
            "exceedances": self.exceedances,
            "reps": self.reps,
            "non_increasing": self.is_non_increasing(),
        }

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {"n": n, "probability": p, "ci_low": ci[0], "ci_high": ci[1], "exceedances": k}
            for n, p, ci, k in zip(self.n_list, self.probabilities, self.intervals, self.exceedances)
        ]


def scaling_check(
    model: MarketModel,
    n_list: Sequence[int] = (1, 4, 16),
    horizon: float = 1.0,
    eps: float = 0.5,
    reps: int = 200,
    seed: int = 0,
    config: Optional[SimConfig] = None,
    jobs: int = 1,
    progress: bool = False,
) -> ScalingReport:
    """
    Exceedance frequencies of the rescaled gap for each n.

    Args:
        model: Market model, started at S_0 = P_0
        n_list: Time-scale factors
        horizon: Rescaled horizon T (each path runs for n * T)
        eps: Threshold on the rescaled gap, in ticks
        reps: Paths per n
        seed: Master seed; each n gets its own derived stream
        config: Base simulation settings (scheme, step)
        jobs: Worker processes
    """
    base = config or SimConfig()
    probabilities, intervals, exceedances = [], [], []
    for i, n in enumerate(n_list):
        if n < 1:
            raise ValueError(f"Scale factors must be >= 1, got {n}")
        run_config = replace(base, horizon=float(n) * horizon, seed=derive_seed(seed, 10_000 + i))
        gaps = np.asarray(run_replicates(model, run_config, reps, jobs=jobs, reducer=max_gap, progress=progress))
        k = int(np.sum(gaps >= np.sqrt(n) * eps))
        probabilities.append(k / reps if reps else 0.0)
        intervals.append(wilson_interval(k, reps))
        exceedances.append(k)
        logger.info(f"n={n}: exceedance {k}/{reps}")
    return ScalingReport(float(eps), float(horizon), [int(n) for n in n_list], probabilities,
                         intervals, exceedances, int(reps), model.preset_id)
