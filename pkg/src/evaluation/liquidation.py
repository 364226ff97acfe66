"""
Liquidation Study
Cost of buying a basket of two assets with a fixed schedule of market orders,
for several efficient-price correlations.

Cost per share = (cash paid - shares * initial reference price) / shares,
summed over both assets, with the initial price read just before the first
order.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.lob.types import Side
from src.models.presets import get_preset
from src.simulation.engine import MarketSimulator
from src.simulation.replication import derive_seed
from src.simulation.state import SimConfig

logger = logging.getLogger("evaluation.liquidation")


@dataclass(frozen=True)
class LiquidationSchedule:
    """`n_orders` buy market orders every `interval` seconds, `sizes[i]` units of asset i each."""

    interval: float = 30.0
    n_orders: int = 20
    sizes: Tuple[int, ...] = (25, 15)

    def __post_init__(self):
        if not self.interval > 0 or self.n_orders < 0 or any(s < 0 for s in self.sizes):
            raise ValueError(f"Invalid liquidation schedule: {self}")

    @property
    def times(self) -> np.ndarray:
        return self.interval * np.arange(self.n_orders, dtype=float)

    @property
    def totals(self) -> Tuple[int, ...]:
        return tuple(s * self.n_orders for s in self.sizes)

    def to_dict(self) -> Dict[str, Any]:
        return {"interval": self.interval, "n_orders": self.n_orders, "sizes": list(self.sizes)}


@dataclass
class LiquidationReport:
    rhos: List[float]
    samples: Dict[float, np.ndarray]
    schedule: LiquidationSchedule
    reps: int
    bin_edges: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def mean(self, rho: float) -> float:
        return float(np.mean(self.samples[rho]))

    def variance(self, rho: float) -> float:
        return float(np.var(self.samples[rho], ddof=1)) if self.samples[rho].size > 1 else 0.0

    def ci(self, rho: float) -> List[float]:
        half = 1.96 * np.sqrt(self.variance(rho) / max(self.samples[rho].size, 1))
        return [self.mean(rho) - half, self.mean(rho) + half]

    def histogram(self, rho: float) -> List[int]:
        counts, _ = np.histogram(self.samples[rho], bins=self.bin_edges)
        return counts.tolist()

    def variance_increasing(self) -> bool:
        """Whether the cost variance strictly increases with the correlation."""
        order = sorted(self.rhos)
        variances = [self.variance(r) for r in order]
        return all(a < b for a, b in zip(variances, variances[1:]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schedule": self.schedule.to_dict(),
            "reps": self.reps,
            "bin_edges": self.bin_edges.tolist(),
            "variance_increasing": self.variance_increasing(),
            "by_rho": [
                {
                    "rho": r,
                    "mean": self.mean(r),
                    "variance": self.variance(r),
                    "ci": self.ci(r),
                    "histogram": self.histogram(r),
                }
                for r in self.rhos
            ],
        }

    def rows(self) -> List[Dict[str, float]]:
        return [
            {"rho": r, "replicate": i, "cost_per_share": float(v)}
            for r in self.rhos
            for i, v in enumerate(self.samples[r])
        ]


def liquidation_cost(args) -> float:
    """Cost per share of one path."""
    model, config, seed, schedule = args
    sim = MarketSimulator(model, config)
    sim.reset(seed)
    initial = sim.model.prices(sim.state.grid)
    cash = 0.0
    for t in schedule.times:
        sim.run_until(float(t))
        for asset, size in enumerate(schedule.sizes):
            if size > 0:
                fills = sim.market_order(asset, Side.ASK, size)
                cash += sum(f.price * f.quantity for f in fills)
    shares = np.asarray(schedule.totals, dtype=float)
    if shares.sum() == 0:
        return 0.0
    return float((cash - shares @ initial) / shares.sum())


def liquidation_study(
    rhos: Sequence[float] = (-0.8, 0.0, 0.8),
    schedule: Optional[LiquidationSchedule] = None,
    reps: int = 5000,
    seed: int = 0,
    options: Optional[Mapping[str, Any]] = None,
    sigmas: Sequence[float] = (0.02, 0.01),
    config: Optional[SimConfig] = None,
    jobs: int = 1,
    bins: int = 50,
    progress: bool = False,
) -> LiquidationReport:
    """
    Cost-per-share samples for each correlation.

    Args:
        rhos: Efficient-price correlations
        schedule: Order schedule (defaults to 20 orders of 25 and 15 units, 30 s apart)
        reps: Paths per correlation
        seed: Master seed; every correlation reuses the same path seeds
        options: Impact preset options overriding the two-asset defaults
        sigmas: Efficient-price volatilities of the two assets
        config: Simulation settings (scheme, step)
        jobs: Worker processes
        bins: Histogram bins shared across correlations
    """
    schedule = schedule or LiquidationSchedule()
    preset = get_preset("impact")
    opts = {"n_assets": len(schedule.sizes)}
    opts.update(options or {})
    base = config or SimConfig(scheme="thinning")
    horizon = float(schedule.times[-1]) if schedule.n_orders else 0.0
    run_config = SimConfig(**{**base.to_dict(), "horizon": horizon, "seed": seed})

    samples: Dict[float, np.ndarray] = {}
    for rho in rhos:
        theta = {f"sigma{i + 1}": float(s) for i, s in enumerate(sigmas)}
        theta["rho"] = float(rho)
        model = preset.build(theta, opts)
        tasks = [(model, run_config, derive_seed(seed, i), schedule) for i in range(reps)]
        logger.info(f"Liquidation at rho={rho}: {reps} paths")
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                costs = list(tqdm(pool.map(liquidation_cost, tasks, chunksize=max(1, reps // (4 * jobs))),
                                  total=reps, disable=not progress, desc=f"rho={rho}"))
        else:
            costs = [liquidation_cost(t) for t in tqdm(tasks, disable=not progress, desc=f"rho={rho}")]
        samples[float(rho)] = np.asarray(costs, dtype=float)

    pooled = np.concatenate(list(samples.values())) if samples else np.zeros(0)
    edges = np.histogram_bin_edges(pooled, bins=bins) if pooled.size else np.zeros(0)
    return LiquidationReport([float(r) for r in rhos], samples, schedule, int(reps), edges)
