"""
CMA-ES
(mu/mu_w, lambda) covariance matrix adaptation with weighted recombination,
rank-one and rank-mu covariance updates and cumulative step-size adaptation.

Follows the textbook parameter setting; the eigendecomposition of C is
refreshed lazily, every few generations, to keep the update cost O(N^2) per
evaluation.

Example usage:
    outcome = cmaes_minimize(lambda x: float(np.sum(x ** 2)), np.ones(5), CmaesConfig(seed=3))
    outcome.x, outcome.f
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

logger = logging.getLogger("estimation.cmaes")

Objective = Callable[[np.ndarray], float]
PopulationMap = Callable[[Callable, Sequence[np.ndarray]], List[float]]


@dataclass
class CmaesConfig:
    """
    Args:
        popsize: Population size lambda; None gives 4 + floor(3 ln N)
        sigma0: Initial step size in unconstrained coordinates
        max_evals: Evaluation budget of one run
        restarts: Number of independent runs; None picks 3 for one asset, 6 for two
        seed: Seed of the first run; later runs use derived seeds
        tolfun: Stop when the generation's fitness range falls below this
        tolx: Stop when the largest coordinate step falls below this
        ftarget: Stop once this value is reached
    """

    popsize: Optional[int] = None
    sigma0: float = 0.5
    max_evals: int = 3000
    restarts: Optional[int] = None
    seed: int = 0
    tolfun: float = 1e-12
    tolx: float = 1e-11
    ftarget: Optional[float] = None

    def __post_init__(self):
        if self.popsize is not None and self.popsize < 4:
            raise ValueError(f"Population size must be >= 4, got {self.popsize}")
        if not self.sigma0 > 0:
            raise ValueError(f"Initial step size must be > 0, got {self.sigma0}")
        if self.max_evals < 1:
            raise ValueError(f"Evaluation budget must be >= 1, got {self.max_evals}")
        if self.restarts is not None and self.restarts < 1:
            raise ValueError(f"Restarts must be >= 1, got {self.restarts}")


class CMAESParameters:
    """Static strategy parameters for dimension N."""

    def __init__(self, dimension: int, popsize: Optional[int] = None):
        n = dimension
        self.dimension = n
        self.chi_n = np.sqrt(n) * (1 - 1.0 / (4 * n) + 1.0 / (21 * n ** 2))

        self.lam = int(popsize) if popsize else 4 + int(3 * np.log(n))
        self.mu = self.lam // 2
        raw = np.log(self.lam / 2 + 0.5) - np.log(np.arange(1, self.mu + 1))
        self.weights = raw / raw.sum()
        self.mueff = 1.0 / np.sum(self.weights ** 2)

        self.cc = (4 + self.mueff / n) / (n + 4 + 2 * self.mueff / n)
        self.cs = (self.mueff + 2) / (n + self.mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + self.mueff)
        self.cmu = min(1 - self.c1, 2 * (self.mueff - 2 + 1 / self.mueff) / ((n + 2) ** 2 + self.mueff))
        self.damps = 1 + 2 * max(0.0, np.sqrt((self.mueff - 1) / (n + 1)) - 1) + self.cs
        self.lazy_gap_evals = 0.5 * n * self.lam / (self.c1 + self.cmu) / n ** 2


class CMAES:
    """
    Ask-and-tell CMA-ES minimizer.

    Args:
        xstart: Initial mean
        sigma: Initial step size
        popsize: Population size (None for the default)
        max_evals: Evaluation budget
        seed: Random seed
    """

    def __init__(
        self,
        xstart: Sequence[float],
        sigma: float,
        popsize: Optional[int] = None,
        max_evals: int = 3000,
        seed: int = 0,
        tolfun: float = 1e-12,
        tolx: float = 1e-11,
        ftarget: Optional[float] = None,
    ):
        self.xmean = np.array(xstart, dtype=float)
        n = self.xmean.size
        if n < 1:
            raise ValueError("CMA-ES needs at least one coordinate")
        self.params = CMAESParameters(n, popsize)
        self.sigma = float(sigma)
        self.max_evals = int(max_evals)
        self.tolfun = tolfun
        self.tolx = tolx
        self.ftarget = ftarget
        self.rng = np.random.default_rng(seed)

        self.pc = np.zeros(n)
        self.ps = np.zeros(n)
        self.C = np.eye(n)
        self.B = np.eye(n)
        self.D = np.ones(n)
        self.invsqrt = np.eye(n)
        self.updated_eval = 0
        self.counteval = 0
        self.iterations = 0
        self.fitvals = np.array([])
        self.best_x = self.xmean.copy()
        self.best_f = np.inf
        self.history: List[float] = []

    def _decompose(self) -> None:
        self.C = np.triu(self.C) + np.triu(self.C, 1).T
        eigvals, self.B = np.linalg.eigh(self.C)
        eigvals = np.maximum(eigvals, 1e-300)
        self.D = np.sqrt(eigvals)
        self.invsqrt = self.B @ np.diag(1.0 / self.D) @ self.B.T
        self.updated_eval = self.counteval

    @property
    def condition_number(self) -> float:
        return float((self.D.max() / self.D.min()) ** 2)

    def ask(self) -> List[np.ndarray]:
        """Sample a new population."""
        if self.counteval - self.updated_eval > self.params.lazy_gap_evals:
            self._decompose()
        z = self.rng.standard_normal((self.params.lam, self.xmean.size))
        steps = (z * self.D) @ self.B.T
        return [self.xmean + self.sigma * s for s in steps]

    def tell(self, arx: Sequence[np.ndarray], fitvals: Sequence[float]) -> None:
        """Update mean, evolution paths, covariance and step size."""
        par = self.params
        n = self.xmean.size
        self.counteval += len(fitvals)
        self.iterations += 1
        xold = self.xmean

        fit = np.array([f if np.isfinite(f) else np.inf for f in fitvals], dtype=float)
        order = np.argsort(fit, kind="stable")
        arx = np.asarray(arx)[order]
        self.fitvals = fit[order]
        if self.fitvals[0] < self.best_f:
            self.best_f = float(self.fitvals[0])
            self.best_x = arx[0].copy()
        self.history.append(self.best_f)

        self.xmean = par.weights @ arx[: par.mu]

        y = self.xmean - xold
        z = self.invsqrt @ y
        csn = np.sqrt(par.cs * (2 - par.cs) * par.mueff) / self.sigma
        self.ps = (1 - par.cs) * self.ps + csn * z
        ccn = np.sqrt(par.cc * (2 - par.cc) * par.mueff) / self.sigma
        hsig = float(
            np.sum(self.ps ** 2) / n / (1 - (1 - par.cs) ** (2 * self.counteval / par.lam)) < 2 + 4.0 / (n + 1)
        )
        self.pc = (1 - par.cc) * self.pc + ccn * hsig * y

        c1a = par.c1 * (1 - (1 - hsig ** 2) * par.cc * (2 - par.cc))
        self.C *= 1 - c1a - par.cmu * par.weights.sum()
        self.C += par.c1 * np.outer(self.pc, self.pc)
        dx = (arx[: par.mu] - xold) / self.sigma
        self.C += par.cmu * (dx.T * par.weights) @ dx

        cn = par.cs / par.damps
        self.sigma *= np.exp(min(1.0, cn * (np.linalg.norm(self.ps) / par.chi_n - 1)))

    def stop(self) -> Dict[str, float]:
        """Satisfied termination conditions, empty while running."""
        res: Dict[str, float] = {}
        if self.counteval <= 0:
            return res
        if self.counteval >= self.max_evals:
            res["maxfevals"] = self.max_evals
        if self.ftarget is not None and self.fitvals.size and self.fitvals[0] <= self.ftarget:
            res["ftarget"] = self.ftarget
        if self.condition_number > 1e14:
            res["condition"] = self.condition_number
        finite = self.fitvals[np.isfinite(self.fitvals)]
        if finite.size == self.fitvals.size and finite.size > 1 and finite[-1] - finite[0] < self.tolfun:
            res["tolfun"] = self.tolfun
        if self.sigma * self.D.max() < self.tolx:
            res["tolx"] = self.tolx
        return res


@dataclass
class CmaesOutcome:
    x: np.ndarray
    f: float
    evaluations: int
    iterations: int
    stop: Dict[str, float]
    history: List[float] = field(default_factory=list)

    @property
    def budget_exhausted(self) -> bool:
        """True when the run ended only because it ran out of evaluations."""
        return set(self.stop) == {"maxfevals"}


def _serial_map(f: Callable, xs: Sequence[np.ndarray]) -> List[float]:
    return [f(x) for x in xs]


def cmaes_minimize(
    f: Objective,
    x0: Sequence[float],
    config: Optional[CmaesConfig] = None,
    seed: Optional[int] = None,
    population_map: Optional[PopulationMap] = None,
) -> CmaesOutcome:
    """
    Minimize f from x0 with one CMA-ES run.

    Non-finite objective values are ranked as +inf. `population_map` evaluates
    one generation (e.g. `executor.map`); the default is a plain loop.
    """
    config = config or CmaesConfig()
    es = CMAES(
        x0,
        config.sigma0,
        popsize=config.popsize,
        max_evals=config.max_evals,
        seed=config.seed if seed is None else seed,
        tolfun=config.tolfun,
        tolx=config.tolx,
        ftarget=config.ftarget,
    )
    evaluate = population_map or _serial_map
    while not es.stop():
        population = es.ask()
        values = [float(v) for v in evaluate(f, population)]
        es.tell(population, values)
        logger.debug(f"Generation {es.iterations}: best {es.best_f:.6g}, sigma {es.sigma:.3g}")
    outcome = CmaesOutcome(es.best_x, es.best_f, es.counteval, es.iterations, es.stop(), list(es.history))
    if outcome.budget_exhausted:
        logger.warning(f"CMA-ES budget of {config.max_evals} evaluations exhausted at f={outcome.f:.6g}")
    return outcome
