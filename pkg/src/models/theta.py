"""
Parameter Layouts
Named free-parameter vectors with constraint transforms.

Every preset describes its free parameters as a ThetaSpec. The optimizer works
in unconstrained coordinates; each parameter declares how it maps there:

    identity   x            (intensity coefficients)
    log        ln x         (volatilities, rates; x > 0)
    atanh      atanh x      (correlations; -1 < x < 1)
    neg_log    ln(-x)       (sign-constrained coefficients; x < 0)

Example usage:
    spec = ThetaSpec([ParamSpec("beta0"), ParamSpec("sigma", "log")])
    v = spec.to_unconstrained([0.7, 0.01])     # [0.7, ln 0.01]
    spec.from_unconstrained(v)                 # [0.7, 0.01]
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

TRANSFORMS = ("identity", "log", "atanh", "neg_log")


@dataclass(frozen=True)
class ParamSpec:
    name: str
    transform: str = "identity"
    description: str = ""

    def __post_init__(self):
        if self.transform not in TRANSFORMS:
            raise ValueError(f"Unknown transform {self.transform!r} for {self.name}")

    def forward(self, value: float) -> float:
        """Constrained value -> unconstrained coordinate."""
        value = float(value)
        if not np.isfinite(value):
            raise ValueError(f"{self.name} must be finite, got {value}")
        if self.transform == "log":
            if value <= 0:
                raise ValueError(f"{self.name} must be positive, got {value}")
            return float(np.log(value))
        if self.transform == "atanh":
            if not -1.0 < value < 1.0:
                raise ValueError(f"{self.name} must lie in (-1, 1), got {value}")
            return float(np.arctanh(value))
        if self.transform == "neg_log":
            if value >= 0:
                raise ValueError(f"{self.name} must be negative, got {value}")
            return float(np.log(-value))
        return value

    def inverse(self, coord: float) -> float:
        """Unconstrained coordinate -> constrained value."""
        coord = float(coord)
        if self.transform == "log":
            return float(np.exp(coord))
        if self.transform == "atanh":
            return float(np.tanh(coord))
        if self.transform == "neg_log":
            return float(-np.exp(coord))
        return coord


class ThetaSpec:
    """Ordered free-parameter layout of a preset."""

    def __init__(self, params: Sequence[ParamSpec]):
        names = [p.name for p in params]
        if len(set(names)) != len(names):
            raise ValueError(f"Duplicate parameter names in {names}")
        self.params: List[ParamSpec] = list(params)
        self.names: List[str] = names

    def __len__(self) -> int:
        return len(self.params)

    def __repr__(self) -> str:
        return f"ThetaSpec({self.names})"

    def _check_size(self, values: Sequence[float]) -> np.ndarray:
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size != len(self.params):
            raise ValueError(f"Expected {len(self.params)} parameters, got {arr.size}")
        return arr

    def to_unconstrained(self, values: Sequence[float]) -> np.ndarray:
        arr = self._check_size(values)
        return np.array([p.forward(v) for p, v in zip(self.params, arr)])

    def from_unconstrained(self, coords: Sequence[float]) -> np.ndarray:
        arr = self._check_size(coords)
        return np.array([p.inverse(c) for p, c in zip(self.params, arr)])

    def to_dict(self, values: Sequence[float]) -> Dict[str, float]:
        arr = self._check_size(values)
        return {name: float(v) for name, v in zip(self.names, arr)}

    def from_dict(
        self, mapping: Mapping[str, float], defaults: Optional[Mapping[str, float]] = None
    ) -> np.ndarray:
        """
        Vector from named values.

        Args:
            mapping: Named values; unknown names are rejected
            defaults: Fallback for names missing from mapping

        Returns:
            Parameter vector in layout order
        """
        unknown = set(mapping) - set(self.names)
        if unknown:
            raise ValueError(f"Unknown parameters: {sorted(unknown)}; expected {self.names}")
        defaults = defaults or {}
        values = []
        for name in self.names:
            if name in mapping:
                values.append(float(mapping[name]))
            elif name in defaults:
                values.append(float(defaults[name]))
            else:
                raise ValueError(f"Missing parameter {name}")
        return np.array(values)


def to_unconstrained(spec: ThetaSpec, values: Sequence[float]) -> np.ndarray:
    return spec.to_unconstrained(values)


def from_unconstrained(spec: ThetaSpec, coords: Sequence[float]) -> np.ndarray:
    return spec.from_unconstrained(coords)


def volatility_factor(sigmas: Sequence[float], rho: float = 0.0) -> np.ndarray:
    """
    Lower-triangular factor Sigma of the efficient-price covariance.

    One asset gives [[sigma]]; two assets give the Cholesky factor of
    [[s1^2, rho s1 s2], [rho s1 s2, s2^2]]. More assets are independent.
    """
    sigmas = np.asarray(sigmas, dtype=float)
    if np.any(sigmas <= 0) or not np.all(np.isfinite(sigmas)):
        raise ValueError(f"Volatilities must be positive and finite, got {sigmas}")
    if not -1.0 < rho < 1.0:
        raise ValueError(f"Correlation must lie in (-1, 1), got {rho}")
    factor = np.diag(sigmas)
    if sigmas.size >= 2 and rho != 0.0:
        factor[1, 0] = rho * sigmas[1]
        factor[1, 1] = sigmas[1] * np.sqrt(1.0 - rho * rho)
    return factor
