"""
Model Presets
Concrete market models: parameter layouts, reference values and builders.

    model1      one-asset queue-reactive book with K=1 (limit/cancel/market x bid/ask)
    model2      two-asset signal-driven price jumps with Gaussian signals
    imbalance   two-asset signal-driven model on best-limit volume imbalance
    impact      queue-reactive book with K=3 (one asset, or two for liquidation)
    constant    constant-rate events with no price effect (reference model)

Example usage:
    preset = get_preset("model1")
    model = preset.build(preset.default_theta())
    model.intensity.eval_intensity("limit_bid", model.initial_state(rng)[0], [0.0])
"""

import dataclasses
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.lob.types import AssetSpec, EventKind, Pile, RegenSpec, Side
from src.models.dynamics import ConstantDynamics, QueueReactiveDynamics, SignalDynamics
from src.models.intensity import (
    ConstantChannel,
    IntensitySpec,
    PriceJumpChannel,
    QueueChannel,
)
from src.models.theta import ParamSpec, ThetaSpec, volatility_factor

logger = logging.getLogger("models.presets")


@dataclass(frozen=True)
class MarketModel:
    """Everything needed to simulate or evaluate one parameter point."""

    preset_id: str
    intensity: IntensitySpec
    dynamics: Any
    sigma: np.ndarray
    theta: Dict[str, float]
    options: Dict[str, Any]

    @property
    def dim(self) -> int:
        return self.intensity.dim

    @property
    def family(self) -> str:
        return self.dynamics.family

    @property
    def ticks(self) -> Tuple[float, ...]:
        return tuple(self.dynamics.ticks)

    @property
    def covariance(self) -> np.ndarray:
        return self.sigma @ self.sigma.T

    def prices(self, grid: Sequence[int]) -> np.ndarray:
        """Reference prices of grid indices."""
        ticks = np.asarray(self.ticks)
        return ticks * (np.asarray(grid, dtype=float) + 0.5)

    def grid_from_prices(self, prices: Sequence[float]) -> Tuple[int, ...]:
        ticks = np.asarray(self.ticks)
        return tuple(int(v) for v in np.round(np.asarray(prices, dtype=float) / ticks - 0.5))

    def initial_state(self, rng: np.random.Generator):
        return self.dynamics.initial_state(rng)

    def without_events(self) -> "MarketModel":
        """Same model with an empty event alphabet (P frozen)."""
        return dataclasses.replace(self, intensity=IntensitySpec([], self.dim, self.intensity.degree))


class ModelPreset(ABC):
    """Named model family with a free-parameter layout."""

    preset_id: str = ""
    description: str = ""

    @abstractmethod
    def theta_spec(self, options: Optional[Mapping[str, Any]] = None) -> ThetaSpec:
        """Free-parameter layout."""

    @abstractmethod
    def default_values(self, options: Optional[Mapping[str, Any]] = None) -> Dict[str, float]:
        """Reference parameter values."""

    @abstractmethod
    def _build(self, theta: Dict[str, float], options: Dict[str, Any]) -> MarketModel:
        """Model for a complete named parameter set."""

    default_options: Dict[str, Any] = {}

    def resolve_options(self, options: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
        options = dict(options or {})
        unknown = set(options) - set(self.default_options)
        if unknown:
            raise ValueError(
                f"Unknown options for preset {self.preset_id}: {sorted(unknown)}; "
                f"expected {sorted(self.default_options)}"
            )
        resolved = dict(self.default_options)
        resolved.update(options)
        return resolved

    def default_theta(self, options: Optional[Mapping[str, Any]] = None) -> np.ndarray:
        spec = self.theta_spec(options)
        return spec.from_dict(self.default_values(options))

    def n_assets(self, options: Optional[Mapping[str, Any]] = None) -> int:
        return self.build(self.default_theta(options), options).dim

    def build(self, theta, options: Optional[Mapping[str, Any]] = None) -> MarketModel:
        """
        Build the model for a parameter point.

        Args:
            theta: Free-parameter vector in layout order, or a name -> value mapping
                (missing names fall back to the reference values)
            options: Structural constants overriding the preset defaults

        Returns:
            MarketModel
        """
        resolved = self.resolve_options(options)
        spec = self.theta_spec(resolved)
        if isinstance(theta, Mapping):
            values = spec.from_dict(theta, defaults=self.default_values(resolved))
        else:
            values = np.asarray(theta, dtype=float).ravel()
            if values.size != len(spec):
                raise ValueError(
                    f"Preset {self.preset_id} expects {len(spec)} free parameters, got {values.size}"
                )
        return self._build(spec.to_dict(values), resolved)

    def neutral_theta(self, log, options: Optional[Mapping[str, Any]] = None) -> Dict[str, float]:
        """Data-driven starting point for estimation (intercepts from event rates)."""
        return dict(self.default_values(options))


def _event_rate(log, names: Sequence[str]) -> float:
    counts = log.counts()
    total = sum(counts.get(n, 0) for n in names)
    rate = total / max(log.horizon, 1e-12) / max(len(names), 1)
    return max(rate, 1e-3)


def _realized_vol(log, asset: int, fallback: float) -> float:
    prices = np.array([log.header.p0[asset]] + [r.p[asset] for r in log.records], dtype=float)
    moves = np.diff(prices)
    if moves.size == 0 or not np.any(moves):
        return fallback
    return float(np.sqrt(np.sum(moves ** 2) / max(log.horizon, 1e-12)))


class Model1Preset(ModelPreset):
    """
    One-asset queue-reactive model with one tracked pile per side.

    Intensity of event e in {limit, cancel, market} x {bid, ask}:
        exp(a0 + a1 y + a2 q^b + a3 q^a)
    Only bid-side coefficients are free; the ask side follows from the mirror
    (a0 equal, a1 negated, a2 and a3 swapped).
    """

    preset_id = "model1"
    description = "queue-reactive, K=1"
    families = ("limit", "cancel", "market")
    default_options = {
        "tick": 0.01,
        "regen_mean": 2.0,
        "regen_family": "geometric",
        "wipe_probability": 0.3,
        "initial_price": 100.0,
    }

    def theta_spec(self, options=None) -> ThetaSpec:
        params = []
        for f in self.families:
            for k in range(4):
                params.append(ParamSpec(f"{f}.alpha{k}", description=f"bid-side {f} coefficient {k}"))
        params.append(ParamSpec("sigma", "log", "efficient-price volatility"))
        return ThetaSpec(params)

    def default_values(self, options=None) -> Dict[str, float]:
        return {
            "limit.alpha0": float(np.log(2.0)),
            "limit.alpha1": 2.5,
            "limit.alpha2": -1.0,
            "limit.alpha3": 0.2,
            "cancel.alpha0": float(np.log(1.9)),
            "cancel.alpha1": -2.5,
            "cancel.alpha2": 1.0,
            "cancel.alpha3": -0.2,
            "market.alpha0": float(np.log(0.1)),
            "market.alpha1": -2.5,
            "market.alpha2": -1.0,
            "market.alpha3": 0.2,
            "sigma": 0.01,
        }

    def _build(self, theta: Dict[str, float], options: Dict[str, Any]) -> MarketModel:
        regen = RegenSpec(float(options["regen_mean"]), options["regen_family"])
        asset = AssetSpec(float(options["tick"]), 1, regen)
        bid1, ask1 = Pile(Side.BID, 1), Pile(Side.ASK, 1)
        channels = []
        for f in self.families:
            a0, a1, a2, a3 = (theta[f"{f}.alpha{k}"] for k in range(4))
            for side in (Side.BID, Side.ASK):
                pile = bid1 if side is Side.BID else ask1
                if side is Side.BID:
                    slope, weights = a1, ((bid1, a2), (ask1, a3))
                else:
                    slope, weights = -a1, ((bid1, a3), (ask1, a2))
                name = f"{f}_{side.name.lower()}"
                if f == "limit":
                    channels.append(QueueChannel(name, 0, EventKind.LIMIT, pile, a0, slope, weights, order_side=side))
                else:
                    wipe = float(options["wipe_probability"]) if f == "market" else 0.0
                    channels.append(
                        QueueChannel(name, 0, EventKind.CONSUME, pile, a0, slope, weights,
                                     wipe_probability=wipe, provenance=f)
                    )
        grid = (asset.grid_index(float(options["initial_price"])),)
        dynamics = QueueReactiveDynamics((asset,), "unit", grid)
        return MarketModel(self.preset_id, IntensitySpec(channels, 1), dynamics,
                           volatility_factor([theta["sigma"]]), theta, options)

    def neutral_theta(self, log, options=None) -> Dict[str, float]:
        theta = {name: 0.0 for name in self.theta_spec(options).names}
        for f in self.families:
            theta[f"{f}.alpha0"] = float(np.log(_event_rate(log, [f"{f}_bid", f"{f}_ask"])))
        theta["sigma"] = _realized_vol(log, 0, self.resolve_options(options)["tick"])
        return theta


class Model2Preset(ModelPreset):
    """
    Two-asset signal-driven model.

    Price jump of asset i in direction -:
        exp(b0 + b1 y^i + b2 X^{i,1} + b3 X^{i,2})
    The + direction shares b0 and negates b1..b3.
    """

    preset_id = "model2"
    description = "signal-driven, two assets"
    default_options = {
        "ticks": [0.01, 0.005],
        "signal_rate": 1.0,
        "initial_prices": [100.0, 50.0],
    }

    def theta_spec(self, options=None) -> ThetaSpec:
        params = [ParamSpec(f"beta{i}.{k}") for i in (1, 2) for k in range(4)]
        params += [ParamSpec("sigma1", "log"), ParamSpec("sigma2", "log"), ParamSpec("rho", "atanh")]
        return ThetaSpec(params)

    def default_values(self, options=None) -> Dict[str, float]:
        return {
            "beta1.0": float(np.log(2.0)), "beta1.1": -1.0, "beta1.2": -0.5, "beta1.3": 1.0,
            "beta2.0": 0.0, "beta2.1": -1.6, "beta2.2": 2.0, "beta2.3": 1.0,
            "sigma1": 0.01, "sigma2": 0.02, "rho": 0.6,
        }

    def _build(self, theta: Dict[str, float], options: Dict[str, Any]) -> MarketModel:
        ticks = tuple(float(t) for t in options["ticks"])
        channels = []
        for i in (1, 2):
            b0, b1, b2, b3 = (theta[f"beta{i}.{k}"] for k in range(4))
            channels.append(PriceJumpChannel(f"{i}-", i - 1, -1, b0, b1, (b2, b3), dim=2))
            channels.append(PriceJumpChannel(f"{i}+", i - 1, +1, b0, -b1, (-b2, -b3), dim=2))
        grid = _grid_for(ticks, options["initial_prices"])
        dynamics = SignalDynamics(ticks, 2, "normal", float(options["signal_rate"]), True, grid)
        sigma = volatility_factor([theta["sigma1"], theta["sigma2"]], theta["rho"])
        return MarketModel(self.preset_id, IntensitySpec(channels, 2), dynamics, sigma, theta, options)

    def neutral_theta(self, log, options=None) -> Dict[str, float]:
        resolved = self.resolve_options(options)
        theta = {name: 0.0 for name in self.theta_spec(resolved).names}
        for i in (1, 2):
            theta[f"beta{i}.0"] = float(np.log(_event_rate(log, [f"{i}-", f"{i}+"])))
            theta[f"sigma{i}"] = _realized_vol(log, i - 1, resolved["ticks"][i - 1])
        return theta


class ImbalancePreset(ModelPreset):
    """
    Two-asset signal-driven model on best-limit volume imbalance X^i in [-1, 1].

    Down jump of asset i:  exp(int + eff * y^i + imb * X^i), with eff < 0
    Up jump of asset i:    exp(int - eff * y^i - imb * X^i)

    Prices are in internal units (100 per tick by default).
    """

    preset_id = "imbalance"
    description = "imbalance signal, two assets"
    default_options = {
        "ticks": [100.0, 100.0],
        "signal_rate": 1.0,
        "initial_prices": [100000.0, 100000.0],
    }

    def theta_spec(self, options=None) -> ThetaSpec:
        params = []
        for i in (1, 2):
            params += [
                ParamSpec(f"alpha{i}.intercept"),
                ParamSpec(f"alpha{i}.efficient", "neg_log", "sign-constrained, negative"),
                ParamSpec(f"alpha{i}.imbalance"),
            ]
        params += [ParamSpec("sigma1", "log"), ParamSpec("sigma2", "log"), ParamSpec("rho", "atanh")]
        return ThetaSpec(params)

    def default_values(self, options=None) -> Dict[str, float]:
        # illustrative magnitudes in hundredths of a tick
        return {
            "alpha1.intercept": float(np.log(0.05)), "alpha1.efficient": -0.02, "alpha1.imbalance": -1.0,
            "alpha2.intercept": float(np.log(0.05)), "alpha2.efficient": -0.02, "alpha2.imbalance": -1.0,
            "sigma1": 20.0, "sigma2": 20.0, "rho": 0.5,
        }

    def _build(self, theta: Dict[str, float], options: Dict[str, Any]) -> MarketModel:
        ticks = tuple(float(t) for t in options["ticks"])
        channels = []
        for i in (1, 2):
            a_int = theta[f"alpha{i}.intercept"]
            a_eff = theta[f"alpha{i}.efficient"]
            a_imb = theta[f"alpha{i}.imbalance"]
            channels.append(PriceJumpChannel(f"{i}-", i - 1, -1, a_int, a_eff, (a_imb,), dim=2))
            channels.append(PriceJumpChannel(f"{i}+", i - 1, +1, a_int, -a_eff, (-a_imb,), dim=2))
        grid = _grid_for(ticks, options["initial_prices"])
        dynamics = SignalDynamics(ticks, 1, "uniform", float(options["signal_rate"]), True, grid)
        sigma = volatility_factor([theta["sigma1"], theta["sigma2"]], theta["rho"])
        return MarketModel(self.preset_id, IntensitySpec(channels, 2), dynamics, sigma, theta, options)

    def neutral_theta(self, log, options=None) -> Dict[str, float]:
        resolved = self.resolve_options(options)
        theta = {name: 0.0 for name in self.theta_spec(resolved).names}
        for i in (1, 2):
            tick = float(resolved["ticks"][i - 1])
            theta[f"alpha{i}.intercept"] = float(np.log(_event_rate(log, [f"{i}-", f"{i}+"])))
            theta[f"alpha{i}.efficient"] = -1.0 / tick
            theta[f"sigma{i}"] = _realized_vol(log, i - 1, tick)
        return theta


class ImpactPreset(ModelPreset):
    """
    Queue-reactive book with three tracked piles per side.

    Limit at the j-th ask pile:   A_j exp(B y + C q^{a,j})
    Consume at the j-th ask pile: A'_j exp(B' y + C' q^{a,j}) while q^{a,j} > 0
    Bid side mirrored (y -> -y). Orders are unit-sized. With `n_assets = 2`
    each asset carries its own copy of the book, correlated only through the
    efficient prices.
    """

    preset_id = "impact"
    description = "queue-reactive, K=3"
    default_options = {
        "n_assets": 1,
        "tick": 0.01,
        "depth": 3,
        "regen_mean": 2.0,
        "regen_family": "geometric",
        "limit_scale": [1.5, 1.2, 1.0],
        "limit_y": -1.0,
        "limit_queue": -0.1,
        "consume_scale": [1.2, 1.0, 0.8],
        "consume_y": 1.5,
        "consume_queue": 0.15,
        "initial_price": 100.0,
    }

    def theta_spec(self, options=None) -> ThetaSpec:
        n = int(self.resolve_options(options)["n_assets"])
        if n == 1:
            return ThetaSpec([ParamSpec("sigma", "log")])
        params = [ParamSpec(f"sigma{i}", "log") for i in range(1, n + 1)]
        return ThetaSpec(params + [ParamSpec("rho", "atanh")])

    def default_values(self, options=None) -> Dict[str, float]:
        n = int(self.resolve_options(options)["n_assets"])
        if n == 1:
            return {"sigma": 0.2}
        values = {"sigma1": 0.02, "sigma2": 0.01, "rho": 0.0}
        for i in range(3, n + 1):
            values[f"sigma{i}"] = 0.01
        return values

    def _build(self, theta: Dict[str, float], options: Dict[str, Any]) -> MarketModel:
        n = int(options["n_assets"])
        depth = int(options["depth"])
        limit_scale = list(options["limit_scale"])
        consume_scale = list(options["consume_scale"])
        if len(limit_scale) != depth or len(consume_scale) != depth:
            raise ValueError(f"Intensity scales must have {depth} entries")
        regen = RegenSpec(float(options["regen_mean"]), options["regen_family"])
        asset = AssetSpec(float(options["tick"]), depth, regen)
        channels = []
        for a in range(n):
            prefix = f"{a + 1}:" if n > 1 else ""
            for side in (Side.ASK, Side.BID):
                sign = 1.0 if side is Side.ASK else -1.0
                for j in range(1, depth + 1):
                    pile = Pile(side, j)
                    channels.append(QueueChannel(
                        f"{prefix}limit_{pile.label}", a, EventKind.LIMIT, pile,
                        float(np.log(limit_scale[j - 1])), sign * float(options["limit_y"]),
                        ((pile, float(options["limit_queue"])),), order_side=side, dim=n,
                    ))
                    channels.append(QueueChannel(
                        f"{prefix}consume_{pile.label}", a, EventKind.CONSUME, pile,
                        float(np.log(consume_scale[j - 1])), sign * float(options["consume_y"]),
                        ((pile, float(options["consume_queue"])),), provenance="consume", dim=n,
                    ))
        grid = (asset.grid_index(float(options["initial_price"])),) * n
        dynamics = QueueReactiveDynamics((asset,) * n, "mean", grid)
        if n == 1:
            sigma = volatility_factor([theta["sigma"]])
        else:
            sigma = volatility_factor([theta[f"sigma{i}"] for i in range(1, n + 1)], theta["rho"])
        return MarketModel(self.preset_id, IntensitySpec(channels, n), dynamics, sigma, theta, options)

    def n_assets(self, options=None) -> int:
        return int(self.resolve_options(options)["n_assets"])

    def neutral_theta(self, log, options=None) -> Dict[str, float]:
        resolved = self.resolve_options(options)
        theta = dict(self.default_values(resolved))
        names = [k for k in theta if k.startswith("sigma")]
        for idx, name in enumerate(sorted(names)):
            theta[name] = _realized_vol(log, idx, float(resolved["tick"]))
        return theta


class ConstantPreset(ModelPreset):
    """Events at constant rates with no effect on the book or prices."""

    preset_id = "constant"
    description = "constant rates"
    default_options = {
        "events": ["a", "b"],
        "n_assets": 1,
        "tick": 0.01,
        "initial_price": 100.0,
    }

    def theta_spec(self, options=None) -> ThetaSpec:
        resolved = self.resolve_options(options)
        params = [ParamSpec(f"rate.{name}", "log") for name in resolved["events"]]
        n = int(resolved["n_assets"])
        params += [ParamSpec("sigma" if n == 1 else f"sigma{i}", "log") for i in range(1, n + 1)]
        return ThetaSpec(params)

    def default_values(self, options=None) -> Dict[str, float]:
        resolved = self.resolve_options(options)
        values = {f"rate.{name}": float(i + 1) for i, name in enumerate(resolved["events"])}
        n = int(resolved["n_assets"])
        for i in range(1, n + 1):
            values["sigma" if n == 1 else f"sigma{i}"] = 0.01
        return values

    def _build(self, theta: Dict[str, float], options: Dict[str, Any]) -> MarketModel:
        n = int(options["n_assets"])
        channels = [ConstantChannel(name, theta[f"rate.{name}"], dim=n) for name in options["events"]]
        ticks = (float(options["tick"]),) * n
        grid = _grid_for(ticks, [float(options["initial_price"])] * n)
        sigmas = [theta["sigma"]] if n == 1 else [theta[f"sigma{i}"] for i in range(1, n + 1)]
        return MarketModel(self.preset_id, IntensitySpec(channels, n), ConstantDynamics(ticks, grid),
                           volatility_factor(sigmas), theta, options)

    def n_assets(self, options=None) -> int:
        return int(self.resolve_options(options)["n_assets"])

    def neutral_theta(self, log, options=None) -> Dict[str, float]:
        resolved = self.resolve_options(options)
        theta = dict(self.default_values(resolved))
        for name in resolved["events"]:
            theta[f"rate.{name}"] = _event_rate(log, [name])
        return theta


def _grid_for(ticks: Sequence[float], prices: Sequence[float]) -> Tuple[int, ...]:
    if len(prices) != len(ticks):
        raise ValueError(f"Expected {len(ticks)} initial prices, got {len(prices)}")
    return tuple(int(round(float(p) / t - 0.5)) for p, t in zip(prices, ticks))


PRESETS: Dict[str, ModelPreset] = {
    preset.preset_id: preset
    for preset in (Model1Preset(), Model2Preset(), ImbalancePreset(), ImpactPreset(), ConstantPreset())
}


def get_preset(preset_id: str) -> ModelPreset:
    try:
        return PRESETS[preset_id]
    except KeyError:
        raise ValueError(f"Unknown preset {preset_id!r}; available: {sorted(PRESETS)}") from None


def list_presets() -> List[str]:
    return sorted(PRESETS)


def model1_preset(theta=None, options: Optional[Mapping[str, Any]] = None) -> MarketModel:
    preset = PRESETS["model1"]
    return preset.build(preset.default_theta(options) if theta is None else theta, options)


def model2_preset(theta=None, options: Optional[Mapping[str, Any]] = None) -> MarketModel:
    preset = PRESETS["model2"]
    return preset.build(preset.default_theta(options) if theta is None else theta, options)


def impact_preset(theta=None, options: Optional[Mapping[str, Any]] = None) -> MarketModel:
    preset = PRESETS["impact"]
    return preset.build(preset.default_theta(options) if theta is None else theta, options)
