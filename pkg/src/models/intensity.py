"""
Intensity Functions
Exponential-polynomial intensities Lambda^k(x, y) = exp(sum_alpha b^k_alpha(x) y^alpha),
set to zero outside the activity set of event type k.

Here y = S - P is the gap between efficient and reference prices, one
coordinate per asset. Each event type is an IntensityChannel that maps the
model state x to its log-intensity coefficients and decides whether it is
active. IntensitySpec bundles the channels of a model and provides the
quantities the simulator and the likelihood need.

Example usage:
    spec = IntensitySpec([ConstantChannel("arrival", 2.0, dim=1)], dim=1)
    spec.eval_intensity("arrival", (), np.zeros(1))         # 2.0
    spec.taylor_sum_coeffs((), n_deg=4).coeffs              # [1, 0, 0, 0, 0]
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import ParameterFaultError
from src.likelihood.multi_index import MultiIndexPoly, get_index_set
from src.lob.transitions import is_licit
from src.lob.types import EventKind, LobState, OrderEvent, Pile, Side

INTENSITY_CEILING = 1e12


class IntensityChannel(ABC):
    """One event type: its log-intensity coefficients and activity set."""

    name: str
    dim: int
    degree: int = 1

    @abstractmethod
    def is_active(self, x: Any) -> bool:
        """Whether x lies in the activity set."""

    def affine(self, x: Any) -> Tuple[float, np.ndarray]:
        """(b_0(x), (b_{e_i}(x))_i) of a log-affine channel."""
        raise NotImplementedError(f"{type(self).__name__} is not log-affine")

    def log_coeffs(self, x: Any) -> np.ndarray:
        """Log-intensity coefficients over the degree-`degree` index set."""
        iset = get_index_set(self.dim, self.degree)
        b0, slopes = self.affine(x)
        coeffs = np.zeros(iset.size)
        coeffs[0] = b0
        for i in range(self.dim):
            coeffs[iset.unit(i)] = slopes[i]
        return coeffs


@dataclass(frozen=True)
class ConstantChannel(IntensityChannel):
    """State- and price-independent rate; a zero rate is never active."""

    name: str
    rate: float
    dim: int = 1

    def __post_init__(self):
        if self.rate < 0 or not np.isfinite(self.rate):
            raise ValueError(f"Rate of {self.name} must be finite and >= 0, got {self.rate}")

    def is_active(self, x: Any) -> bool:
        return self.rate > 0

    def affine(self, x: Any) -> Tuple[float, np.ndarray]:
        return float(np.log(self.rate)) if self.rate > 0 else -np.inf, np.zeros(self.dim)


@dataclass(frozen=True)
class PolynomialChannel(IntensityChannel):
    """State-independent log-intensity polynomial of arbitrary degree."""

    name: str
    terms: Tuple[Tuple[Tuple[int, ...], float], ...]
    dim: int = 1
    degree: int = 2

    def is_active(self, x: Any) -> bool:
        return True

    def affine(self, x: Any) -> Tuple[float, np.ndarray]:
        if self.degree > 1:
            return super().affine(x)
        coeffs = self.log_coeffs(x)
        iset = get_index_set(self.dim, 1)
        return float(coeffs[0]), np.array([coeffs[iset.unit(i)] for i in range(self.dim)])

    def log_coeffs(self, x: Any) -> np.ndarray:
        poly = MultiIndexPoly.from_terms(self.dim, self.degree, dict(self.terms))
        return poly.coeffs


@dataclass(frozen=True)
class QueueChannel(IntensityChannel):
    """
    Order-book event of a queue-reactive model.

    log Lambda = intercept + y_slope * y^asset + sum_j weight_j * q^j, active while
    the unit-size version of the event is licit. Consume channels can wipe the
    whole pile with probability `wipe_probability`.
    """

    name: str
    asset: int
    kind: EventKind
    pile: Pile
    intercept: float
    y_slope: float
    queue_weights: Tuple[Tuple[Pile, float], ...] = ()
    order_side: Optional[Side] = None
    wipe_probability: float = 0.0
    provenance: Optional[str] = None
    dim: int = 1

    def _unit_event(self) -> OrderEvent:
        if self.kind is EventKind.LIMIT:
            return OrderEvent.limit(self.pile, self.order_side, 1)
        return OrderEvent.consume(self.pile, 1, provenance=self.provenance)

    def is_active(self, x: Sequence[LobState]) -> bool:
        return is_licit(x[self.asset], self._unit_event())

    def affine(self, x: Sequence[LobState]) -> Tuple[float, np.ndarray]:
        q = x[self.asset]
        b0 = self.intercept + sum(w * q.volume(pile) for pile, w in self.queue_weights)
        slopes = np.zeros(self.dim)
        slopes[self.asset] = self.y_slope
        return float(b0), slopes

    def make_event(self, q: LobState, rng: np.random.Generator) -> OrderEvent:
        """Concrete order for one occurrence of this event type."""
        if self.kind is EventKind.LIMIT:
            return OrderEvent.limit(self.pile, self.order_side, 1)
        size = 1
        if self.wipe_probability > 0 and rng.random() < self.wipe_probability:
            size = q.volume(self.pile)
        return OrderEvent.consume(self.pile, size, provenance=self.provenance)


@dataclass(frozen=True)
class PriceJumpChannel(IntensityChannel):
    """
    Reference-price jump of a signal-driven model.

    log Lambda = intercept + y_slope * y^asset + sum_m signal_weights[m] * x[asset][m].
    """

    name: str
    asset: int
    direction: int
    intercept: float
    y_slope: float
    signal_weights: Tuple[float, ...] = ()
    dim: int = 1

    def is_active(self, x: Any) -> bool:
        return True

    def affine(self, x: Sequence[Sequence[float]]) -> Tuple[float, np.ndarray]:
        signal = x[self.asset]
        b0 = self.intercept + sum(w * s for w, s in zip(self.signal_weights, signal))
        slopes = np.zeros(self.dim)
        slopes[self.asset] = self.y_slope
        return float(b0), slopes


class IntensitySpec:
    """
    Event alphabet of a model with exponential-polynomial intensities.

    Args:
        channels: One channel per event type; names must be unique
        dim: Number of assets (dimension of y)
        degree: Total degree D of the log-intensity polynomials in y
    """

    def __init__(self, channels: Sequence[IntensityChannel], dim: int, degree: int = 1):
        names = [c.name for c in channels]
        if len(set(names)) != len(names):
            raise ValueError(f"Duplicate event types: {names}")
        for channel in channels:
            if channel.dim != dim:
                raise ValueError(f"Channel {channel.name} has dimension {channel.dim}, expected {dim}")
            if channel.degree > degree:
                raise ValueError(f"Channel {channel.name} exceeds degree {degree}")
        self.channels: List[IntensityChannel] = list(channels)
        self.names: List[str] = names
        self.dim = dim
        self.degree = degree
        self.index_set = get_index_set(dim, degree)
        self._position: Dict[str, int] = {n: i for i, n in enumerate(names)}

    def __len__(self) -> int:
        return len(self.channels)

    def __repr__(self) -> str:
        return f"IntensitySpec(dim={self.dim}, degree={self.degree}, events={self.names})"

    def position(self, k: Union[str, int]) -> int:
        if isinstance(k, (int, np.integer)):
            return int(k)
        try:
            return self._position[k]
        except KeyError:
            raise ValueError(f"Unknown event type {k!r}; expected one of {self.names}") from None

    def channel(self, k: Union[str, int]) -> IntensityChannel:
        return self.channels[self.position(k)]

    @property
    def is_log_affine(self) -> bool:
        return self.degree <= 1

    def active_mask(self, x: Any) -> np.ndarray:
        return np.array([c.is_active(x) for c in self.channels], dtype=bool)

    def coefficient_matrix(self, x: Any) -> np.ndarray:
        """Log-intensity coefficients of every channel, shape (events, terms)."""
        rows = np.zeros((len(self.channels), self.index_set.size))
        for r, channel in enumerate(self.channels):
            coeffs = channel.log_coeffs(x)
            rows[r] = _pad_coeffs(coeffs, channel, self.index_set)
        return rows

    def affine_tables(self, x: Any) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(intercepts, slope matrix (events, dim), active mask) for log-affine specs."""
        if not self.is_log_affine:
            raise ValueError("Affine tables require log-affine intensities")
        intercepts = np.zeros(len(self.channels))
        slopes = np.zeros((len(self.channels), self.dim))
        active = self.active_mask(x)
        for r, channel in enumerate(self.channels):
            if active[r]:
                intercepts[r], slopes[r] = channel.affine(x)
        return intercepts, slopes, active

    def log_intensity(self, k: Union[str, int], x: Any, y: np.ndarray) -> float:
        channel = self.channel(k)
        iset = get_index_set(self.dim, channel.degree)
        return float(iset.monomials(np.reshape(y, (1, self.dim)))[0] @ channel.log_coeffs(x))

    def eval_intensity(self, k: Union[str, int], x: Any, y: np.ndarray) -> float:
        """Rate of event type k; 0 off the activity set, +inf on overflow."""
        channel = self.channel(k)
        if not channel.is_active(x):
            return 0.0
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_intensity(k, x, y)))

    def rates(self, x: Any, y: np.ndarray) -> np.ndarray:
        """Rates of all event types at one point y."""
        return self.rates_block(x, np.reshape(y, (1, self.dim)))[0]

    def rates_block(self, x: Any, ys: np.ndarray) -> np.ndarray:
        """Rates of all event types at points ys of shape (m, dim); returns (m, events)."""
        active = self.active_mask(x)
        out = np.zeros((np.shape(ys)[0], len(self.channels)))
        if not active.any():
            return out
        matrix = self.coefficient_matrix(x)[active]
        with np.errstate(over="ignore"):
            out[:, active] = np.exp(self.index_set.monomials(ys) @ matrix.T)
        return out

    def jump_coeffs(self, k: Union[str, int], x: Any, n_deg: int) -> MultiIndexPoly:
        """Log-intensity of event type k as a polynomial over the degree-n_deg set."""
        channel = self.channel(k)
        target = get_index_set(self.dim, n_deg)
        source = get_index_set(self.dim, channel.degree)
        coeffs = channel.log_coeffs(x)
        out = np.zeros(target.size)
        for alpha, value in zip(source.alphas, coeffs):
            idx = target.index.get(alpha)
            if idx is not None:
                out[idx] = value
        return MultiIndexPoly(target, out)

    def taylor_sum_coeffs(self, x: Any, n_deg: int) -> MultiIndexPoly:
        """
        Taylor coefficients at y=0 of sum over active k of (Lambda^k(x, y) - 1).

        Log-affine channels use the closed form e^{b_0} prod_i b_i^{alpha_i} / alpha!;
        higher-degree channels go through the truncated exponential.
        """
        target = get_index_set(self.dim, n_deg)
        total = np.zeros(target.size)
        for channel in self.channels:
            if not channel.is_active(x):
                continue
            if channel.degree <= 1:
                b0, slopes = channel.affine(x)
                with np.errstate(over="ignore"):
                    weight = np.exp(b0)
                total += weight * target.monomials(slopes[None, :])[0] / target.factorials
            else:
                total += self.jump_coeffs(channel.name, x, n_deg).exp().coeffs
            total[0] -= 1.0
        return MultiIndexPoly(target, total)


def _pad_coeffs(coeffs: np.ndarray, channel: IntensityChannel, target) -> np.ndarray:
    source = get_index_set(channel.dim, channel.degree)
    if source.size == target.size:
        return coeffs
    out = np.zeros(target.size)
    for alpha, value in zip(source.alphas, coeffs):
        out[target.index[alpha]] = value
    return out


def check_rates(rates: np.ndarray, context: str = "") -> None:
    """Raise ParameterFaultError for rates above the numerical ceiling."""
    if np.any(~np.isfinite(rates)) or np.any(rates > INTENSITY_CEILING):
        raise ParameterFaultError(f"Intensity overflow{' ' + context if context else ''}")


def eval_intensity(spec: IntensitySpec, k: Union[str, int], x: Any, y: np.ndarray) -> float:
    return spec.eval_intensity(k, x, y)


def taylor_sum_coeffs(spec: IntensitySpec, x: Any, n_deg: int) -> MultiIndexPoly:
    return spec.taylor_sum_coeffs(x, n_deg)
