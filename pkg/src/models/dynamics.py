"""
State Dynamics
What happens to the model state X and the reference prices P when an event
fires, plus the state-only jumps of signal-driven models.

Reference prices are kept as integer grid indices n (price = tick * (n + 1/2)),
so every transition stays on the grid exactly.

    QueueReactiveDynamics   X = one LobState per asset; events go through lob-core
    SignalDynamics          X = one signal vector per asset; events move P by one tick
    ConstantDynamics        X = (); events leave X and P untouched
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import InvalidStateError
from src.lob.transitions import Fill, apply_event, execute_market_order, sample_draws
from src.lob.types import AssetSpec, LobState, OrderEvent, RegenDraws, Side
from src.models.intensity import IntensityChannel, PriceJumpChannel, QueueChannel

GridPrices = Tuple[int, ...]


@dataclass(frozen=True)
class Transition:
    """Outcome of one event."""

    x: Any
    p: GridPrices
    detail: Optional[Dict[str, Any]] = None


def _replace(values: Sequence[Any], index: int, value: Any) -> Tuple[Any, ...]:
    out = list(values)
    out[index] = value
    return tuple(out)


@dataclass(frozen=True)
class QueueReactiveDynamics:
    """Order-book transitions for queue-reactive presets."""

    assets: Tuple[AssetSpec, ...]
    initial_volume: str = "unit"
    initial_grid: GridPrices = ()
    family: str = field(default="qr", init=False)

    def __post_init__(self):
        if self.initial_volume not in ("unit", "mean"):
            raise ValueError(f"Unknown initial volume policy: {self.initial_volume}")

    @property
    def n_assets(self) -> int:
        return len(self.assets)

    @property
    def ticks(self) -> Tuple[float, ...]:
        return tuple(a.tick for a in self.assets)

    def initial_state(self, rng: np.random.Generator) -> Tuple[Tuple[LobState, ...], GridPrices]:
        books = []
        for asset in self.assets:
            volume = 1 if self.initial_volume == "unit" else asset.regen.typical_volume
            books.append(LobState((volume,) * (2 * asset.depth)))
        grid = self.initial_grid or (0,) * self.n_assets
        return tuple(books), tuple(grid)

    def fire(self, x: Tuple[LobState, ...], p: GridPrices, channel: IntensityChannel,
             rng: np.random.Generator) -> Transition:
        if not isinstance(channel, QueueChannel):
            raise TypeError(f"Queue-reactive dynamics cannot fire {type(channel).__name__}")
        event = channel.make_event(x[channel.asset], rng)
        return self.inject(x, p, channel.asset, event, rng)

    def inject(self, x: Tuple[LobState, ...], p: GridPrices, asset: int, event: OrderEvent,
               rng: np.random.Generator) -> Transition:
        """Apply an order to one asset's book, drawing regeneration volumes from rng."""
        q = x[asset]
        draws = sample_draws(self.assets[asset], q, event, rng)
        q_next, grid = apply_event(q, p[asset], event, draws)
        detail = {"asset": asset, "event": event.to_json()}
        if draws.new_piles or draws.refill is not None:
            detail["draws"] = {"new": list(draws.new_piles), "refill": draws.refill}
        return Transition(_replace(x, asset, q_next), _replace(p, asset, grid), detail)

    def market_order(self, x: Tuple[LobState, ...], p: GridPrices, asset: int, consumed_side: Side,
                     size: int, rng: np.random.Generator) -> Tuple[Transition, List[Fill]]:
        q, grid, fills = execute_market_order(self.assets[asset], x[asset], p[asset], consumed_side, size, rng)
        return Transition(_replace(x, asset, q), _replace(p, asset, grid)), fills

    def replay(self, x: Tuple[LobState, ...], p: GridPrices, detail: Dict[str, Any]) -> Transition:
        """Re-apply a recorded event with its recorded regeneration volumes."""
        asset = int(detail["asset"])
        event = OrderEvent.from_json(detail["event"])
        raw = detail.get("draws") or {}
        draws = RegenDraws(tuple(raw.get("new", ())), raw.get("refill"))
        q_next, grid = apply_event(x[asset], p[asset], event, draws)
        return Transition(_replace(x, asset, q_next), _replace(p, asset, grid), detail)

    def state_jump_rate(self, x: Any) -> float:
        return 0.0

    def state_jump(self, x: Any, p: GridPrices, rng: np.random.Generator) -> Transition:
        raise InvalidStateError("Queue-reactive models have no state-only jumps")

    def snapshot(self, x: Tuple[LobState, ...]) -> Dict[str, Any]:
        return {"books": [q.to_json() for q in x]}

    def restore(self, data: Dict[str, Any]) -> Tuple[LobState, ...]:
        books = tuple(LobState.from_json(b) for b in data["books"])
        if len(books) != self.n_assets:
            raise InvalidStateError(f"Snapshot has {len(books)} books, expected {self.n_assets}")
        for q, asset in zip(books, self.assets):
            if q.depth != asset.depth:
                raise InvalidStateError(f"Snapshot depth {q.depth} does not match {asset.depth}")
            q.validate()
        return books


@dataclass(frozen=True)
class SignalDynamics:
    """
    Signal-driven price jumps.

    Each asset carries a signal vector, redrawn from `distribution` at rate
    `redraw_rate` and, when `redraw_on_jump`, right after each of its own price
    jumps. `uniform` draws on [-1, 1] (volume imbalance); `normal` draws
    standard normal vectors.
    """

    ticks: Tuple[float, ...]
    signal_dim: int = 2
    distribution: str = "normal"
    redraw_rate: float = 1.0
    redraw_on_jump: bool = True
    initial_grid: GridPrices = ()
    family: str = field(default="signal", init=False)

    def __post_init__(self):
        if self.distribution not in ("normal", "uniform"):
            raise ValueError(f"Unknown signal distribution: {self.distribution}")
        if self.redraw_rate < 0:
            raise ValueError(f"Redraw rate must be >= 0, got {self.redraw_rate}")

    @property
    def n_assets(self) -> int:
        return len(self.ticks)

    def draw_signal(self, rng: np.random.Generator) -> Tuple[float, ...]:
        if self.distribution == "normal":
            values = rng.standard_normal(self.signal_dim)
        else:
            values = rng.uniform(-1.0, 1.0, self.signal_dim)
        return tuple(float(v) for v in values)

    def initial_state(self, rng: np.random.Generator) -> Tuple[Tuple[Tuple[float, ...], ...], GridPrices]:
        x = tuple(self.draw_signal(rng) for _ in range(self.n_assets))
        grid = self.initial_grid or (0,) * self.n_assets
        return x, tuple(grid)

    def fire(self, x, p: GridPrices, channel: IntensityChannel, rng: np.random.Generator) -> Transition:
        if not isinstance(channel, PriceJumpChannel):
            raise TypeError(f"Signal dynamics cannot fire {type(channel).__name__}")
        grid = _replace(p, channel.asset, p[channel.asset] + channel.direction)
        if self.redraw_on_jump:
            x = _replace(x, channel.asset, self.draw_signal(rng))
        return Transition(x, grid)

    def state_jump_rate(self, x: Any) -> float:
        return self.redraw_rate * self.n_assets

    def state_jump(self, x, p: GridPrices, rng: np.random.Generator) -> Transition:
        asset = int(rng.integers(self.n_assets))
        return Transition(_replace(x, asset, self.draw_signal(rng)), p)

    def snapshot(self, x) -> Dict[str, Any]:
        return {"signal": [list(s) for s in x]}

    def restore(self, data: Dict[str, Any]):
        signal = tuple(tuple(float(v) for v in s) for s in data["signal"])
        if len(signal) != self.n_assets or any(len(s) != self.signal_dim for s in signal):
            raise InvalidStateError(f"Signal snapshot has the wrong shape: {data['signal']}")
        if self.distribution == "uniform" and any(abs(v) > 1.0 for s in signal for v in s):
            raise InvalidStateError(f"Imbalance outside [-1, 1]: {data['signal']}")
        return signal


@dataclass(frozen=True)
class ConstantDynamics:
    """Events are counted but change neither X nor P."""

    ticks: Tuple[float, ...] = (0.01,)
    initial_grid: GridPrices = ()
    family: str = field(default="constant", init=False)

    @property
    def n_assets(self) -> int:
        return len(self.ticks)

    def initial_state(self, rng: np.random.Generator):
        return (), tuple(self.initial_grid or (0,) * self.n_assets)

    def fire(self, x, p: GridPrices, channel: IntensityChannel, rng: np.random.Generator) -> Transition:
        return Transition(x, p)

    def state_jump_rate(self, x: Any) -> float:
        return 0.0

    def state_jump(self, x, p: GridPrices, rng: np.random.Generator) -> Transition:
        raise InvalidStateError("Constant-rate models have no state-only jumps")

    def snapshot(self, x) -> Dict[str, Any]:
        return {}

    def restore(self, data: Dict[str, Any]):
        return ()
