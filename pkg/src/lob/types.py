"""
Order Book Types
Value types for the tracked window of an order book.

A book of depth K tracks K piles per side around the reference price. Volumes
are stored in a single tuple ordered by increasing price:

    (b,K) ... (b,2) (b,1) | (a,1) (a,2) ... (a,K)

so pile (b,l) lives at index K-l and pile (a,l) at index K-1+l. Relative to the
reference price, pile (a,l) sits l-1/2 ticks above it and (b,l) l-1/2 ticks
below.

Example usage:
    q = LobState.from_sides(bid=(3, 1, 2), ask=(0, 4, 1))
    q.volume(Pile(Side.ASK, 2))   # 4
    e = OrderEvent.consume(Pile(Side.ASK, 2), 4, provenance="market")
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from src.errors import IllicitEventError, InvalidStateError, VolumeOverflowError

INT64_MAX = int(np.iinfo(np.int64).max)


class Side(str, Enum):
    BID = "b"
    ASK = "a"

    @property
    def opposite(self) -> "Side":
        return Side.ASK if self is Side.BID else Side.BID

    @classmethod
    def parse(cls, value: Any) -> "Side":
        if isinstance(value, Side):
            return value
        text = str(value).lower()
        if text in ("b", "bid"):
            return cls.BID
        if text in ("a", "ask"):
            return cls.ASK
        raise ValueError(f"Unknown side: {value!r}")


@dataclass(frozen=True, order=True)
class Pile:
    """One price level on one side. Level K+2 is the missing-pile sentinel."""

    side: Side
    level: int

    def __post_init__(self):
        if int(self.level) < 1:
            raise InvalidStateError(f"Pile level must be >= 1, got {self.level}")

    @property
    def label(self) -> str:
        return f"{self.side.value}{self.level}"

    def mirrored(self) -> "Pile":
        return Pile(self.side.opposite, self.level)

    @classmethod
    def parse(cls, label: str) -> "Pile":
        """Parse labels such as 'a1' or 'b3'."""
        if len(label) < 2:
            raise InvalidStateError(f"Invalid pile label: {label!r}")
        return cls(Side.parse(label[0]), int(label[1:]))


class EventKind(str, Enum):
    CONSUME = "consume"
    LIMIT = "limit"
    MODIF = "modif"


@dataclass(frozen=True)
class OrderEvent:
    """
    Typed order-book event.

    consume(j, n): n units leave pile j (market order or cancellation).
    limit(j, s, n): n units of an s-side order arrive at pile j.
    modif(j1 -> j2, n): n units move from j1 to j2.
    """

    kind: EventKind
    pile: Pile
    size: int
    order_side: Optional[Side] = None
    target: Optional[Pile] = None
    provenance: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if int(self.size) < 1:
            raise IllicitEventError(f"Order size must be >= 1, got {self.size}")
        if self.kind is EventKind.LIMIT and self.order_side is None:
            raise IllicitEventError("Limit event needs an order side")
        if self.kind is EventKind.MODIF and self.target is None:
            raise IllicitEventError("Modification event needs a target pile")

    @classmethod
    def consume(cls, pile: Pile, size: int, provenance: Optional[str] = None) -> "OrderEvent":
        return cls(EventKind.CONSUME, pile, int(size), provenance=provenance)

    @classmethod
    def limit(cls, pile: Pile, order_side: Side, size: int) -> "OrderEvent":
        return cls(EventKind.LIMIT, pile, int(size), order_side=order_side)

    @classmethod
    def modif(cls, source: Pile, target: Pile, size: int) -> "OrderEvent":
        return cls(EventKind.MODIF, source, int(size), target=target)

    def mirrored(self) -> "OrderEvent":
        return OrderEvent(
            self.kind,
            self.pile.mirrored(),
            self.size,
            order_side=self.order_side.opposite if self.order_side else None,
            target=self.target.mirrored() if self.target else None,
            provenance=self.provenance,
        )

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value, "pile": self.pile.label, "size": self.size}
        if self.order_side is not None:
            data["side"] = self.order_side.value
        if self.target is not None:
            data["target"] = self.target.label
        if self.provenance is not None:
            data["provenance"] = self.provenance
        return data

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "OrderEvent":
        kind = EventKind(data["kind"])
        return cls(
            kind,
            Pile.parse(data["pile"]),
            int(data["size"]),
            order_side=Side.parse(data["side"]) if "side" in data else None,
            target=Pile.parse(data["target"]) if "target" in data else None,
            provenance=data.get("provenance"),
        )

    def describe(self) -> str:
        if self.kind is EventKind.CONSUME:
            return f"consume({self.pile.label}, n={self.size})"
        if self.kind is EventKind.LIMIT:
            return f"limit({self.pile.label}, {self.order_side.value}, n={self.size})"
        return f"modif({self.pile.label}->{self.target.label}, n={self.size})"


@dataclass(frozen=True)
class LobState:
    """Pending volumes of the tracked window, in ladder (price) order."""

    volumes: Tuple[int, ...]

    def __post_init__(self):
        if len(self.volumes) == 0 or len(self.volumes) % 2:
            raise InvalidStateError(
                f"Volume vector must have even positive length, got {len(self.volumes)}"
            )
        object.__setattr__(self, "volumes", tuple(int(v) for v in self.volumes))

    @classmethod
    def from_sides(cls, bid: Sequence[int], ask: Sequence[int]) -> "LobState":
        """Build from per-side volumes listed nearest pile first."""
        if len(bid) != len(ask):
            raise InvalidStateError("Bid and ask sides must have the same depth")
        return cls(tuple(reversed(tuple(bid))) + tuple(ask))

    @property
    def depth(self) -> int:
        return len(self.volumes) // 2

    @property
    def bid(self) -> Tuple[int, ...]:
        """Bid volumes, nearest pile first."""
        return tuple(reversed(self.volumes[: self.depth]))

    @property
    def ask(self) -> Tuple[int, ...]:
        """Ask volumes, nearest pile first."""
        return self.volumes[self.depth:]

    def side_volumes(self, side: Side) -> Tuple[int, ...]:
        return self.bid if side is Side.BID else self.ask

    def index_of(self, pile: Pile) -> int:
        if not 1 <= pile.level <= self.depth:
            raise InvalidStateError(
                f"Pile {pile.label} outside tracked window of depth {self.depth}"
            )
        if pile.side is Side.BID:
            return self.depth - pile.level
        return self.depth - 1 + pile.level

    def volume(self, pile: Pile) -> int:
        """Pending volume at `pile`; piles beyond the window hold nothing."""
        if pile.level > self.depth:
            return 0
        return self.volumes[self.index_of(pile)]

    def with_volume(self, pile: Pile, value: int) -> "LobState":
        if value < 0:
            raise InvalidStateError(f"Negative volume {value} at {pile.label}")
        if value > INT64_MAX:
            raise VolumeOverflowError(f"Volume {value} at {pile.label} exceeds int64")
        vols = list(self.volumes)
        vols[self.index_of(pile)] = int(value)
        return LobState(tuple(vols))

    def mirrored(self) -> "LobState":
        """Swap the bid and ask sides."""
        return LobState(tuple(reversed(self.volumes)))

    def total(self, side: Side) -> int:
        return sum(self.side_volumes(side))

    def is_valid(self) -> bool:
        try:
            self.validate()
        except InvalidStateError:
            return False
        return True

    def validate(self) -> None:
        """Raise InvalidStateError unless the state belongs to the admissible set."""
        if any(v < 0 for v in self.volumes):
            raise InvalidStateError(f"Negative volume in {self.volumes}")
        if any(v > INT64_MAX for v in self.volumes):
            raise VolumeOverflowError(f"Volume above int64 range in {self.volumes}")
        best = {}
        for side in (Side.BID, Side.ASK):
            levels = [i + 1 for i, v in enumerate(self.side_volumes(side)) if v > 0]
            if not levels:
                raise InvalidStateError(f"Empty {side.name.lower()} side: {self.volumes}")
            best[side] = levels[0]
        if abs(best[Side.ASK] - best[Side.BID]) > 1:
            raise InvalidStateError(
                f"Best levels too far apart (bid {best[Side.BID]}, ask {best[Side.ASK]})"
            )

    def as_array(self) -> np.ndarray:
        return np.asarray(self.volumes, dtype=np.int64)

    def to_json(self) -> Dict[str, Any]:
        return {"bid": list(self.bid), "ask": list(self.ask)}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "LobState":
        return cls.from_sides(data["bid"], data["ask"])


@dataclass(frozen=True)
class RegenSpec:
    """
    Volumes of newly revealed piles.

    Every new pile gets an independent draw. `geometric` is supported on the
    positive integers with the given mean; `constant` always returns the mean.
    """

    mean: float = 2.0
    family: str = "geometric"

    def __post_init__(self):
        if self.family not in ("geometric", "constant"):
            raise ValueError(f"Unknown regeneration family: {self.family}")
        if not np.isfinite(self.mean) or self.mean < 1.0:
            raise ValueError(f"Regeneration mean must be finite and >= 1, got {self.mean}")
        if self.family == "constant" and float(self.mean) != int(self.mean):
            raise ValueError(f"Constant regeneration needs an integer mean, got {self.mean}")

    def sample(self, side: Side, count: int, rng: np.random.Generator) -> Tuple[int, ...]:
        """Draw `count` pile volumes for `side`, nearest pile first."""
        if count <= 0:
            return ()
        if self.family == "constant":
            return (int(self.mean),) * count
        draws = rng.geometric(1.0 / self.mean, size=count)
        return tuple(int(v) for v in draws)

    @property
    def typical_volume(self) -> int:
        return max(1, int(round(self.mean)))


@dataclass(frozen=True)
class RegenDraws:
    """Regeneration samples consumed by a price move."""

    new_piles: Tuple[int, ...] = ()
    refill: Optional[int] = None


@dataclass(frozen=True)
class AssetSpec:
    """Tick size, tracked depth and regeneration law of one asset."""

    tick: float
    depth: int
    regen: RegenSpec = field(default_factory=RegenSpec)

    def __post_init__(self):
        if not self.tick > 0:
            raise ValueError(f"Tick must be positive, got {self.tick}")
        if int(self.depth) < 1:
            raise ValueError(f"Depth must be >= 1, got {self.depth}")

    def price(self, grid_index: int) -> float:
        """Price of the grid point tick*(n + 1/2)."""
        return self.tick * (grid_index + 0.5)

    def grid_index(self, price: float) -> int:
        """Inverse of `price`, rounding to the nearest grid point."""
        return int(round(price / self.tick - 0.5))

    def pile_price(self, grid_index: int, pile: Pile) -> float:
        """Absolute price of a pile when the reference sits at `grid_index`."""
        offset = pile.level - 0.5
        sign = 1.0 if pile.side is Side.ASK else -1.0
        return self.price(grid_index) + sign * offset * self.tick
