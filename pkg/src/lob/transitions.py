"""
Order Book Transitions
Best piles, spread, licitness, reference-price moves and the post-jump window
shift with regeneration.

All functions are pure: states are immutable tuples and randomness only enters
through explicit RegenDraws (or an explicit Generator in `sample_draws`).

Example usage:
    q = LobState.from_sides(bid=(1,), ask=(1,))
    e = OrderEvent.consume(Pile(Side.ASK, 1), 1)
    draws = sample_draws(asset, q, e, rng)
    q2, p2 = apply_event(q, p, e, draws)
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import (
    IllicitEventError,
    InvalidStateError,
    MissingDrawsError,
    VolumeOverflowError,
)
from src.lob.types import (
    INT64_MAX,
    AssetSpec,
    EventKind,
    LobState,
    OrderEvent,
    Pile,
    RegenDraws,
    Side,
)


def best_pile(q: LobState, side: Side) -> Pile:
    """Nearest pile with positive volume on `side`."""
    q.validate()
    for level, volume in enumerate(q.side_volumes(side), start=1):
        if volume > 0:
            return Pile(side, level)
    raise InvalidStateError(f"No volume on {side.name.lower()} side")  # unreachable after validate


def second_best_pile(q: LobState, side: Side) -> Pile:
    """Next non-empty pile beyond the best one, or the sentinel level K+2."""
    best = best_pile(q, side)
    volumes = q.side_volumes(side)
    for level in range(best.level + 1, q.depth + 1):
        if volumes[level - 1] > 0:
            return Pile(side, level)
    return Pile(side, q.depth + 2)


def pile_distance(j1: Pile, j2: Pile) -> int:
    """Signed distance j1 - j2 in ticks."""
    l1, l2 = j1.level, j2.level
    if j1.side is Side.ASK and j2.side is Side.ASK:
        return l1 - l2
    if j1.side is Side.BID and j2.side is Side.BID:
        return l2 - l1
    if j1.side is Side.ASK:
        return l1 + l2 - 1
    return -l1 - l2 + 1


def spread_and_direction(q: LobState) -> Tuple[int, int]:
    """Spread in ticks and d = (best ask level) - (best bid level)."""
    ask_best = best_pile(q, Side.ASK)
    bid_best = best_pile(q, Side.BID)
    return pile_distance(ask_best, bid_best), ask_best.level - bid_best.level


def _within(q: LobState, pile: Pile) -> bool:
    return 1 <= pile.level <= q.depth


def _limit_licit(q: LobState, pile: Pile, order_side: Side) -> bool:
    if not _within(q, pile):
        return False
    if pile.side is order_side:
        return True
    # order sitting on the opposite side must stay strictly inside the spread
    return pile.level < best_pile(q, pile.side).level


def is_licit(q: LobState, e: OrderEvent) -> bool:
    """Whether `e` can occur in state `q`."""
    if not q.is_valid():
        return False
    if e.kind is EventKind.CONSUME:
        return _within(q, e.pile) and q.volume(e.pile) >= e.size
    if e.kind is EventKind.LIMIT:
        return _limit_licit(q, e.pile, e.order_side)
    if e.pile == e.target:
        return False
    return (
        _within(q, e.pile)
        and q.volume(e.pile) >= e.size
        and _limit_licit(q, e.target, e.pile.side)
    )


def _depletion_move(q: LobState, side: Side, d: int) -> int:
    best = best_pile(q, side)
    gap = pile_distance(second_best_pile(q, side), best)
    if side is Side.ASK:
        return (d + gap) // 2
    return (d + gap + 1) // 2


def _limit_move(q: LobState, pile: Pile, order_side: Side, d: int) -> int:
    best = best_pile(q, order_side)
    gap = pile_distance(pile, best)
    if order_side is Side.ASK and gap < 0:
        return (d + gap + 1) // 2
    if order_side is Side.BID and gap > 0:
        return (d + gap) // 2
    return 0


def delta_p(q: LobState, e: OrderEvent) -> int:
    """Reference-price variation, in ticks, caused by `e`."""
    if not is_licit(q, e):
        raise IllicitEventError(f"{e.describe()} is not licit in state {q.volumes}")
    _, d = spread_and_direction(q)

    if e.kind is EventKind.CONSUME:
        side = e.pile.side
        if e.pile != best_pile(q, side) or e.size != q.volume(e.pile):
            return 0
        return _depletion_move(q, side, d)

    if e.kind is EventKind.LIMIT:
        return _limit_move(q, e.pile, e.order_side, d)

    side = e.pile.side
    best = best_pile(q, side)
    toward_spread = pile_distance(e.target, best)
    if (side is Side.BID and toward_spread > 0) or (side is Side.ASK and toward_spread < 0):
        return _limit_move(q, e.target, side, d)
    if e.pile != best or e.size != q.volume(e.pile):
        return 0
    # whole best pile moved further out: new best is the nearer of target and second best
    if side is Side.ASK and toward_spread > 0:
        return min(_depletion_move(q, side, d), (d + toward_spread) // 2)
    if side is Side.BID and toward_spread < 0:
        return max(_depletion_move(q, side, d), (d + toward_spread + 1) // 2)
    return 0


def delta_q(e: OrderEvent) -> Dict[Pile, int]:
    """Volume variation of `e`; independent of the state."""
    if e.kind is EventKind.CONSUME:
        return {e.pile: -e.size}
    if e.kind is EventKind.LIMIT:
        return {e.pile: e.size}
    return {e.pile: -e.size, e.target: e.size}


def shift_bracket(volumes: Sequence[int], v: Sequence[int], direction: str) -> Tuple[int, ...]:
    """
    Slide the tracked window by len(v) ticks.

    Args:
        volumes: Ladder-ordered volumes (length 2K)
        v: Volumes of the newly revealed piles, nearest pile first
        direction: "up" drops the deepest bid piles and appends new ask piles,
            "down" drops the deepest ask piles and prepends new bid piles

    Returns:
        New ladder-ordered volume tuple
    """
    volumes = tuple(int(x) for x in volumes)
    v = tuple(int(x) for x in v)
    depth = len(volumes) // 2
    if len(v) > depth:
        raise InvalidStateError(f"Cannot reveal {len(v)} piles in a window of depth {depth}")
    if not v:
        return volumes
    if direction == "up":
        return volumes[len(v):] + v
    if direction == "down":
        return tuple(reversed(v)) + volumes[: -len(v)]
    raise ValueError(f"Unknown shift direction: {direction}")


def _apply_volume_change(q: LobState, e: OrderEvent) -> List[int]:
    vols = list(q.volumes)
    for pile, change in delta_q(e).items():
        idx = q.index_of(pile)
        vols[idx] += change
        if vols[idx] > INT64_MAX:
            raise VolumeOverflowError(f"Volume at {pile.label} exceeds int64 after {e.describe()}")
    return vols


@dataclass(frozen=True)
class DrawRequirement:
    """Regeneration samples a transition needs."""

    move: int
    new_piles: int
    refill_side: Optional[Side] = None


def required_draws(q: LobState, e: OrderEvent) -> DrawRequirement:
    """New-pile volumes and far-side refill the transition will consume."""
    move = delta_p(q, e)
    if move == 0:
        return DrawRequirement(0, 0)
    vols = _apply_volume_change(q, e)
    direction = "up" if move > 0 else "down"
    shifted = LobState(shift_bracket(vols, (1,) * abs(move), direction))
    emptied = Side.BID if move > 0 else Side.ASK
    refill = emptied if shifted.total(emptied) == 0 else None
    return DrawRequirement(move, abs(move), refill)


def sample_draws(asset: AssetSpec, q: LobState, e: OrderEvent, rng: np.random.Generator) -> RegenDraws:
    """Draw exactly the regeneration volumes `apply_event` will need."""
    need = required_draws(q, e)
    if need.move == 0:
        return RegenDraws()
    revealed = Side.ASK if need.move > 0 else Side.BID
    new_piles = asset.regen.sample(revealed, need.new_piles, rng)
    refill = None
    if need.refill_side is not None:
        refill = asset.regen.sample(need.refill_side, 1, rng)[0]
    return RegenDraws(new_piles=new_piles, refill=refill)


def apply_event(q: LobState, p: int, e: OrderEvent, draws: RegenDraws) -> Tuple[LobState, int]:
    """
    Apply `e` to the book.

    Args:
        q: Current state
        p: Reference price as a grid index (price = tick * (p + 1/2))
        e: Licit event
        draws: Regeneration volumes for a price move

    Returns:
        (new state, new grid index)
    """
    move = delta_p(q, e)
    vols = _apply_volume_change(q, e)
    if move == 0:
        result = LobState(tuple(vols))
        result.validate()
        return result, p

    count = abs(move)
    if len(draws.new_piles) < count:
        raise MissingDrawsError(
            f"{e.describe()} moves the price by {move} ticks but only "
            f"{len(draws.new_piles)} new pile volumes were supplied"
        )
    new_piles = tuple(draws.new_piles[:count])
    if any(int(v) < 1 for v in new_piles):
        raise MissingDrawsError(f"Regenerated volumes must be positive: {new_piles}")

    direction = "up" if move > 0 else "down"
    shifted = LobState(shift_bracket(vols, new_piles, direction))
    emptied = Side.BID if move > 0 else Side.ASK
    if shifted.total(emptied) == 0:
        if draws.refill is None or int(draws.refill) < 1:
            raise MissingDrawsError(f"{emptied.name.lower()} side emptied and no refill volume supplied")
        shifted = shifted.with_volume(Pile(emptied, shifted.depth), int(draws.refill))
    shifted.validate()
    return shifted, p + move


@dataclass(frozen=True)
class Fill:
    """One slice of a market order executed at a single pile."""

    price: float
    quantity: int
    pile: Pile


def execute_market_order(
    asset: AssetSpec,
    q: LobState,
    p: int,
    consumed_side: Side,
    size: int,
    rng: np.random.Generator,
) -> Tuple[LobState, int, List[Fill]]:
    """
    Walk the book with a multi-unit market order.

    A buy consumes the ask side (`consumed_side=Side.ASK`), a sell the bid side.
    Each step consumes as much as possible of the current best pile; depleting
    it moves the reference price and regenerates the window as usual.

    Returns:
        (new state, new grid index, fills in execution order)
    """
    if int(size) < 1:
        raise IllicitEventError(f"Market order size must be >= 1, got {size}")
    remaining = int(size)
    fills: List[Fill] = []
    while remaining > 0:
        best = best_pile(q, consumed_side)
        quantity = min(remaining, q.volume(best))
        event = OrderEvent.consume(best, quantity, provenance="market")
        fills.append(Fill(asset.pile_price(p, best), quantity, best))
        draws = sample_draws(asset, q, event, rng)
        q, p = apply_event(q, p, event, draws)
        remaining -= quantity
    return q, p, fills
