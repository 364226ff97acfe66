"""
Order Book Module
State space, event algebra and transitions of the tracked order-book window.
"""

from .types import (
    AssetSpec,
    EventKind,
    LobState,
    OrderEvent,
    Pile,
    RegenDraws,
    RegenSpec,
    Side,
)
from .transitions import (
    Fill,
    apply_event,
    best_pile,
    delta_p,
    delta_q,
    execute_market_order,
    is_licit,
    pile_distance,
    required_draws,
    sample_draws,
    second_best_pile,
    shift_bracket,
    spread_and_direction,
)

__all__ = [
    "AssetSpec",
    "EventKind",
    "LobState",
    "OrderEvent",
    "Pile",
    "RegenDraws",
    "RegenSpec",
    "Side",
    "Fill",
    "apply_event",
    "best_pile",
    "delta_p",
    "delta_q",
    "execute_market_order",
    "is_licit",
    "pile_distance",
    "required_draws",
    "sample_draws",
    "second_best_pile",
    "shift_bracket",
    "spread_and_direction",
]
