"""Order book state, licitness, reference-price moves and window shifts."""

import itertools

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from src.errors import IllicitEventError, InvalidStateError, MissingDrawsError, VolumeOverflowError
from src.lob.transitions import (
    apply_event,
    best_pile,
    delta_p,
    delta_q,
    execute_market_order,
    is_licit,
    pile_distance,
    required_draws,
    second_best_pile,
    shift_bracket,
    spread_and_direction,
)
from src.lob.types import INT64_MAX, AssetSpec, LobState, OrderEvent, Pile, RegenDraws, RegenSpec, Side

A, B = Side.ASK, Side.BID


@pytest.fixture
def gapped():
    """Three bid piles, empty (a,1), two ask piles behind it."""
    return LobState.from_sides(bid=(1, 2, 1), ask=(0, 3, 2))


def all_piles(depth):
    return [Pile(side, level) for side in (B, A) for level in range(1, depth + 1)]


def all_events(depth, max_size=2):
    piles = all_piles(depth)
    for pile in piles:
        for n in range(1, max_size + 1):
            yield OrderEvent.consume(pile, n)
            yield OrderEvent.limit(pile, B, n)
            yield OrderEvent.limit(pile, A, n)
    for source, target in itertools.permutations(piles, 2):
        for n in range(1, max_size + 1):
            yield OrderEvent.modif(source, target, n)


def all_states(depth, max_volume=2):
    for vols in itertools.product(range(max_volume + 1), repeat=2 * depth):
        q = LobState(vols)
        if q.is_valid():
            yield q


def reference_move(q, e):
    """
    Reference move rebuilt from the post-event best prices.

    Piles sit at +/-(l - 1/2) ticks from the old reference; positions below are
    doubled to stay integral. Resting orders keep their own side wherever they
    sit, and an emptied side has its best at level K+2. Odd spread: the mid.
    Even spread: the half-tick next to the mid that is closest to the old
    reference.
    """

    def position(pile):
        return (2 * pile.level - 1) * (1 if pile.side is A else -1)

    volume = {B: {}, A: {}}
    for pile in all_piles(q.depth):
        if q.volume(pile) > 0:
            volume[pile.side][position(pile)] = q.volume(pile)

    def add(side, pile, n):
        pos = position(pile)
        volume[side][pos] = volume[side].get(pos, 0) + n
        if volume[side][pos] == 0:
            del volume[side][pos]

    if e.kind.value == "consume":
        add(e.pile.side, e.pile, -e.size)
    elif e.kind.value == "limit":
        add(e.order_side, e.pile, e.size)
    else:
        add(e.pile.side, e.pile, -e.size)
        add(e.pile.side, e.target, e.size)

    sentinel = 2 * (q.depth + 2) - 1
    best_ask = min(volume[A], default=sentinel)
    best_bid = max(volume[B], default=-sentinel)
    total = (best_ask + best_bid) // 2
    if total % 2 == 0:
        return total // 2
    return (total - 1) // 2 if total > 0 else (total + 1) // 2


class TestBestPiles:
    def test_best_with_empty_first_ask(self, gapped):
        assert best_pile(gapped, A) == Pile(A, 2)
        assert best_pile(gapped, B) == Pile(B, 1)

    def test_minimal_state(self):
        q = LobState.from_sides(bid=(1,), ask=(1,))
        assert best_pile(q, B) == Pile(B, 1)
        assert best_pile(q, A) == Pile(A, 1)

    def test_single_deep_pile(self):
        q = LobState.from_sides(bid=(0, 0, 1), ask=(0, 0, 5))
        assert best_pile(q, A) == Pile(A, 3)

    def test_second_best(self, gapped):
        assert second_best_pile(gapped, B) == Pile(B, 2)

    def test_second_best_sentinel(self):
        q = LobState.from_sides(bid=(0, 0, 1), ask=(0, 0, 5))
        assert second_best_pile(q, A) == Pile(A, 5)

    def test_second_best_skips_empty(self):
        q = LobState.from_sides(bid=(1, 0, 0), ask=(1, 0, 2))
        assert second_best_pile(q, A) == Pile(A, 3)

    def test_invalid_state_rejected(self):
        with pytest.raises(InvalidStateError):
            best_pile(LobState.from_sides(bid=(0, 0), ask=(1, 1)), A)
        with pytest.raises(InvalidStateError):
            best_pile(LobState.from_sides(bid=(0, 0, 1), ask=(1, 0, 0)), A)


class TestDistanceAndSpread:
    @pytest.mark.parametrize(
        "j1, j2, expected",
        [
            (Pile(A, 2), Pile(B, 1), 2),
            (Pile(B, 2), Pile(B, 1), -1),
            (Pile(B, 1), Pile(A, 1), -1),
            (Pile(A, 3), Pile(A, 1), 2),
        ],
    )
    def test_pile_distance(self, j1, j2, expected):
        assert pile_distance(j1, j2) == expected

    @given(
        st.sampled_from([A, B]), st.integers(1, 6), st.sampled_from([A, B]), st.integers(1, 6)
    )
    def test_distance_antisymmetric(self, s1, l1, s2, l2):
        j1, j2 = Pile(s1, l1), Pile(s2, l2)
        assert pile_distance(j1, j2) == -pile_distance(j2, j1)

    def test_spread_gapped(self, gapped):
        assert spread_and_direction(gapped) == (2, 1)

    def test_spread_tight(self):
        assert spread_and_direction(LobState.from_sides(bid=(1,), ask=(1,))) == (1, 0)

    def test_spread_bid_gap(self):
        assert spread_and_direction(LobState.from_sides(bid=(0, 1), ask=(1, 1))) == (2, -1)


class TestLicitness:
    def test_limit_inside_spread(self, gapped):
        assert is_licit(gapped, OrderEvent.limit(Pile(A, 1), A, 1))

    def test_consume_too_much(self, gapped):
        assert not is_licit(gapped, OrderEvent.consume(Pile(B, 1), gapped.volume(Pile(B, 1)) + 1))

    def test_modif_to_same_pile(self, gapped):
        assert not is_licit(gapped, OrderEvent.modif(Pile(B, 2), Pile(B, 2), 1))

    def test_limit_crossing_the_spread(self, gapped):
        # a bid order at the ask's best price would trade, not rest
        assert not is_licit(gapped, OrderEvent.limit(Pile(A, 2), B, 1))
        assert is_licit(gapped, OrderEvent.limit(Pile(A, 1), B, 1))

    def test_event_sizes_positive(self):
        with pytest.raises(IllicitEventError):
            OrderEvent.consume(Pile(A, 1), 0)

    def test_delta_p_rejects_illicit(self, gapped):
        with pytest.raises(IllicitEventError):
            delta_p(gapped, OrderEvent.consume(Pile(A, 1), 1))


class TestDeltaP:
    def test_deplete_best_ask(self, gapped):
        assert delta_p(gapped, OrderEvent.consume(Pile(A, 2), 3)) == 1

    def test_deplete_best_bid(self, gapped):
        assert delta_p(gapped, OrderEvent.consume(Pile(B, 1), 1)) == 0

    def test_ask_limit_in_gap(self, gapped):
        assert delta_p(gapped, OrderEvent.limit(Pile(A, 1), A, 1)) == 0

    def test_non_improving_limit(self, gapped):
        assert delta_p(gapped, OrderEvent.limit(Pile(B, 2), B, 2)) == 0
        assert delta_p(gapped, OrderEvent.limit(Pile(B, 1), B, 1)) == 0

    def test_partial_consume(self, gapped):
        assert delta_p(gapped, OrderEvent.consume(Pile(A, 2), 1)) == 0

    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_matches_mid_price_rule(self, depth):
        checked = 0
        for q in all_states(depth):
            for e in all_events(depth):
                if not is_licit(q, e):
                    continue
                assert delta_p(q, e) == reference_move(q, e), (q.volumes, e.describe())
                checked += 1
        assert checked > 0

    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_mirror_symmetry(self, depth):
        for q in all_states(depth, max_volume=1):
            for e in all_events(depth, max_size=1):
                if is_licit(q, e):
                    assert delta_p(q.mirrored(), e.mirrored()) == -delta_p(q, e)


class TestShiftAndApply:
    def test_delta_q_is_state_free(self):
        e = OrderEvent.modif(Pile(B, 1), Pile(B, 3), 2)
        assert delta_q(e) == {Pile(B, 1): -2, Pile(B, 3): 2}

    def test_shift_identity(self):
        assert shift_bracket((1, 2, 3, 4), (), "up") == (1, 2, 3, 4)

    def test_shift_up(self):
        assert shift_bracket((1, 2, 3, 4, 5, 6), (7, 8), "up") == (3, 4, 5, 6, 7, 8)

    def test_shift_down(self):
        # old (b,1) and (b,2) become (a,2) and (a,1); new piles fill (b,2) and (b,3)
        assert shift_bracket((1, 2, 3, 4, 5, 6), (7, 8), "down") == (8, 7, 1, 2, 3, 4)

    def test_shift_too_many(self):
        with pytest.raises(InvalidStateError):
            shift_bracket((1, 2), (1, 1), "up")

    def test_pure_volume_update(self):
        q = LobState.from_sides(bid=(2, 1), ask=(3, 1))
        q2, p2 = apply_event(q, 10, OrderEvent.limit(Pile(A, 1), A, 4), RegenDraws())
        assert p2 == 10
        assert q2.ask == (7, 1) and q2.bid == q.bid

    def test_single_pile_depletion_refills(self):
        q = LobState.from_sides(bid=(1,), ask=(1,))
        e = OrderEvent.consume(Pile(A, 1), 1)
        need = required_draws(q, e)
        assert need.move == 1 and need.new_piles == 1 and need.refill_side is B
        q2, p2 = apply_event(q, 0, e, RegenDraws(new_piles=(3,), refill=4))
        assert p2 == 1
        assert q2 == LobState.from_sides(bid=(4,), ask=(3,))

    def test_missing_draws(self):
        q = LobState.from_sides(bid=(1,), ask=(1,))
        e = OrderEvent.consume(Pile(A, 1), 1)
        with pytest.raises(MissingDrawsError):
            apply_event(q, 0, e, RegenDraws())
        with pytest.raises(MissingDrawsError):
            apply_event(q, 0, e, RegenDraws(new_piles=(3,)))

    def test_volume_overflow(self):
        q = LobState.from_sides(bid=(1,), ask=(INT64_MAX,))
        with pytest.raises(VolumeOverflowError):
            apply_event(q, 0, OrderEvent.limit(Pile(A, 1), A, 1), RegenDraws())

    @given(
        depth=st.integers(1, 3),
        data=st.data(),
    )
    def test_apply_keeps_state_admissible(self, depth, data):
        vols = data.draw(st.lists(st.integers(0, 4), min_size=2 * depth, max_size=2 * depth))
        q = LobState(tuple(vols))
        assume(q.is_valid())
        events = [e for e in all_events(depth, max_size=3) if is_licit(q, e)]
        assume(events)
        e = data.draw(st.sampled_from(events))
        draws = RegenDraws(
            new_piles=tuple(data.draw(st.lists(st.integers(1, 5), min_size=depth + 2, max_size=depth + 2))),
            refill=data.draw(st.integers(1, 5)),
        )
        q2, p2 = apply_event(q, 0, e, draws)
        assert q2.is_valid()
        assert p2 == delta_p(q, e)


class TestMarketOrder:
    def test_walks_the_book(self):
        asset = AssetSpec(0.01, 3, RegenSpec(2.0, "constant"))
        q = LobState.from_sides(bid=(2, 2, 2), ask=(2, 2, 2))
        q2, p2, fills = execute_market_order(asset, q, 100, A, 5, np.random.default_rng(0))
        assert sum(f.quantity for f in fills) == 5
        assert fills[0].price == pytest.approx(0.01 * 101)
        prices = [f.price for f in fills]
        assert prices == sorted(prices)
        assert p2 > 100
        assert q2.is_valid()

    def test_rejects_empty_order(self):
        asset = AssetSpec(0.01, 1)
        with pytest.raises(IllicitEventError):
            execute_market_order(asset, LobState.from_sides(bid=(1,), ask=(1,)), 0, A, 0, np.random.default_rng(0))


class TestRegen:
    def test_mean_below_one_rejected(self):
        with pytest.raises(ValueError):
            RegenSpec(0.5)

    def test_geometric_support(self, rng):
        draws = RegenSpec(2.0).sample(A, 2000, rng)
        assert min(draws) >= 1
        assert np.mean(draws) == pytest.approx(2.0, rel=0.1)
