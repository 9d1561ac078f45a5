"""Game rules: success checks, deal validation, scoring, Pareto analysis."""

from __future__ import annotations

from typing import Iterator, NamedTuple

from .beliefs import CanonicalDeal, FriendBelief
from .model import ITEM_TOTAL, ITEMS, Decision, Role, Scenario, TaskKind, ValueTable


class PointsPair(NamedTuple):
    points_a: int
    points_b: int


NON_AGREEMENT_POINTS = PointsPair(5, 5)


class InvalidDeal(Exception):
    pass


def check_mutual_friend(
    scenario: Scenario,
    selection_a: FriendBelief | None,
    selection_b: FriendBelief | None,
    *,
    require_ground_truth: bool = True,
) -> bool:
    """Success needs both agents to commit to fully known, matching cards.

    By default both selections must also equal the scenario's ground truth;
    with require_ground_truth=False, agreeing on any card counts (useful for
    comparing against runs scored under the looser rule).
    """
    if scenario.task is not TaskKind.ALIGNMENT:
        raise ValueError("mutual-friend check applies to alignment scenarios only")
    if selection_a is None or selection_b is None:
        return False
    if not selection_a.fully_known or not selection_b.fully_known:
        return False
    key_a = tuple(v.strip().casefold() for v in selection_a.values)  # type: ignore[union-attr]
    key_b = tuple(v.strip().casefold() for v in selection_b.values)  # type: ignore[union-attr]
    if key_a != key_b:
        return False
    if not require_ground_truth:
        return True
    assert scenario.ground_truth is not None
    return key_a == scenario.ground_truth.key()


def validate_deal(deal: CanonicalDeal) -> None:
    """Raise InvalidDeal unless every item's counts are integers in [0, 3]
    summing to exactly 3."""
    for item in ITEMS:
        a, b = deal.count_a(item), deal.count_b(item)
        if not (isinstance(a, int) and isinstance(b, int)):
            raise InvalidDeal(f"{item} counts must be integers, got {a!r}/{b!r}")
        if a < 0 or b < 0 or a + b != ITEM_TOTAL:
            raise InvalidDeal(
                f"{item} counts {a}/{b} must be non-negative and sum to {ITEM_TOTAL}"
            )


def is_valid_deal(deal: CanonicalDeal) -> bool:
    try:
        validate_deal(deal)
    except InvalidDeal:
        return False
    return True


def score_deal(deal: CanonicalDeal, table_a: ValueTable, table_b: ValueTable) -> PointsPair:
    """Each agent earns count x item value, with high/medium/low worth 5/4/3."""
    validate_deal(deal)
    points_a = sum(deal.count_a(item) * table_a.points_for(item) for item in ITEMS)
    points_b = sum(deal.count_b(item) * table_b.points_for(item) for item in ITEMS)
    return PointsPair(points_a, points_b)


def session_points(
    decision: Decision,
    deal: CanonicalDeal | None,
    table_a: ValueTable,
    table_b: ValueTable,
) -> PointsPair:
    """Accepted valid deals score per the value tables; every other ending
    (rejection, timeout, invalid proposal) is worth 5 points to each side."""
    if decision is Decision.ACCEPTED and deal is not None and is_valid_deal(deal):
        return score_deal(deal, table_a, table_b)
    return NON_AGREEMENT_POINTS


def enumerate_deals() -> Iterator[CanonicalDeal]:
    """All 64 integer splits of 3 water, 3 firewood, 3 food, in a fixed order."""
    for water in range(ITEM_TOTAL + 1):
        for firewood in range(ITEM_TOTAL + 1):
            for food in range(ITEM_TOTAL + 1):
                a = (water, firewood, food)
                b = (ITEM_TOTAL - water, ITEM_TOTAL - firewood, ITEM_TOTAL - food)
                yield CanonicalDeal(a, b)


def is_pareto_optimal(deal: CanonicalDeal, table_a: ValueTable, table_b: ValueTable) -> bool:
    """A deal is Pareto-optimal when no alternative split improves one agent's
    points without reducing the other's."""
    base = score_deal(deal, table_a, table_b)
    for other in enumerate_deals():
        pts = score_deal(other, table_a, table_b)
        if pts.points_a >= base.points_a and pts.points_b >= base.points_b:
            if pts.points_a > base.points_a or pts.points_b > base.points_b:
                return False
    return True
