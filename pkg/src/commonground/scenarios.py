"""Seeded scenario generation and JSONL persistence.

Generation is a pure function of (params, seed): the same inputs always
produce byte-identical scenario files.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .model import (
    DEFAULT_SCHEMA,
    ITEMS,
    AttributeSchema,
    FriendCard,
    FriendList,
    ItemValue,
    Priority,
    Scenario,
    TaskKind,
    ValueTable,
    validate_scenario,
)
from .records import scenario_from_dict, scenario_to_dict
from .seeds import derive_seed

HOBBY_POOL = (
    "Surfing", "Swimming", "Hiking", "Chess", "Painting", "Cooking",
    "Running", "Fishing", "Dancing", "Cycling", "Archery", "Bowling",
    "Gardening", "Juggling", "Karaoke", "Origami", "Pottery", "Skiing",
)
NAME_POOL = (
    "Jane", "Amy", "Albert", "Ryan", "Sarah", "Kevin", "Laura", "Peter",
    "Nina", "Omar", "Tessa", "Victor", "Wendy", "Hugo", "Iris", "Felix",
    "Clara", "Mario", "Edith", "Boris",
)
LOCATION_POOL = (
    "Outdoor", "Indoor", "Downtown", "Riverside", "Hillcrest", "Lakeside",
    "Uptown", "Harborview", "Greenfield", "Oakwood", "Maplewood",
    "Sunnyvale", "Brookside", "Westgate",
)
DEFAULT_POOLS = (HOBBY_POOL, NAME_POOL, LOCATION_POOL)

# Justifications agents can quote for wanting an item, keyed by priority.
REASON_POOL: dict[tuple[str, Priority], tuple[str, ...]] = {
    ("water", Priority.HIGH): (
        "we lost a jug on the drive and are nearly dry",
        "my group gets dehydrated fast on long hikes",
        "the well at our site is marked unsafe this season",
    ),
    ("water", Priority.MEDIUM): (
        "extra water would make cooking much easier",
        "we packed some water but a buffer would help",
    ),
    ("water", Priority.LOW): (
        "there is a stream near our spot we can filter from",
        "we brought plenty of bottles already",
    ),
    ("firewood", Priority.HIGH): (
        "nights get freezing up here and my sleeping bags are thin",
        "we plan to cook everything over an open fire",
        "someone in my group is recovering from a cold and needs warmth",
    ),
    ("firewood", Priority.MEDIUM): (
        "a proper campfire would keep the evenings pleasant",
        "we want a fire for at least part of the night",
    ),
    ("firewood", Priority.LOW): (
        "we carry a gas stove so wood is mostly for ambiance",
        "our site has deadfall we are allowed to gather",
    ),
    ("food", Priority.HIGH): (
        "my teenagers eat twice as much as I planned for",
        "we arrive late and missed our chance to resupply",
        "half our cooler spoiled in the heat yesterday",
    ),
    ("food", Priority.MEDIUM): (
        "extra snacks would keep the kids happy between meals",
        "we have meals planned but no margin for a longer stay",
    ),
    ("food", Priority.LOW): (
        "we way overpacked on trail mix and canned food",
        "we plan to fish for most of our dinners",
    ),
}

_MAX_SAMPLE_TRIES = 1000


class PoolExhausted(Exception):
    pass


class ScenarioLoadError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ScenarioParseError(ScenarioLoadError):
    pass


class InvalidScenarioError(ScenarioLoadError):
    def __init__(self, violations: Iterable[str], line: int):
        self.violations = tuple(violations)
        super().__init__("; ".join(self.violations), line)


@dataclass(frozen=True)
class AlignmentGenParams:
    count: int = 100
    friend_count: int = 5
    schema: AttributeSchema = DEFAULT_SCHEMA
    pools: tuple[tuple[str, ...], ...] = DEFAULT_POOLS
    id_prefix: str = "align"

    def __post_init__(self) -> None:
        if len(self.pools) != self.schema.arity:
            raise ValueError("need one value pool per schema attribute")
        if self.friend_count < 1:
            raise ValueError("friend_count must be positive")


@dataclass(frozen=True)
class NegotiationGenParams:
    count: int = 100
    id_prefix: str = "nego"
    # Mirror A's priorities (high and low swapped) instead of sampling B's.
    opposed: bool = False


def _sample_card(rng: random.Random, pools: tuple[tuple[str, ...], ...]) -> FriendCard:
    return FriendCard(tuple(rng.choice(pool) for pool in pools))


def _sample_distinct_cards(
    rng: random.Random, pools: tuple[tuple[str, ...], ...], needed: int
) -> list[FriendCard]:
    capacity = 1
    for pool in pools:
        capacity *= len(set(v.strip().casefold() for v in pool))
    if needed > capacity:
        raise PoolExhausted(
            f"pools can produce {capacity} distinct cards, {needed} needed"
        )
    cards: list[FriendCard] = []
    seen: set[tuple[str, ...]] = set()
    while len(cards) < needed:
        for _ in range(_MAX_SAMPLE_TRIES):
            card = _sample_card(rng, pools)
            if card.key() not in seen:
                seen.add(card.key())
                cards.append(card)
                break
        else:
            raise PoolExhausted(
                f"could not sample {needed} distinct cards in {_MAX_SAMPLE_TRIES} tries"
            )
    return cards


def generate_alignment(params: AlignmentGenParams, seed: int) -> list[Scenario]:
    """Each scenario gives both agents friend_count cards sharing exactly one."""
    scenarios = []
    for i in range(params.count):
        rng = random.Random(derive_seed(seed, "alignment", i))
        needed = 2 * params.friend_count - 1
        cards = _sample_distinct_cards(rng, params.pools, needed)
        mutual = cards[0]
        side_a = [mutual] + cards[1 : params.friend_count]
        side_b = [mutual] + cards[params.friend_count :]
        rng.shuffle(side_a)
        rng.shuffle(side_b)
        scenario = Scenario(
            task=TaskKind.ALIGNMENT,
            scenario_id=f"{params.id_prefix}-{i:04d}",
            knowledge_a=FriendList(params.schema, tuple(side_a)),
            knowledge_b=FriendList(params.schema, tuple(side_b)),
            ground_truth=mutual,
            seed=seed,
        )
        result = validate_scenario(scenario)
        assert result.ok, result.violations
        scenarios.append(scenario)
    return scenarios


def _sample_table(rng: random.Random) -> ValueTable:
    levels = list(Priority)
    rng.shuffle(levels)
    return _table_with_levels(rng, tuple(levels))


def _table_with_levels(rng: random.Random, levels: tuple[Priority, ...]) -> ValueTable:
    return ValueTable(
        tuple(
            ItemValue(level, rng.choice(REASON_POOL[(item, level)]))
            for item, level in zip(ITEMS, levels)
        )
    )


_OPPOSITE = {Priority.HIGH: Priority.LOW, Priority.MEDIUM: Priority.MEDIUM, Priority.LOW: Priority.HIGH}


def generate_negotiation(params: NegotiationGenParams, seed: int) -> list[Scenario]:
    scenarios = []
    for i in range(params.count):
        rng = random.Random(derive_seed(seed, "negotiation", i))
        table_a = _sample_table(rng)
        if params.opposed:
            levels_b = tuple(_OPPOSITE[iv.level] for iv in table_a.values)
            table_b = _table_with_levels(rng, levels_b)
        else:
            table_b = _sample_table(rng)
        scenario = Scenario(
            task=TaskKind.NEGOTIATION,
            scenario_id=f"{params.id_prefix}-{i:04d}",
            knowledge_a=table_a,
            knowledge_b=table_b,
            seed=seed,
        )
        result = validate_scenario(scenario)
        assert result.ok, result.violations
        scenarios.append(scenario)
    return scenarios


def save_scenarios(path: str | Path, scenarios: Iterable[Scenario]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for scenario in scenarios:
            fh.write(json.dumps(scenario_to_dict(scenario), ensure_ascii=False) + "\n")


def load_scenarios(
    path: str | Path, *, allow_repeated_levels: bool = False
) -> list[Scenario]:
    """Read a JSONL scenario file, reporting bad lines by number."""
    scenarios = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
                scenario = scenario_from_dict(data)
            except (ValueError, KeyError, TypeError) as exc:
                raise ScenarioParseError(str(exc), lineno) from exc
            result = validate_scenario(
                scenario, allow_repeated_levels=allow_repeated_levels
            )
            if not result.ok:
                raise InvalidScenarioError(result.violations, lineno)
            scenarios.append(scenario)
    return scenarios
