"""Belief wire formats and their parsers.

Two formats travel between the harness and the agents:

* friend triples like ``Surfing|Jane|Outdoor``, with ``unknown`` standing in
  for attributes the agent is not sure about;
* item splits like ``water: 0/3, firewood: 1/2, food: 3/0`` where the left
  number is what the speaker gets and the right what the partner gets.

Agents wrap these in prose, so the parsers scan free text and pull out the
last well-formed group instead of demanding exact-match output.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import ITEM_TOTAL, ITEMS, AttributeSchema, Role, normalize_value

UNKNOWN_TOKEN = "unknown"


class BeliefParseError(Exception):
    """Base for all codec failures. Carries the offending text."""

    def __init__(self, message: str, text: str = ""):
        super().__init__(message)
        self.text = text


class NoParsableGroup(BeliefParseError):
    pass


class MissingItem(BeliefParseError):
    pass


class NonInteger(BeliefParseError):
    pass


class SumViolation(BeliefParseError):
    pass


class DuplicateItem(BeliefParseError):
    pass


class TaskKindMismatch(Exception):
    pass


@dataclass(frozen=True)
class FriendBelief:
    """Per-attribute estimate of the mutual friend. None means unknown."""

    schema: AttributeSchema
    values: tuple[str | None, ...]

    def __post_init__(self) -> None:
        if len(self.values) != self.schema.arity:
            raise ValueError(
                f"{len(self.values)} values for schema of arity {self.schema.arity}"
            )
        for v in self.values:
            if v is None:
                continue
            if not v.strip():
                raise ValueError("known values must be non-empty")
            if normalize_value(v) == UNKNOWN_TOKEN:
                raise ValueError("the unknown token cannot be a known value")

    def value(self, attribute: str) -> str | None:
        return self.values[self.schema.names.index(attribute)]

    @property
    def fully_known(self) -> bool:
        return all(v is not None for v in self.values)

    @property
    def all_unknown(self) -> bool:
        return all(v is None for v in self.values)


def all_unknown_friend(schema: AttributeSchema) -> FriendBelief:
    return FriendBelief(schema, (None,) * schema.arity)


@dataclass(frozen=True)
class CanonicalDeal:
    """Role-anchored split: counts for agent A and agent B, in ITEMS order.

    Both sides are stored so that invalid splits (sums away from 3) remain
    representable; validation is the game engine's job.
    """

    a_counts: tuple[int, int, int]
    b_counts: tuple[int, int, int]

    def count_a(self, item: str) -> int:
        return self.a_counts[ITEMS.index(item)]

    def count_b(self, item: str) -> int:
        return self.b_counts[ITEMS.index(item)]

    def counts_for(self, role: Role) -> tuple[int, int, int]:
        return self.a_counts if role is Role.A else self.b_counts


@dataclass(frozen=True)
class DealSplit:
    """Speaker-relative split as it appears on the wire."""

    speaker: Role
    self_counts: tuple[int, int, int]
    other_counts: tuple[int, int, int]

    def to_canonical(self) -> CanonicalDeal:
        if self.speaker is Role.A:
            return CanonicalDeal(self.self_counts, self.other_counts)
        return CanonicalDeal(self.other_counts, self.self_counts)


def split_for(deal: CanonicalDeal, speaker: Role) -> DealSplit:
    if speaker is Role.A:
        return DealSplit(speaker, deal.a_counts, deal.b_counts)
    return DealSplit(speaker, deal.b_counts, deal.a_counts)


@dataclass(frozen=True)
class DealBelief:
    """Estimated final split, or None when the agent has no estimate yet."""

    split: CanonicalDeal | None

    @property
    def fully_known(self) -> bool:
        return self.split is not None

    @property
    def all_unknown(self) -> bool:
        return self.split is None


ALL_UNKNOWN_DEAL = DealBelief(None)

BeliefState = FriendBelief | DealBelief


# --- friend triple codec -----------------------------------------------------

_STRIP_CHARS = " \t'\"`*()[]{}"
_FIRST_FIELD_BOUNDARY = re.compile(r"[:.;!?]")
_LAST_FIELD_END = re.compile(r"[.!?]")


def _clean_first_field(raw: str) -> str:
    # Answers often lead with prose ("I think it is Swimming|..."); keep the
    # text after the last sentence boundary, then after a trailing copula.
    parts = _FIRST_FIELD_BOUNDARY.split(raw)
    text = parts[-1]
    idx = text.rfind(" is ")
    if idx >= 0:
        text = text[idx + len(" is "):]
    return text.strip(_STRIP_CHARS)


def _clean_last_field(raw: str) -> str:
    # Cut trailing prose at the first sentence end.
    m = _LAST_FIELD_END.search(raw)
    if m:
        raw = raw[: m.start()]
    return raw.strip(_STRIP_CHARS).rstrip(",;:")


def _clean_middle_field(raw: str) -> str:
    return raw.strip(_STRIP_CHARS).strip(",;:")


def parse_friend_belief(text: str, schema: AttributeSchema) -> FriendBelief:
    """Extract the last pipe-delimited group with one field per attribute.

    A group is a maximal run of ``|``-separated segments on a single line;
    runs whose segment count differs from the schema arity are ignored, so an
    answer that invents extra attributes fails to parse rather than being
    silently truncated. Raises NoParsableGroup when nothing qualifies.
    """
    candidates: list[tuple[str, ...]] = []
    for line in text.splitlines():
        if "|" not in line:
            continue
        segments = line.split("|")
        if len(segments) != schema.arity:
            continue
        fields = [_clean_first_field(segments[0])]
        fields += [_clean_middle_field(s) for s in segments[1:-1]]
        fields.append(_clean_last_field(segments[-1]))
        if any(not f for f in fields):
            continue
        candidates.append(tuple(fields))
    if not candidates:
        raise NoParsableGroup(
            f"no {schema.arity}-field group found in reply", text
        )
    fields = candidates[-1]
    values = tuple(
        None if normalize_value(f) == UNKNOWN_TOKEN else f for f in fields
    )
    return FriendBelief(schema, values)


def format_friend_belief(belief: FriendBelief) -> str:
    return "|".join(v if v is not None else UNKNOWN_TOKEN for v in belief.values)


# --- deal codec ---------------------------------------------------------------

_DEAL_PATTERNS = {
    item: re.compile(
        rf"\b{item}\b\s*[:\-]?\s*(-?\d+(?:\.\d+)?)\s*/\s*(-?\d+(?:\.\d+)?)",
        re.IGNORECASE,
    )
    for item in ITEMS
}


def parse_deal_split(text: str, speaker: Role) -> DealSplit:
    """Extract one ``item: x/y`` pair per item from free text.

    Every item must appear exactly once, counts must be whole numbers in
    [0, 3], and each pair must sum to 3.
    """
    self_counts: list[int] = []
    other_counts: list[int] = []
    for item in ITEMS:
        matches = list(_DEAL_PATTERNS[item].finditer(text))
        if not matches:
            raise MissingItem(f"no split found for {item}", text)
        if len(matches) > 1:
            raise DuplicateItem(f"{item} appears {len(matches)} times", text)
        left, right = matches[0].group(1), matches[0].group(2)
        pair = []
        for raw in (left, right):
            if "." in raw:
                raise NonInteger(f"{item} count {raw} is not a whole number", text)
            pair.append(int(raw))
        if pair[0] + pair[1] != ITEM_TOTAL or min(pair) < 0:
            raise SumViolation(
                f"{item} counts {pair[0]}/{pair[1]} must be non-negative and sum to {ITEM_TOTAL}",
                text,
            )
        self_counts.append(pair[0])
        other_counts.append(pair[1])
    return DealSplit(speaker, tuple(self_counts), tuple(other_counts))


def parse_deal_belief(text: str, speaker: Role) -> DealBelief:
    return DealBelief(parse_deal_split(text, speaker).to_canonical())


def format_deal(deal: CanonicalDeal, speaker: Role) -> str:
    split = split_for(deal, speaker)
    return ", ".join(
        f"{item}: {s}/{o}"
        for item, s, o in zip(ITEMS, split.self_counts, split.other_counts)
    )


def format_deal_belief(belief: DealBelief, speaker: Role) -> str:
    if belief.split is None:
        return UNKNOWN_TOKEN
    return format_deal(belief.split, speaker)


def format_belief(belief: BeliefState, speaker: Role) -> str:
    if isinstance(belief, FriendBelief):
        return format_friend_belief(belief)
    return format_deal_belief(belief, speaker)


# --- belief comparison ----------------------------------------------------------

@dataclass(frozen=True)
class BeliefDelta:
    """Named slots where two beliefs disagree (conflicts) or lack information
    on at least one side (gaps). The two sets never overlap."""

    conflicts: tuple[str, ...]
    gaps: tuple[str, ...]

    @property
    def empty(self) -> bool:
        return not self.conflicts and not self.gaps


def diff(first: BeliefState, second: BeliefState) -> BeliefDelta:
    if isinstance(first, FriendBelief) and isinstance(second, FriendBelief):
        if first.schema != second.schema:
            raise TaskKindMismatch("friend beliefs use different schemas")
        conflicts, gaps = [], []
        for name, va, vb in zip(first.schema.names, first.values, second.values):
            if va is not None and vb is not None:
                if normalize_value(va) != normalize_value(vb):
                    conflicts.append(name)
            elif va is None or vb is None:
                gaps.append(name)
        return BeliefDelta(tuple(conflicts), tuple(gaps))
    if isinstance(first, DealBelief) and isinstance(second, DealBelief):
        if first.split is None or second.split is None:
            return BeliefDelta((), ITEMS)
        conflicts = [
            item
            for item in ITEMS
            if first.split.count_a(item) != second.split.count_a(item)
            or first.split.count_b(item) != second.split.count_b(item)
        ]
        return BeliefDelta(tuple(conflicts), ())
    raise TaskKindMismatch(
        f"cannot compare {type(first).__name__} with {type(second).__name__}"
    )
