"""Core domain types: schemas, knowledge bases, scenarios, configs, utterances."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

ITEMS = ("water", "firewood", "food")
ITEM_TOTAL = 3


class TaskKind(str, Enum):
    ALIGNMENT = "alignment"
    NEGOTIATION = "negotiation"


class Role(str, Enum):
    A = "A"
    B = "B"

    def other(self) -> "Role":
        return Role.B if self is Role.A else Role.A


DEFAULT_DISPLAY_NAMES = {Role.A: "Alice", Role.B: "Bob"}

# Pronoun forms used in system prompts, keyed by display name. Anything not
# listed falls back to singular they with matching verb agreement.
_PRONOUNS = {
    "Alice": {"subject": "She", "object": "her", "possessive": "her", "has": "has"},
    "Bob": {"subject": "He", "object": "him", "possessive": "his", "has": "has"},
}
_THEY = {"subject": "They", "object": "them", "possessive": "their", "has": "have"}


def pronoun_forms(display_name: str) -> dict[str, str]:
    return _PRONOUNS.get(display_name, _THEY)


class MindMode(str, Enum):
    NONE = "none"
    FIRST_ONLY = "first"
    SECOND_ONLY = "second"
    BOTH = "both"

    @property
    def wants_first(self) -> bool:
        return self in (MindMode.FIRST_ONLY, MindMode.BOTH)

    @property
    def wants_second(self) -> bool:
        return self in (MindMode.SECOND_ONLY, MindMode.BOTH)


class Priority(str, Enum):
    HIGH = "high"
    MEDIUM = "medium"
    LOW = "low"

    @property
    def points(self) -> int:
        return _PRIORITY_POINTS[self]


_PRIORITY_POINTS = {Priority.HIGH: 5, Priority.MEDIUM: 4, Priority.LOW: 3}


def normalize_value(value: str) -> str:
    """Canonical form used for equality: trimmed, case-insensitive."""
    return value.strip().casefold()


@dataclass(frozen=True)
class AttributeSchema:
    """Ordered attribute names for the alignment task, e.g. hobby, name, location."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.names:
            raise ValueError("schema needs at least one attribute")
        if any(not n.strip() for n in self.names):
            raise ValueError("attribute names must be non-empty")
        lowered = [n.strip().casefold() for n in self.names]
        if len(set(lowered)) != len(lowered):
            raise ValueError(f"duplicate attribute names in {self.names}")

    @property
    def arity(self) -> int:
        return len(self.names)

    def format_spec(self) -> str:
        """The wire-format hint shown to agents, e.g. 'hobby|name|location'."""
        return "|".join(self.names)

    def header(self) -> str:
        return ", ".join(self.names)


DEFAULT_SCHEMA = AttributeSchema(("hobby", "name", "location"))


@dataclass(frozen=True)
class FriendCard:
    """One friend: attribute values aligned with a schema's name order."""

    values: tuple[str, ...]

    def __post_init__(self) -> None:
        if any(not v.strip() for v in self.values):
            raise ValueError("friend attribute values must be non-empty")

    def key(self) -> tuple[str, ...]:
        return tuple(normalize_value(v) for v in self.values)

    def same_card(self, other: "FriendCard") -> bool:
        return self.key() == other.key()


@dataclass(frozen=True)
class FriendList:
    """An agent's private friend table."""

    schema: AttributeSchema
    cards: tuple[FriendCard, ...]

    def __post_init__(self) -> None:
        for card in self.cards:
            if len(card.values) != self.schema.arity:
                raise ValueError(
                    f"card {card.values} does not match schema arity {self.schema.arity}"
                )

    def contains(self, card: FriendCard) -> bool:
        return any(c.same_card(card) for c in self.cards)

    def render_table(self) -> str:
        lines = [self.schema.header()]
        lines += [", ".join(card.values) for card in self.cards]
        return "\n".join(lines)


@dataclass(frozen=True)
class ItemValue:
    level: Priority
    reason: str


@dataclass(frozen=True)
class ValueTable:
    """An agent's private priorities over the three negotiation items."""

    values: tuple[ItemValue, ItemValue, ItemValue]  # aligned with ITEMS order

    def level(self, item: str) -> Priority:
        return self.values[ITEMS.index(item)].level

    def reason(self, item: str) -> str:
        return self.values[ITEMS.index(item)].reason

    def points_for(self, item: str) -> int:
        return self.level(item).points

    def is_permutation(self) -> bool:
        return sorted(v.level for v in self.values) == sorted(Priority)

    def render_table(self) -> str:
        lines = ["Item, value, reason"]
        lines += [
            f"{item}, {iv.level.value}, {iv.reason}"
            for item, iv in zip(ITEMS, self.values)
        ]
        return "\n".join(lines)


@dataclass(frozen=True)
class Scenario:
    task: TaskKind
    scenario_id: str
    knowledge_a: FriendList | ValueTable
    knowledge_b: FriendList | ValueTable
    ground_truth: FriendCard | None = None
    seed: int | None = None

    def knowledge(self, role: Role) -> FriendList | ValueTable:
        return self.knowledge_a if role is Role.A else self.knowledge_b

    @property
    def schema(self) -> AttributeSchema:
        if self.task is not TaskKind.ALIGNMENT:
            raise ValueError("schema is only defined for alignment scenarios")
        assert isinstance(self.knowledge_a, FriendList)
        return self.knowledge_a.schema


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple[str, ...] = ()


def validate_scenario(scenario: Scenario, *, allow_repeated_levels: bool = False) -> ValidationResult:
    """Check structural invariants. Returns violations instead of raising so
    callers can report bad lines in bulk loads."""
    problems: list[str] = []
    if scenario.task is TaskKind.ALIGNMENT:
        ka, kb = scenario.knowledge_a, scenario.knowledge_b
        if not isinstance(ka, FriendList) or not isinstance(kb, FriendList):
            return ValidationResult(False, ("alignment scenario requires friend lists on both sides",))
        if ka.schema != kb.schema:
            problems.append("friend lists use different schemas")
        else:
            shared = [c for c in ka.cards if kb.contains(c)]
            if len(shared) != 1:
                problems.append(f"friend lists share {len(shared)} cards, expected exactly 1")
            if scenario.ground_truth is None:
                problems.append("alignment scenario is missing its ground-truth card")
            elif shared and not shared[0].same_card(scenario.ground_truth):
                problems.append("ground-truth card is not the shared card")
            for side, kl in (("A", ka), ("B", kb)):
                keys = [c.key() for c in kl.cards]
                if len(set(keys)) != len(keys):
                    problems.append(f"agent {side} has duplicate cards")
    elif scenario.task is TaskKind.NEGOTIATION:
        ka, kb = scenario.knowledge_a, scenario.knowledge_b
        if not isinstance(ka, ValueTable) or not isinstance(kb, ValueTable):
            return ValidationResult(False, ("negotiation scenario requires value tables on both sides",))
        if not allow_repeated_levels:
            for side, table in (("A", ka), ("B", kb)):
                if not table.is_permutation():
                    levels = tuple(v.level.value for v in table.values)
                    problems.append(
                        f"agent {side} priorities {levels} are not a permutation of high/medium/low"
                    )
        if scenario.ground_truth is not None:
            problems.append("negotiation scenario must not carry a ground-truth card")
    return ValidationResult(not problems, tuple(problems))


@dataclass(frozen=True)
class Utterance:
    speaker: Role
    text: str
    turn: int


class Decision(str, Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    TIMEOUT = "timeout"
    INVALID_PROPOSAL = "invalid_proposal"


@dataclass(frozen=True)
class AgentConfig:
    """Which backends drive one seat, and how beliefs feed its responses."""

    role: Role
    mind_mode: MindMode = MindMode.NONE
    mind_backend: str | None = None
    generator_backend: str = "scripted"
    temperature: float = 0.7
    belief_temperature: float = 0.0
    max_tokens: int = 256
    display_name: str | None = None

    def __post_init__(self) -> None:
        if self.mind_mode is not MindMode.NONE and not self.mind_backend:
            raise ValueError("mind-enabled config needs a mind backend")

    @property
    def name(self) -> str:
        return self.display_name or DEFAULT_DISPLAY_NAMES[self.role]


@dataclass(frozen=True)
class RunLimits:
    max_turns: int = 20
    parse_retries: int = 2
    request_timeout: float = 60.0

    def __post_init__(self) -> None:
        if self.max_turns < 1:
            raise ValueError("max_turns must be positive")
        if self.parse_retries < 0:
            raise ValueError("parse_retries cannot be negative")
