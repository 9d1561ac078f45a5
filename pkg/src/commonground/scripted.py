"""Deterministic rule-based agents that answer the harness prompts.

These are full players, not canned scripts: they re-derive everything from
the request thread (their own system prompt plus the conversation so far),
so the same instance can serve any seat in any session and identical inputs
always produce identical outputs.

Alignment policy: reveal one not-yet-mentioned friend per turn as a
question, confirm or deny the partner's claims against the private list,
and declare the mutual friend once exactly one own card is consistent with
everything said. Negotiation policy: open by claiming the high and medium
priority items, concede the low item on the first counter, move to propose
after a fixed number of turns, grant the partner every item they claimed as
their top priority, and accept any deal worth at least the value of one's
own top item.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .backends import BackendError, ChatMessage, ChatRequest
from .beliefs import parse_deal_split
from .model import ITEM_TOTAL, ITEMS, Priority, Role

ALIGN_SYSTEM_LEAD = "You are a smart cooperative agent"
NEGO_SYSTEM_LEAD = "You are a smart negotiation agent"

_CLAIM_LEAD = "Do you know a friend with "
_DENY_LEAD = "No, I don't have a friend with "
_CONFIRM_LEAD = "Yes, I also have a friend with "
_ACK_LEAD = "Great, our mutual friend is "

_RESPONSE_MARKERS = (
    ". Please provide your next utterance to",
    ". I estimate the mutual friend estimation from your perspective:",
    ". I estimated the negotiation deal from your perspective:",
)

_CLARIFICATION_LEAD = "Your previous answer could not be parsed."

_OPENING_CLAIM = re.compile(r"I would like all 3 (\w+) and all 3 (\w+)")

# Kept in sync with how many dialogue turns the negotiation policy wants to
# see before it agrees to end: its own opening, the partner's counter, and
# its concession.
NEGOTIATION_TALK_TURNS = 3


class UnrecognizedPrompt(BackendError):
    pass


class ScriptedAgentBackend:
    """Routes each request to the policy matching its system prompt."""

    def complete(self, request: ChatRequest) -> str:
        if not request.messages or request.messages[0].role != "system":
            raise UnrecognizedPrompt("scripted agents need a system prompt first")
        system = request.messages[0].content
        if system.startswith(ALIGN_SYSTEM_LEAD):
            return _AlignmentPolicy(request.messages).answer()
        if system.startswith(NEGO_SYSTEM_LEAD):
            return _NegotiationPolicy(request.messages).answer()
        raise UnrecognizedPrompt("system prompt matches no known game")


def _pending_prompt(messages: tuple[ChatMessage, ...]) -> str:
    if messages[-1].role != "user":
        raise UnrecognizedPrompt("nothing to answer: last message is not from the user")
    prompt = messages[-1].content
    if prompt.startswith(_CLARIFICATION_LEAD):
        # Re-answer the question the clarification refers to.
        for message in reversed(messages[:-1]):
            if message.role == "user" and not message.content.startswith(
                _CLARIFICATION_LEAD
            ):
                return message.content
        raise UnrecognizedPrompt("clarification with no preceding question")
    return prompt


def _is_response_prompt(text: str) -> bool:
    return "please provide your next utterance to" in text.lower()


def _partner_utterance(prompt: str) -> str | None:
    idx = prompt.find(" said: ")
    if idx < 0:
        return None
    start = idx + len(" said: ")
    end = -1
    for marker in _RESPONSE_MARKERS:
        pos = prompt.rfind(marker)
        if pos > end:
            end = pos
    if end < start:
        return None
    return prompt[start:end]


def _dialogue(messages: tuple[ChatMessage, ...]) -> tuple[list[str], list[str], list[str]]:
    """Reconstruct (ordered utterances, mine, partner's) from the thread.

    Partner turns ride inside response prompts; my turns are the assistant
    replies to those prompts. Belief and termination exchanges are skipped.
    """
    ordered: list[str] = []
    mine: list[str] = []
    partners: list[str] = []
    for i, message in enumerate(messages):
        if message.role != "user" or not _is_response_prompt(message.content):
            continue
        partner = _partner_utterance(message.content)
        if partner is not None:
            ordered.append(partner)
            partners.append(partner)
        if i + 1 < len(messages) and messages[i + 1].role == "assistant":
            ordered.append(messages[i + 1].content)
            mine.append(messages[i + 1].content)
    return ordered, mine, partners


def _knowledge_block(system: str) -> list[str]:
    block = system.rsplit("\n\n", 1)[-1]
    return [line for line in block.splitlines() if line.strip()]


# --- alignment ---------------------------------------------------------------------

def _quote_card(names: tuple[str, ...], values: tuple[str, ...]) -> str:
    return ", ".join(f"{n} '{v}'" for n, v in zip(names, values))


def _extract_card_after(
    text: str, lead: str, names: tuple[str, ...]
) -> tuple[str, ...] | None:
    idx = text.find(lead)
    if idx < 0:
        return None
    segment = text[idx + len(lead):]
    cut = len(segment)
    for stop in (".", "?"):
        pos = segment.find(stop)
        if 0 <= pos < cut:
            cut = pos
    segment = segment[:cut]
    values = []
    for name in names:
        m = re.search(rf"{re.escape(name)} '([^']*)'", segment)
        if not m:
            return None
        values.append(m.group(1))
    return tuple(values)


def _card_key(values: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(v.strip().casefold() for v in values)


class _AlignmentPolicy:
    def __init__(self, messages: tuple[ChatMessage, ...]):
        self.messages = messages
        lines = _knowledge_block(messages[0].content)
        self.names = tuple(n.strip() for n in lines[0].split(","))
        self.cards = [
            tuple(v.strip() for v in line.split(","))
            for line in lines[1:]
        ]
        for card in self.cards:
            if len(card) != len(self.names):
                raise UnrecognizedPrompt(f"table row {card} does not match header")
        self._scan_dialogue()

    def _scan_dialogue(self) -> None:
        ordered, mine, partners = _dialogue(self.messages)
        self.partner_spoke = bool(partners)
        self.my_claims: list[tuple[str, ...]] = []
        self.denied: set[tuple[str, ...]] = set()
        self.mutual: tuple[str, ...] | None = None
        self.partner_last_claim: tuple[str, ...] | None = None
        self.partner_claims: list[tuple[str, ...]] = []
        for text in mine:
            claim = _extract_card_after(text, _CLAIM_LEAD, self.names)
            if claim:
                self.my_claims.append(claim)
        for text in partners:
            denial = _extract_card_after(text, _DENY_LEAD, self.names)
            if denial:
                self.denied.add(_card_key(denial))
            confirm = _extract_card_after(text, _CONFIRM_LEAD, self.names)
            if confirm:
                self.mutual = confirm
            ack = _extract_card_after(text, _ACK_LEAD, self.names)
            if ack:
                self.mutual = ack
        for text in mine:
            confirm = _extract_card_after(text, _CONFIRM_LEAD, self.names)
            if confirm:
                self.mutual = confirm
            ack = _extract_card_after(text, _ACK_LEAD, self.names)
            if ack:
                self.mutual = ack
        if partners:
            self.partner_last_claim = _extract_card_after(
                partners[-1], _CLAIM_LEAD, self.names
            )
            for text in partners:
                claim = _extract_card_after(text, _CLAIM_LEAD, self.names)
                if claim:
                    self.partner_claims.append(claim)
        if self.mutual is None:
            candidates = self._candidates()
            if len(candidates) == 1:
                self.mutual = candidates[0]

    def _candidates(self) -> list[tuple[str, ...]]:
        return [c for c in self.cards if _card_key(c) not in self.denied]

    def _own_card_matching(self, values: tuple[str, ...]) -> tuple[str, ...] | None:
        key = _card_key(values)
        for card in self.cards:
            if _card_key(card) == key:
                return card
        return None

    def answer(self) -> str:
        prompt = _pending_prompt(self.messages)
        if _is_response_prompt(prompt):
            return self._respond()
        if prompt.startswith("Have you found your mutual friend?"):
            return self._termination()
        if "who do you believe is your mutual friend" in prompt:
            return self._belief_first()
        if "who do you believe that" in prompt:
            return self._belief_second()
        raise UnrecognizedPrompt(f"alignment policy cannot answer: {prompt[:80]}...")

    def _respond(self) -> str:
        sentences: list[str] = []
        if self.partner_last_claim is not None:
            match = self._own_card_matching(self.partner_last_claim)
            if match is not None:
                self.mutual = match
                return (
                    f"{_CONFIRM_LEAD}{_quote_card(self.names, match)}. "
                    "That must be our mutual friend."
                )
            sentences.append(
                f"{_DENY_LEAD}{_quote_card(self.names, self.partner_last_claim)}."
            )
        if self.mutual is not None:
            sentences.append(f"{_ACK_LEAD}{_quote_card(self.names, self.mutual)}.")
            return " ".join(sentences)
        claimed = {_card_key(c) for c in self.my_claims}
        for card in self.cards:
            key = _card_key(card)
            if key in claimed or key in self.denied:
                continue
            sentences.append(f"{_CLAIM_LEAD}{_quote_card(self.names, card)}?")
            break
        if not sentences:
            sentences.append("I have shared all of my friends already.")
        return " ".join(sentences)

    def _termination(self) -> str:
        if self.mutual is not None:
            return "|".join(self.mutual)
        return "unknown"

    def _belief_first(self) -> str:
        if self.mutual is not None:
            return "|".join(self.mutual)
        candidates = self._candidates()
        values = []
        for i in range(len(self.names)):
            options = {_card_key(c)[i] for c in candidates}
            values.append(candidates[0][i] if len(options) == 1 else "unknown")
        return "|".join(values)

    def _belief_second(self) -> str:
        if self.mutual is not None:
            return "|".join(self.mutual)
        if self.partner_claims:
            return "|".join(self.partner_claims[-1])
        return "|".join(["unknown"] * len(self.names))


# --- negotiation -------------------------------------------------------------------

@dataclass(frozen=True)
class _Stance:
    levels: dict[str, Priority]

    def points(self, item: str) -> int:
        return self.levels[item].points

    @property
    def high(self) -> str:
        return max(ITEMS, key=lambda it: (self.points(it), -ITEMS.index(it)))

    @property
    def low(self) -> str:
        return min(ITEMS, key=lambda it: (self.points(it), ITEMS.index(it)))

    @property
    def medium(self) -> str:
        rest = [it for it in ITEMS if it not in (self.high, self.low)]
        return rest[0]


class _NegotiationPolicy:
    def __init__(self, messages: tuple[ChatMessage, ...]):
        self.messages = messages
        lines = _knowledge_block(messages[0].content)
        if not lines or not lines[0].lower().startswith("item"):
            raise UnrecognizedPrompt("value table header missing")
        levels: dict[str, Priority] = {}
        self.reasons: dict[str, str] = {}
        for line in lines[1:]:
            parts = [p.strip() for p in line.split(",", 2)]
            if len(parts) != 3 or parts[0] not in ITEMS:
                raise UnrecognizedPrompt(f"bad value table row: {line!r}")
            levels[parts[0]] = Priority(parts[1].lower())
            self.reasons[parts[0]] = parts[2]
        if set(levels) != set(ITEMS):
            raise UnrecognizedPrompt("value table does not cover all items")
        self.stance = _Stance(levels)
        ordered, mine, partners = _dialogue(messages)
        self.turns = len(ordered)
        self.my_turns = len(mine)
        self.partner_spoke = bool(partners)
        self.partner_high: str | None = None
        self.partner_medium: str | None = None
        for text in partners:
            m = _OPENING_CLAIM.search(text)
            if m and m.group(1) in ITEMS and m.group(2) in ITEMS:
                self.partner_high = m.group(1)
                self.partner_medium = m.group(2)
                break

    def answer(self) -> str:
        prompt = _pending_prompt(self.messages)
        if _is_response_prompt(prompt):
            return self._respond()
        if "do you want to end the negotiation?" in prompt:
            return self._termination()
        if prompt.startswith("Please provide your proposed deal."):
            return self._proposal()
        if prompt.startswith("Given your current conversation and the deal proposed by"):
            return self._accept(prompt)
        if "how will you split" in prompt:
            return self._belief_first()
        if "how do you think" in prompt:
            return self._belief_second()
        raise UnrecognizedPrompt(f"negotiation policy cannot answer: {prompt[:80]}...")

    def _respond(self) -> str:
        high, medium, low = self.stance.high, self.stance.medium, self.stance.low
        if self.my_turns == 0:
            return (
                f"I would like all 3 {high} and all 3 {medium}. "
                f"For the {high}, {self.reasons[high]}. "
                f"For the {medium}, {self.reasons[medium]}."
            )
        if self.my_turns == 1:
            return (
                f"You can have all 3 {low}. "
                f"But I still need the {high} and the {medium}."
            )
        return "I think we are close. Let's settle on a deal soon."

    def _termination(self) -> str:
        if self.turns >= NEGOTIATION_TALK_TURNS and self.partner_spoke:
            return "Yes"
        return "No"

    def _grants_partner_high(self, theirs: tuple[int, int, int]) -> bool:
        if self.partner_high is None:
            return True
        return theirs[ITEMS.index(self.partner_high)] == ITEM_TOTAL

    def _best_split(self) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
        """Self/other counts maximizing own points while ceding every item the
        partner claimed as top priority; first hit in enumeration order wins."""
        best: tuple[tuple[int, int, int], tuple[int, int, int]] | None = None
        best_points = -1
        for water in range(ITEM_TOTAL + 1):
            for firewood in range(ITEM_TOTAL + 1):
                for food in range(ITEM_TOTAL + 1):
                    mine = (water, firewood, food)
                    theirs = tuple(ITEM_TOTAL - m for m in mine)
                    if not self._grants_partner_high(theirs):
                        continue
                    points = sum(
                        m * self.stance.points(item) for m, item in zip(mine, ITEMS)
                    )
                    if points > best_points:
                        best_points = points
                        best = (mine, theirs)
        assert best is not None
        return best

    def _render_split(self, mine: tuple[int, int, int], theirs: tuple[int, int, int]) -> str:
        return ", ".join(
            f"{item}: {m}/{t}" for item, m, t in zip(ITEMS, mine, theirs)
        )

    def _proposal(self) -> str:
        mine, theirs = self._best_split()
        return self._render_split(mine, theirs)

    def _accept(self, prompt: str) -> str:
        # The embedded deal reads from the proposer's side: left numbers are
        # theirs, right numbers are mine.
        try:
            split = parse_deal_split(prompt, Role.A)
        except Exception:
            return "Reject"
        my_counts = split.other_counts
        my_points = sum(
            c * self.stance.points(item) for c, item in zip(my_counts, ITEMS)
        )
        threshold = ITEM_TOTAL * self.stance.points(self.stance.high)
        return "Accept" if my_points >= threshold else "Reject"

    def _belief_first(self) -> str:
        if self.partner_high is not None:
            mine, theirs = self._best_split()
            return self._render_split(mine, theirs)
        mine = tuple(
            ITEM_TOTAL if item != self.stance.low else 0 for item in ITEMS
        )
        theirs = tuple(ITEM_TOTAL - m for m in mine)
        return self._render_split(mine, theirs)

    def _belief_second(self) -> str:
        claimed = {self.partner_high, self.partner_medium} - {None}
        if claimed:
            mine = tuple(0 if item in claimed else ITEM_TOTAL for item in ITEMS)
        else:
            mine = (0, 0, 0)
        theirs = tuple(ITEM_TOTAL - m for m in mine)
        return self._render_split(mine, theirs)
