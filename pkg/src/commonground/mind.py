"""Prompt construction, structured-answer parsing, and belief estimation.

Each agent runs as a single growing chat thread: a system prompt with its
private knowledge, then per turn the optional belief queries, the response
request (with belief estimates spliced in when a mind mode is active), and a
termination check. All templates live here so tests can pin their wording.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass

from .backends import Backend, ChatMessage, ChatRequest
from .beliefs import (
    ALL_UNKNOWN_DEAL,
    BeliefParseError,
    BeliefState,
    CanonicalDeal,
    FriendBelief,
    all_unknown_friend,
    format_belief,
    format_deal,
    parse_deal_belief,
    parse_friend_belief,
)
from .model import (
    AttributeSchema,
    Decision,
    FriendList,
    MindMode,
    Role,
    RunLimits,
    TaskKind,
    ValueTable,
    pronoun_forms,
)

ALIGN_SYSTEM = (
    "You are a smart cooperative agent named {self_name}. You have many friends "
    "with different attributes as listed below (the knowledge base of {self_name}). "
    "You are now talking with {partner_name}. {subject} also {has} a list of friends. "
    "You will talk with {partner_name} for a maximum of {max_turns} turns to find out "
    "your mutual friend as quickly as possible. You can ask {object} questions or "
    "provide information about your friends. Meanwhile, you should try to mention as "
    "few attributes and friends as possible.\n\n{table}"
)

ALIGN_FIRST_QUERY = (
    "Based on the current conversation and your friend table, who do you believe is "
    "your mutual friend? Respond in the format of {format_spec}, and put unknown in "
    "the attributes you are not sure about for now:"
)

ALIGN_SECOND_QUERY = (
    "Based on the current conversation and your friend table, who do you believe "
    "that {partner_name} believes your mutual friend is? Respond in the format of "
    "{format_spec}, and put unknown in the attributes you are not sure about for now:"
)

ALIGN_TERMINATION = (
    "Have you found your mutual friend? If yes, provide this mutual friend in the "
    "format of {format_spec}; If no, respond 'unknown':"
)

ALIGN_RESPONSE_MIND = (
    "{said}I estimate the mutual friend estimation from your perspective: {first} "
    "and from {partner_name}'s perspective: {second} based on your current talk. "
    "To align your estimation and resolve unknown attributes, please provide your "
    "next utterance to {partner_name}:"
)

NEGO_SYSTEM = (
    "You are a smart negotiation agent named {self_name} planning a camping trip. "
    "Besides basic supplies, you will need extra water, food, and firewood. Each of "
    "these items will be of either High, Medium, or Low priority for you as shown "
    "below. Each of them only has an available quantity of 3 and can only be split "
    "using integers. You will negotiate with {partner_name} who will also need these "
    "items and have {possessive} own value table. Use reasons from your value table "
    "to justify why you need these items. Try hard to get as many items as you "
    "can!\n\n{table}"
)

_NEGO_SPLIT_FORMAT = (
    "The items each person gets can only be integers and the total quantity for "
    "each item is 3. Please use the following format to respond without further "
    "explanation: item: the number you get/the number {partner_name} get. For "
    "example, water:0/3, firewood:1/2, food: 3/0."
)

NEGO_FIRST_QUERY = (
    "Based on the current conversation and your value table, how will you split "
    "water, firewood, and food? " + _NEGO_SPLIT_FORMAT
)

NEGO_SECOND_QUERY = (
    "Based on the current conversation and your value table, how do you think "
    "{partner_name} will split water, firewood, and food? " + _NEGO_SPLIT_FORMAT
)

NEGO_TERMINATION = (
    "Based on your conversation with {partner_name}, do you want to end the "
    "negotiation? Please respond by yes or No:"
)

NEGO_RESPONSE_MIND = (
    "{said}I estimated the negotiation deal from your perspective: {first} and from "
    "{partner_name}'s perspective: {second} based on your current talk. To align "
    "your expected deals, please provide your next utterance to {partner_name}:"
)

NEGO_PROPOSAL = (
    "Please provide your proposed deal. The items each person gets can only be "
    "integers and the total quantity for each item is 3. Deal with fractions will "
    "be rejected. Please use the following format: item: the number you get/the "
    "number {partner_name} get. For example, water:0/3, firewood:1/2, food: 3/0."
)

NEGO_ACCEPT = (
    "Given your current conversation and the deal proposed by {partner_name}: "
    "{deal}, will you accept the deal? Please respond by Accept or Reject:"
)

RESPONSE_PLAIN = "{said}Please provide your next utterance to {partner_name}:"

SAID_PREFIX = "{partner_name} said: {last}. "

CLARIFICATION = (
    "Your previous answer could not be parsed. Answer again using exactly the "
    "requested format, with no extra words."
)


@dataclass(frozen=True)
class BeliefPair:
    first: BeliefState | None
    second: BeliefState | None
    first_parse_failed: bool = False
    second_parse_failed: bool = False


@dataclass(frozen=True)
class Exchange:
    kind: str
    prompt: str
    response: str
    latency: float


@dataclass(frozen=True)
class PromptKit:
    """Pre-bound prompt builder for one seat in one session."""

    task: TaskKind
    role: Role
    self_name: str
    partner_name: str
    schema: AttributeSchema | None = None
    max_turns: int = 20

    def __post_init__(self) -> None:
        if self.task is TaskKind.ALIGNMENT and self.schema is None:
            raise ValueError("alignment prompts need an attribute schema")

    def _format_spec(self) -> str:
        assert self.schema is not None
        return self.schema.format_spec()

    def system_prompt(self, knowledge: FriendList | ValueTable) -> str:
        pron = pronoun_forms(self.partner_name)
        if self.task is TaskKind.ALIGNMENT:
            assert isinstance(knowledge, FriendList)
            return ALIGN_SYSTEM.format(
                self_name=self.self_name,
                partner_name=self.partner_name,
                subject=pron["subject"],
                has=pron["has"],
                object=pron["object"],
                max_turns=self.max_turns,
                table=knowledge.render_table(),
            )
        assert isinstance(knowledge, ValueTable)
        return NEGO_SYSTEM.format(
            self_name=self.self_name,
            partner_name=self.partner_name,
            possessive=pron["possessive"].lower(),
            table=knowledge.render_table(),
        )

    def belief_query(self, order: str) -> str:
        if order not in ("first", "second"):
            raise ValueError(f"unknown belief order {order!r}")
        if self.task is TaskKind.ALIGNMENT:
            template = ALIGN_FIRST_QUERY if order == "first" else ALIGN_SECOND_QUERY
            return template.format(
                partner_name=self.partner_name, format_spec=self._format_spec()
            )
        template = NEGO_FIRST_QUERY if order == "first" else NEGO_SECOND_QUERY
        return template.format(partner_name=self.partner_name)

    def termination_query(self) -> str:
        if self.task is TaskKind.ALIGNMENT:
            return ALIGN_TERMINATION.format(format_spec=self._format_spec())
        return NEGO_TERMINATION.format(partner_name=self.partner_name)

    def response_prompt(
        self,
        mode: MindMode,
        last_utterance: str | None,
        pair: BeliefPair | None,
    ) -> str:
        said = ""
        if last_utterance is not None:
            said = SAID_PREFIX.format(partner_name=self.partner_name, last=last_utterance)
        if mode is MindMode.NONE:
            return RESPONSE_PLAIN.format(said=said, partner_name=self.partner_name)
        first = pair.first if pair else None
        second = pair.second if pair else None
        template = (
            ALIGN_RESPONSE_MIND
            if self.task is TaskKind.ALIGNMENT
            else NEGO_RESPONSE_MIND
        )
        return template.format(
            said=said,
            partner_name=self.partner_name,
            first=self._render_slot(first),
            second=self._render_slot(second),
        )

    def _render_slot(self, belief: BeliefState | None) -> str:
        if belief is None:
            belief = (
                all_unknown_friend(self.schema)
                if self.task is TaskKind.ALIGNMENT
                else ALL_UNKNOWN_DEAL
            )
        return format_belief(belief, self.role)

    def proposal_query(self) -> str:
        return NEGO_PROPOSAL.format(partner_name=self.partner_name)

    def accept_query(self, deal: CanonicalDeal, proposer: Role) -> str:
        return NEGO_ACCEPT.format(
            partner_name=self.partner_name, deal=format_deal(deal, proposer)
        )


# --- structured answer parsing ---------------------------------------------------

_WORD = re.compile(r"[A-Za-z]+")
_ACCEPT_TOKEN = re.compile(r"\b(accept|reject)", re.IGNORECASE)
_UNKNOWN_WORD = re.compile(r"\bunknown\b", re.IGNORECASE)


def parse_alignment_termination(
    text: str, schema: AttributeSchema
) -> tuple[FriendBelief | None, bool]:
    """Returns (selection, flagged). A plain 'unknown' (or an all-unknown
    triple) means keep talking; anything unparsable also continues but is
    flagged for the record."""
    try:
        belief = parse_friend_belief(text, schema)
    except BeliefParseError:
        if _UNKNOWN_WORD.search(text):
            return None, False
        return None, True
    if belief.all_unknown:
        return None, False
    return belief, False


def parse_negotiation_termination(text: str) -> tuple[bool, bool]:
    """Returns (wants_to_end, flagged), keyed off the leading yes/no token."""
    m = _WORD.search(text)
    if m:
        token = m.group(0).lower()
        if token == "yes":
            return True, False
        if token == "no":
            return False, False
    return False, True


def parse_accept(text: str) -> tuple[Decision, bool]:
    """First accept/reject stem wins; an unreadable answer counts as a
    rejection and is flagged."""
    m = _ACCEPT_TOKEN.search(text)
    if m:
        decision = (
            Decision.ACCEPTED if m.group(1).lower() == "accept" else Decision.REJECTED
        )
        return decision, False
    return Decision.REJECTED, True


# --- belief estimation -------------------------------------------------------------

def ask_backend(
    backend: Backend,
    thread: list[ChatMessage],
    prompt: str,
    *,
    temperature: float,
    max_tokens: int,
    timeout: float,
) -> tuple[str, float]:
    thread.append(ChatMessage("user", prompt))
    request = ChatRequest(
        messages=tuple(thread),
        temperature=temperature,
        max_tokens=max_tokens,
        timeout=timeout,
    )
    start = time.perf_counter()
    answer = backend.complete(request)
    latency = time.perf_counter() - start
    thread.append(ChatMessage("assistant", answer))
    return answer, latency


def _estimate_one(
    backend: Backend,
    thread: list[ChatMessage],
    kit: PromptKit,
    order: str,
    limits: RunLimits,
    temperature: float,
    max_tokens: int,
) -> tuple[BeliefState, bool, list[Exchange]]:
    query = kit.belief_query(order)
    exchanges: list[Exchange] = []
    prompt = query
    for attempt in range(limits.parse_retries + 1):
        answer, latency = ask_backend(
            backend,
            thread,
            prompt,
            temperature=temperature,
            max_tokens=max_tokens,
            timeout=limits.request_timeout,
        )
        kind = f"{order}_belief" if attempt == 0 else f"{order}_belief_retry"
        exchanges.append(Exchange(kind, prompt, answer, latency))
        try:
            if kit.task is TaskKind.ALIGNMENT:
                assert kit.schema is not None
                belief: BeliefState = parse_friend_belief(answer, kit.schema)
            else:
                belief = parse_deal_belief(answer, kit.role)
            return belief, False, exchanges
        except BeliefParseError:
            prompt = CLARIFICATION
    fallback: BeliefState = (
        all_unknown_friend(kit.schema)
        if kit.task is TaskKind.ALIGNMENT
        else ALL_UNKNOWN_DEAL
    )
    return fallback, True, exchanges


def estimate_beliefs(
    backend: Backend,
    thread: list[ChatMessage],
    kit: PromptKit,
    mode: MindMode,
    limits: RunLimits,
    *,
    temperature: float = 0.0,
    max_tokens: int = 256,
) -> tuple[BeliefPair, list[Exchange]]:
    """Query the mind backend for the orders the mode asks for.

    Parse failures are retried with a clarification up to the configured
    budget, then fall back to all-unknown with the failure flagged. The
    accepted exchanges stay in the thread so later prompts see them.
    """
    if mode is MindMode.NONE:
        raise ValueError("estimate_beliefs called with mind mode none")
    first = second = None
    first_failed = second_failed = False
    exchanges: list[Exchange] = []
    if mode.wants_first:
        first, first_failed, ex = _estimate_one(
            backend, thread, kit, "first", limits, temperature, max_tokens
        )
        exchanges.extend(ex)
    if mode.wants_second:
        second, second_failed, ex = _estimate_one(
            backend, thread, kit, "second", limits, temperature, max_tokens
        )
        exchanges.extend(ex)
    pair = BeliefPair(first, second, first_failed, second_failed)
    return pair, exchanges
