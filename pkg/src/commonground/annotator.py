"""Rule-derived gold beliefs for alignment transcripts, and scoring of
predicted beliefs against them.

The labeling is lexical on purpose so it stays auditable: a value counts as
mentioned when it appears case-insensitively inside an utterance, and a
mention is a denial when that same utterance carries a negation marker.
The most recent surviving affirmative mention of an attribute wins its
label; everything else is 0, and an attribute with no surviving positive
is unknown. First-order labels additionally never leave the speaker's own
knowledge: a partner-only value can be believed *of* the partner, not held
by the speaker.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .backends import Backend, BackendError, ChatMessage
from .beliefs import FriendBelief
from .mind import PromptKit, SAID_PREFIX, estimate_beliefs
from .model import (
    AttributeSchema,
    FriendList,
    MindMode,
    Role,
    RunLimits,
    Scenario,
    TaskKind,
    Utterance,
    normalize_value,
)
from .records import SessionRecord

NEGATION_MARKERS = ("no", "not", "don't", "doesn't", "none")

_NEGATION_RE = re.compile(
    r"\b(?:" + "|".join(re.escape(m) for m in NEGATION_MARKERS) + r")\b"
)


class SchemaMismatch(Exception):
    pass


def _normalize_text(text: str) -> str:
    return text.replace("’", "'").casefold()


def has_negation(text: str) -> bool:
    return _NEGATION_RE.search(_normalize_text(text)) is not None


@dataclass
class GoldBelief:
    """Per-attribute 0/1 labels over every candidate value, with at most one
    positive per attribute."""

    schema: AttributeSchema
    labels: dict[str, dict[str, int]]

    def status(self, attribute: str) -> str | None:
        """The value labeled 1, or None when the attribute is unknown."""
        for value, label in self.labels[attribute].items():
            if label == 1:
                return value
        return None

    def positives(self) -> int:
        return sum(label for per in self.labels.values() for label in per.values())

    def as_belief(self) -> FriendBelief:
        return FriendBelief(
            self.schema, tuple(self.status(name) for name in self.schema.names)
        )


def _candidate_values(
    schema: AttributeSchema, lists: Iterable[FriendList]
) -> dict[str, dict[str, str]]:
    """Per attribute: normalized candidate -> first display spelling seen."""
    candidates: dict[str, dict[str, str]] = {name: {} for name in schema.names}
    for friends in lists:
        for card in friends.cards:
            for name, value in zip(schema.names, card.values):
                candidates[name].setdefault(normalize_value(value), value)
    return candidates


def annotate(
    prefix: list[Utterance],
    knowledge_self: FriendList,
    knowledge_partner: FriendList,
) -> tuple[GoldBelief, GoldBelief]:
    """Label the dialogue prefix from one agent's seat.

    Returns (first-order, second-order) gold beliefs: what the agent itself
    can be said to believe, and what it can attribute to the partner. The
    candidate space is every value either side holds; an utterance event is
    (position, affirmed-or-denied) and the last event per value stands.
    """
    if knowledge_self.schema != knowledge_partner.schema:
        raise SchemaMismatch("knowledge lists use different schemas")
    schema = knowledge_self.schema
    candidates = _candidate_values(schema, (knowledge_self, knowledge_partner))
    own = _candidate_values(schema, (knowledge_self,))
    # last event per (attribute, normalized value): (utterance index, positive)
    last_event: dict[str, dict[str, tuple[int, bool]]] = {
        name: {} for name in schema.names
    }
    for index, utterance in enumerate(prefix):
        text = _normalize_text(utterance.text)
        negated = _NEGATION_RE.search(text) is not None
        for name in schema.names:
            for norm in candidates[name]:
                if norm in text:
                    last_event[name][norm] = (index, not negated)

    def build(restrict_to_own: bool) -> GoldBelief:
        labels: dict[str, dict[str, int]] = {}
        for name in schema.names:
            per = {display: 0 for display in candidates[name].values()}
            alive = [
                (index, norm)
                for norm, (index, positive) in last_event[name].items()
                if positive and (not restrict_to_own or norm in own[name])
            ]
            if alive:
                best = max(index for index, _ in alive)
                winners = [norm for index, norm in alive if index == best]
                if len(winners) == 1:
                    per[candidates[name][winners[0]]] = 1
            labels[name] = per
        return GoldBelief(schema, labels)

    return build(restrict_to_own=True), build(restrict_to_own=False)


def annotate_seat(
    prefix: list[Utterance], scenario: Scenario, speaker: Role
) -> tuple[GoldBelief, GoldBelief]:
    if scenario.task is not TaskKind.ALIGNMENT:
        raise ValueError("gold labeling is defined for alignment sessions only")
    return annotate(
        prefix,
        scenario.knowledge(speaker),
        scenario.knowledge(speaker.other()),
    )


# --- scoring ---------------------------------------------------------------------

@dataclass(frozen=True)
class PredictionScore:
    """Per-attribute confusion counts with the degenerate-case conventions
    spelled out: an empty-positive prediction is perfect precision only when
    the gold side is empty too, and recall over zero gold positives is 1."""

    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other: "PredictionScore") -> "PredictionScore":
        return PredictionScore(
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn + other.fn,
            self.tn + other.tn,
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def precision(self) -> float:
        if self.tp + self.fp == 0:
            return 1.0 if self.tp + self.fn == 0 else 0.0
        return self.tp / (self.tp + self.fp)

    @property
    def recall(self) -> float:
        if self.tp + self.fn == 0:
            return 1.0
        return self.tp / (self.tp + self.fn)

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        if p + r == 0:
            return 0.0
        return 2 * p * r / (p + r)


def score(pred: FriendBelief, gold: GoldBelief) -> PredictionScore:
    """One count per attribute: tp when the predicted value carries the gold
    1, fp for any other known prediction, fn/tn when the prediction is
    unknown and the gold side is known/unknown."""
    if pred.schema != gold.schema:
        raise SchemaMismatch("prediction and gold labels use different schemas")
    tp = fp = fn = tn = 0
    for name, value in zip(pred.schema.names, pred.values):
        winner = gold.status(name)
        if value is not None:
            if winner is not None and normalize_value(value) == normalize_value(winner):
                tp += 1
            else:
                fp += 1
        else:
            if winner is not None:
                fn += 1
            else:
                tn += 1
    return PredictionScore(tp, fp, fn, tn)


# --- gold files ------------------------------------------------------------------

@dataclass(frozen=True)
class GoldTurn:
    session_id: str
    turn: int
    speaker: Role
    first: GoldBelief
    second: GoldBelief


def annotate_record(record: SessionRecord) -> list[GoldTurn]:
    """Gold beliefs for every speaking turn, each labeled on the prefix the
    speaker had actually seen (everything before its utterance)."""
    out = []
    for turn, utterance in enumerate(record.transcript):
        first, second = annotate_seat(
            record.transcript[:turn], record.scenario, utterance.speaker
        )
        out.append(GoldTurn(record.session_id, turn, utterance.speaker, first, second))
    return out


def _gold_to_dict(gold: GoldBelief) -> dict:
    return {"schema": list(gold.schema.names), "labels": gold.labels}


def _gold_from_dict(data: dict) -> GoldBelief:
    schema = AttributeSchema(tuple(data["schema"]))
    return GoldBelief(schema, {k: dict(v) for k, v in data["labels"].items()})


def write_gold(path: str | Path, turns: Iterable[GoldTurn]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for item in turns:
            fh.write(
                json.dumps(
                    {
                        "session_id": item.session_id,
                        "turn": item.turn,
                        "speaker": item.speaker.value,
                        "first": _gold_to_dict(item.first),
                        "second": _gold_to_dict(item.second),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def read_gold(path: str | Path) -> list[GoldTurn]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            data = json.loads(line)
            out.append(
                GoldTurn(
                    data["session_id"],
                    data["turn"],
                    Role(data["speaker"]),
                    _gold_from_dict(data["first"]),
                    _gold_from_dict(data["second"]),
                )
            )
    return out


# --- mind evaluation ---------------------------------------------------------------

@dataclass
class MindEvalReport:
    first_micro: PredictionScore = field(default_factory=PredictionScore)
    second_micro: PredictionScore = field(default_factory=PredictionScore)
    first_f1_per_session: list[float] = field(default_factory=list)
    second_f1_per_session: list[float] = field(default_factory=list)
    turns_scored: int = 0
    turns_skipped: int = 0

    @property
    def first_macro_f1(self) -> float:
        per = self.first_f1_per_session
        return sum(per) / len(per) if per else 0.0

    @property
    def second_macro_f1(self) -> float:
        per = self.second_f1_per_session
        return sum(per) / len(per) if per else 0.0

    def as_dict(self) -> dict:
        def block(s: PredictionScore) -> dict:
            return {
                "tp": s.tp,
                "fp": s.fp,
                "fn": s.fn,
                "tn": s.tn,
                "precision": s.precision,
                "recall": s.recall,
                "f1": s.f1,
            }

        return {
            "first": block(self.first_micro),
            "second": block(self.second_micro),
            "first_macro_f1": self.first_macro_f1,
            "second_macro_f1": self.second_macro_f1,
            "turns_scored": self.turns_scored,
            "turns_skipped": self.turns_skipped,
        }

    def render(self) -> str:
        rows = [
            ("order", "precision", "recall", "f1", "macro-f1"),
            (
                "first",
                f"{self.first_micro.precision:.4f}",
                f"{self.first_micro.recall:.4f}",
                f"{self.first_micro.f1:.4f}",
                f"{self.first_macro_f1:.4f}",
            ),
            (
                "second",
                f"{self.second_micro.precision:.4f}",
                f"{self.second_micro.recall:.4f}",
                f"{self.second_micro.f1:.4f}",
                f"{self.second_macro_f1:.4f}",
            ),
        ]
        widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)) for row in rows]
        lines.append(
            f"turns scored: {self.turns_scored}  skipped: {self.turns_skipped}"
        )
        return "\n".join(lines)


def gold_lookup(turns: Iterable[GoldTurn]) -> dict[tuple[str, int], GoldTurn]:
    return {(item.session_id, item.turn): item for item in turns}


def score_recorded(
    records: list[SessionRecord],
    gold: dict[tuple[str, int], GoldTurn] | None = None,
) -> MindEvalReport:
    """Score the belief snapshots already inside mind-enabled session records.
    Gold labels are recomputed unless a prebuilt lookup is supplied; snapshots
    without a matching gold entry are skipped and counted. No backend calls."""
    report = MindEvalReport()
    for record in records:
        if record.scenario.task is not TaskKind.ALIGNMENT or record.aborted:
            continue
        session_first = PredictionScore()
        session_second = PredictionScore()
        counted = False
        for snap in record.beliefs:
            if gold is not None:
                item = gold.get((record.session_id, snap.turn))
                if item is None:
                    report.turns_skipped += 1
                    continue
                gold_first, gold_second = item.first, item.second
            else:
                gold_first, gold_second = annotate_seat(
                    record.transcript[: snap.turn], record.scenario, snap.speaker
                )
            if isinstance(snap.first, FriendBelief):
                session_first = session_first + score(snap.first, gold_first)
                counted = True
            if isinstance(snap.second, FriendBelief):
                session_second = session_second + score(snap.second, gold_second)
                counted = True
            report.turns_scored += 1
        if counted:
            report.first_micro = report.first_micro + session_first
            report.second_micro = report.second_micro + session_second
            report.first_f1_per_session.append(session_first.f1)
            report.second_f1_per_session.append(session_second.f1)
    return report


def _context_thread(
    record: SessionRecord, speaker: Role, prefix: list[Utterance], kit: PromptKit
) -> list[ChatMessage]:
    """Rebuild a minimal thread for offline estimation: the seat's system
    prompt plus the dialogue replayed as said-style user/assistant turns."""
    thread = [ChatMessage("system", kit.system_prompt(record.scenario.knowledge(speaker)))]
    partner_name = record.config(speaker.other()).name
    for utterance in prefix:
        if utterance.speaker is speaker:
            thread.append(ChatMessage("assistant", utterance.text))
        else:
            thread.append(
                ChatMessage(
                    "user",
                    SAID_PREFIX.format(partner_name=partner_name, last=utterance.text),
                )
            )
    return thread


def evaluate_mind(
    backend: Backend,
    records: list[SessionRecord],
    *,
    limits: RunLimits = RunLimits(),
    temperature: float = 0.0,
    max_tokens: int = 256,
) -> MindEvalReport:
    """Ask a backend for fresh first/second-order estimates at every turn of
    the given alignment records and score them against gold labels. Turns
    whose backend calls fail are skipped and counted, not fatal."""
    report = MindEvalReport()
    for record in records:
        if record.scenario.task is not TaskKind.ALIGNMENT or record.aborted:
            continue
        session_first = PredictionScore()
        session_second = PredictionScore()
        counted = False
        for turn, utterance in enumerate(record.transcript):
            speaker = utterance.speaker
            config = record.config(speaker)
            kit = PromptKit(
                task=TaskKind.ALIGNMENT,
                role=speaker,
                self_name=config.name,
                partner_name=record.config(speaker.other()).name,
                schema=record.scenario.schema,
                max_turns=record.limits.max_turns,
            )
            prefix = record.transcript[:turn]
            thread = _context_thread(record, speaker, prefix, kit)
            try:
                pair, _ = estimate_beliefs(
                    backend,
                    thread,
                    kit,
                    MindMode.BOTH,
                    limits,
                    temperature=temperature,
                    max_tokens=max_tokens,
                )
            except BackendError:
                report.turns_skipped += 1
                continue
            gold_first, gold_second = annotate_seat(prefix, record.scenario, speaker)
            assert isinstance(pair.first, FriendBelief)
            assert isinstance(pair.second, FriendBelief)
            session_first = session_first + score(pair.first, gold_first)
            session_second = session_second + score(pair.second, gold_second)
            counted = True
            report.turns_scored += 1
        if counted:
            report.first_micro = report.first_micro + session_first
            report.second_micro = report.second_micro + session_second
            report.first_f1_per_session.append(session_first.f1)
            report.second_f1_per_session.append(session_second.f1)
    return report
