"""Session outcomes, belief snapshots, and the persisted record format.

Records are self-contained JSON objects: they embed the scenario and agent
configs so reports can be recomputed from disk alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .beliefs import BeliefState, CanonicalDeal, DealBelief, FriendBelief
from .model import (
    AgentConfig,
    AttributeSchema,
    Decision,
    FriendCard,
    FriendList,
    ItemValue,
    MindMode,
    Priority,
    Role,
    RunLimits,
    Scenario,
    TaskKind,
    Utterance,
    ValueTable,
    ITEMS,
)

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class AlignmentOutcome:
    selection_a: FriendBelief | None
    selection_b: FriendBelief | None
    success: bool


@dataclass(frozen=True)
class NegotiationOutcome:
    deal: CanonicalDeal | None
    proposer: Role | None
    decision: Decision
    points_a: int
    points_b: int


Outcome = AlignmentOutcome | NegotiationOutcome


@dataclass(frozen=True)
class BeliefSnapshot:
    """What one agent believed right before speaking at a given turn."""

    turn: int
    speaker: Role
    first: BeliefState | None
    second: BeliefState | None
    first_parse_failed: bool = False
    second_parse_failed: bool = False


@dataclass(frozen=True)
class PromptEvent:
    """One backend exchange: the prompt sent, the raw reply, and its latency.

    ``flagged`` marks structured answers the parser could not read."""

    agent: Role
    kind: str  # system | first_belief | second_belief | response | termination | proposal | accept | *_retry
    turn: int
    prompt: str
    response: str
    latency: float = 0.0
    flagged: bool = False


@dataclass
class SessionRecord:
    session_id: str
    scenario: Scenario
    config_a: AgentConfig
    config_b: AgentConfig
    limits: RunLimits
    seed: int
    transcript: list[Utterance] = field(default_factory=list)
    beliefs: list[BeliefSnapshot] = field(default_factory=list)
    events: list[PromptEvent] = field(default_factory=list)
    outcome: Outcome | None = None
    aborted: str | None = None
    wall_time: float = 0.0

    def config(self, role: Role) -> AgentConfig:
        return self.config_a if role is Role.A else self.config_b

    def snapshot_at(self, turn: int) -> BeliefSnapshot | None:
        for snap in self.beliefs:
            if snap.turn == turn:
                return snap
        return None


# --- scenario JSON -------------------------------------------------------------

def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    out: dict[str, Any] = {
        "task": scenario.task.value,
        "id": scenario.scenario_id,
        "seed": scenario.seed,
    }
    if scenario.task is TaskKind.ALIGNMENT:
        ka, kb = scenario.knowledge_a, scenario.knowledge_b
        assert isinstance(ka, FriendList) and isinstance(kb, FriendList)
        out["schema"] = list(ka.schema.names)
        out["friends_a"] = [list(c.values) for c in ka.cards]
        out["friends_b"] = [list(c.values) for c in kb.cards]
        out["ground_truth"] = (
            list(scenario.ground_truth.values) if scenario.ground_truth else None
        )
    else:
        ka, kb = scenario.knowledge_a, scenario.knowledge_b
        assert isinstance(ka, ValueTable) and isinstance(kb, ValueTable)
        out["table_a"] = _table_to_dict(ka)
        out["table_b"] = _table_to_dict(kb)
    return out


def _table_to_dict(table: ValueTable) -> dict[str, Any]:
    return {
        item: [iv.level.value, iv.reason] for item, iv in zip(ITEMS, table.values)
    }


def _table_from_dict(data: dict[str, Any]) -> ValueTable:
    missing = [item for item in ITEMS if item not in data]
    if missing:
        raise ValueError(f"value table missing items: {missing}")
    return ValueTable(
        tuple(ItemValue(Priority(data[item][0]), data[item][1]) for item in ITEMS)
    )


def scenario_from_dict(data: dict[str, Any]) -> Scenario:
    task = TaskKind(data["task"])
    if task is TaskKind.ALIGNMENT:
        schema = AttributeSchema(tuple(data["schema"]))
        ka = FriendList(schema, tuple(FriendCard(tuple(v)) for v in data["friends_a"]))
        kb = FriendList(schema, tuple(FriendCard(tuple(v)) for v in data["friends_b"]))
        gt = data.get("ground_truth")
        return Scenario(
            task=task,
            scenario_id=data["id"],
            knowledge_a=ka,
            knowledge_b=kb,
            ground_truth=FriendCard(tuple(gt)) if gt else None,
            seed=data.get("seed"),
        )
    return Scenario(
        task=task,
        scenario_id=data["id"],
        knowledge_a=_table_from_dict(data["table_a"]),
        knowledge_b=_table_from_dict(data["table_b"]),
        seed=data.get("seed"),
    )


# --- belief JSON ----------------------------------------------------------------

def belief_to_dict(belief: BeliefState | None) -> dict[str, Any] | None:
    if belief is None:
        return None
    if isinstance(belief, FriendBelief):
        return {
            "kind": "friend",
            "schema": list(belief.schema.names),
            "values": list(belief.values),
        }
    split = belief.split
    return {
        "kind": "deal",
        "a_counts": list(split.a_counts) if split else None,
        "b_counts": list(split.b_counts) if split else None,
    }


def belief_from_dict(data: dict[str, Any] | None) -> BeliefState | None:
    if data is None:
        return None
    if data["kind"] == "friend":
        return FriendBelief(AttributeSchema(tuple(data["schema"])), tuple(data["values"]))
    if data["a_counts"] is None:
        return DealBelief(None)
    return DealBelief(CanonicalDeal(tuple(data["a_counts"]), tuple(data["b_counts"])))


# --- config / record JSON ---------------------------------------------------------

def config_to_dict(config: AgentConfig) -> dict[str, Any]:
    return {
        "role": config.role.value,
        "mind_mode": config.mind_mode.value,
        "mind_backend": config.mind_backend,
        "generator_backend": config.generator_backend,
        "temperature": config.temperature,
        "belief_temperature": config.belief_temperature,
        "max_tokens": config.max_tokens,
        "display_name": config.display_name,
    }


def config_from_dict(data: dict[str, Any]) -> AgentConfig:
    return AgentConfig(
        role=Role(data["role"]),
        mind_mode=MindMode(data["mind_mode"]),
        mind_backend=data.get("mind_backend"),
        generator_backend=data["generator_backend"],
        temperature=data["temperature"],
        belief_temperature=data["belief_temperature"],
        max_tokens=data["max_tokens"],
        display_name=data.get("display_name"),
    )


def outcome_to_dict(outcome: Outcome | None) -> dict[str, Any] | None:
    if outcome is None:
        return None
    if isinstance(outcome, AlignmentOutcome):
        return {
            "task": "alignment",
            "selection_a": belief_to_dict(outcome.selection_a),
            "selection_b": belief_to_dict(outcome.selection_b),
            "success": outcome.success,
        }
    return {
        "task": "negotiation",
        "deal": belief_to_dict(DealBelief(outcome.deal)) if outcome.deal else None,
        "proposer": outcome.proposer.value if outcome.proposer else None,
        "decision": outcome.decision.value,
        "points_a": outcome.points_a,
        "points_b": outcome.points_b,
    }


def outcome_from_dict(data: dict[str, Any] | None) -> Outcome | None:
    if data is None:
        return None
    if data["task"] == "alignment":
        return AlignmentOutcome(
            selection_a=belief_from_dict(data["selection_a"]),
            selection_b=belief_from_dict(data["selection_b"]),
            success=data["success"],
        )
    deal_belief = belief_from_dict(data["deal"])
    assert deal_belief is None or isinstance(deal_belief, DealBelief)
    return NegotiationOutcome(
        deal=deal_belief.split if deal_belief else None,
        proposer=Role(data["proposer"]) if data["proposer"] else None,
        decision=Decision(data["decision"]),
        points_a=data["points_a"],
        points_b=data["points_b"],
    )


def snapshot_to_dict(snapshot: BeliefSnapshot) -> dict[str, Any]:
    return {
        "turn": snapshot.turn,
        "speaker": snapshot.speaker.value,
        "first": belief_to_dict(snapshot.first),
        "second": belief_to_dict(snapshot.second),
        "first_parse_failed": snapshot.first_parse_failed,
        "second_parse_failed": snapshot.second_parse_failed,
    }


def record_to_dict(record: SessionRecord) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "session_id": record.session_id,
        "seed": record.seed,
        "scenario": scenario_to_dict(record.scenario),
        "config_a": config_to_dict(record.config_a),
        "config_b": config_to_dict(record.config_b),
        "limits": {
            "max_turns": record.limits.max_turns,
            "parse_retries": record.limits.parse_retries,
            "request_timeout": record.limits.request_timeout,
        },
        "transcript": [
            {"speaker": u.speaker.value, "text": u.text, "turn": u.turn}
            for u in record.transcript
        ],
        "beliefs": [snapshot_to_dict(s) for s in record.beliefs],
        "events": [
            {
                "agent": e.agent.value,
                "kind": e.kind,
                "turn": e.turn,
                "prompt": e.prompt,
                "response": e.response,
                "latency": e.latency,
                "flagged": e.flagged,
            }
            for e in record.events
        ],
        "outcome": outcome_to_dict(record.outcome),
        "aborted": record.aborted,
        "wall_time": record.wall_time,
    }


def record_from_dict(data: dict[str, Any]) -> SessionRecord:
    limits = data["limits"]
    return SessionRecord(
        session_id=data["session_id"],
        scenario=scenario_from_dict(data["scenario"]),
        config_a=config_from_dict(data["config_a"]),
        config_b=config_from_dict(data["config_b"]),
        limits=RunLimits(
            max_turns=limits["max_turns"],
            parse_retries=limits["parse_retries"],
            request_timeout=limits["request_timeout"],
        ),
        seed=data["seed"],
        transcript=[
            Utterance(Role(u["speaker"]), u["text"], u["turn"])
            for u in data["transcript"]
        ],
        beliefs=[
            BeliefSnapshot(
                turn=s["turn"],
                speaker=Role(s["speaker"]),
                first=belief_from_dict(s["first"]),
                second=belief_from_dict(s["second"]),
                first_parse_failed=s["first_parse_failed"],
                second_parse_failed=s["second_parse_failed"],
            )
            for s in data["beliefs"]
        ],
        events=[
            PromptEvent(
                Role(e["agent"]),
                e["kind"],
                e["turn"],
                e["prompt"],
                e["response"],
                e.get("latency", 0.0),
                e.get("flagged", False),
            )
            for e in data["events"]
        ],
        outcome=outcome_from_dict(data["outcome"]),
        aborted=data.get("aborted"),
        wall_time=data.get("wall_time", 0.0),
    )


def replay_view(record: SessionRecord) -> str:
    """Canonical JSON of the parts a faithful re-run must reproduce exactly:
    the transcript, the belief snapshots, and the outcome."""
    data = record_to_dict(record)
    view = {
        "transcript": data["transcript"],
        "beliefs": data["beliefs"],
        "outcome": data["outcome"],
    }
    return json.dumps(view, sort_keys=True, ensure_ascii=False)


def write_records(path: str | Path, records: Iterable[SessionRecord]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), ensure_ascii=False) + "\n")


def read_records(path: str | Path) -> list[SessionRecord]:
    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(record_from_dict(json.loads(line)))
    return records
