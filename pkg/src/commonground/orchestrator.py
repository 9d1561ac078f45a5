"""Session orchestration: the turn loop, batch runs, and fine-tune export.

Agent A always opens. On each speaker turn the harness (1) asks the mind
backend for belief estimates when a mind mode is active, (2) asks the
generator backend for the next utterance with those estimates spliced into
the prompt, and (3) runs the task's termination check. Alignment sessions
end when both sides have committed to a friend or the turn cap is hit;
negotiation ends when one side asks to stop (it then proposes and the other
decides) or the cap forces a timeout.
"""

from __future__ import annotations

import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import metrics
from .backends import Backend, BackendError, BackendRegistry, ChatMessage, ReplayBackend
from .beliefs import (
    BeliefParseError,
    FriendBelief,
    format_belief,
    all_unknown_friend,
    ALL_UNKNOWN_DEAL,
    parse_deal_split,
)
from .engine import check_mutual_friend, session_points
from .mind import (
    BeliefPair,
    CLARIFICATION,
    Exchange,
    PromptKit,
    ask_backend,
    estimate_beliefs,
    parse_accept,
    parse_alignment_termination,
    parse_negotiation_termination,
)
from .model import (
    AgentConfig,
    Decision,
    MindMode,
    Role,
    RunLimits,
    Scenario,
    TaskKind,
    Utterance,
)
from .records import (
    AlignmentOutcome,
    BeliefSnapshot,
    NegotiationOutcome,
    PromptEvent,
    SessionRecord,
    write_records,
)
from .seeds import GENERATOR_VERSION, derive_seed


@dataclass
class Seat:
    config: AgentConfig
    kit: PromptKit
    thread: list[ChatMessage]
    generator: Backend
    mind: Backend | None

    @property
    def role(self) -> Role:
        return self.config.role


def make_seat(
    scenario: Scenario,
    config: AgentConfig,
    partner: AgentConfig,
    registry: BackendRegistry,
    limits: RunLimits,
) -> Seat:
    kit = PromptKit(
        task=scenario.task,
        role=config.role,
        self_name=config.name,
        partner_name=partner.name,
        schema=scenario.schema if scenario.task is TaskKind.ALIGNMENT else None,
        max_turns=limits.max_turns,
    )
    system = kit.system_prompt(scenario.knowledge(config.role))
    return Seat(
        config=config,
        kit=kit,
        thread=[ChatMessage("system", system)],
        generator=registry.get(config.generator_backend),
        mind=registry.get(config.mind_backend) if config.mind_backend else None,
    )


def run_dialogue(
    scenario: Scenario,
    config_a: AgentConfig,
    config_b: AgentConfig,
    registry: BackendRegistry,
    limits: RunLimits = RunLimits(),
    *,
    seed: int = 0,
    session_id: str | None = None,
    require_ground_truth: bool = True,
) -> SessionRecord:
    """Run one session to completion. Backend failures do not raise: the
    partial session is returned with ``aborted`` set so batches can keep
    going and the failure stays visible in the record."""
    if config_a.role is not Role.A or config_b.role is not Role.B:
        raise ValueError("config_a must hold role A and config_b role B")
    record = SessionRecord(
        session_id=session_id or scenario.scenario_id,
        scenario=scenario,
        config_a=config_a,
        config_b=config_b,
        limits=limits,
        seed=seed,
    )
    seats = {
        Role.A: make_seat(scenario, config_a, config_b, registry, limits),
        Role.B: make_seat(scenario, config_b, config_a, registry, limits),
    }
    for role in (Role.A, Role.B):
        record.events.append(
            PromptEvent(role, "system", -1, seats[role].thread[0].content, "")
        )
    started = time.perf_counter()
    try:
        _run_turns(record, seats, limits, require_ground_truth)
    except BackendError as exc:
        record.aborted = f"{type(exc).__name__}: {exc}"
        record.outcome = None
    record.wall_time = time.perf_counter() - started
    return record


def _ask_and_log(
    record: SessionRecord,
    seat: Seat,
    backend: Backend,
    prompt: str,
    kind: str,
    turn: int,
    *,
    temperature: float,
    flagged: bool = False,
) -> str:
    answer, latency = ask_backend(
        backend,
        seat.thread,
        prompt,
        temperature=temperature,
        max_tokens=seat.config.max_tokens,
        timeout=record.limits.request_timeout,
    )
    record.events.append(
        PromptEvent(seat.role, kind, turn, prompt, answer, latency, flagged)
    )
    return answer


def _flag_last_event(record: SessionRecord) -> None:
    record.events[-1] = replace(record.events[-1], flagged=True)


def _run_turns(
    record: SessionRecord,
    seats: dict[Role, Seat],
    limits: RunLimits,
    require_ground_truth: bool,
) -> None:
    scenario = record.scenario
    selections: dict[Role, FriendBelief] = {}
    proposer: Role | None = None
    for turn in range(limits.max_turns):
        role = Role.A if turn % 2 == 0 else Role.B
        seat = seats[role]
        pair: BeliefPair | None = None
        if seat.config.mind_mode is not MindMode.NONE:
            assert seat.mind is not None
            pair, exchanges = estimate_beliefs(
                seat.mind,
                seat.thread,
                seat.kit,
                seat.config.mind_mode,
                limits,
                temperature=seat.config.belief_temperature,
                max_tokens=seat.config.max_tokens,
            )
            for ex in exchanges:
                record.events.append(
                    PromptEvent(role, ex.kind, turn, ex.prompt, ex.response, ex.latency)
                )
            record.beliefs.append(
                BeliefSnapshot(
                    turn=turn,
                    speaker=role,
                    first=pair.first,
                    second=pair.second,
                    first_parse_failed=pair.first_parse_failed,
                    second_parse_failed=pair.second_parse_failed,
                )
            )
        last = record.transcript[-1].text if record.transcript else None
        prompt = seat.kit.response_prompt(seat.config.mind_mode, last, pair)
        utterance = _ask_and_log(
            record,
            seat,
            seat.generator,
            prompt,
            "response",
            turn,
            temperature=seat.config.temperature,
        )
        record.transcript.append(Utterance(role, utterance, turn))
        if scenario.task is TaskKind.ALIGNMENT:
            if role in selections:
                continue
            answer = _ask_and_log(
                record,
                seat,
                seat.generator,
                seat.kit.termination_query(),
                "termination",
                turn,
                temperature=seat.config.belief_temperature,
            )
            found, flagged = parse_alignment_termination(answer, scenario.schema)
            if flagged:
                _flag_last_event(record)
            if found is not None:
                selections[role] = found
                if len(selections) == 2:
                    break
        else:
            answer = _ask_and_log(
                record,
                seat,
                seat.generator,
                seat.kit.termination_query(),
                "termination",
                turn,
                temperature=seat.config.belief_temperature,
            )
            wants_end, flagged = parse_negotiation_termination(answer)
            if flagged:
                _flag_last_event(record)
            if wants_end:
                proposer = role
                break
    if scenario.task is TaskKind.ALIGNMENT:
        sel_a = selections.get(Role.A)
        sel_b = selections.get(Role.B)
        success = check_mutual_friend(
            scenario, sel_a, sel_b, require_ground_truth=require_ground_truth
        )
        record.outcome = AlignmentOutcome(sel_a, sel_b, success)
    else:
        record.outcome = _close_negotiation(record, seats, proposer, limits)


def _close_negotiation(
    record: SessionRecord,
    seats: dict[Role, Seat],
    proposer: Role | None,
    limits: RunLimits,
) -> NegotiationOutcome:
    scenario = record.scenario
    table_a, table_b = scenario.knowledge_a, scenario.knowledge_b
    turn = len(record.transcript) - 1
    if proposer is None:
        points = session_points(Decision.TIMEOUT, None, table_a, table_b)
        return NegotiationOutcome(None, None, Decision.TIMEOUT, *points)
    seat = seats[proposer]
    prompt = seat.kit.proposal_query()
    deal = None
    for attempt in range(limits.parse_retries + 1):
        answer = _ask_and_log(
            record,
            seat,
            seat.generator,
            prompt,
            "proposal" if attempt == 0 else "proposal_retry",
            turn,
            temperature=seat.config.belief_temperature,
        )
        try:
            deal = parse_deal_split(answer, proposer).to_canonical()
            break
        except BeliefParseError:
            _flag_last_event(record)
            prompt = CLARIFICATION
    if deal is None:
        points = session_points(Decision.INVALID_PROPOSAL, None, table_a, table_b)
        return NegotiationOutcome(
            None, proposer, Decision.INVALID_PROPOSAL, *points
        )
    decider = seats[proposer.other()]
    answer = _ask_and_log(
        record,
        decider,
        decider.generator,
        decider.kit.accept_query(deal, proposer),
        "accept",
        turn,
        temperature=decider.config.belief_temperature,
    )
    decision, flagged = parse_accept(answer)
    if flagged:
        _flag_last_event(record)
    points = session_points(decision, deal, table_a, table_b)
    return NegotiationOutcome(deal, proposer, decision, *points)


def response_tape(record: SessionRecord) -> list[str]:
    """Every backend answer of a session, in call order."""
    return [event.response for event in record.events if event.kind != "system"]


def rerun_from_record(
    record: SessionRecord, *, require_ground_truth: bool = True
) -> SessionRecord:
    """Re-execute an archived self-play session against its own recorded
    responses. A faithful record reproduces itself byte-identically."""
    registry = BackendRegistry()
    registry.register("replay", ReplayBackend(response_tape(record)), deterministic=True)

    def retarget(config: AgentConfig) -> AgentConfig:
        return replace(
            config,
            generator_backend="replay",
            mind_backend="replay" if config.mind_backend else None,
        )

    return run_dialogue(
        record.scenario,
        retarget(record.config_a),
        retarget(record.config_b),
        registry,
        record.limits,
        seed=record.seed,
        session_id=record.session_id,
        require_ground_truth=require_ground_truth,
    )


# --- batch runs ----------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentCell:
    """One column of a run matrix: the paired agent configurations."""

    config_a: AgentConfig
    config_b: AgentConfig
    label: str = ""


def cells_for_modes(
    modes: list[MindMode],
    *,
    mind_backend: str,
    generator_backend: str,
    temperature: float = 0.7,
) -> list[ExperimentCell]:
    """Convenience matrix where both seats share each mind mode."""
    cells = []
    for mode in modes:
        backend = mind_backend if mode is not MindMode.NONE else None
        cells.append(
            ExperimentCell(
                AgentConfig(
                    role=Role.A,
                    mind_mode=mode,
                    mind_backend=backend,
                    generator_backend=generator_backend,
                    temperature=temperature,
                ),
                AgentConfig(
                    role=Role.B,
                    mind_mode=mode,
                    mind_backend=backend,
                    generator_backend=generator_backend,
                    temperature=temperature,
                ),
                label=mode.value,
            )
        )
    return cells


@dataclass
class ExperimentSpec:
    scenarios: list[Scenario]
    cells: list[ExperimentCell]
    seed: int = 0
    repetitions: int = 1
    parallelism: int = 1
    limits: RunLimits = field(default_factory=RunLimits)
    require_ground_truth: bool = True


@dataclass
class BatchResult:
    records: list[SessionRecord]
    reports: dict[str, metrics.Report]

    @property
    def report(self) -> metrics.Report:
        if len(self.reports) != 1:
            raise ValueError("batch has multiple cells; pick a report by label")
        return next(iter(self.reports.values()))


def run_batch(
    spec: ExperimentSpec,
    registry: BackendRegistry,
    *,
    out_dir: str | Path | None = None,
) -> BatchResult:
    """Run scenarios x cells x repetitions, then report per cell.

    Session seeds derive from (spec seed, scenario id, cell, repetition), so
    a batch is reproducible regardless of parallelism.
    """
    if not spec.scenarios:
        raise ValueError("no scenarios to run")
    tasks = {s.task for s in spec.scenarios}
    if len(tasks) != 1:
        raise ValueError("a batch must hold a single task kind")
    jobs = []
    for cell_idx, cell in enumerate(spec.cells):
        for scenario in spec.scenarios:
            for rep in range(spec.repetitions):
                jobs.append((cell_idx, cell, scenario, rep))

    def _run(job) -> SessionRecord:
        cell_idx, cell, scenario, rep = job
        label = cell.label or f"cell{cell_idx}"
        return run_dialogue(
            scenario,
            cell.config_a,
            cell.config_b,
            registry,
            spec.limits,
            seed=derive_seed(spec.seed, scenario.scenario_id, cell_idx, rep),
            session_id=f"{scenario.scenario_id}.{label}.r{rep}",
            require_ground_truth=spec.require_ground_truth,
        )

    if spec.parallelism > 1:
        with ThreadPoolExecutor(max_workers=spec.parallelism) as pool:
            records = list(pool.map(_run, jobs))
    else:
        records = [_run(job) for job in jobs]

    task = next(iter(tasks))
    reports: dict[str, metrics.Report] = {}
    for cell_idx, cell in enumerate(spec.cells):
        label = cell.label or f"cell{cell_idx}"
        cell_records = [
            r for (j, r) in zip(jobs, records) if j[1] is cell
        ]
        if task is TaskKind.ALIGNMENT:
            reports[label] = metrics.alignment_report(cell_records)
        else:
            reports[label] = metrics.negotiation_report(cell_records)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_records(out / "records.jsonl", records)
        index = {
            "seed": spec.seed,
            "generator": GENERATOR_VERSION,
            "task": task.value,
            "cells": [c.label or f"cell{i}" for i, c in enumerate(spec.cells)],
            "scenarios": len(spec.scenarios),
            "repetitions": spec.repetitions,
            "sessions": len(records),
            "aborted": sum(1 for r in records if r.aborted),
            "reports": {
                label: report.as_dict() for label, report in reports.items()
            },
        }
        (out / "index.json").write_text(
            json.dumps(index, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    return BatchResult(records, reports)


# --- fine-tune export ------------------------------------------------------------------

FINETUNE_INSTRUCTION = (
    "Generate the next response of the dialog based on the given context and knowledge:"
)


class MissingBeliefs(Exception):
    pass


def render_finetune_sample(
    record: SessionRecord, turn: int, *, with_beliefs: bool = True
) -> str:
    """One training sample: instruction, current speaker's belief lines,
    knowledge table, dialogue so far, and the gold next utterance.

    SPEAKER0 is the agent about to speak; SPEAKER1 is the partner.
    """
    if turn < 0 or turn >= len(record.transcript):
        raise IndexError(f"turn {turn} outside transcript")
    speaker = record.transcript[turn].speaker
    lines = [FINETUNE_INSTRUCTION]
    if with_beliefs:
        snap = record.snapshot_at(turn)
        if snap is None or snap.speaker is not speaker:
            raise MissingBeliefs(
                f"session {record.session_id} has no belief snapshot at turn {turn}"
            )
        task = record.scenario.task
        label = "mutual friend" if task is TaskKind.ALIGNMENT else "negotiation deal"
        blank = (
            all_unknown_friend(record.scenario.schema)
            if task is TaskKind.ALIGNMENT
            else ALL_UNKNOWN_DEAL
        )
        first = format_belief(snap.first if snap.first is not None else blank, speaker)
        second = format_belief(snap.second if snap.second is not None else blank, speaker)
        lines.append(f"Estimated {label}")
        lines.append(f"[SPEAKER0] {first}")
        lines.append(f"[SPEAKER1] {second}")
    lines.append("Knowledge:")
    lines.extend(record.scenario.knowledge(speaker).render_table().splitlines())
    lines.append("Dialogues:")
    for utterance in record.transcript[:turn]:
        tag = "SPEAKER0" if utterance.speaker is speaker else "SPEAKER1"
        lines.append(f"[{tag}] {utterance.text}")
    lines.append("--- response:")
    lines.append(record.transcript[turn].text)
    return "\n".join(lines)


def export_finetune(
    records: list[SessionRecord],
    *,
    fraction: float = 1.0,
    seed: int = 0,
    with_beliefs: bool = True,
) -> list[str]:
    """Sample a deterministic fraction of eligible turns and render them.

    With beliefs on, only turns carrying a belief snapshot are eligible;
    records with none at all are an error rather than a silent empty export.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be within [0, 1]")
    eligible: list[tuple[int, int]] = []
    for idx, record in enumerate(records):
        if record.aborted:
            continue
        for turn in range(len(record.transcript)):
            if with_beliefs:
                snap = record.snapshot_at(turn)
                if snap is None or snap.speaker is not record.transcript[turn].speaker:
                    continue
            eligible.append((idx, turn))
    if with_beliefs and records and not eligible:
        raise MissingBeliefs("no turns carry belief snapshots; was a mind mode active?")
    count = round(fraction * len(eligible))
    rng = random.Random(seed)
    chosen = sorted(rng.sample(range(len(eligible)), count))
    return [
        render_finetune_sample(records[eligible[i][0]], eligible[i][1], with_beliefs=with_beliefs)
        for i in chosen
    ]


def save_finetune(
    path: str | Path,
    samples: list[str],
    *,
    jsonl: bool = True,
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        if jsonl:
            for sample in samples:
                fh.write(json.dumps({"text": sample}, ensure_ascii=False) + "\n")
        else:
            fh.write("\n\n".join(samples) + "\n")
