"""Aggregate session records into the evaluation figures.

Alignment batches report the success percentage, the mean utterance count,
and their quotient (success per turn). Negotiation batches report mean
points per seat over all sessions and over agreed sessions only, the agreed
percentage, and the share of sessions ending in a Pareto-optimal deal.
Aborted sessions (backend failures) never enter a denominator; they are
carried as a separate count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .engine import is_pareto_optimal
from .model import Decision, TaskKind
from .records import AlignmentOutcome, NegotiationOutcome, SessionRecord


class EmptyInput(Exception):
    pass


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.2f}"


def _table(rows: list[tuple[str, ...]]) -> str:
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    return "\n".join(
        "  ".join(cell.ljust(width) for cell, width in zip(row, widths)).rstrip()
        for row in rows
    )


@dataclass(frozen=True)
class AlignmentReport:
    n: int
    n_aborted: int
    n_success: int
    success_rate: float
    mean_turns: float
    success_per_turn: float

    def as_dict(self) -> dict:
        return {
            "task": TaskKind.ALIGNMENT.value,
            "n": self.n,
            "n_aborted": self.n_aborted,
            "n_success": self.n_success,
            "success_rate": self.success_rate,
            "mean_turns": self.mean_turns,
            "success_per_turn": self.success_per_turn,
        }

    def row(self) -> tuple[str, ...]:
        return (
            _fmt(self.success_rate),
            _fmt(self.mean_turns),
            _fmt(self.success_per_turn),
        )

    @staticmethod
    def header() -> tuple[str, ...]:
        return ("success%", "turns", "success/turn")

    def render(self) -> str:
        body = _table([self.header(), self.row()])
        return f"{body}\nsessions: {self.n}  aborted: {self.n_aborted}"


@dataclass(frozen=True)
class NegotiationReport:
    n: int
    n_aborted: int
    n_agreed: int
    score_all_a: float
    score_all_b: float
    sum_all: float
    agreed_pct: float
    pareto_pct: float
    score_agreed_a: float | None
    score_agreed_b: float | None
    sum_agreed: float | None

    def as_dict(self) -> dict:
        return {
            "task": TaskKind.NEGOTIATION.value,
            "n": self.n,
            "n_aborted": self.n_aborted,
            "n_agreed": self.n_agreed,
            "score_all_a": self.score_all_a,
            "score_all_b": self.score_all_b,
            "sum_all": self.sum_all,
            "agreed_pct": self.agreed_pct,
            "pareto_pct": self.pareto_pct,
            "score_agreed_a": self.score_agreed_a,
            "score_agreed_b": self.score_agreed_b,
            "sum_agreed": self.sum_agreed,
        }

    def row(self) -> tuple[str, ...]:
        return (
            _fmt(self.score_all_a),
            _fmt(self.score_all_b),
            _fmt(self.sum_all),
            _fmt(self.agreed_pct),
            _fmt(self.pareto_pct),
            _fmt(self.score_agreed_a),
            _fmt(self.score_agreed_b),
            _fmt(self.sum_agreed),
        )

    @staticmethod
    def header() -> tuple[str, ...]:
        return (
            "score-all A",
            "score-all B",
            "sum-all",
            "agreed%",
            "pareto%",
            "score-agreed A",
            "score-agreed B",
            "sum-agreed",
        )

    def render(self) -> str:
        body = _table([self.header(), self.row()])
        return f"{body}\nsessions: {self.n}  aborted: {self.n_aborted}"


Report = AlignmentReport | NegotiationReport


def _usable(records: Iterable[SessionRecord], task: TaskKind) -> tuple[list[SessionRecord], int]:
    kept: list[SessionRecord] = []
    aborted = 0
    for record in records:
        if record.scenario.task is not task:
            raise ValueError(f"record {record.session_id} is not a {task.value} session")
        if record.aborted:
            aborted += 1
        else:
            kept.append(record)
    return kept, aborted


def alignment_report(records: Iterable[SessionRecord]) -> AlignmentReport:
    kept, aborted = _usable(records, TaskKind.ALIGNMENT)
    if not kept:
        raise EmptyInput("no completed alignment sessions to report on")
    n = len(kept)
    successes = 0
    turns = 0
    for record in kept:
        outcome = record.outcome
        assert isinstance(outcome, AlignmentOutcome)
        successes += outcome.success
        turns += len(record.transcript)
    success_rate = 100.0 * successes / n
    mean_turns = turns / n
    per_turn = success_rate / mean_turns if mean_turns else 0.0
    return AlignmentReport(n, aborted, successes, success_rate, mean_turns, per_turn)


def negotiation_report(
    records: Iterable[SessionRecord], *, pareto_over_agreed: bool = False
) -> NegotiationReport:
    kept, aborted = _usable(records, TaskKind.NEGOTIATION)
    if not kept:
        raise EmptyInput("no completed negotiation sessions to report on")
    n = len(kept)
    total_a = total_b = 0
    agreed_a = agreed_b = 0
    n_agreed = 0
    n_pareto = 0
    for record in kept:
        outcome = record.outcome
        assert isinstance(outcome, NegotiationOutcome)
        total_a += outcome.points_a
        total_b += outcome.points_b
        if outcome.decision is Decision.ACCEPTED:
            assert outcome.deal is not None
            n_agreed += 1
            agreed_a += outcome.points_a
            agreed_b += outcome.points_b
            scenario = record.scenario
            if is_pareto_optimal(
                outcome.deal, scenario.knowledge_a, scenario.knowledge_b
            ):
                n_pareto += 1
    pareto_base = n_agreed if pareto_over_agreed else n
    return NegotiationReport(
        n=n,
        n_aborted=aborted,
        n_agreed=n_agreed,
        score_all_a=total_a / n,
        score_all_b=total_b / n,
        sum_all=(total_a + total_b) / n,
        agreed_pct=100.0 * n_agreed / n,
        pareto_pct=100.0 * n_pareto / pareto_base if pareto_base else 0.0,
        score_agreed_a=agreed_a / n_agreed if n_agreed else None,
        score_agreed_b=agreed_b / n_agreed if n_agreed else None,
        sum_agreed=(agreed_a + agreed_b) / n_agreed if n_agreed else None,
    )


def report_for(records: list[SessionRecord], **kwargs) -> Report:
    if not records:
        raise EmptyInput("no records")
    task = records[0].scenario.task
    if task is TaskKind.ALIGNMENT:
        return alignment_report(records)
    return negotiation_report(records, **kwargs)


def render_comparison(reports: dict[str, Report]) -> str:
    """One row per labeled cell, shared column set per task kind."""
    if not reports:
        raise EmptyInput("no reports")
    kinds = {type(report) for report in reports.values()}
    if len(kinds) != 1:
        raise ValueError("cannot mix task kinds in one comparison")
    header = ("cell",) + next(iter(reports.values())).header()
    rows = [header]
    for label, report in reports.items():
        rows.append((label,) + report.row())
    return _table(rows)
