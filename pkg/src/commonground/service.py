"""HTTP session service for human-vs-agent play.

One human seat, one agent seat. The human posts utterances and game actions;
the agent turn runs exactly like a self-play turn (belief estimation when a
mind mode is on, response generation, termination check). Agent replies are
asynchronous: posting a message returns a handle the client polls, so slow
generator backends never stall the HTTP worker.

Information hiding: until a session is closed, responses carry only the
human's private knowledge; the agent's table and its belief snapshots are
revealed (flag-controlled) only after the rating is in.
"""

from __future__ import annotations

import itertools
import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .backends import BackendError, BackendRegistry, UnknownBackend
from .beliefs import (
    BeliefParseError,
    CanonicalDeal,
    DealSplit,
    FriendBelief,
    SumViolation,
    parse_deal_split,
)
from .engine import check_mutual_friend, session_points
from .mind import (
    CLARIFICATION,
    ask_backend,
    estimate_beliefs,
    parse_accept,
    parse_alignment_termination,
    parse_negotiation_termination,
)
from .model import (
    AgentConfig,
    Decision,
    FriendList,
    ITEMS,
    ITEM_TOTAL,
    MindMode,
    Role,
    RunLimits,
    Scenario,
    TaskKind,
    Utterance,
    ValueTable,
    normalize_value,
)
from .orchestrator import Seat, make_seat
from .records import (
    AlignmentOutcome,
    BeliefSnapshot,
    NegotiationOutcome,
    PromptEvent,
    SessionRecord,
    outcome_to_dict,
    record_to_dict,
    scenario_from_dict,
    scenario_to_dict,
    snapshot_to_dict,
)
from .scenarios import (
    AlignmentGenParams,
    NegotiationGenParams,
    generate_alignment,
    generate_negotiation,
)
from .seeds import derive_seed

RATING_DIMENSIONS = {
    TaskKind.ALIGNMENT: ("cooperativeness", "informativeness", "enjoyment"),
    TaskKind.NEGOTIATION: ("skillful", "satisfied", "enjoyment"),
}

PHASE_CHATTING = "chatting"
PHASE_AWAITING_ACTION = "awaiting_action"
PHASE_AWAITING_DECISION = "awaiting_decision"
PHASE_RATING = "rating"
PHASE_CLOSED = "closed"


class ServiceError(Exception):
    status = 400
    code = "BadRequest"

    def __init__(self, message: str, detail: Any = None):
        super().__init__(message)
        self.message = message
        self.detail = detail


class UnknownSession(ServiceError):
    status = 404
    code = "UnknownSession"


class UnknownHandle(ServiceError):
    status = 404
    code = "UnknownHandle"


class OutOfTurn(ServiceError):
    status = 409
    code = "OutOfTurn"


class WrongPhase(ServiceError):
    status = 409
    code = "WrongPhase"


class SessionClosed(ServiceError):
    status = 409
    code = "SessionClosed"


class InvalidAction(ServiceError):
    status = 400
    code = "InvalidAction"


class NoScenario(ServiceError):
    status = 400
    code = "NoScenario"


class BackendUnavailable(ServiceError):
    status = 503
    code = "BackendUnavailable"


@dataclass
class ReplyJob:
    handle: str
    status: str = "pending"  # pending | done | error
    utterance: str | None = None
    error: dict | None = None


@dataclass
class HumanSession:
    session_id: str
    record: SessionRecord
    human_role: Role
    agent_seat: Seat
    phase: str = PHASE_CHATTING
    agent_selection: FriendBelief | None = None
    agent_decided: bool = False
    pending_proposal: CanonicalDeal | None = None
    proposer: Role | None = None
    ratings: dict[str, int] | None = None
    jobs: dict[str, ReplyJob] = field(default_factory=dict)
    pending: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def agent_role(self) -> Role:
        return self.human_role.other()

    def humans_turn(self) -> bool:
        role = Role.A if len(self.record.transcript) % 2 == 0 else Role.B
        return role is self.human_role


@dataclass
class ServiceConfig:
    registry: BackendRegistry
    out_dir: Path | None = None
    seed: int = 0
    limits: RunLimits = field(default_factory=RunLimits)
    reveal_after_close: bool = True
    default_generator: str = "scripted"
    friend_count: int = 5
    opposed_tables: bool = False


class PlayService:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.sessions: dict[str, HumanSession] = {}
        self._counter = itertools.count()
        self._lock = threading.Lock()
        self._pool = ThreadPoolExecutor(max_workers=8)
        if config.out_dir is not None:
            config.out_dir.mkdir(parents=True, exist_ok=True)

    # -- setup -----------------------------------------------------------------

    def _scenario_from(self, body: dict, task: TaskKind, index: int) -> Scenario:
        if "scenario" in body:
            try:
                scenario = scenario_from_dict(body["scenario"])
            except Exception as exc:
                raise NoScenario(f"embedded scenario is unreadable: {exc}")
            if scenario.task is not task:
                raise NoScenario("embedded scenario is for the other task")
            return scenario
        seed = body.get("scenario_seed")
        if seed is None:
            seed = derive_seed(self.config.seed, "service", index)
        if not isinstance(seed, int):
            raise NoScenario("scenario_seed must be an integer")
        if task is TaskKind.ALIGNMENT:
            params = AlignmentGenParams(
                count=1, friend_count=self.config.friend_count, id_prefix="live"
            )
            return generate_alignment(params, seed)[0]
        params = NegotiationGenParams(
            count=1, id_prefix="live", opposed=self.config.opposed_tables
        )
        return generate_negotiation(params, seed)[0]

    def create_session(self, body: dict) -> tuple[HumanSession, ReplyJob | None]:
        try:
            task = TaskKind(body.get("task", ""))
        except ValueError:
            raise ServiceError(f"unknown task kind: {body.get('task')!r}")
        try:
            mode = MindMode(body.get("mind_mode", "none"))
        except ValueError:
            raise ServiceError(f"unknown mind mode: {body.get('mind_mode')!r}")
        raw_role = body.get("human_role", "A")
        if raw_role not in ("A", "B"):
            raise ServiceError(f"human_role must be 'A' or 'B', got {raw_role!r}")
        human_role = Role(raw_role)
        generator = body.get("generator_backend", self.config.default_generator)
        mind_backend = body.get("mind_backend", generator if mode is not MindMode.NONE else None)
        try:
            self.config.registry.get(generator)
            if mind_backend is not None:
                self.config.registry.get(mind_backend)
        except UnknownBackend as exc:
            raise BackendUnavailable(str(exc))
        with self._lock:
            index = next(self._counter)
        scenario = self._scenario_from(body, task, index)
        agent_role = human_role.other()
        agent_config = AgentConfig(
            role=agent_role,
            mind_mode=mode,
            mind_backend=mind_backend if mode is not MindMode.NONE else None,
            generator_backend=generator,
        )
        human_config = AgentConfig(role=human_role, mind_mode=MindMode.NONE)
        config_a = agent_config if agent_role is Role.A else human_config
        config_b = agent_config if agent_role is Role.B else human_config
        session_id = uuid.uuid4().hex[:12]
        record = SessionRecord(
            session_id=session_id,
            scenario=scenario,
            config_a=config_a,
            config_b=config_b,
            limits=self.config.limits,
            seed=derive_seed(self.config.seed, "session", session_id),
        )
        seat = make_seat(scenario, agent_config, human_config, self.config.registry, self.config.limits)
        record.events.append(PromptEvent(agent_role, "system", -1, seat.thread[0].content, ""))
        session = HumanSession(
            session_id=session_id,
            record=record,
            human_role=human_role,
            agent_seat=seat,
        )
        with self._lock:
            self.sessions[session_id] = session
        job = None
        if agent_role is Role.A:
            job = self._schedule_agent_turn(session)
        return session, job

    def _get(self, session_id: str) -> HumanSession:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no session {session_id!r}")
        return session

    # -- agent turn -------------------------------------------------------------

    def _schedule_agent_turn(self, session: HumanSession) -> ReplyJob:
        job = ReplyJob(handle=uuid.uuid4().hex[:12])
        session.jobs[job.handle] = job
        session.pending = job.handle
        self._pool.submit(self._agent_turn_job, session, job)
        return job

    def _agent_turn_job(self, session: HumanSession, job: ReplyJob) -> None:
        try:
            with session.lock:
                job.utterance = self._agent_turn(session)
                job.status = "done"
        except BackendError as exc:
            with session.lock:
                session.record.aborted = f"{type(exc).__name__}: {exc}"
                session.phase = PHASE_CLOSED
                self._persist(session)
            job.error = {"code": type(exc).__name__, "message": str(exc)}
            job.status = "error"
        except Exception as exc:  # surface programming errors to the poller
            job.error = {"code": "InternalError", "message": str(exc)}
            job.status = "error"
        finally:
            if session.pending == job.handle:
                session.pending = None

    def _agent_turn(self, session: HumanSession) -> str:
        """One full agent move, mirroring the self-play loop: estimate
        beliefs when a mind mode is on, speak, then run the termination
        check and any endgame it triggers."""
        record = session.record
        seat = session.agent_seat
        limits = record.limits
        turn = len(record.transcript)
        pair = None
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
                    PromptEvent(seat.role, ex.kind, turn, ex.prompt, ex.response, ex.latency)
                )
            record.beliefs.append(
                BeliefSnapshot(
                    turn=turn,
                    speaker=seat.role,
                    first=pair.first,
                    second=pair.second,
                    first_parse_failed=pair.first_parse_failed,
                    second_parse_failed=pair.second_parse_failed,
                )
            )
        last = record.transcript[-1].text if record.transcript else None
        prompt = seat.kit.response_prompt(seat.config.mind_mode, last, pair)
        utterance = self._ask(session, seat, prompt, "response", turn, seat.config.temperature)
        record.transcript.append(Utterance(seat.role, utterance, turn))
        task = record.scenario.task
        if task is TaskKind.ALIGNMENT:
            if not session.agent_decided:
                answer = self._ask(
                    session, seat, seat.kit.termination_query(), "termination", turn,
                    seat.config.belief_temperature,
                )
                found, flagged = parse_alignment_termination(answer, record.scenario.schema)
                if flagged:
                    self._flag_last(record)
                if found is not None:
                    session.agent_decided = True
                    session.agent_selection = found
            if len(record.transcript) >= limits.max_turns:
                session.phase = PHASE_AWAITING_ACTION
        else:
            answer = self._ask(
                session, seat, seat.kit.termination_query(), "termination", turn,
                seat.config.belief_temperature,
            )
            wants_end, flagged = parse_negotiation_termination(answer)
            if flagged:
                self._flag_last(record)
            if wants_end:
                self._agent_proposes(session)
            elif len(record.transcript) >= limits.max_turns:
                self._finish_negotiation(session, Decision.TIMEOUT, None, None)
        return utterance

    def _ask(
        self,
        session: HumanSession,
        seat: Seat,
        prompt: str,
        kind: str,
        turn: int,
        temperature: float,
    ) -> str:
        answer, latency = ask_backend(
            seat.generator,
            seat.thread,
            prompt,
            temperature=temperature,
            max_tokens=seat.config.max_tokens,
            timeout=session.record.limits.request_timeout,
        )
        session.record.events.append(
            PromptEvent(seat.role, kind, turn, prompt, answer, latency)
        )
        return answer

    def _flag_last(self, record: SessionRecord) -> None:
        record.events[-1] = replace(record.events[-1], flagged=True)

    def _agent_proposes(self, session: HumanSession) -> None:
        record = session.record
        seat = session.agent_seat
        turn = len(record.transcript) - 1
        prompt = seat.kit.proposal_query()
        deal = None
        for attempt in range(record.limits.parse_retries + 1):
            answer = self._ask(
                session, seat, prompt,
                "proposal" if attempt == 0 else "proposal_retry",
                turn, seat.config.belief_temperature,
            )
            try:
                deal = parse_deal_split(answer, seat.role).to_canonical()
                break
            except BeliefParseError:
                self._flag_last(record)
                prompt = CLARIFICATION
        if deal is None:
            self._finish_negotiation(session, Decision.INVALID_PROPOSAL, None, seat.role)
            return
        session.pending_proposal = deal
        session.proposer = seat.role
        session.phase = PHASE_AWAITING_DECISION

    # -- endgame ------------------------------------------------------------------

    def _finish_alignment(self, session: HumanSession, human_sel: FriendBelief) -> None:
        record = session.record
        selections = {
            session.human_role: human_sel,
            session.agent_role: session.agent_selection,
        }
        success = check_mutual_friend(
            record.scenario, selections.get(Role.A), selections.get(Role.B)
        )
        record.outcome = AlignmentOutcome(
            selections.get(Role.A), selections.get(Role.B), success
        )
        session.phase = PHASE_RATING
        self._persist(session)

    def _finish_negotiation(
        self,
        session: HumanSession,
        decision: Decision,
        deal: CanonicalDeal | None,
        proposer: Role | None,
    ) -> None:
        record = session.record
        scenario = record.scenario
        points = session_points(
            decision, deal, scenario.knowledge_a, scenario.knowledge_b
        )
        record.outcome = NegotiationOutcome(deal, proposer, decision, *points)
        session.phase = PHASE_RATING
        session.pending_proposal = None
        self._persist(session)

    def _persist(self, session: HumanSession) -> None:
        if self.config.out_dir is None:
            return
        path = self.config.out_dir / "sessions.jsonl"
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record_to_dict(session.record), ensure_ascii=False) + "\n")

    def _persist_rating(self, session: HumanSession) -> None:
        if self.config.out_dir is None:
            return
        path = self.config.out_dir / "ratings.jsonl"
        with path.open("a", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {
                        "session_id": session.session_id,
                        "task": session.record.scenario.task.value,
                        "mind_mode": session.record.config(session.agent_role).mind_mode.value,
                        "ratings": session.ratings,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )

    # -- client operations -----------------------------------------------------------

    def post_message(self, session_id: str, body: dict) -> ReplyJob:
        session = self._get(session_id)
        text = body.get("text")
        if not isinstance(text, str) or not text.strip():
            raise ServiceError("message body must carry non-empty 'text'")
        with session.lock:
            if session.phase == PHASE_CLOSED:
                raise SessionClosed("session is closed")
            if session.phase != PHASE_CHATTING:
                raise WrongPhase(f"cannot chat in phase {session.phase}")
            if session.pending is not None:
                raise OutOfTurn("an agent reply is still pending")
            if not session.humans_turn():
                raise OutOfTurn("it is the agent's turn")
            record = session.record
            turn = len(record.transcript)
            record.transcript.append(Utterance(session.human_role, text.strip(), turn))
            if len(record.transcript) >= record.limits.max_turns:
                if record.scenario.task is TaskKind.NEGOTIATION:
                    self._finish_negotiation(session, Decision.TIMEOUT, None, None)
                else:
                    session.phase = PHASE_AWAITING_ACTION
                job = ReplyJob(handle=uuid.uuid4().hex[:12], status="done")
                session.jobs[job.handle] = job
                return job
        return self._schedule_agent_turn(session)

    def get_reply(self, session_id: str, handle: str) -> tuple[HumanSession, ReplyJob]:
        session = self._get(session_id)
        job = session.jobs.get(handle)
        if job is None:
            raise UnknownHandle(f"no reply handle {handle!r}")
        return session, job

    def submit_action(self, session_id: str, body: dict) -> HumanSession:
        session = self._get(session_id)
        kind = body.get("kind")
        with session.lock:
            if session.phase == PHASE_CLOSED:
                raise SessionClosed("session is closed")
            if session.pending is not None:
                raise OutOfTurn("an agent reply is still pending")
            task = session.record.scenario.task
            if kind == "select":
                if task is not TaskKind.ALIGNMENT:
                    raise InvalidAction("select applies to alignment sessions")
                if session.phase not in (PHASE_CHATTING, PHASE_AWAITING_ACTION):
                    raise WrongPhase(f"cannot select in phase {session.phase}")
                self._human_select(session, body)
            elif kind == "propose":
                if task is not TaskKind.NEGOTIATION:
                    raise InvalidAction("propose applies to negotiation sessions")
                if session.phase != PHASE_CHATTING:
                    raise WrongPhase(f"cannot propose in phase {session.phase}")
                self._human_propose(session, body)
            elif kind == "decide":
                if task is not TaskKind.NEGOTIATION:
                    raise InvalidAction("decide applies to negotiation sessions")
                if session.phase != PHASE_AWAITING_DECISION:
                    raise WrongPhase(f"nothing to decide in phase {session.phase}")
                self._human_decide(session, body)
            else:
                raise InvalidAction(f"unknown action kind: {kind!r}")
        return session

    def _human_select(self, session: HumanSession, body: dict) -> None:
        schema = session.record.scenario.schema
        values = body.get("values")
        if not isinstance(values, list) or len(values) != len(schema.names):
            raise InvalidAction(
                f"selection needs one value per attribute ({schema.header()})"
            )
        cleaned = []
        for name, value in zip(schema.names, values):
            if not isinstance(value, str) or not value.strip():
                raise InvalidAction(f"attribute {name!r} must be a non-empty string")
            if normalize_value(value) == "unknown":
                raise InvalidAction("selection must be fully specified")
            cleaned.append(value.strip())
        selection = FriendBelief(schema, tuple(cleaned))
        if not session.agent_decided:
            seat = session.agent_seat
            turn = max(len(session.record.transcript) - 1, 0)
            answer = self._ask(
                session, seat, seat.kit.termination_query(), "termination", turn,
                seat.config.belief_temperature,
            )
            found, flagged = parse_alignment_termination(
                answer, session.record.scenario.schema
            )
            if flagged:
                self._flag_last(session.record)
            if found is not None:
                session.agent_decided = True
                session.agent_selection = found
        self._finish_alignment(session, selection)

    def _parse_action_deal(self, session: HumanSession, body: dict) -> CanonicalDeal:
        raw = body.get("deal")
        if not isinstance(raw, dict):
            raise InvalidAction("proposal needs a 'deal' object of per-item [yours, theirs]")
        mine = []
        theirs = []
        for item in ITEMS:
            pair = raw.get(item)
            if (
                not isinstance(pair, (list, tuple))
                or len(pair) != 2
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in pair)
            ):
                raise InvalidAction(f"deal[{item!r}] must be two integers [yours, theirs]")
            if pair[0] < 0 or pair[1] < 0 or pair[0] + pair[1] != ITEM_TOTAL:
                raise InvalidAction(
                    f"{item} split {pair[0]}/{pair[1]} does not use exactly {ITEM_TOTAL}",
                    detail={"error": SumViolation.__name__, "item": item},
                )
            mine.append(pair[0])
            theirs.append(pair[1])
        return DealSplit(session.human_role, tuple(mine), tuple(theirs)).to_canonical()

    def _human_propose(self, session: HumanSession, body: dict) -> None:
        deal = self._parse_action_deal(session, body)
        session.pending_proposal = deal
        session.proposer = session.human_role
        seat = session.agent_seat
        turn = max(len(session.record.transcript) - 1, 0)
        answer = self._ask(
            session, seat,
            seat.kit.accept_query(deal, session.human_role),
            "accept", turn, seat.config.belief_temperature,
        )
        decision, flagged = parse_accept(answer)
        if flagged:
            self._flag_last(session.record)
        self._finish_negotiation(session, decision, deal, session.human_role)

    def _human_decide(self, session: HumanSession, body: dict) -> None:
        accept = body.get("accept")
        if not isinstance(accept, bool):
            raise InvalidAction("decision needs boolean 'accept'")
        decision = Decision.ACCEPTED if accept else Decision.REJECTED
        assert session.pending_proposal is not None and session.proposer is not None
        self._finish_negotiation(
            session, decision, session.pending_proposal, session.proposer
        )

    def submit_rating(self, session_id: str, body: dict) -> HumanSession:
        session = self._get(session_id)
        with session.lock:
            if session.phase == PHASE_CLOSED:
                raise SessionClosed("session already closed")
            if session.phase != PHASE_RATING:
                raise WrongPhase(f"cannot rate in phase {session.phase}")
            dims = RATING_DIMENSIONS[session.record.scenario.task]
            ratings = {}
            for dim in dims:
                value = body.get(dim)
                if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value <= 10:
                    raise InvalidAction(f"rating {dim!r} must be an integer in [0, 10]")
                ratings[dim] = value
            extra = set(body) - set(dims)
            if extra:
                raise InvalidAction(f"unexpected rating fields: {sorted(extra)}")
            session.ratings = ratings
            session.phase = PHASE_CLOSED
            self._persist_rating(session)
        return session

    # -- views --------------------------------------------------------------------

    def view(self, session: HumanSession) -> dict:
        record = session.record
        scenario = record.scenario
        task = scenario.task
        human_knowledge = scenario.knowledge(session.human_role)
        view: dict[str, Any] = {
            "session_id": session.session_id,
            "task": task.value,
            "phase": session.phase,
            "human_role": session.human_role.value,
            "display_names": {
                Role.A.value: record.config_a.name,
                Role.B.value: record.config_b.name,
            },
            "mind_mode": record.config(session.agent_role).mind_mode.value,
            "max_turns": record.limits.max_turns,
            "turns_used": len(record.transcript),
            "your_turn": (
                session.phase == PHASE_CHATTING
                and session.pending is None
                and session.humans_turn()
            ),
            "pending_reply": session.pending,
            "transcript": [
                {"speaker": u.speaker.value, "text": u.text, "turn": u.turn}
                for u in record.transcript
            ],
            "your_knowledge": self._knowledge_view(human_knowledge, task),
            "rating_dimensions": list(RATING_DIMENSIONS[task]),
            "aborted": record.aborted,
        }
        if task is TaskKind.ALIGNMENT:
            view["schema"] = list(scenario.schema.names)
        if session.pending_proposal is not None and session.phase == PHASE_AWAITING_DECISION:
            deal = session.pending_proposal
            view["pending_proposal"] = {
                "proposer": session.proposer.value if session.proposer else None,
                "your_counts": list(deal.counts_for(session.human_role)),
                "their_counts": list(deal.counts_for(session.agent_role)),
            }
        if session.phase in (PHASE_RATING, PHASE_CLOSED) and record.outcome is not None:
            view["outcome"] = outcome_to_dict(record.outcome)
        if session.phase == PHASE_CLOSED and self.config.reveal_after_close:
            view["revealed"] = {
                "agent_knowledge": self._knowledge_view(
                    scenario.knowledge(session.agent_role), task
                ),
                "scenario": scenario_to_dict(scenario),
                "beliefs": [snapshot_to_dict(snap) for snap in record.beliefs],
            }
        return view

    def _knowledge_view(self, knowledge, task: TaskKind) -> dict:
        if task is TaskKind.ALIGNMENT:
            assert isinstance(knowledge, FriendList)
            return {
                "kind": "friends",
                "schema": list(knowledge.schema.names),
                "rows": [list(card.values) for card in knowledge.cards],
                "table": knowledge.render_table(),
            }
        assert isinstance(knowledge, ValueTable)
        return {
            "kind": "values",
            "rows": [
                {"item": item, "level": iv.level.value, "reason": iv.reason}
                for item, iv in zip(ITEMS, knowledge.values)
            ],
            "table": knowledge.render_table(),
        }

    def transcript_view(self, session_id: str) -> dict:
        session = self._get(session_id)
        if session.phase != PHASE_CLOSED:
            raise WrongPhase("transcript is available once the session is closed")
        data = record_to_dict(session.record)
        data["ratings"] = session.ratings
        return data


def build_app(service: PlayService) -> FastAPI:
    app = FastAPI(title="commonground play service", docs_url=None, redoc_url=None)

    @app.exception_handler(ServiceError)
    async def _service_error(request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "sessions": len(service.sessions)}

    @app.post("/sessions")
    async def create_session(body: dict):
        session, opening = service.create_session(body)
        view = service.view(session)
        view["opening_handle"] = opening.handle if opening else None
        return view

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str):
        return service.view(service._get(session_id))

    @app.post("/sessions/{session_id}/message")
    async def post_message(session_id: str, body: dict):
        job = service.post_message(session_id, body)
        return {"handle": job.handle}

    @app.get("/sessions/{session_id}/reply/{handle}")
    async def get_reply(session_id: str, handle: str):
        session, job = service.get_reply(session_id, handle)
        out: dict[str, Any] = {"status": job.status}
        if job.status == "done":
            out["reply"] = job.utterance
            out["session"] = service.view(session)
        elif job.status == "error":
            out["error"] = job.error
            out["session"] = service.view(session)
        return out

    @app.post("/sessions/{session_id}/action")
    async def post_action(session_id: str, body: dict):
        session = service.submit_action(session_id, body)
        return service.view(session)

    @app.post("/sessions/{session_id}/rating")
    async def post_rating(session_id: str, body: dict):
        session = service.submit_rating(session_id, body)
        return service.view(session)

    @app.get("/sessions/{session_id}/transcript")
    async def get_transcript(session_id: str):
        return service.transcript_view(session_id)

    return app
