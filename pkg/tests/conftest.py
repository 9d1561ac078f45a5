"""Shared fixtures: deterministic backends and small hand-built scenarios."""

from __future__ import annotations

import pytest

from commonground.backends import BackendRegistry, EchoBackend
from commonground.model import (
    DEFAULT_SCHEMA,
    AgentConfig,
    FriendCard,
    FriendList,
    ItemValue,
    MindMode,
    Priority,
    Role,
    RunLimits,
    Scenario,
    TaskKind,
    ValueTable,
)
from commonground.orchestrator import run_dialogue
from commonground.scripted import ScriptedAgentBackend


def make_registry() -> BackendRegistry:
    registry = BackendRegistry()
    registry.register("scripted", ScriptedAgentBackend(), deterministic=True)
    registry.register("echo", EchoBackend(), deterministic=True)
    return registry


def make_alignment_scenario(scenario_id: str = "fix-align") -> Scenario:
    side_a = FriendList(
        DEFAULT_SCHEMA,
        (
            FriendCard(("Surfing", "Jane", "Outdoor")),
            FriendCard(("Chess", "Albert", "Indoor")),
            FriendCard(("Hiking", "Amy", "Outdoor")),
        ),
    )
    side_b = FriendList(
        DEFAULT_SCHEMA,
        (
            FriendCard(("Swimming", "Ryan", "Indoor")),
            FriendCard(("Chess", "Albert", "Indoor")),
            FriendCard(("Painting", "Sarah", "Downtown")),
        ),
    )
    return Scenario(
        task=TaskKind.ALIGNMENT,
        scenario_id=scenario_id,
        knowledge_a=side_a,
        knowledge_b=side_b,
        ground_truth=FriendCard(("Chess", "Albert", "Indoor")),
    )


def make_table(levels: tuple[Priority, Priority, Priority]) -> ValueTable:
    reasons = {
        Priority.HIGH: "we ran out early on the last trip",
        Priority.MEDIUM: "a steady supply keeps the group comfortable",
        Priority.LOW: "we packed more than enough of this already",
    }
    return ValueTable(tuple(ItemValue(level, reasons[level]) for level in levels))


def make_negotiation_scenario(
    scenario_id: str = "fix-nego", *, opposed: bool = True
) -> Scenario:
    table_a = make_table((Priority.HIGH, Priority.MEDIUM, Priority.LOW))
    if opposed:
        table_b = make_table((Priority.LOW, Priority.MEDIUM, Priority.HIGH))
    else:
        table_b = make_table((Priority.MEDIUM, Priority.HIGH, Priority.LOW))
    return Scenario(
        task=TaskKind.NEGOTIATION,
        scenario_id=scenario_id,
        knowledge_a=table_a,
        knowledge_b=table_b,
    )


def scripted_configs(mode: MindMode = MindMode.NONE) -> tuple[AgentConfig, AgentConfig]:
    mind = "scripted" if mode is not MindMode.NONE else None
    return (
        AgentConfig(role=Role.A, mind_mode=mode, mind_backend=mind, temperature=0.0),
        AgentConfig(role=Role.B, mind_mode=mode, mind_backend=mind, temperature=0.0),
    )


@pytest.fixture()
def registry() -> BackendRegistry:
    return make_registry()


@pytest.fixture()
def align_scenario() -> Scenario:
    return make_alignment_scenario()


@pytest.fixture()
def nego_scenario() -> Scenario:
    return make_negotiation_scenario()


@pytest.fixture(scope="session")
def align_record_both():
    """One scripted alignment session with both belief orders estimated."""
    cfg_a, cfg_b = scripted_configs(MindMode.BOTH)
    return run_dialogue(
        make_alignment_scenario(),
        cfg_a,
        cfg_b,
        make_registry(),
        RunLimits(max_turns=20),
        seed=7,
        session_id="fix-align.both.r0",
    )


@pytest.fixture(scope="session")
def nego_record_both():
    cfg_a, cfg_b = scripted_configs(MindMode.BOTH)
    return run_dialogue(
        make_negotiation_scenario(),
        cfg_a,
        cfg_b,
        make_registry(),
        RunLimits(max_turns=20),
        seed=7,
        session_id="fix-nego.both.r0",
    )


# One visible PASS/FAIL/SKIP line per release criterion at the end of the run.

_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1].removeprefix("test_criterion_")
    if report.when == "call":
        _ACCEPTANCE_RESULTS.append((name, "PASS" if report.passed else "FAIL"))
    elif report.when == "setup" and report.skipped:
        _ACCEPTANCE_RESULTS.append((name, "SKIP"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("release criteria")
    for name, verdict in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{verdict}  {name.replace('_', ' ')}")
