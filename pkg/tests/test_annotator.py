"""Lexical gold-belief labeling and prediction scoring.

The hand-labeled fixtures here are the reference the annotator must match;
they were worked out on paper from the labeling rules, not from running the
code.
"""

from __future__ import annotations

import pytest

from commonground.annotator import (
    GoldTurn,
    MindEvalReport,
    PredictionScore,
    SchemaMismatch,
    annotate,
    annotate_record,
    annotate_seat,
    evaluate_mind,
    gold_lookup,
    has_negation,
    read_gold,
    score,
    score_recorded,
    write_gold,
)
from commonground.beliefs import FriendBelief, all_unknown_friend
from commonground.model import (
    DEFAULT_SCHEMA,
    AttributeSchema,
    FriendCard,
    FriendList,
    Role,
    Scenario,
    TaskKind,
    Utterance,
)
from commonground.scripted import ScriptedAgentBackend
from tests.conftest import make_negotiation_scenario


def utter(speaker: Role, text: str, turn: int) -> Utterance:
    return Utterance(speaker, text, turn)


# --- negation markers ---------------------------------------------------------------

@pytest.mark.parametrize(
    "text",
    [
        "No, that is wrong",
        "I do not think so",
        "I don't have that friend",
        "She doesn't surf",
        "None of my friends do",
        "I DON’T know her",  # curly apostrophe normalizes to ASCII
    ],
)
def test_negation_markers_fire(text):
    assert has_negation(text)


@pytest.mark.parametrize(
    "text",
    [
        "I know her well",
        "Nothing beats chess",  # 'no'/'not' only count as whole words
        "A notable landmark",
        "Yes, absolutely",
        "",
    ],
)
def test_negation_markers_respect_word_boundaries(text):
    assert not has_negation(text)


# --- the partner-only value bounce ----------------------------------------------------

def bounce_scenario() -> Scenario:
    # A does not know any yo-yoing friend; B does.
    side_a = FriendList(
        DEFAULT_SCHEMA,
        (FriendCard(("Chess", "Albert", "Indoor")), FriendCard(("Surfing", "Jane", "Outdoor"))),
    )
    side_b = FriendList(
        DEFAULT_SCHEMA,
        (FriendCard(("Yo-yoing", "Ryan", "Downtown")), FriendCard(("Chess", "Albert", "Indoor"))),
    )
    return Scenario(
        TaskKind.ALIGNMENT,
        "bounce",
        side_a,
        side_b,
        ground_truth=FriendCard(("Chess", "Albert", "Indoor")),
    )


def test_partner_only_value_lands_in_second_order_not_first():
    scenario = bounce_scenario()
    prefix = [utter(Role.B, "Do you have a friend who likes yo-yoing?", 0)]
    first, second = annotate_seat(prefix, scenario, Role.A)
    # the mention belongs to the partner's knowledge, so the speaker's own
    # belief stays unknown while the attributed belief picks it up
    assert first.status("hobby") is None
    assert second.status("hobby") == "Yo-yoing"
    assert first.labels["hobby"]["Yo-yoing"] == 0
    assert second.labels["hobby"]["Yo-yoing"] == 1


def test_denial_clears_the_attributed_value():
    scenario = bounce_scenario()
    prefix = [
        utter(Role.B, "Do you have a friend who likes yo-yoing?", 0),
        utter(Role.A, "I don't have a friend who likes yo-yoing.", 1),
    ]
    first, second = annotate_seat(prefix, scenario, Role.A)
    assert first.status("hobby") is None
    assert second.status("hobby") is None
    assert second.labels["hobby"]["Yo-yoing"] == 0


# --- six-turn hand-labeled dialogue ---------------------------------------------------

def six_turn_scenario() -> Scenario:
    side_a = FriendList(
        DEFAULT_SCHEMA,
        (FriendCard(("Surfing", "Jane", "Outdoor")), FriendCard(("Chess", "Albert", "Indoor"))),
    )
    side_b = FriendList(
        DEFAULT_SCHEMA,
        (FriendCard(("Chess", "Albert", "Indoor")), FriendCard(("Swimming", "Ryan", "Downtown"))),
    )
    return Scenario(
        TaskKind.ALIGNMENT,
        "six-turn",
        side_a,
        side_b,
        ground_truth=FriendCard(("Chess", "Albert", "Indoor")),
    )


SIX_TURNS = [
    utter(Role.A, "Do you know anyone who likes Surfing?", 0),
    utter(Role.B, "I do not know anyone who likes Surfing.", 1),
    utter(Role.A, "How about Albert, who plays Chess?", 2),
    utter(Role.B, "Yes! Albert plays Chess and stays Indoor.", 3),
    utter(Role.A, "Great. Or is our friend Jane?", 4),
    utter(Role.B, "It is surely Albert, the Chess player.", 5),
]

# Expected (first, second) status triples for speaker A after each prefix
# length, worked out by hand from the labeling rules.
A_SEAT_EXPECTED = {
    0: ((None, None, None), (None, None, None)),
    1: (("Surfing", None, None), ("Surfing", None, None)),
    2: ((None, None, None), (None, None, None)),  # t1 denies the mention
    3: (("Chess", "Albert", None), ("Chess", "Albert", None)),
    4: (("Chess", "Albert", "Indoor"), ("Chess", "Albert", "Indoor")),
    5: (("Chess", "Jane", "Indoor"), ("Chess", "Jane", "Indoor")),  # newest name wins
    6: (("Chess", "Albert", "Indoor"), ("Chess", "Albert", "Indoor")),
}


@pytest.mark.parametrize("upto", sorted(A_SEAT_EXPECTED))
def test_six_turn_dialogue_labels_for_seat_a(upto):
    scenario = six_turn_scenario()
    first, second = annotate_seat(SIX_TURNS[:upto], scenario, Role.A)
    want_first, want_second = A_SEAT_EXPECTED[upto]
    got_first = tuple(first.status(n) for n in DEFAULT_SCHEMA.names)
    got_second = tuple(second.status(n) for n in DEFAULT_SCHEMA.names)
    assert got_first == want_first
    assert got_second == want_second


def test_six_turn_seat_b_restricts_to_its_own_knowledge():
    scenario = six_turn_scenario()
    # after the opening question only Surfing is on the table, which B does
    # not hold, so B's own belief stays unknown
    first, second = annotate_seat(SIX_TURNS[:1], scenario, Role.B)
    assert first.status("hobby") is None
    assert second.status("hobby") == "Surfing"
    # at the end both seats settle on the shared card
    first, second = annotate_seat(SIX_TURNS, scenario, Role.B)
    assert tuple(first.status(n) for n in DEFAULT_SCHEMA.names) == ("Chess", "Albert", "Indoor")


def test_same_turn_tie_goes_unlabeled():
    scenario = six_turn_scenario()
    prefix = [utter(Role.B, "Is it Chess or maybe Swimming?", 0)]
    first, second = annotate_seat(prefix, scenario, Role.B)
    # two surviving positives from the same utterance: no winner
    assert second.status("hobby") is None
    assert second.positives() == 0
    # the own-knowledge restriction can break the tie for seat A
    first_a, _ = annotate_seat(prefix, scenario, Role.A)
    assert first_a.status("hobby") == "Chess"


def test_mentions_match_case_insensitively():
    scenario = six_turn_scenario()
    prefix = [utter(Role.A, "my friend albert loves CHESS", 0)]
    _, second = annotate_seat(prefix, scenario, Role.A)
    assert second.status("hobby") == "Chess"
    assert second.status("name") == "Albert"


def test_annotate_requires_matching_schemas():
    other = AttributeSchema(("color", "name", "location"))
    lists = FriendList(other, (FriendCard(("Red", "Ana", "North")),))
    base = six_turn_scenario()
    with pytest.raises(SchemaMismatch):
        annotate([], base.knowledge_a, lists)


def test_annotate_seat_rejects_negotiation():
    with pytest.raises(ValueError):
        annotate_seat([], make_negotiation_scenario(), Role.A)


def test_gold_belief_as_belief_matches_statuses():
    scenario = six_turn_scenario()
    first, _ = annotate_seat(SIX_TURNS, scenario, Role.A)
    belief = first.as_belief()
    assert belief == FriendBelief(DEFAULT_SCHEMA, ("Chess", "Albert", "Indoor"))


# --- scoring ---------------------------------------------------------------------

def gold_for(prefix_len: int) -> tuple:
    return annotate_seat(SIX_TURNS[:prefix_len], six_turn_scenario(), Role.A)


def test_score_counts_one_event_per_attribute():
    gold_first, _ = gold_for(3)  # Chess / Albert / unknown
    pred = FriendBelief(DEFAULT_SCHEMA, ("Chess", "Ryan", None))
    counts = score(pred, gold_first)
    assert (counts.tp, counts.fp, counts.fn, counts.tn) == (1, 1, 0, 1)

    pred = FriendBelief(DEFAULT_SCHEMA, ("chess", None, "Indoor"))
    counts = score(pred, gold_first)
    # case-insensitive tp, missed name, spurious location
    assert (counts.tp, counts.fp, counts.fn, counts.tn) == (1, 1, 1, 0)


def test_score_mixed_case_yields_half_precision_recall():
    gold_first, _ = gold_for(6)  # fully known gold
    pred = FriendBelief(DEFAULT_SCHEMA, ("Chess", "Ryan", None))
    counts = score(pred, gold_first)
    assert (counts.tp, counts.fp, counts.fn) == (1, 1, 1)
    assert counts.precision == pytest.approx(0.5, abs=5e-5)
    assert counts.recall == pytest.approx(0.5, abs=5e-5)
    assert counts.f1 == pytest.approx(0.5, abs=5e-5)


def test_score_perfect_prediction():
    gold_first, _ = gold_for(6)
    pred = gold_first.as_belief()
    counts = score(pred, gold_first)
    assert counts.precision == pytest.approx(1.0, abs=5e-5)
    assert counts.recall == pytest.approx(1.0, abs=5e-5)
    assert counts.f1 == pytest.approx(1.0, abs=5e-5)


def test_score_all_unknown_prediction_against_known_gold():
    gold_first, _ = gold_for(6)
    counts = score(all_unknown_friend(DEFAULT_SCHEMA), gold_first)
    assert (counts.tp, counts.fp, counts.fn, counts.tn) == (0, 0, 3, 0)
    assert counts.precision == pytest.approx(0.0, abs=5e-5)
    assert counts.recall == pytest.approx(0.0, abs=5e-5)
    assert counts.f1 == pytest.approx(0.0, abs=5e-5)


def test_score_all_unknown_against_all_unknown_gold():
    gold_first, _ = gold_for(0)
    counts = score(all_unknown_friend(DEFAULT_SCHEMA), gold_first)
    assert (counts.tp, counts.fp, counts.fn, counts.tn) == (0, 0, 0, 3)
    assert counts.precision == 1.0
    assert counts.recall == 1.0
    assert counts.f1 == 1.0


def test_score_out_of_space_prediction_is_a_false_positive():
    gold_first, _ = gold_for(6)
    pred = FriendBelief(DEFAULT_SCHEMA, ("Juggling", "Albert", "Indoor"))
    counts = score(pred, gold_first)
    assert counts.fp == 1 and counts.tp == 2


def test_score_rejects_schema_mismatch():
    gold_first, _ = gold_for(6)
    other = AttributeSchema(("color", "name", "location"))
    with pytest.raises(SchemaMismatch):
        score(FriendBelief(other, (None, None, None)), gold_first)


def test_prediction_score_addition():
    total = PredictionScore(1, 0, 2, 1) + PredictionScore(0, 3, 1, 0)
    assert total == PredictionScore(1, 3, 3, 1)
    assert total.total == 8


# --- record-level labeling and evaluation ----------------------------------------------

def test_annotate_record_covers_every_turn(align_record_both):
    turns = annotate_record(align_record_both)
    assert len(turns) == len(align_record_both.transcript)
    for turn, item in enumerate(turns):
        assert item.turn == turn
        assert item.session_id == align_record_both.session_id
        assert item.speaker is align_record_both.transcript[turn].speaker


def test_gold_file_round_trip(tmp_path, align_record_both):
    turns = annotate_record(align_record_both)
    path = tmp_path / "gold.jsonl"
    write_gold(path, turns)
    loaded = read_gold(path)
    assert loaded == turns
    lookup = gold_lookup(loaded)
    assert set(lookup) == {(t.session_id, t.turn) for t in turns}


def test_score_recorded_with_inline_gold(align_record_both):
    report = score_recorded([align_record_both])
    assert report.turns_scored == len(align_record_both.beliefs)
    assert report.turns_skipped == 0
    assert report.first_micro.total == 3 * report.turns_scored
    assert 0.0 <= report.first_micro.f1 <= 1.0
    assert len(report.first_f1_per_session) == 1


def test_score_recorded_with_prebuilt_gold_matches_inline(align_record_both):
    inline = score_recorded([align_record_both])
    prebuilt = score_recorded(
        [align_record_both], gold_lookup(annotate_record(align_record_both))
    )
    assert prebuilt.as_dict() == inline.as_dict()


def test_score_recorded_counts_missing_gold_as_skipped(align_record_both):
    turns = annotate_record(align_record_both)[:1]
    report = score_recorded([align_record_both], gold_lookup(turns))
    assert report.turns_scored == 1
    assert report.turns_skipped == len(align_record_both.beliefs) - 1


def test_score_recorded_ignores_other_tasks(nego_record_both):
    report = score_recorded([nego_record_both])
    assert report.turns_scored == 0
    assert report.first_f1_per_session == []


def test_evaluate_mind_scores_fresh_estimates(align_record_both):
    report = evaluate_mind(ScriptedAgentBackend(), [align_record_both])
    assert report.turns_scored == len(align_record_both.transcript)
    assert report.turns_skipped == 0
    assert 0.0 <= report.first_micro.f1 <= 1.0
    assert 0.0 <= report.second_macro_f1 <= 1.0


def test_evaluate_mind_skips_failing_turns(align_record_both):
    class Flaky:
        def complete(self, request):
            from commonground.backends import BackendError

            raise BackendError("nope")

    report = evaluate_mind(Flaky(), [align_record_both])
    assert report.turns_scored == 0
    assert report.turns_skipped == len(align_record_both.transcript)


def test_report_render_uses_four_decimals():
    report = MindEvalReport(
        first_micro=PredictionScore(1, 1, 1, 0),
        second_micro=PredictionScore(3, 0, 0, 0),
        first_f1_per_session=[0.5],
        second_f1_per_session=[1.0],
        turns_scored=2,
    )
    rendered = report.render()
    assert "0.5000" in rendered
    assert "1.0000" in rendered
    assert "turns scored: 2" in rendered
    data = report.as_dict()
    assert data["first"]["f1"] == pytest.approx(0.5)
    assert data["second_macro_f1"] == 1.0


def test_gold_turn_equality_supports_lookup_round_trips(align_record_both):
    turns = annotate_record(align_record_both)
    assert turns[0] == GoldTurn(
        turns[0].session_id, 0, turns[0].speaker, turns[0].first, turns[0].second
    )
