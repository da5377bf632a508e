"""Relation and classification semantics, pinned against hand-computed values
on the bundled knowledge base plus a few purpose-built miniature graphs."""

import pytest

from argudialog.core import (
    ArgumentationGraph,
    Explanation,
    NotGivenRecord,
    ReplyArgument,
    ReplyClassification,
    StatusArgument,
    UnknownArgumentError,
    WithheldReason,
    classify_replies,
    defence_candidates,
    explain,
    is_acceptable,
    is_conflict_free,
    natural_key,
    oracle_classify,
    set_attacks,
    set_supports,
)


def make_graph(statuses, replies, attacks, supports) -> ArgumentationGraph:
    return ArgumentationGraph(
        statuses=tuple(
            StatusArgument(id=i, fact_text=f"fact {i}", annotations=(f"ann {i}",))
            for i in statuses
        ),
        replies=tuple(ReplyArgument(id=i, reply_text=f"reply {i}") for i in replies),
        attacks=frozenset(attacks),
        supports=frozenset(supports),
    )


class TestNaturalKey:
    def test_numeric_chunks_compare_as_numbers(self):
        assert natural_key("N8") < natural_key("N15")
        assert sorted(["N16", "N7", "N15", "N8"], key=natural_key) == [
            "N7",
            "N8",
            "N15",
            "N16",
        ]

    def test_plain_strings_stay_alphabetical(self):
        assert sorted(["beta", "alpha"], key=natural_key) == ["alpha", "beta"]


class TestSetRelations:
    def test_set_attacks_holds_when_any_member_attacks(self, case_graph):
        assert set_attacks(case_graph, {"N8"}, "R2") is True
        assert set_attacks(case_graph, {"N8", "N11"}, "R2") is True

    def test_set_attacks_false_without_attacking_member(self, case_graph):
        assert set_attacks(case_graph, {"N11"}, "R2") is False
        assert set_attacks(case_graph, set(), "R2") is False

    def test_set_attacks_on_status_target(self, case_graph):
        assert set_attacks(case_graph, {"N7"}, "N8") is True
        assert set_attacks(case_graph, {"N11"}, "N8") is False

    def test_set_supports_basic(self, case_graph):
        assert set_supports(case_graph, {"N11"}, "R2") is True
        assert set_supports(case_graph, {"N11", "N7", "N16"}, "R3") is False
        assert set_supports(case_graph, set(), "R2") is False

    def test_unknown_ids_rejected(self, case_graph):
        with pytest.raises(UnknownArgumentError):
            set_attacks(case_graph, {"NOPE"}, "R2")
        with pytest.raises(UnknownArgumentError):
            set_attacks(case_graph, {"N8"}, "NOPE")
        with pytest.raises(UnknownArgumentError):
            set_supports(case_graph, {"N11"}, "NOPE")


class TestConflictFree:
    def test_empty_and_compatible_sets(self, case_graph):
        assert is_conflict_free(case_graph, set()) is True
        assert is_conflict_free(case_graph, {"N11", "N7", "N16"}) is True

    def test_mutual_attackers_conflict(self, case_graph):
        assert is_conflict_free(case_graph, {"N7", "N8"}) is False
        assert is_conflict_free(case_graph, {"N15", "N16"}) is False

    def test_unknown_member_rejected(self, case_graph):
        with pytest.raises(UnknownArgumentError):
            is_conflict_free(case_graph, {"N7", "NOPE"})


class TestAcceptability:
    def test_undefended_reply_not_acceptable(self, case_graph):
        # R2 is attacked by N8 and N15; {N11} counters neither.
        assert is_acceptable(case_graph, {"N11"}, "R2") is False

    def test_unattacked_reply_acceptable_even_for_empty_set(self, case_graph):
        assert is_acceptable(case_graph, set(), "R3") is True

    def test_fully_defended_reply_acceptable(self, case_graph):
        assert is_acceptable(case_graph, {"N11", "N7", "N16"}, "R2") is True

    def test_partial_defence_is_not_enough(self, case_graph):
        # N7 counters N8, but nothing in the set counters N15.
        assert is_acceptable(case_graph, {"N11", "N7"}, "R2") is False

    def test_attackers_range_over_whole_graph(self, case_graph):
        # N15 is not activated, yet it still obstructs R2.
        assert is_acceptable(case_graph, {"N11", "N7", "N15"}, "R2") is False

    def test_unknown_reply_rejected(self, case_graph):
        with pytest.raises(UnknownArgumentError):
            is_acceptable(case_graph, {"N11"}, "NOPE")


class TestClassifyReplies:
    def test_single_fact_yields_potentially_consistent(self, case_graph):
        got = classify_replies(case_graph, {"N11"}, {"N11"})
        assert got == ReplyClassification(
            consistent=frozenset(), potentially_consistent=frozenset({"R2"})
        )

    def test_empty_sets_yield_empty_classification(self, case_graph):
        got = classify_replies(case_graph, set(), set())
        assert got == ReplyClassification(frozenset(), frozenset())

    def test_divergent_path_is_consistent_for_specialist(self, case_graph):
        got = classify_replies(case_graph, {"N11", "N8", "N16"}, {"N8", "N16"})
        assert got == ReplyClassification(
            consistent=frozenset({"R3"}), potentially_consistent=frozenset()
        )

    def test_full_defence_is_consistent(self, case_graph):
        activated = {"N11", "N7", "N16"}
        got = classify_replies(case_graph, activated, activated)
        assert got == ReplyClassification(
            consistent=frozenset({"R2"}), potentially_consistent=frozenset()
        )

    def test_reply_attacked_by_activated_lands_in_neither_set(self, case_graph):
        # N11 supports R2 but the activated N8 attacks it: excluded entirely.
        got = classify_replies(case_graph, {"N11", "N8"}, {"N11"})
        assert got == ReplyClassification(frozenset(), frozenset())

    def test_new_facts_must_be_subset_of_activated(self, case_graph):
        with pytest.raises(ValueError):
            classify_replies(case_graph, {"N11"}, {"N11", "N8"})

    def test_unknown_ids_rejected(self, case_graph):
        with pytest.raises(UnknownArgumentError):
            classify_replies(case_graph, {"NOPE"}, set())

    def test_repeated_calls_are_identical(self, case_graph):
        first = classify_replies(case_graph, {"N11", "N8", "N16"}, {"N8"})
        second = classify_replies(case_graph, {"N11", "N8", "N16"}, {"N8"})
        assert first == second


class TestOracleClassify:
    def test_matches_pinned_values(self, case_graph):
        assert oracle_classify(case_graph, {"N11"}, {"N11"}) == ReplyClassification(
            frozenset(), frozenset({"R2"})
        )
        assert oracle_classify(
            case_graph, {"N11", "N8", "N16"}, {"N8", "N16"}
        ) == ReplyClassification(frozenset({"R3"}), frozenset())
        assert oracle_classify(case_graph, {"N11", "N8"}, {"N11"}) == ReplyClassification(
            frozenset(), frozenset()
        )


class TestDefenceCandidates:
    def test_uncountered_attackers_yield_their_attackers_in_order(self, case_graph):
        assert defence_candidates(case_graph, {"N11"}, "R2") == ["N7", "N16"]

    def test_countered_attacker_is_skipped(self, case_graph):
        assert defence_candidates(case_graph, {"N11", "N7"}, "R2") == ["N16"]

    def test_unattacked_reply_needs_no_defence(self, case_graph):
        assert defence_candidates(case_graph, {"N11"}, "R3") == []

    def test_candidates_already_active_still_listed(self, case_graph):
        # N16 counters N15 only once activated; until then it stays a candidate.
        assert defence_candidates(case_graph, {"N11", "N16"}, "R2") == ["N7"]

    def test_shared_defender_listed_once(self):
        graph = make_graph(
            statuses=["a1", "b1", "b2", "d1"],
            replies=["r1"],
            attacks=[("b1", "r1"), ("b2", "r1"), ("d1", "b1"), ("d1", "b2")],
            supports=[("a1", "r1")],
        )
        assert defence_candidates(graph, {"a1"}, "r1") == ["d1"]

    def test_unknown_reply_rejected(self, case_graph):
        with pytest.raises(UnknownArgumentError):
            defence_candidates(case_graph, set(), "NOPE")


class TestExplain:
    def test_supporters_and_ruled_out_competitor(self, case_graph):
        got = explain(case_graph, {"N11", "N8", "N16"}, "R3")
        assert got == Explanation(
            supporters=frozenset({"N8"}),
            not_given=(
                NotGivenRecord(
                    reply_id="R2",
                    attackers_in_activated=frozenset({"N8"}),
                    reason=WithheldReason.ATTACKED_BY_ACTIVATED,
                ),
            ),
        )

    def test_no_competitors_means_empty_not_given(self, case_graph):
        got = explain(case_graph, {"N11", "N7", "N16"}, "R2")
        assert got.supporters == frozenset({"N11"})
        assert got.not_given == ()

    def test_undefended_competitor_reported_without_attackers(self):
        graph = make_graph(
            statuses=["s1", "b1"],
            replies=["r1", "r2"],
            attacks=[("b1", "r2")],
            supports=[("s1", "r1"), ("s1", "r2")],
        )
        got = explain(graph, {"s1"}, "r1")
        assert got == Explanation(
            supporters=frozenset({"s1"}),
            not_given=(
                NotGivenRecord(
                    reply_id="r2",
                    attackers_in_activated=frozenset(),
                    reason=WithheldReason.NOT_DEFENDED,
                ),
            ),
        )

    def test_not_given_sorted_naturally(self):
        graph = make_graph(
            statuses=["s1", "b1"],
            replies=["r2", "r10", "r1"],
            attacks=[("b1", "r2"), ("b1", "r10")],
            supports=[("s1", "r1"), ("s1", "r2"), ("s1", "r10")],
        )
        got = explain(graph, {"s1"}, "r1")
        assert [record.reply_id for record in got.not_given] == ["r2", "r10"]

    def test_unknown_reply_rejected(self, case_graph):
        with pytest.raises(UnknownArgumentError):
            explain(case_graph, {"N11"}, "NOPE")


class TestGraphIndexes:
    def test_attackers_and_supporters(self, case_graph):
        assert case_graph.attackers("R2") == frozenset({"N8", "N15"})
        assert case_graph.attackers("R3") == frozenset()
        assert case_graph.supporters("R2") == frozenset({"N11"})

    def test_has_argument(self, case_graph):
        assert case_graph.has_argument("N7")
        assert case_graph.has_argument("R3")
        assert not case_graph.has_argument("R99")
