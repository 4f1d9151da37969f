"""Atomic-fact scoring and per-frame monitoring accuracy."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from stepcoach.evaluation import (
    FrameLabel,
    align_verdicts,
    containment_matcher,
    exact_matcher,
    extract_facts,
    load_frame_labels,
    load_verdict_map,
    score_description,
    score_description_file,
    score_monitoring,
)

from conftest import DATA


class TestExtractFacts:
    def test_conjunction_splits_into_two_facts(self):
        assert extract_facts("The pan is hot and oiled.") == ["The pan is hot", "oiled"]

    def test_single_clause_is_one_fact(self):
        assert extract_facts("The pan is hot.") == ["The pan is hot"]

    def test_sentences_and_clauses_combine(self):
        facts = extract_facts("The pan is hot and oiled. The bacon sizzles.")
        assert facts == ["The pan is hot", "oiled", "The bacon sizzles"]

    def test_empty_description_rejected(self):
        with pytest.raises(ValueError):
            extract_facts("   ")


class TestScoreDescription:
    def test_worked_set_arithmetic(self):
        report = score_description(
            generated=["A", "B"], narration=["A"], reference=["A", "B", "C"]
        )
        assert report.new_facts == 1
        assert report.missed_facts == 1
        assert report.hallucination_rate is None

    def test_identity_case_scores_zero(self):
        report = score_description(
            generated=["A"], narration=["A"], reference=["A"], hallucination_labels=[]
        )
        assert report.new_facts == 0
        assert report.missed_facts == 0
        assert report.hallucination_rate == 0.0

    def test_one_of_four_labeled_is_25_percent(self):
        report = score_description(
            generated=["a", "b", "c", "d"],
            narration=[],
            reference=["a", "b", "c", "d"],
            hallucination_labels=["c"],
        )
        assert report.hallucination_rate == pytest.approx(25.0)

    def test_matching_is_normalized(self):
        report = score_description(
            generated=["The Pan is HOT!"], narration=[], reference=["the pan is hot"]
        )
        assert report.new_facts == 1

    def test_containment_matcher_accepts_subphrase(self):
        assert containment_matcher("the bacon sizzles", "the bacon sizzles loudly")
        assert not exact_matcher("the bacon sizzles", "the bacon sizzles loudly")

    def test_judge_matcher_consults_backend_beyond_containment(self):
        from stepcoach.evaluation import judge_matcher
        from stepcoach.fixturegen import fixture_entries

        from conftest import gateway_for

        a, b = "the skillet is hot", "the pan has heated up"
        prompt = (
            "Do these two statements assert the same fact? Answer yes or no "
            f"only.\n1: {a}\n2: {b}"
        )
        matcher = judge_matcher(gateway_for(fixture_entries([(prompt, "yes")])))
        assert matcher(a, b) is True
        # containment short-circuits without a fixture
        assert matcher("the pan is hot", "the pan is hot and dry") is True
        # judge failure degrades to containment's answer
        failing = judge_matcher(gateway_for({}))
        assert failing("totally", "different") is False

    def test_judge_backend_swap_preserves_count_identity(self):
        from stepcoach.evaluation import judge_matcher
        from stepcoach.fixturegen import fixture_entries

        from conftest import gateway_for

        generated = ["the skillet is hot", "butter foams", "a lid rests nearby"]
        narration = ["butter foams in the pan"]
        reference = ["the pan has heated up", "butter foams"]
        prompt = (
            "Do these two statements assert the same fact? Answer yes or no "
            f"only.\n1: {generated[0]}\n2: {reference[0]}"
        )
        for matcher in (
            exact_matcher,
            containment_matcher,
            judge_matcher(gateway_for(fixture_entries([(prompt, "yes")], ), strict=False)),
        ):
            report = score_description(generated, narration, reference, matcher=matcher)
            categories = [j.category for j in report.judgments]
            assert len(categories) == len(generated)
            assert categories.count("new") + categories.count(
                "narration_overlap"
            ) + categories.count("other") == len(generated)

    @given(
        st.lists(st.sampled_from(["a", "b", "c", "d", "e", "f"]), max_size=8),
        st.lists(st.sampled_from(["a", "b", "c"]), max_size=4),
        st.lists(st.sampled_from(["b", "c", "d"]), max_size=4),
    )
    def test_category_counts_always_sum_to_total(self, generated, narration, reference):
        report = score_description(generated, narration, reference)
        by_category = {"new": 0, "narration_overlap": 0, "other": 0}
        for judgment in report.judgments:
            by_category[judgment.category] += 1
        assert sum(by_category.values()) == len(generated)
        assert report.new_facts == by_category["new"]


class TestScoreMonitoring:
    def _labels(self, rows):
        return [FrameLabel(*row) for row in rows]

    def test_fifteen_frames_nine_matches_is_point_six(self):
        labels = self._labels(
            [(f"f{i}", "a", "iterative", "narrow", "complete") for i in range(15)]
        )
        predicted = ["complete"] * 9 + ["irrelevant"] * 6
        report = score_monitoring(predicted, labels)
        assert report.accuracy_for("iterative", "narrow") == pytest.approx(0.60)

    def test_all_match_is_one(self):
        labels = self._labels(
            [(f"f{i}", "a", "durative", "wide", "in_progress") for i in range(10)]
        )
        report = score_monitoring(["in_progress"] * 10, labels)
        assert report.accuracy_for("durative", "wide") == 1.00

    def test_misaligned_inputs_rejected(self):
        labels = self._labels([("f0", "a", "punctual", "narrow", "complete")])
        with pytest.raises(ValueError):
            score_monitoring(["complete", "complete"], labels)

    def test_group_counts_sum_to_dataset_size(self):
        labels = self._labels(
            [("f0", "a", "punctual", "narrow", "complete"),
             ("f1", "a", "punctual", "wide", "complete"),
             ("f2", "b", "durative", "wide", "in_progress")]
        )
        report = score_monitoring(["complete", "irrelevant", "in_progress"], labels)
        assert sum(g.frames for g in report.groups) == report.total_frames == 3

    def test_absent_combinations_noted_not_tabulated(self):
        labels = self._labels(
            [("f0", "a", "punctual", "narrow", "complete"),
             ("f1", "b", "durative", "wide", "in_progress")]
        )
        report = score_monitoring(["complete", "in_progress"], labels)
        assert report.accuracy_for("punctual", "wide") is None
        assert any("punctual/wide" in note for note in report.notes)

    def test_markdown_has_action_type_rows(self):
        labels = self._labels(
            [("f0", "a", "punctual", "narrow", "complete"),
             ("f1", "b", "durative", "narrow", "in_progress")]
        )
        table = score_monitoring(["complete", "irrelevant"], labels).to_markdown()
        assert "| Punctual | 1.00 |" in table
        assert "| Durative | 0.00 |" in table


class TestBundledToySet:
    def test_hand_computed_accuracies_to_1e9(self):
        labels = load_frame_labels(DATA / "eval" / "frame_labels.csv")
        verdicts = load_verdict_map(DATA / "eval" / "toy_verdicts.json")
        report = score_monitoring(align_verdicts(labels, verdicts), labels)
        assert abs(report.accuracy_for("punctual", "narrow") - 0.5) < 1e-9
        assert abs(report.accuracy_for("iterative", "narrow") - 0.75) < 1e-9
        assert abs(report.accuracy_for("durative", "wide") - 1.0) < 1e-9
        assert report.total_frames == 12

    def test_bundled_description_cases(self):
        reports = score_description_file(DATA / "eval" / "desc_cases.jsonl")
        assert reports[0].new_facts == 1 and reports[0].missed_facts == 1
        assert reports[1].new_facts == 0 and reports[1].missed_facts == 0
        assert reports[2].hallucination_rate == pytest.approx(25.0)
