"""Frame sampling, cross-modal scoring, and threshold selection."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from stepcoach.backends import FixedEmbedder, FixtureBackend
from stepcoach.frames import (
    CaptionEmbedScorer,
    FrameSample,
    SyntheticFrameSource,
    ThresholdPolicy,
    effective_threshold,
    sample_frames,
    score_frames,
    select_relevant,
)
from stepcoach.gateway import ModelGateway, request_hash
from stepcoach.prompts import caption_prompt


def brute_force_select(scores: list[float], policy: ThresholdPolicy) -> set[int]:
    """Independent reimplementation of the selection rule over indices."""
    if not scores:
        return set()
    above_base = [s for s in scores if s > policy.base]
    fraction = len(above_base) / len(scores)
    if fraction > policy.high_density_frac:
        threshold = policy.ceiling
    elif fraction < policy.low_density_frac:
        threshold = policy.floor
    else:
        threshold = policy.base
    kept = {i for i, s in enumerate(scores) if s >= threshold}
    if not kept:
        best_score = max(scores)
        kept = {min(i for i, s in enumerate(scores) if s == best_score)}
    return kept


def frames_from(scores: list[float]) -> list[FrameSample]:
    return [FrameSample(timestamp=i, image_ref=f"ref{i}", score=s) for i, s in enumerate(scores)]


class TestSampling:
    def test_mid_video_window(self):
        src = SyntheticFrameSource("vid", 300.0)
        frames = sample_frames(src, 30.0, 40.0)
        assert [f.timestamp for f in frames] == list(range(15, 56))

    def test_start_clamp(self):
        src = SyntheticFrameSource("vid", 300.0)
        frames = sample_frames(src, 5.0, 10.0)
        assert [f.timestamp for f in frames] == list(range(0, 26))
        assert len(frames) == 26

    def test_end_clamp(self):
        src = SyntheticFrameSource("vid", 300.0)
        frames = sample_frames(src, 295.0, 300.0)
        assert [f.timestamp for f in frames] == list(range(280, 301))
        assert len(frames) == 21

    def test_fractional_bounds_stay_on_integer_grid(self):
        src = SyntheticFrameSource("vid", 100.0)
        frames = sample_frames(src, 15.4, 15.9)
        assert frames[0].timestamp == 1  # ceil(0.4)
        assert frames[-1].timestamp == 30  # floor(30.9)

    def test_inverted_action_rejected(self):
        src = SyntheticFrameSource("vid", 100.0)
        with pytest.raises(ValueError):
            sample_frames(src, 10.0, 5.0)

    def test_refs_are_stable_digests(self):
        src = SyntheticFrameSource("vid", 10.0)
        assert src.frame_ref(3) == src.frame_ref(3)
        assert src.frame_ref(3) != src.frame_ref(4)


class TestScoring:
    def _scorer(self, table: dict[str, list[float]], captions: dict[str, str]) -> CaptionEmbedScorer:
        fixtures = {}
        for ref, caption in captions.items():
            fixtures[request_hash(caption_prompt(ref), [ref])] = caption
        gateway = ModelGateway(
            batch=FixtureBackend(fixtures),
            embedder=FixedEmbedder(table, dim=2),
            retries=0,
        )
        return CaptionEmbedScorer(gateway)

    def test_identical_embeddings_score_one(self):
        scorer = self._scorer({"act": [1.0, 0.0], "cap": [1.0, 0.0]}, {"r0": "cap"})
        scored = score_frames([FrameSample(0, "r0")], "act", scorer)
        assert scored[0].score == pytest.approx(1.0)

    def test_orthogonal_embeddings_score_zero(self):
        scorer = self._scorer({"act": [1.0, 0.0], "cap": [0.0, 1.0]}, {"r0": "cap"})
        scored = score_frames([FrameSample(0, "r0")], "act", scorer)
        assert scored[0].score == pytest.approx(0.0)

    def test_hand_computed_cosine(self):
        scorer = self._scorer({"act": [1.0, 0.0], "cap": [0.6, 0.8]}, {"r0": "cap"})
        scored = score_frames([FrameSample(0, "r0")], "act", scorer)
        assert scored[0].score == pytest.approx(0.6)

    def test_failed_frame_dropped_not_fatal(self):
        scorer = self._scorer({"act": [1.0, 0.0], "cap": [1.0, 0.0]}, {"r0": "cap"})
        frames = [FrameSample(0, "r0"), FrameSample(1, "unfixtured")]
        scored = score_frames(frames, "act", scorer)
        assert [f.timestamp for f in scored] == [0]


class TestSelection:
    def test_high_density_raises_threshold_to_ceiling(self):
        frames = frames_from([0.50] * 10)
        kept = select_relevant(frames)
        assert len(kept) == 10
        assert effective_threshold([f.score for f in frames], ThresholdPolicy()) == 0.30

    def test_low_density_lowers_threshold_to_floor(self):
        frames = frames_from([0.26] * 9 + [0.28])
        kept = select_relevant(frames)
        assert [f.timestamp for f in kept] == [9]
        assert effective_threshold([f.score for f in frames], ThresholdPolicy()) == 0.27

    def test_top1_fallback_when_nothing_passes(self):
        frames = frames_from([0.10] * 10)
        kept = select_relevant(frames)
        assert len(kept) == 1
        assert kept[0].timestamp == 0  # earliest of the tied best

    def test_empty_input_empty_output(self):
        assert select_relevant([]) == []

    def test_unscored_frames_rejected(self):
        with pytest.raises(ValueError):
            select_relevant([FrameSample(0, "r0")])

    def test_policy_ordering_enforced(self):
        with pytest.raises(ValueError):
            ThresholdPolicy(floor=0.31, base=0.285, ceiling=0.30)


class TestSelectionOracle:
    def test_matches_brute_force_on_1000_random_score_sets(self):
        rng = random.Random(20240813)
        policy = ThresholdPolicy()
        for _ in range(1000):
            n = rng.randint(1, 40)
            # mix adversarial near-threshold values with the full range
            scores = [
                rng.choice(
                    [
                        round(rng.uniform(-1, 1), 3),
                        rng.choice([0.27, 0.285, 0.30, 0.269, 0.301, 0.2849]),
                    ]
                )
                for _ in range(n)
            ]
            kept = select_relevant(frames_from(scores), policy)
            assert {f.timestamp for f in kept} == brute_force_select(scores, policy)

    @given(
        st.lists(
            st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), min_size=1, max_size=50
        )
    )
    @settings(max_examples=200)
    def test_matches_brute_force_property(self, scores):
        policy = ThresholdPolicy()
        kept = select_relevant(frames_from(scores), policy)
        assert {f.timestamp for f in kept} == brute_force_select(scores, policy)

    @given(
        st.lists(
            st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), min_size=1, max_size=50
        ),
        st.floats(min_value=0.0, max_value=0.5, allow_nan=False),
    )
    @settings(max_examples=200)
    def test_raising_scores_never_empties_selection(self, scores, delta):
        raised = [min(1.0, s + delta) for s in scores]
        kept = select_relevant(frames_from(raised))
        assert len(kept) >= 1

    @given(
        st.lists(
            st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), min_size=1, max_size=50
        )
    )
    @settings(max_examples=200)
    def test_effective_threshold_stays_in_published_band(self, scores):
        assert 0.27 <= effective_threshold(scores, ThresholdPolicy()) <= 0.30
