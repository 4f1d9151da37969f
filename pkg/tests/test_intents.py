"""Intent classification and dispatch."""

from __future__ import annotations

import json
import threading
import time

import pytest

from stepcoach.backends import BagOfWordsEmbedder, FixtureBackend
from stepcoach.config import Config
from stepcoach.fixturegen import bacon_plan, fixture_entries
from stepcoach.gateway import ModelGateway, ModelRequest, request_hash
from stepcoach.intents import (
    IntentRouter,
    canonical_command,
    classify_intent,
    confirmation_answer,
)
from stepcoach.knowledge import KnowledgeBase, ResourceChunk
from stepcoach.prompts import (
    intent_prompt,
    knowledge_prompt,
    rag_prompt,
    rag_query,
    verdict_prompt,
    visual_qa_prompt,
)
from stepcoach.session import MonitorVerdict, SessionEngine, SimulatedClock

from conftest import gateway_for

PAPER_UTTERANCES = [
    ("go back", "navigation"),
    ("What's an easier way to do this?", "tips_workarounds"),
    ("Is it done yet?", "progress_feedback"),
    ("Which of these is salt?", "visual_qa"),
    ("What's half of 3/4 cup?", "nonvisual_knowledge"),
]


def make_session(gateway=None, kb=None, config=None):
    engine = SessionEngine(gateway, config or Config())
    state = engine.start_session(bacon_plan(), clock=SimulatedClock())
    router = IntentRouter(engine, kb, gateway)
    return engine, router, state


def summary_for(router, state) -> str:
    return router._state_summary(state)


class TestCanonicalCommands:
    def test_lexicon_matches_without_model(self):
        assert canonical_command("next step") == "next"
        assert canonical_command("Go back!") == "back"
        assert canonical_command("repeat that") == "repeat"
        assert canonical_command("how do I do this") is None

    def test_classifies_navigation_with_backend_disabled(self):
        for utterance in ("next step", "go back", "repeat"):
            assert classify_intent(utterance, "s", None) == "navigation"

    def test_confirmation_words(self):
        assert confirmation_answer("Yes.") == "yes"
        assert confirmation_answer("not yet") == "no"
        assert confirmation_answer("what?") is None


class TestClassification:
    def test_paper_examples_with_fixtured_classifier(self):
        _, router, state = make_session()
        summary = summary_for(router, state)
        fixtures = fixture_entries(
            [(intent_prompt(u, summary), label) for u, label in PAPER_UTTERANCES]
        )
        gateway = gateway_for(fixtures)
        for utterance, expected in PAPER_UTTERANCES:
            assert classify_intent(utterance, summary, gateway) == expected

    def test_out_of_set_label_falls_back(self):
        gw = gateway_for(fixture_entries([(intent_prompt("hmm", "s"), "chitchat")]))
        assert classify_intent("hmm", "s", gw) == "nonvisual_knowledge"

    def test_empty_utterance_rejected(self):
        with pytest.raises(ValueError):
            classify_intent("   ", "s", None)


class TestDispatch:
    def test_repeat_reemits_current_instruction(self):
        engine, router, state = make_session()
        events = router.dispatch(state, "navigation", "repeat that")
        assert [e.kind for e in events] == ["instruction", "demonstration_detail"]
        assert events[0].text == "Heat the pan until it's hot."

    def test_implicit_back_routes_back(self):
        engine, router, state = make_session()
        engine.navigate(state, "next")
        events = router.dispatch(state, "navigation", "take me back to the previous one")
        assert (state.step_index, state.action_index) == (0, 0)
        assert events[0].kind == "instruction"

    def test_progress_feedback_returns_verdict_as_answer(self):
        engine, router, state = make_session()
        action = state.current_action
        prompt = verdict_prompt(
            action.instruction, action.action_type, action.in_progress_criteria,
            action.completion_criteria, action.mistake_criteria, "", 0,
        )
        reply = json.dumps({"status": "complete", "rationale": "the pan shimmers with heat"})
        gateway = gateway_for(fixture_entries([(prompt, reply)]))
        engine.gateway = gateway
        router.gateway = gateway
        events = router.dispatch(state, "progress_feedback", "Does this look ready?")
        assert [e.kind for e in events] == ["answer"]
        assert "the pan shimmers with heat" in events[0].text

    def test_visual_qa_attaches_recent_frames(self):
        engine, router, state = make_session()
        for t in range(8):
            engine.ingest_frame(state, float(t), f"f{t}")
        frames = [f"f{t}" for t in range(3, 8)]
        gateway = gateway_for(
            {request_hash(visual_qa_prompt("Which of these is salt?"), frames):
             "Salt is on your right, pepper on your left."}
        )
        router.gateway = gateway
        events = router.dispatch(state, "visual_qa", "Which of these is salt?")
        assert events[0].kind == "answer"
        assert "Salt is on your right" in events[0].text

    def test_nonvisual_knowledge_streams_without_frames(self):
        engine, router, state = make_session()
        for t in range(5):
            engine.ingest_frame(state, float(t), f"f{t}")
        plan = state.plan
        context = (
            f"task: {plan.video.title}; current step: {plan.steps[0].step_name}; "
            f"current action: {state.current_action.instruction}"
        )
        prompt = knowledge_prompt("How do I use a zester?", context)
        gateway = gateway_for(
            {request_hash(prompt): {"chunks": ["Rub the zester ", "across the peel."]}}
        )
        router.gateway = gateway
        events = router.dispatch(state, "nonvisual_knowledge", "How do I use a zester?")
        assert events[0].kind == "answer"
        assert events[0].text == "Rub the zester across the peel."

    def test_tips_route_through_knowledge_base(self):
        gateway = ModelGateway(batch=FixtureBackend({}), embedder=BagOfWordsEmbedder())
        kb = KnowledgeBase(gateway)
        text = "Feel the pan's heat with a palm held above it, never on it."
        kb.chunks.append(
            ResourceChunk(chunk_id="c0", source="doc.md", modality="text",
                          text=text, embedding=gateway.embed(text))
        )
        engine, router, state = make_session(gateway=gateway, kb=kb)
        query = rag_query(state.current_action.instruction, "")
        retrieved = kb.retrieve(query, k=3)
        context = "\n---\n".join(f"[{r.chunk.source}] {r.chunk.text}" for r in retrieved)
        prompt = rag_prompt("(none)", state.current_action.instruction, context)
        gateway.batch = FixtureBackend(fixture_entries([(prompt, "Hold your palm above the pan.")]))
        events = router.dispatch(state, "tips_workarounds", "What's an easier way to do this?")
        assert [e.kind for e in events] == ["suggestion"]
        assert "palm" in events[0].text

    def test_handler_failure_becomes_error_event(self):
        engine, router, state = make_session()
        router.gateway = gateway_for({})  # strict mock with no fixtures
        events = router.dispatch(state, "visual_qa", "What is this?")
        assert [e.kind for e in events] == ["error"]

    def test_suggestion_backend_failure_degrades_to_error_event(self):
        gateway = gateway_for({})
        kb = KnowledgeBase(gateway)
        text = "Feel the handle position by touch."
        kb.chunks.append(
            ResourceChunk(chunk_id="c0", source="doc.md", modality="text",
                          text=text, embedding=gateway.embed(text))
        )
        engine, router, state = make_session(gateway=gateway, kb=kb)
        events = router.dispatch(state, "tips_workarounds", "any easier way?")
        assert [e.kind for e in events] == ["error"]
        assert "unavailable" in events[0].text

    def test_unknown_intent_raises(self):
        _, router, state = make_session()
        with pytest.raises(ValueError):
            router.dispatch(state, "smalltalk", "hey")

    def test_every_intent_has_a_handler(self):
        from stepcoach.prompts import INTENT_LABELS

        _, router, _ = make_session()
        assert set(router._handlers) == set(INTENT_LABELS)


class TestUtteranceFlow:
    def test_yes_during_confirmation_advances(self):
        engine, router, state = make_session()
        engine.apply_verdict(state, MonitorVerdict(status="complete", rationale="hot"))
        events = router.handle_utterance(state, "yes")
        assert (state.step_index, state.action_index) == (1, 0)
        assert [e.kind for e in events] == ["instruction", "demonstration_detail"]

    def test_bare_done_without_prompt_is_classified_not_confirmed(self):
        engine, router, state = make_session()
        summary = summary_for(router, state)
        gateway = gateway_for(
            fixture_entries([(intent_prompt("done", summary), "progress_feedback")])
        )
        router.gateway = gateway
        engine.gateway = None  # progress tick will degrade to an error event
        events = router.handle_utterance(state, "done")
        assert (state.step_index, state.action_index) == (0, 0)
        assert [e.kind for e in events] == ["error"]

    def test_progress_question_marks_engagement(self):
        engine, router, state = make_session()
        engine.gateway = None
        router.gateway = None
        router.dispatch(state, "progress_feedback", "Is it done yet?")
        assert state.engaged_since_reframe is True

    def test_speech_start_cancels_in_flight_stream(self):
        class Gated:
            def __init__(self):
                self.release = threading.Event()

            def stream(self, request):
                yield "one"
                self.release.wait(2)
                yield "two"
                yield "three"

        backend = Gated()
        gateway = ModelGateway(streamer=backend)
        engine, router, state = make_session(gateway=gateway)
        got: list[str] = []
        box = {}

        def consume():
            box["resp"] = gateway.stream(
                ModelRequest(kind="stream", prompt="narrate", context_id=state.context_id),
                got.append,
            )

        thread = threading.Thread(target=consume)
        thread.start()
        time.sleep(0.05)
        router.on_speech_start(state)
        backend.release.set()
        thread.join(2)
        assert box["resp"].cancelled is True
        assert len(got) <= 2  # at most one chunk after the interrupt

    def test_speech_start_with_nothing_in_flight_is_noop(self):
        _, router, state = make_session(gateway=ModelGateway())
        router.on_speech_start(state)  # must not raise


class TestPriority:
    def test_no_progress_update_between_speech_and_answer(self):
        """A user question is answered atomically; scheduled narration never
        interleaves between speech onset and the answer event."""
        engine, router, state = make_session()
        engine.gateway = None
        router.gateway = None
        before = len(state.event_log)
        events = router.dispatch(state, "progress_feedback", "Is it done yet?")
        produced = state.event_log[before:]
        assert produced == events
        assert all(e.kind != "progress_update" for e in produced)
