"""Classify user utterances into the five intent types and dispatch them.

A rule-based pre-pass catches the canonical navigation lexicon before any
model call, so core controls keep working with the backend disabled.
Speech onset interrupts in-flight generation before the utterance is
handled.
"""

from __future__ import annotations

import logging
import re

from .errors import GatewayError
from .gateway import ModelGateway, ModelRequest
from .knowledge import KnowledgeBase, suggest
from .prompts import INTENT_LABELS, intent_prompt, knowledge_prompt, visual_qa_prompt
from .session import SessionEngine, SessionEvent, SessionState

logger = logging.getLogger(__name__)

FALLBACK_INTENT = "nonvisual_knowledge"

_CANONICAL_COMMANDS = {
    "next": "next",
    "next step": "next",
    "go to the next step": "next",
    "skip": "next",
    "continue": "next",
    "move on": "next",
    "back": "back",
    "go back": "back",
    "previous": "back",
    "previous step": "back",
    "go back a step": "back",
    "repeat": "repeat",
    "repeat that": "repeat",
    "say that again": "repeat",
    "again": "repeat",
}

_YES_WORDS = frozenset({"yes", "yeah", "yep", "sure", "ok", "okay", "done", "i'm done", "im done"})
_NO_WORDS = frozenset({"no", "nope", "not yet", "wait", "not done"})

_BACK_HINT = re.compile(r"\b(back|previous|last step)\b", re.I)
_REPEAT_HINT = re.compile(r"\b(repeat|again|one more time)\b", re.I)


def normalize_utterance(text: str) -> str:
    return re.sub(r"[^a-z0-9' ]+", "", text.lower()).strip()


def canonical_command(utterance: str) -> str | None:
    """Deterministic lexicon lookup for core navigation commands."""
    return _CANONICAL_COMMANDS.get(normalize_utterance(utterance))


def confirmation_answer(utterance: str) -> str | None:
    normalized = normalize_utterance(utterance)
    if normalized in _YES_WORDS:
        return "yes"
    if normalized in _NO_WORDS:
        return "no"
    return None


def classify_intent(
    utterance: str, state_summary: str, gateway: ModelGateway | None
) -> str:
    """One of the five intent labels for a free-form utterance.

    Canonical commands classify without a model; with no usable backend or
    an out-of-set label the fallback intent is used (and logged).
    """
    if not utterance.strip():
        raise ValueError("cannot classify an empty utterance")
    if canonical_command(utterance) is not None:
        return "navigation"
    if gateway is None or gateway.batch is None:
        logger.warning("no classifier backend; falling back to %s", FALLBACK_INTENT)
        return FALLBACK_INTENT
    try:
        raw = gateway.complete(
            ModelRequest(kind="batch", prompt=intent_prompt(utterance, state_summary))
        ).text
    except GatewayError as err:
        logger.warning("intent classification failed (%s); falling back", err)
        return FALLBACK_INTENT
    label = raw.strip().splitlines()[0].strip().lower().replace(" ", "_") if raw.strip() else ""
    label = label.removeprefix("intent:").strip("._ ")
    if label not in INTENT_LABELS:
        logger.warning("intent label %r outside set; falling back", raw.strip()[:40])
        return FALLBACK_INTENT
    return label


class IntentRouter:
    """Binds the session engine, knowledge base, and gateway to utterances."""

    def __init__(
        self,
        engine: SessionEngine,
        knowledge_base: KnowledgeBase | None = None,
        gateway: ModelGateway | None = None,
    ) -> None:
        self.engine = engine
        self.kb = knowledge_base
        self.gateway = gateway if gateway is not None else engine.gateway
        self._handlers = {
            "navigation": self._handle_navigation,
            "tips_workarounds": self._handle_tips,
            "progress_feedback": self._handle_progress,
            "visual_qa": self._handle_visual_qa,
            "nonvisual_knowledge": self._handle_knowledge,
        }

    # -- entry points ----------------------------------------------------

    def on_speech_start(self, state: SessionState) -> None:
        """Cancel any in-flight stream for this session before the utterance
        is processed; harmless when nothing is streaming."""
        if self.gateway is not None:
            self.gateway.cancel(state.context_id)

    def handle_utterance(self, state: SessionState, text: str) -> list[SessionEvent]:
        """Full utterance path: interrupt, confirmation shortcut, classify,
        dispatch."""
        self.on_speech_start(state)
        answer = confirmation_answer(text)
        if state.awaiting_confirmation and answer is not None:
            return self.engine.confirm_advance(state, answer)
        summary = self._state_summary(state)
        intent = classify_intent(text, summary, self.gateway)
        return self.dispatch(state, intent, text)

    def dispatch(self, state: SessionState, intent: str, utterance: str) -> list[SessionEvent]:
        """Route a classified utterance to its handler; never drops one
        silently."""
        handler = self._handlers.get(intent)
        if handler is None:
            raise ValueError(f"no handler for intent {intent!r}")
        if intent in ("progress_feedback", "visual_qa"):
            state.engaged_since_reframe = True
        return handler(state, utterance)

    def _state_summary(self, state: SessionState) -> str:
        action = state.current_action
        return (
            f"step {state.step_index + 1} of {len(state.plan.steps)}, "
            f'current action: "{action.instruction}", '
            f"awaiting_confirmation: {state.awaiting_confirmation}"
        )

    # -- handlers ----------------------------------------------------------

    def _handle_navigation(self, state: SessionState, utterance: str) -> list[SessionEvent]:
        command = canonical_command(utterance)
        if command is None:
            if _BACK_HINT.search(utterance):
                command = "back"
            elif _REPEAT_HINT.search(utterance):
                command = "repeat"
            else:
                command = "next"
        return self.engine.navigate(state, command)

    def _handle_tips(self, state: SessionState, utterance: str) -> list[SessionEvent]:
        if self.kb is None:
            return [
                self.engine._emit(
                    state, "error", "No knowledge base is configured for suggestions."
                )
            ]
        try:
            result = suggest(
                state.current_action.instruction,
                state.profile,
                self.kb,
                k=self.engine.config.retrieval_k,
            )
        except GatewayError as err:
            logger.warning("suggestion failed: %s", err)
            return [
                self.engine._emit(
                    state, "error", "Suggestions are unavailable right now; try again shortly."
                )
            ]
        return [self.engine._emit(state, "suggestion", result.text)]

    def _handle_progress(self, state: SessionState, utterance: str) -> list[SessionEvent]:
        verdict = self.engine.batch_tick(state)
        if verdict is None:
            return [
                self.engine._emit(
                    state, "error", "I could not check your progress just now."
                )
            ]
        return [
            self.engine._emit(state, "answer", f"Status: {verdict.status}. {verdict.rationale}")
        ]

    def _handle_visual_qa(self, state: SessionState, utterance: str) -> list[SessionEvent]:
        if self.gateway is None or self.gateway.batch is None:
            return [self.engine._emit(state, "error", "Visual questions need a model backend.")]
        frames = self.engine._recent_frames(state)
        request = ModelRequest(
            kind="batch",
            prompt=visual_qa_prompt(utterance),
            images=tuple(ref for _, ref in frames),
            context_id=state.context_id,
        )
        try:
            text = self.gateway.complete(request).text.strip()
        except GatewayError as err:
            logger.warning("visual QA failed: %s", err)
            return [
                self.engine._emit(state, "error", "I could not analyze the camera view.")
            ]
        return [self.engine._emit(state, "answer", text)]

    def _handle_knowledge(self, state: SessionState, utterance: str) -> list[SessionEvent]:
        if self.gateway is None or self.gateway.streamer is None:
            return [self.engine._emit(state, "error", "Answers need a model backend.")]
        plan = state.plan
        context = (
            f"task: {plan.video.title}; current step: "
            f"{plan.steps[state.step_index].step_name}; current action: "
            f"{state.current_action.instruction}"
        )
        request = ModelRequest(
            kind="stream",
            prompt=knowledge_prompt(utterance, context),
            context_id=state.context_id,
        )
        try:
            response = self.gateway.stream(request, lambda chunk: None)
        except GatewayError as err:
            logger.warning("knowledge answer failed: %s", err)
            return [self.engine._emit(state, "error", "I could not answer that right now.")]
        if response.cancelled or not response.text.strip():
            return [self.engine._emit(state, "error", "The answer was interrupted.")]
        return [self.engine._emit(state, "answer", response.text.strip())]
