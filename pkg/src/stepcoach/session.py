"""Live assistance session: frame buffer, monitor verdicts, feedback events.

One logical event loop per session: frames, scheduler ticks, and utterances
are serialized into a single ordered event stream. The clock is injectable
(simulated for replays, wall for live serving) so the scheduler and the
event log are reproducible byte for byte.
"""

from __future__ import annotations

import logging
import re
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .config import Config
from .criteria import extract_target_count
from .errors import GatewayError, PlanValidationError
from .gateway import ModelGateway, ModelRequest
from .jsonutil import extract_json
from .knowledge import UserProfile
from .plan import Action, CoachPlan, validate_plan
from .prompts import narration_prompt, verdict_prompt

logger = logging.getLogger(__name__)

VERDICT_STATUSES = ("irrelevant", "in_progress", "complete", "mistake")

EVENT_KINDS = (
    "instruction",
    "demonstration_detail",
    "progress_update",
    "completion_prompt",
    "mistake_alert",
    "suggestion",
    "answer",
    "reframe_request",
    "error",
)

MOVE_ON_QUESTION = "Would you like to move on?"


class SimulatedClock:
    """Deterministic session clock driven by the replay loop."""

    def __init__(self, start: float = 0.0) -> None:
        self._now = start

    def now(self) -> float:
        return self._now

    def advance_to(self, t: float) -> None:
        if t < self._now:
            raise ValueError(f"clock cannot run backwards ({t} < {self._now})")
        self._now = t


class WallClock:
    def __init__(self) -> None:
        self._t0 = time.monotonic()

    def now(self) -> float:
        return time.monotonic() - self._t0


@dataclass(frozen=True)
class MonitorVerdict:
    status: str
    rationale: str
    repetition_count: int | None = None
    matched_mistake: str | None = None

    def __post_init__(self) -> None:
        if self.status not in VERDICT_STATUSES:
            raise ValueError(f"unknown verdict status {self.status!r}")


@dataclass(frozen=True)
class SessionEvent:
    kind: str
    text: str
    step_index: int
    action_index: int
    timestamp: float
    seq: int

    def to_wire(self) -> dict:
        return {
            "type": "event",
            "kind": self.kind,
            "text": self.text,
            "step_index": self.step_index,
            "action_index": self.action_index,
            "ts": self.timestamp,
        }


@dataclass
class TickRecord:
    """Trace of one scheduler tick: when it fired and what it carried."""

    t: float
    frame_count: int
    status: str | None


@dataclass
class SessionState:
    plan: CoachPlan
    profile: UserProfile
    clock: object
    step_index: int = 0
    action_index: int = 0
    narration_enabled: bool = True
    awaiting_confirmation: bool = False
    completed: bool = False
    context_id: str = "ctx-0"
    event_log: list[SessionEvent] = field(default_factory=list)
    frame_buffer: deque = field(default_factory=deque)
    tick_trace: list[TickRecord] = field(default_factory=list)
    last_verdict: MonitorVerdict | None = None
    consecutive_irrelevant: int = 0
    engaged_since_reframe: bool = False
    pending_mistakes: list[str] = field(default_factory=list)
    context_entries: int = 1
    _seq: int = 0
    _last_frame_ts: float = float("-inf")
    _last_kept_second: int | None = None

    @property
    def current_action(self) -> Action:
        return self.plan.steps[self.step_index].actions[self.action_index]

    def state_wire(self) -> dict:
        return {
            "type": "state",
            "step_index": self.step_index,
            "action_index": self.action_index,
            "narration_enabled": self.narration_enabled,
            "awaiting_confirmation": self.awaiting_confirmation,
        }


class SessionEngine:
    """Applies monitoring verdicts and user commands to a session state."""

    def __init__(self, gateway: ModelGateway | None, config: Config | None = None) -> None:
        self.gateway = gateway
        self.config = config or Config()
        # When set (scripted replays), supplies verdicts instead of the
        # gateway, for scheduled and on-demand ticks alike.
        self.verdict_source: Callable[[SessionState], MonitorVerdict | None] | None = None

    # -- lifecycle -----------------------------------------------------

    def start_session(
        self, plan: CoachPlan, profile: UserProfile | None = None, clock=None
    ) -> SessionState:
        """Validate the plan and open a session at step 0 / action 0.

        Emits the first action's instruction and demonstration detail.
        """
        validate_plan(plan)
        state = SessionState(
            plan=plan,
            profile=profile or UserProfile(),
            clock=clock or SimulatedClock(),
        )
        state.frame_buffer = deque(maxlen=max(5, self.config.frame_buffer_size))
        self._announce_action(state)
        return state

    def _emit(self, state: SessionState, kind: str, text: str) -> SessionEvent:
        assert kind in EVENT_KINDS, kind
        event = SessionEvent(
            kind=kind,
            text=text,
            step_index=state.step_index,
            action_index=state.action_index,
            timestamp=state.clock.now(),
            seq=state._seq,
        )
        state._seq += 1
        state.event_log.append(event)
        return event

    def _announce_action(self, state: SessionState) -> list[SessionEvent]:
        action = state.current_action
        return [
            self._emit(state, "instruction", action.instruction),
            self._emit(state, "demonstration_detail", action.demonstration_description),
        ]

    # -- frames --------------------------------------------------------

    def ingest_frame(self, state: SessionState, timestamp: float, image_ref: str) -> None:
        """Buffer a frame, thinning bursts to the first frame per second.

        Regressing timestamps are dropped with a warning.
        """
        if timestamp < state._last_frame_ts:
            logger.warning(
                "dropping out-of-order frame ts=%.3f < %.3f", timestamp, state._last_frame_ts
            )
            return
        state._last_frame_ts = timestamp
        second = int(timestamp)
        if state._last_kept_second is not None and second == state._last_kept_second:
            return
        state._last_kept_second = second
        state.frame_buffer.append((timestamp, image_ref))

    def _recent_frames(self, state: SessionState) -> list[tuple[float, str]]:
        n = min(self.config.monitor_frame_count, len(state.frame_buffer))
        return list(state.frame_buffer)[-n:] if n else []

    # -- monitoring ----------------------------------------------------

    def batch_tick(
        self, state: SessionState, verdict_override: MonitorVerdict | None = None
    ) -> MonitorVerdict | None:
        """One scheduled (or on-demand) monitoring judgment.

        Carries the <=5 most recent frames. A backend timeout skips the
        tick; malformed output coerces to an irrelevant verdict. The tick
        is always recorded in the trace.
        """
        frames = self._recent_frames(state)
        verdict: MonitorVerdict | None
        if verdict_override is not None:
            verdict = verdict_override
        elif self.verdict_source is not None:
            verdict = self.verdict_source(state)
        elif self.gateway is None or self.gateway.batch is None:
            verdict = None
        else:
            verdict = self._gateway_verdict(state, frames)
        if verdict is not None and verdict.status == "mistake" and verdict.matched_mistake is None:
            verdict = self._match_mistake(state, verdict)
        state.tick_trace.append(
            TickRecord(
                t=state.clock.now(),
                frame_count=len(frames),
                status=verdict.status if verdict else None,
            )
        )
        return verdict

    def _gateway_verdict(
        self, state: SessionState, frames: list[tuple[float, str]]
    ) -> MonitorVerdict | None:
        action = state.current_action
        prompt = verdict_prompt(
            action.instruction,
            action.action_type,
            action.in_progress_criteria,
            action.completion_criteria,
            action.mistake_criteria,
            state.last_verdict.status if state.last_verdict else "",
            len(frames),
        )
        request = ModelRequest(
            kind="batch",
            prompt=prompt,
            images=tuple(ref for _, ref in frames),
            context_id=state.context_id,
        )
        try:
            text = self.gateway.complete(request).text
        except GatewayError as err:
            logger.warning("tick skipped: %s", err)
            return None
        return self.parse_verdict(text, state)

    def parse_verdict(self, text: str, state: SessionState) -> MonitorVerdict:
        """Schema-validate model output; anything unusable coerces to an
        irrelevant verdict with rationale "unparseable"."""
        unparseable = MonitorVerdict(status="irrelevant", rationale="unparseable")
        try:
            data = extract_json(text)
        except GatewayError:
            return unparseable
        if not isinstance(data, dict):
            return unparseable
        status = str(data.get("status", "")).strip().lower().replace("-", "_")
        if status not in VERDICT_STATUSES:
            return unparseable
        rationale = str(data.get("rationale", "")).strip()
        count = data.get("repetition_count")
        if not isinstance(count, int) or state.current_action.action_type != "iterative":
            count = None
        if status == "mistake":
            return self._match_mistake(
                state, MonitorVerdict(status="mistake", rationale=rationale)
            )
        return MonitorVerdict(status=status, rationale=rationale, repetition_count=count)

    def _match_mistake(self, state: SessionState, verdict: MonitorVerdict) -> MonitorVerdict:
        """Ground a mistake verdict in the action's mistake criteria.

        The criterion sharing the most content words with the rationale is
        cited; with no overlap at all the verdict is unusable and coerces
        to irrelevant.
        """
        criteria = state.current_action.mistake_criteria
        best, best_score = None, 0
        rationale_tokens = _tokens(verdict.rationale)
        for criterion in criteria:
            score = len(_tokens(criterion) & rationale_tokens)
            if score > best_score:
                best, best_score = criterion, score
        if best is None:
            logger.warning("mistake verdict cites no criterion: %r", verdict.rationale[:60])
            return MonitorVerdict(status="irrelevant", rationale="unparseable")
        return MonitorVerdict(
            status="mistake",
            rationale=verdict.rationale,
            repetition_count=verdict.repetition_count,
            matched_mistake=best,
        )

    # -- verdict application -------------------------------------------

    def apply_verdict(self, state: SessionState, verdict: MonitorVerdict) -> list[SessionEvent]:
        """Translate one verdict into feedback events per the action type.

        irrelevant pauses guidance (possibly requesting a reframe after
        repeated misses while the user is engaged); punctual actions only
        confirm completion; duplicate completion prompts are suppressed
        while a confirmation is pending.
        """
        state.last_verdict = verdict
        events: list[SessionEvent] = []
        if verdict.status == "irrelevant":
            state.consecutive_irrelevant += 1
            if (
                state.consecutive_irrelevant >= self.config.reframe_after_ticks
                and state.engaged_since_reframe
            ):
                events.append(
                    self._emit(
                        state,
                        "reframe_request",
                        "I can't see your task right now. Please adjust your view.",
                    )
                )
                state.consecutive_irrelevant = 0
                state.engaged_since_reframe = False
            return events
        state.consecutive_irrelevant = 0

        action = state.current_action
        if verdict.status == "in_progress":
            if action.action_type == "punctual" or not state.narration_enabled:
                return events
            if action.action_type == "iterative":
                text = self._iterative_text(action, verdict)
            else:
                text = self._narration_text(state, verdict)
                if text is None:
                    return events
            events.append(self._emit(state, "progress_update", text))
            return events

        if verdict.status == "complete":
            if state.awaiting_confirmation:
                return events
            state.awaiting_confirmation = True
            text = f"You seem to be done: {verdict.rationale}"
            if action.nonvisual_completion_criteria:
                checks = " ".join(action.nonvisual_completion_criteria)
                text += f" You can also check without looking: {checks}"
            text += f" {MOVE_ON_QUESTION}"
            events.append(self._emit(state, "completion_prompt", text))
            return events

        # mistake
        alert = f"Possible mistake: {verdict.matched_mistake} {verdict.rationale}".strip()
        if self.config.mistake_mode == "deferred":
            state.pending_mistakes.append(alert)
            return events
        events.append(self._emit(state, "mistake_alert", alert))
        return events

    def _iterative_text(self, action: Action, verdict: MonitorVerdict) -> str:
        if verdict.repetition_count is None:
            return verdict.rationale
        target = extract_target_count(action.instruction)
        if target is None:
            return f"{verdict.repetition_count} so far. {verdict.rationale}"
        return f"{verdict.repetition_count} of {target}. {verdict.rationale}"

    def _narration_text(self, state: SessionState, verdict: MonitorVerdict) -> str | None:
        """Durative progress text, preferring the streaming backend.

        Falls back to the verdict rationale when no streamer is configured
        or it fails; returns None when the stream was cancelled mid-way
        (dropped narration is acceptable).
        """
        if self.gateway is None or self.gateway.streamer is None:
            return verdict.rationale
        frames = self._recent_frames(state)
        request = ModelRequest(
            kind="stream",
            prompt=narration_prompt(state.current_action.instruction, len(frames)),
            images=tuple(ref for _, ref in frames),
            context_id=state.context_id,
        )
        try:
            response = self.gateway.stream(request, lambda chunk: None)
        except GatewayError:
            return verdict.rationale
        if response.cancelled:
            return None
        return response.text or verdict.rationale

    # -- navigation ----------------------------------------------------

    def navigate(self, state: SessionState, command: str) -> list[SessionEvent]:
        """Move to the adjacent action, or repeat the current one.

        Boundaries clamp with an informational event; crossing a step
        boundary resets the model context.
        """
        if command == "repeat":
            return self._announce_action(state)
        if command not in ("next", "back"):
            raise ValueError(f"unknown navigation command {command!r}")
        steps = state.plan.steps
        si, ai = state.step_index, state.action_index
        if command == "next":
            if ai + 1 < len(steps[si].actions):
                ai += 1
            elif si + 1 < len(steps):
                si, ai = si + 1, 0
            else:
                return [self._emit(state, "answer", "You are already at the last action.")]
        else:
            if ai > 0:
                ai -= 1
            elif si > 0:
                si = si - 1
                ai = len(steps[si].actions) - 1
            else:
                return [self._emit(state, "answer", "You are already at the first action.")]
        return self._move_to(state, si, ai)

    def _move_to(self, state: SessionState, step_index: int, action_index: int) -> list[SessionEvent]:
        events: list[SessionEvent] = []
        crossing = step_index != state.step_index
        if crossing and self.config.mistake_mode == "deferred":
            for alert in state.pending_mistakes:
                events.append(self._emit(state, "mistake_alert", alert))
            state.pending_mistakes.clear()
        state.step_index = step_index
        state.action_index = action_index
        state.awaiting_confirmation = False
        state.consecutive_irrelevant = 0
        state.engaged_since_reframe = False
        state.last_verdict = None
        if crossing:
            old = state.context_id
            state.context_id = f"ctx-{state.context_entries}"
            state.context_entries += 1
            if self.gateway is not None:
                self.gateway.cancel(old)
        events.extend(self._announce_action(state))
        return events

    def toggle_narration(self, state: SessionState, on: bool) -> None:
        state.narration_enabled = bool(on)

    def confirm_advance(self, state: SessionState, answer: str) -> list[SessionEvent]:
        """Resolve a pending completion prompt.

        yes advances (or closes the session at the very end); no resumes
        monitoring the current action.
        """
        if not state.awaiting_confirmation:
            raise ValueError("no confirmation pending; route as an utterance")
        if answer not in ("yes", "no"):
            raise ValueError(f"confirmation answer must be yes/no, got {answer!r}")
        state.awaiting_confirmation = False
        if answer == "no":
            return []
        steps = state.plan.steps
        at_end = (
            state.step_index == len(steps) - 1
            and state.action_index == len(steps[-1].actions) - 1
        )
        if at_end:
            state.completed = True
            return [
                self._emit(
                    state, "answer", "That was the last action. The session is complete."
                )
            ]
        return self.navigate(state, "next")


def _tokens(text: str) -> set[str]:
    return {
        t
        for t in re.findall(r"[a-z0-9']+", text.lower())
        if t not in _VERDICT_STOPWORDS
    }


_VERDICT_STOPWORDS = frozenset(
    """a an the is are was were be been it its this that in on of to from
    with and or not no has have had user person you your""".split()
)


def check_event_invariants(events: list[SessionEvent]) -> None:
    """Assert the session-wide event invariants; raises on violation."""
    for prev, cur in zip(events, events[1:]):
        if cur.timestamp < prev.timestamp:
            raise PlanValidationError("event timestamps regress")
        if cur.seq <= prev.seq:
            raise PlanValidationError("event sequence numbers must increase")
    for event in events:
        if event.kind not in EVENT_KINDS:
            raise PlanValidationError(f"unknown event kind {event.kind!r}")
        if event.kind == "completion_prompt" and not event.text.endswith(MOVE_ON_QUESTION):
            raise PlanValidationError("completion prompts must end with the move-on question")
