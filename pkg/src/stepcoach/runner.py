"""Replay fixtures: drive a session from a timed input file.

A fixture is an ordered list of {at_s, type, payload} entries consumed
against the simulated clock. Scheduler ticks fire every period on the dot;
a tick due at the same instant as an input runs first. Scripted verdict
entries stand in for the monitoring backend and become eligible at their
timestamp, which keeps replays byte-reproducible.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from .intents import IntentRouter
from .knowledge import UserProfile
from .plan import CoachPlan
from .session import (
    MonitorVerdict,
    SessionEngine,
    SessionEvent,
    SessionState,
    SimulatedClock,
)

logger = logging.getLogger(__name__)

INPUT_TYPES = ("frame", "utterance", "verdict", "command")


@dataclass(frozen=True)
class ReplayInput:
    at_s: float
    type: str
    payload: dict


@dataclass
class ReplayFixture:
    duration_s: float
    inputs: list[ReplayInput]

    @classmethod
    def load(cls, path: str | Path) -> "ReplayFixture":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        inputs = []
        for i, raw in enumerate(data.get("inputs", [])):
            if raw.get("type") not in INPUT_TYPES:
                raise ValueError(f"inputs[{i}] has unknown type {raw.get('type')!r}")
            inputs.append(
                ReplayInput(
                    at_s=float(raw["at_s"]),
                    type=raw["type"],
                    payload=dict(raw.get("payload", {})),
                )
            )
        inputs.sort(key=lambda e: e.at_s)  # stable: same-time entries keep file order
        duration = float(data.get("duration_s", inputs[-1].at_s if inputs else 0.0))
        return cls(duration_s=duration, inputs=inputs)


class SessionRunner:
    """Owns one session's clock, scripted verdicts, and event fan-out."""

    def __init__(
        self,
        engine: SessionEngine,
        router: IntentRouter,
        plan: CoachPlan,
        profile: UserProfile | None = None,
    ) -> None:
        self.engine = engine
        self.router = router
        self.clock = SimulatedClock()
        self.state: SessionState = engine.start_session(plan, profile, clock=self.clock)
        self._scripted_verdicts: deque[tuple[float, MonitorVerdict]] = deque()

    def queue_verdict(self, at_s: float, verdict: MonitorVerdict) -> None:
        """Script a verdict; eligible at any tick from ``at_s`` on. Once any
        verdict is queued the session stops consulting the gateway."""
        self._scripted_verdicts.append((at_s, verdict))
        self.engine.verdict_source = self._pop_eligible_verdict

    def _pop_eligible_verdict(self, _state=None) -> MonitorVerdict | None:
        if self._scripted_verdicts and self._scripted_verdicts[0][0] <= self.clock.now():
            return self._scripted_verdicts.popleft()[1]
        return None

    def _tick(self) -> list[SessionEvent]:
        verdict = self.engine.batch_tick(self.state)
        if verdict is None:
            return []
        return self.engine.apply_verdict(self.state, verdict)

    def run(self, fixture: ReplayFixture) -> list[SessionEvent]:
        """Consume the fixture; returns events emitted during the run
        (the opening announcement is already in the state's event log)."""
        produced: list[SessionEvent] = []
        mark = len(self.state.event_log)
        period = self.engine.config.tick_period_s
        next_tick = period
        for entry in fixture.inputs:
            if entry.type == "verdict":
                self.queue_verdict(entry.at_s, _verdict_from_payload(entry.payload))

        def fire_due_ticks(until: float) -> None:
            nonlocal next_tick
            while next_tick <= until and next_tick <= fixture.duration_s:
                self.clock.advance_to(next_tick)
                self._tick()
                next_tick += period

        for entry in fixture.inputs:
            fire_due_ticks(entry.at_s)
            self.clock.advance_to(max(entry.at_s, self.clock.now()))
            self._process(entry)
        fire_due_ticks(fixture.duration_s)
        produced.extend(self.state.event_log[mark:])
        return produced

    def _process(self, entry: ReplayInput) -> None:
        if entry.type == "frame":
            self.engine.ingest_frame(
                self.state, entry.at_s, str(entry.payload.get("image_ref", ""))
            )
        elif entry.type == "utterance":
            self.router.handle_utterance(self.state, str(entry.payload.get("text", "")))
        elif entry.type == "command":
            self.run_command(str(entry.payload.get("name", "")))
        # verdict entries were drained into the queue up front

    def run_command(self, name: str) -> list[SessionEvent]:
        state = self.state
        if name in ("next", "back", "repeat"):
            return self.engine.navigate(state, name)
        if name in ("yes", "no"):
            if not state.awaiting_confirmation:
                logger.warning("%s command with no confirmation pending; ignored", name)
                return []
            return self.engine.confirm_advance(state, name)
        if name == "narration_on":
            self.engine.toggle_narration(state, True)
            return []
        if name == "narration_off":
            self.engine.toggle_narration(state, False)
            return []
        if name == "speech_start":
            self.router.on_speech_start(state)
            return []
        logger.warning("unknown command %r ignored", name)
        return []


def _verdict_from_payload(payload: dict) -> MonitorVerdict:
    count = payload.get("repetition_count")
    return MonitorVerdict(
        status=str(payload["status"]),
        rationale=str(payload.get("rationale", "")),
        repetition_count=int(count) if isinstance(count, int) else None,
        matched_mistake=payload.get("matched_mistake"),
    )


def events_to_jsonl(events: list[SessionEvent]) -> str:
    """Deterministic wire-format serialization, one event per line."""
    return "".join(
        json.dumps(e.to_wire(), ensure_ascii=False, separators=(", ", ": ")) + "\n"
        for e in events
    )


def replay_plan(
    plan: CoachPlan,
    fixture: ReplayFixture,
    engine: SessionEngine,
    router_factory=None,
    profile: UserProfile | None = None,
) -> list[SessionEvent]:
    """One-shot replay: fresh session, run fixture, return the full event
    log including the opening announcement."""
    router = (
        router_factory(engine)
        if router_factory is not None
        else IntentRouter(engine, None, engine.gateway)
    )
    runner = SessionRunner(engine, router, plan, profile)
    runner.run(fixture)
    return runner.state.event_log
