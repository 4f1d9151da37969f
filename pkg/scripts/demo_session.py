#!/usr/bin/env python3
"""Offline walkthrough: compile the bundled sample video, then replay a
scripted session against the three-step demo plan and print the timeline."""

from __future__ import annotations

import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
DATA = REPO / "data"

from stepcoach.cli import main as cli_main  # noqa: E402
from stepcoach.config import Config  # noqa: E402
from stepcoach.plan import load_plan  # noqa: E402
from stepcoach.runner import ReplayFixture, replay_plan  # noqa: E402
from stepcoach.session import SessionEngine  # noqa: E402


def main() -> int:
    out = REPO / "demo_plan.json"
    code = cli_main(
        [
            "compile",
            "--backend", "mock",
            "--fixtures", str(DATA / "fixtures" / "sample_compile.json"),
            "--transcript", str(DATA / "sample" / "transcript.json"),
            "--metadata", str(DATA / "sample" / "metadata.json"),
            "--video", "data/sample/cookies.mp4",
            "--out", str(out),
        ]
    )
    if code != 0:
        return code
    plan = load_plan(out)
    print(f"\ncompiled {plan.video.title!r}:")
    for step in plan.steps:
        print(f"  - {step.step_name}: {len(step.actions)} actions, tools {step.tools}")

    print("\nreplaying the scripted bacon session:")
    fixture = ReplayFixture.load(DATA / "fixtures" / "state_machine_replay.json")
    events = replay_plan(
        load_plan(DATA / "sample" / "plan_3step.json"), fixture, SessionEngine(None, Config())
    )
    for event in events:
        print(f"  t={event.timestamp:5.1f}  {event.kind:<21} {event.text[:76]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
