#!/usr/bin/env python3
"""Regenerate every bundled sample asset under data/.

Run after changing prompt builders, the sample content in
stepcoach.fixturegen, or the replay semantics; commits of data/ should
always match this script's output (tests enforce it).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]

from stepcoach.compiler import compile_plan  # noqa: E402
from stepcoach.config import Config  # noqa: E402
from stepcoach.fixturegen import (  # noqa: E402
    EVAL_DESC_CASES,
    EVAL_FRAME_LABELS,
    EVAL_VERDICTS,
    SAMPLE_DURATION,
    SAMPLE_METADATA,
    SAMPLE_TITLE,
    SAMPLE_VIDEO_ID,
    bacon_plan,
    recording_gateway,
    sample_transcript_payload,
    sample_words,
    scheduler_fixture_payload,
    serve_demo_fixture,
    state_machine_fixture_payload,
)
from stepcoach.frames import SyntheticFrameSource  # noqa: E402
from stepcoach.runner import ReplayFixture, events_to_jsonl, replay_plan  # noqa: E402
from stepcoach.session import SessionEngine  # noqa: E402


def write_json(path: Path, payload, *, indent: int = 2) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, indent=indent, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    print(f"wrote {path.relative_to(REPO)}")


def main() -> int:
    data = REPO / "data"

    write_json(data / "sample" / "transcript.json", sample_transcript_payload())
    write_json(data / "sample" / "metadata.json", SAMPLE_METADATA)

    gateway, backend = recording_gateway()
    source = SyntheticFrameSource(SAMPLE_VIDEO_ID, SAMPLE_DURATION)
    plan = compile_plan(
        sample_words(), gateway, source, SAMPLE_TITLE, SAMPLE_METADATA, Config()
    )
    (data / "sample" / "plan.json").parent.mkdir(parents=True, exist_ok=True)
    plan.save(data / "sample" / "plan.json")
    print(f"wrote {Path('data/sample/plan.json')}")
    write_json(data / "fixtures" / "sample_compile.json", backend.recorded)

    demo = bacon_plan()
    demo.save(data / "sample" / "plan_3step.json")
    print("wrote data/sample/plan_3step.json")
    write_json(data / "fixtures" / "state_machine_replay.json", state_machine_fixture_payload())
    write_json(data / "fixtures" / "scheduler_replay.json", scheduler_fixture_payload())
    write_json(data / "fixtures" / "serve_demo.json", serve_demo_fixture())

    fixture = ReplayFixture.load(data / "fixtures" / "state_machine_replay.json")
    events = replay_plan(demo, fixture, SessionEngine(None, Config()))
    golden = data / "golden" / "state_machine_events.jsonl"
    golden.parent.mkdir(parents=True, exist_ok=True)
    golden.write_text(events_to_jsonl(events), encoding="utf-8")
    print(f"wrote {golden.relative_to(REPO)} ({len(events)} events)")

    eval_dir = data / "eval"
    eval_dir.mkdir(parents=True, exist_ok=True)
    header = "frame_id,action_id,action_type,fov,gold_status"
    rows = [",".join(row) for row in EVAL_FRAME_LABELS]
    (eval_dir / "frame_labels.csv").write_text(
        "\n".join([header, *rows]) + "\n", encoding="utf-8"
    )
    print("wrote data/eval/frame_labels.csv")
    write_json(eval_dir / "toy_verdicts.json", EVAL_VERDICTS)
    (eval_dir / "desc_cases.jsonl").write_text(
        "".join(json.dumps(case, ensure_ascii=False) + "\n" for case in EVAL_DESC_CASES),
        encoding="utf-8",
    )
    print("wrote data/eval/desc_cases.jsonl")
    return 0


if __name__ == "__main__":
    sys.exit(main())
