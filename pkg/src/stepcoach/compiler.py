"""End-to-end plan compilation: transcript -> roles -> hierarchy -> frames
-> descriptions -> criteria -> validated coach plan."""

from __future__ import annotations

import json
import logging
from pathlib import Path

from .config import Config
from .criteria import annotate_criteria, describe_demonstration, grounding_ratio
from .frames import (
    CaptionEmbedScorer,
    FrameSource,
    sample_frames,
    score_frames,
    select_relevant,
)
from .gateway import ModelGateway
from .hierarchy import build_hierarchy, single_verb_ratio
from .plan import CoachPlan, VideoInfo, validate_plan
from .transcript import (
    TranscriptWord,
    classify_roles,
    filter_sentences,
    ingest_transcript,
)

logger = logging.getLogger(__name__)


def render_metadata(metadata: dict | None) -> str:
    """Flatten optional recipe metadata (ingredients with amounts, tools)
    into the prompt-injected form."""
    if not metadata:
        return ""
    parts = []
    for key in ("ingredients", "materials", "tools"):
        values = metadata.get(key)
        if values:
            parts.append(f"{key}: {', '.join(str(v) for v in values)}")
    for key, value in metadata.items():
        if key not in ("ingredients", "materials", "tools", "title"):
            parts.append(f"{key}: {value}")
    return "; ".join(parts)


def compile_plan(
    words: list[TranscriptWord],
    gateway: ModelGateway,
    frame_source: FrameSource,
    title: str,
    metadata: dict | None = None,
    config: Config | None = None,
) -> CoachPlan:
    """Compile one video's transcript into a validated coach plan."""
    config = config or Config()
    sentences = classify_roles(ingest_transcript(words), gateway)
    retained = filter_sentences(sentences)
    meta_text = render_metadata(metadata)
    steps = build_hierarchy(retained, gateway, meta_text)

    scorer = CaptionEmbedScorer(gateway)
    for step in steps:
        for action in step.actions:
            frames = sample_frames(
                frame_source, action.start, action.end, config.sample_window_s
            )
            scored = score_frames(frames, action.instruction, scorer)
            kept = select_relevant(scored, config.threshold)
            if kept:
                action.demonstration_description = describe_demonstration(
                    action, kept, gateway
                )
            else:
                logger.warning(
                    "no frames for %r; description left empty", action.instruction[:40]
                )
    for step in steps:
        annotate_criteria(step, gateway, meta_text)

    plan = CoachPlan(
        video=VideoInfo(title=title, duration_s=frame_source.duration_s()),
        steps=steps,
    )
    validate_plan(plan)
    verb_ratio = single_verb_ratio(steps)
    if verb_ratio < 0.95:
        logger.warning("single-verb lint below 95%%: %.0f%%", verb_ratio * 100)
    for step in steps:
        ratio = grounding_ratio(step)
        if ratio < 1.0:
            logger.info(
                "criteria grounding for %r: %.0f%%", step.step_name, ratio * 100
            )
    return plan


def load_metadata(path: str | Path | None) -> dict | None:
    if not path:
        return None
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
