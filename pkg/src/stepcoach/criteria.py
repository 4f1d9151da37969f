"""Enrich actions with demonstration descriptions, types, and status criteria.

Typing and criteria come from one structured prompt per step; the validator
enforces the schema rules (punctual actions carry no in-progress criteria,
completion criteria non-empty and disjoint from in-progress) with a single
repair re-prompt that includes the validator's error text.
"""

from __future__ import annotations

import json
import logging
import re
from typing import Sequence

from .errors import CompileError, DecodeError, GatewayError, PlanValidationError
from .frames import FrameSample
from .gateway import ModelGateway, ModelRequest
from .jsonutil import extract_json
from .plan import ACTION_TYPES, Action, Step
from .prompts import criteria_prompt, description_prompt

logger = logging.getLogger(__name__)

APPEARANCE_LINT_WORDS = (
    "shirt", "dress", "apron", "hair", "wearing", "outfit", "background",
    "camera angle", "decor", "tattoo", "jewelry",
)

_DURATIVE_RE = re.compile(r"\buntil\b|\bfor\s+\d+\s*(?:seconds?|minutes?|hours?)\b", re.I)
_NUMBER_RE = re.compile(
    r"\b(\d+)\b|\b(two|three|four|five|six|seven|eight|nine|ten)\b", re.I
)
_NUMBER_WORDS = {
    "two": 2, "three": 3, "four": 4, "five": 5, "six": 6, "seven": 7,
    "eight": 8, "nine": 9, "ten": 10,
}


def describe_demonstration(
    action: Action,
    kept_frames: Sequence[FrameSample],
    gateway: ModelGateway,
) -> str:
    """Synthesize a demonstration description from kept frames + narration.

    Backend failure degrades to an empty description with a warning; lint
    hits (presenter appearance, background) are logged, not fatal.
    """
    if not kept_frames:
        raise ValueError("describe_demonstration needs at least one kept frame")
    narration = " ".join([action.instruction, *action.supplementary])
    prompt = description_prompt(action.instruction, narration, len(kept_frames))
    request = ModelRequest(
        kind="batch",
        prompt=prompt,
        images=tuple(f.image_ref for f in kept_frames),
    )
    try:
        text = gateway.complete(request).text.strip()
    except GatewayError as err:
        logger.warning("description failed for %r: %s", action.instruction[:40], err)
        return ""
    for hit in lint_description(text):
        logger.warning("description lint for %r: mentions %r", action.instruction[:40], hit)
    return text


def lint_description(text: str) -> list[str]:
    lowered = text.lower()
    return [w for w in APPEARANCE_LINT_WORDS if w in lowered]


def coerce_action_type(label: str, instruction: str) -> str:
    """Keyword fallback when the model's label is outside the three types."""
    cleaned = label.strip().lower()
    if cleaned in ACTION_TYPES:
        return cleaned
    logger.warning("action type %r outside set, coercing from %r", label, instruction[:40])
    if _DURATIVE_RE.search(instruction):
        return "durative"
    match = _NUMBER_RE.search(instruction)
    if match:
        value = int(match.group(1)) if match.group(1) else _NUMBER_WORDS[match.group(2).lower()]
        if value >= 2:
            return "iterative"
    return "punctual"


def extract_target_count(instruction: str) -> int | None:
    """Repetition target for iterative actions ("Add 3 eggs" -> 3)."""
    match = _NUMBER_RE.search(instruction)
    if not match:
        return None
    value = int(match.group(1)) if match.group(1) else _NUMBER_WORDS[match.group(2).lower()]
    return value if value >= 2 else None


def _step_payload(step: Step) -> str:
    return json.dumps(
        {
            "step_name": step.step_name,
            "tools": step.tools,
            "materials": step.materials,
            "actions": [
                {
                    "instruction": a.instruction,
                    "video_description": a.demonstration_description,
                    "supplementary": a.supplementary,
                }
                for a in step.actions
            ],
        },
        ensure_ascii=False,
    )


def _parse_annotation(text: str, step: Step) -> list[dict]:
    data = extract_json(text)
    if isinstance(data, dict):
        data = data.get("actions", data)
    if not isinstance(data, list):
        raise PlanValidationError("annotation output must carry an action list")
    if len(data) != len(step.actions):
        raise PlanValidationError(
            f"annotation returned {len(data)} actions, step has {len(step.actions)}"
        )
    return data


def _apply_annotation(raw: list[dict], step: Step) -> list[str]:
    """Write annotations onto the step's actions; return validator errors."""
    errors: list[str] = []
    for i, (entry, action) in enumerate(zip(raw, step.actions)):
        where = f"{step.step_name!r} action {i}"
        if not isinstance(entry, dict):
            errors.append(f"{where}: not an object")
            continue
        label = str(entry.get("type", entry.get("action_type", "")))
        action.action_type = coerce_action_type(label, action.instruction)
        action.in_progress_criteria = [str(c) for c in entry.get("in_progress_criteria", [])]
        action.completion_criteria = [str(c) for c in entry.get("completion_criteria", [])]
        action.mistake_criteria = [str(c) for c in entry.get("mistake_criteria", [])]
        action.nonvisual_completion_criteria = [
            str(c) for c in entry.get("nonvisual_completion_criteria", [])
        ]
        if not action.completion_criteria:
            errors.append(f"{where}: completion_criteria empty")
        if action.action_type == "punctual" and action.in_progress_criteria:
            errors.append(f"{where}: punctual action carries in_progress_criteria")
        overlap = set(action.in_progress_criteria) & set(action.completion_criteria)
        if overlap:
            errors.append(f"{where}: criteria overlap {sorted(overlap)}")
    return errors


def annotate_criteria(step: Step, gateway: ModelGateway, metadata: str = "") -> Step:
    """Populate action types and status criteria for one step.

    One structured call covers the whole step; on validation failure the
    call is repeated once with the validator's error text appended, after
    which a :class:`CompileError` names the step.
    """
    prompt = criteria_prompt(_step_payload(step), metadata)
    errors: list[str] = ["annotation missing"]
    for attempt in range(2):
        request = ModelRequest(kind="batch", prompt=prompt)
        try:
            raw = _parse_annotation(gateway.complete(request).text, step)
            errors = _apply_annotation(raw, step)
        except (DecodeError, PlanValidationError) as err:
            errors = [str(err)]
        if not errors:
            return step
        logger.warning("criteria invalid for %r: %s", step.step_name, "; ".join(errors))
        prompt = (
            f"{criteria_prompt(_step_payload(step), metadata)}\n\n"
            f"Your previous output failed validation: {'; '.join(errors)}. "
            "Output corrected JSON only."
        )
    raise CompileError(
        f"criteria for step {step.step_name!r} invalid after repair: {'; '.join(errors)}"
    )


def grounding_ratio(step: Step) -> float:
    """Fraction of completion criteria sharing a content word with their
    action's instruction or description (soft lint, reported only)."""
    checked = 0
    grounded = 0
    for action in step.actions:
        source_tokens = _content_tokens(
            f"{action.instruction} {action.demonstration_description}"
        )
        for criterion in action.completion_criteria:
            checked += 1
            if _content_tokens(criterion) & source_tokens:
                grounded += 1
    return grounded / checked if checked else 1.0


_STOPWORDS = frozenset(
    """a an the is are was were be been being it its this that these those
    in on into onto of to from with and or but not no until for as at by
    user person visible looks look seem seems""".split()
)


def _content_tokens(text: str) -> set[str]:
    return {
        t for t in re.findall(r"[a-z0-9']+", text.lower()) if t not in _STOPWORDS
    }
