"""Group retained transcript sentences into a step/action hierarchy.

One model call per video produces the raw structure; this module owns the
deterministic parts: schema validation (with a single retry), conservation
checks against the retained Method sentences, supplementary attachment by
temporal midpoint, and boundary normalization so consecutive steps tile
the instructional timeline.
"""

from __future__ import annotations

import logging
import re
from typing import Sequence

from .errors import DecodeError, EmptyPlanError, PlanValidationError
from .gateway import ModelGateway, ModelRequest
from .jsonutil import extract_json
from .plan import Action, Step
from .prompts import hierarchy_prompt
from .transcript import TranscriptSentence

logger = logging.getLogger(__name__)

ATTACHABLE_ROLES = frozenset({"Supplementary", "Explanation", "Description"})

_VERB_SPLIT_RE = re.compile(r"\b(?:and then|and|then)\b", re.IGNORECASE)


def transcript_lines(sentences: Sequence[TranscriptSentence]) -> list[str]:
    return [f"[{s.start:.1f}-{s.end:.1f}] ({s.role}) {s.text}" for s in sentences]


def build_hierarchy(
    sentences: Sequence[TranscriptSentence],
    gateway: ModelGateway,
    metadata: str = "",
) -> list[Step]:
    """Turn retained, role-labeled sentences into ordered steps.

    Raises :class:`EmptyPlanError` when no Method sentence remains, and
    :class:`PlanValidationError` when the model output stays invalid after
    one retry.
    """
    method = [s for s in sentences if s.role == "Method"]
    if not method:
        raise EmptyPlanError("no Method sentences; nothing to compile")

    prompt = hierarchy_prompt(transcript_lines(sentences), metadata)
    request = ModelRequest(kind="batch", prompt=prompt)
    last_error: Exception | None = None
    for attempt in range(2):
        response = gateway.complete(request)
        try:
            steps = _parse_steps(response.text)
            _check_conservation(steps, method)
            # attach against source timestamps, then tile the timeline
            _attach_supplementary(steps, sentences)
            _normalize(steps)
            return steps
        except (DecodeError, PlanValidationError) as err:
            last_error = err
            logger.warning("hierarchy output invalid (attempt %d): %s", attempt + 1, err)
    raise PlanValidationError(f"hierarchy output invalid after retry: {last_error}")


def _parse_steps(text: str) -> list[Step]:
    data = extract_json(text)
    if isinstance(data, dict):
        data = data.get("steps", data)
    if not isinstance(data, list) or not data:
        raise PlanValidationError("hierarchy output must be a non-empty step list")
    steps: list[Step] = []
    for i, raw in enumerate(data):
        where = f"steps[{i}]"
        if not isinstance(raw, dict) or not str(raw.get("step_name", "")).strip():
            raise PlanValidationError(f"{where} missing step_name")
        actions = []
        for j, a in enumerate(raw.get("actions", [])):
            awhere = f"{where}.actions[{j}]"
            if not isinstance(a, dict) or not str(a.get("instruction", "")).strip():
                raise PlanValidationError(f"{awhere} missing instruction")
            try:
                start, end = float(a["start"]), float(a["end"])
            except (KeyError, TypeError, ValueError):
                raise PlanValidationError(f"{awhere} needs numeric start/end")
            if not 0 <= start <= end:
                raise PlanValidationError(f"{awhere} has invalid span [{start}, {end}]")
            actions.append(
                Action(
                    instruction=str(a["instruction"]).strip(),
                    start=start,
                    end=end,
                    supplementary=[str(s) for s in a.get("supplementary", [])],
                )
            )
        if not actions:
            logger.warning("dropping step %r: no actions", raw.get("step_name"))
            continue
        if [a.start for a in actions] != sorted(a.start for a in actions):
            raise PlanValidationError(f"{where} actions not ordered by start")
        tools = [str(t) for t in raw.get("tools", [])]
        materials = [str(m) for m in raw.get("materials", [])]
        steps.append(
            Step(
                step_name=str(raw["step_name"]).strip(),
                actions=actions,
                tools=tools,
                materials=materials,
                new_tools=[t for t in raw.get("new_tools", []) if t in tools],
                new_materials=[m for m in raw.get("new_materials", []) if m in materials],
            )
        )
    if not steps:
        raise PlanValidationError("hierarchy output contains no step with actions")
    for prev, cur in zip(steps, steps[1:]):
        if cur.actions[0].start < prev.actions[-1].end:
            raise PlanValidationError(
                f"steps {prev.step_name!r} and {cur.step_name!r} overlap"
            )
    return steps


def _overlaps(a_start: float, a_end: float, b_start: float, b_end: float) -> bool:
    return a_start <= b_end and b_start <= a_end


def _check_conservation(steps: list[Step], method: Sequence[TranscriptSentence]) -> None:
    """Every Method sentence must map to >=1 action and vice versa."""
    actions = [a for s in steps for a in s.actions]
    for sentence in method:
        if not any(_overlaps(a.start, a.end, sentence.start, sentence.end) for a in actions):
            raise PlanValidationError(
                f"Method sentence {sentence.text[:50]!r} produced no action"
            )
    for action in actions:
        if not any(
            _overlaps(action.start, action.end, s.start, s.end) for s in method
        ):
            raise PlanValidationError(
                f"action {action.instruction[:50]!r} has no source sentence"
            )


def _normalize(steps: list[Step]) -> None:
    """Recompute step spans from actions and tile consecutive steps.

    A gap before a step is closed by extending its leading action group
    (all actions sharing the first action's start, i.e. a multi-action
    split) backward to the previous step's end, keeping their timestamps
    equal.
    """
    for step in steps:
        step.start = step.actions[0].start
        step.end = step.actions[-1].end
    for prev, cur in zip(steps, steps[1:]):
        if cur.start > prev.end:
            lead = cur.actions[0].start
            for action in cur.actions:
                if action.start == lead:
                    action.start = prev.end
            cur.start = prev.end


def _attach_supplementary(
    steps: list[Step], sentences: Sequence[TranscriptSentence]
) -> None:
    """Attach tips/warnings/explanations to the temporally nearest action.

    Nearest by midpoint distance, ties to the earlier action; duplicates
    already emitted by the model are skipped.
    """
    actions = [a for s in steps for a in s.actions]
    for sentence in sentences:
        if sentence.role not in ATTACHABLE_ROLES:
            continue
        mid = (sentence.start + sentence.end) / 2.0
        target = min(
            enumerate(actions),
            key=lambda ia: (abs(mid - (ia[1].start + ia[1].end) / 2.0), ia[0]),
        )[1]
        if sentence.text not in target.supplementary:
            target.supplementary.append(sentence.text)


def count_imperative_verbs(instruction: str) -> int:
    """Heuristic top-level verb count for the single-verb lint.

    Counts coordinate clauses introduced by and/then that start with a
    plausible verb; reported, never asserted hard.
    """
    clauses = [c.strip() for c in _VERB_SPLIT_RE.split(instruction) if c.strip()]
    count = 0
    for i, clause in enumerate(clauses):
        first = re.sub(r"[^A-Za-z]", "", clause.split()[0]) if clause.split() else ""
        if not first:
            continue
        if i == 0:
            count += 1
        elif first.lower() not in _NONVERB_STARTERS:
            count += 1
    return count


_NONVERB_STARTERS = frozenset(
    """a an the this that it its his her their some all one two three four five
    six seven eight nine ten water flour sugar salt butter oil bowl pan oven
    until for with into onto in on of to from
    gently slowly carefully evenly fully smooth golden brown""".split()
)


def single_verb_ratio(steps: Sequence[Step]) -> float:
    actions = [a for s in steps for a in s.actions]
    if not actions:
        return 1.0
    ok = sum(1 for a in actions if count_imperative_verbs(a.instruction) == 1)
    return ok / len(actions)
