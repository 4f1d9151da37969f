"""Coach plan data model and its versioned JSON schema ("coachplan/1").

The serialized form is the contract between the compiler, the session
engine, and the web console, so key order and field presence are fixed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from . import PLAN_SCHEMA_VERSION
from .errors import PlanValidationError

ACTION_TYPES = ("punctual", "iterative", "durative")


@dataclass
class Action:
    """One atomic, single-verb instruction.

    Compiled initially with just instruction/supplementary/timestamps and
    enriched in place with a demonstration description, a temporal type,
    and status criteria.
    """

    instruction: str
    start: float
    end: float
    supplementary: list[str] = field(default_factory=list)
    demonstration_description: str = ""
    action_type: str = ""
    in_progress_criteria: list[str] = field(default_factory=list)
    completion_criteria: list[str] = field(default_factory=list)
    mistake_criteria: list[str] = field(default_factory=list)
    nonvisual_completion_criteria: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "instruction": self.instruction,
            "supplementary": list(self.supplementary),
            "demonstration_description": self.demonstration_description,
            "action_type": self.action_type,
            "in_progress_criteria": list(self.in_progress_criteria),
            "completion_criteria": list(self.completion_criteria),
            "mistake_criteria": list(self.mistake_criteria),
            "nonvisual_completion_criteria": list(self.nonvisual_completion_criteria),
            "start": self.start,
            "end": self.end,
        }


@dataclass
class Step:
    step_name: str
    actions: list[Action] = field(default_factory=list)
    tools: list[str] = field(default_factory=list)
    materials: list[str] = field(default_factory=list)
    new_tools: list[str] = field(default_factory=list)
    new_materials: list[str] = field(default_factory=list)
    start: float = 0.0
    end: float = 0.0

    def to_dict(self) -> dict:
        return {
            "step_name": self.step_name,
            "start": self.start,
            "end": self.end,
            "tools": list(self.tools),
            "materials": list(self.materials),
            "new_tools": list(self.new_tools),
            "new_materials": list(self.new_materials),
            "actions": [a.to_dict() for a in self.actions],
        }


@dataclass
class VideoInfo:
    title: str
    duration_s: float


@dataclass
class CoachPlan:
    video: VideoInfo
    steps: list[Step]
    version: str = PLAN_SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "video": {"title": self.video.title, "duration_s": self.video.duration_s},
            "steps": [s.to_dict() for s in self.steps],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    def action_at(self, step_index: int, action_index: int) -> Action:
        return self.steps[step_index].actions[action_index]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise PlanValidationError(message)


def _str_list(value, where: str) -> list[str]:
    _require(isinstance(value, list) and all(isinstance(x, str) for x in value),
             f"{where} must be a list of strings")
    return list(value)


def action_from_dict(data: dict, where: str = "action") -> Action:
    _require(isinstance(data, dict), f"{where} must be an object")
    for key in ("instruction", "start", "end"):
        _require(key in data, f"{where} missing {key!r}")
    _require(isinstance(data["instruction"], str) and data["instruction"].strip(),
             f"{where}.instruction must be non-empty")
    start, end = data["start"], data["end"]
    _require(isinstance(start, (int, float)) and isinstance(end, (int, float)),
             f"{where} timestamps must be numbers")
    _require(0 <= start <= end, f"{where} requires 0 <= start <= end")
    return Action(
        instruction=data["instruction"],
        start=float(start),
        end=float(end),
        supplementary=_str_list(data.get("supplementary", []), f"{where}.supplementary"),
        demonstration_description=str(data.get("demonstration_description", "")),
        action_type=str(data.get("action_type", "")),
        in_progress_criteria=_str_list(
            data.get("in_progress_criteria", []), f"{where}.in_progress_criteria"),
        completion_criteria=_str_list(
            data.get("completion_criteria", []), f"{where}.completion_criteria"),
        mistake_criteria=_str_list(
            data.get("mistake_criteria", []), f"{where}.mistake_criteria"),
        nonvisual_completion_criteria=_str_list(
            data.get("nonvisual_completion_criteria", []),
            f"{where}.nonvisual_completion_criteria"),
    )


def step_from_dict(data: dict, where: str = "step") -> Step:
    _require(isinstance(data, dict), f"{where} must be an object")
    _require(isinstance(data.get("step_name"), str) and data["step_name"].strip(),
             f"{where}.step_name must be non-empty")
    actions = data.get("actions", [])
    _require(isinstance(actions, list), f"{where}.actions must be a list")
    return Step(
        step_name=data["step_name"],
        actions=[action_from_dict(a, f"{where}.actions[{i}]") for i, a in enumerate(actions)],
        tools=_str_list(data.get("tools", []), f"{where}.tools"),
        materials=_str_list(data.get("materials", []), f"{where}.materials"),
        new_tools=_str_list(data.get("new_tools", []), f"{where}.new_tools"),
        new_materials=_str_list(data.get("new_materials", []), f"{where}.new_materials"),
        start=float(data.get("start", 0.0)),
        end=float(data.get("end", 0.0)),
    )


def plan_from_dict(data: dict) -> CoachPlan:
    _require(isinstance(data, dict), "plan must be an object")
    _require(data.get("version") == PLAN_SCHEMA_VERSION,
             f"unsupported plan version {data.get('version')!r}")
    video = data.get("video")
    _require(isinstance(video, dict) and isinstance(video.get("title"), str)
             and isinstance(video.get("duration_s"), (int, float)),
             "plan.video must carry title and duration_s")
    steps = data.get("steps")
    _require(isinstance(steps, list), "plan.steps must be a list")
    plan = CoachPlan(
        video=VideoInfo(title=video["title"], duration_s=float(video["duration_s"])),
        steps=[step_from_dict(s, f"steps[{i}]") for i, s in enumerate(steps)],
    )
    return plan


def load_plan(path: str | Path) -> CoachPlan:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    plan = plan_from_dict(data)
    validate_plan(plan)
    return plan


def validate_plan(plan: CoachPlan, *, enriched: bool = True) -> None:
    """Enforce structural invariants; with ``enriched`` also the criteria rules.

    Raises :class:`PlanValidationError` naming the offending element.
    """
    _require(len(plan.steps) >= 1, "plan has zero steps")
    prev_end: float | None = None
    for si, step in enumerate(plan.steps):
        where = f"steps[{si}] ({step.step_name!r})"
        _require(len(step.actions) >= 1, f"{where} has no actions")
        starts = [a.start for a in step.actions]
        _require(starts == sorted(starts), f"{where} actions not ordered by start")
        _require(step.start == step.actions[0].start,
                 f"{where} start must equal first action's start")
        _require(step.end == step.actions[-1].end,
                 f"{where} end must equal last action's end")
        _require(set(step.new_tools) <= set(step.tools),
                 f"{where} new_tools must be a subset of tools")
        _require(set(step.new_materials) <= set(step.materials),
                 f"{where} new_materials must be a subset of materials")
        if prev_end is not None:
            _require(step.start == prev_end,
                     f"{where} must start at the previous step's end")
        prev_end = step.end
        for ai, action in enumerate(step.actions):
            awhere = f"{where}.actions[{ai}]"
            _require(action.start <= action.end, f"{awhere} start must be <= end")
            if not enriched:
                continue
            _require(action.action_type in ACTION_TYPES,
                     f"{awhere} action_type {action.action_type!r} invalid")
            _require(len(action.completion_criteria) >= 1,
                     f"{awhere} needs at least one completion criterion")
            if action.action_type == "punctual":
                _require(not action.in_progress_criteria,
                         f"{awhere} punctual actions carry no in-progress criteria")
            overlap = set(action.in_progress_criteria) & set(action.completion_criteria)
            _require(not overlap,
                     f"{awhere} in-progress and completion criteria overlap: {overlap}")
