"""Desk-scale evaluation: atomic-fact description scoring and per-frame
monitoring accuracy.

Fact extraction is judge-pluggable (the offline judge is a deterministic
clause splitter); matching supports an exact mode for reproducible tests
and a containment mode for real descriptions. Monitoring accuracy is
grouped by action type and field of view.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .errors import GatewayError
from .gateway import ModelGateway, ModelRequest

logger = logging.getLogger(__name__)

_CLAUSE_SPLIT = re.compile(r"\s*(?:;|,|\band\b|\bbut\b)\s*")
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+")


def extract_facts(description: str, judge: ModelGateway | None = None) -> list[str]:
    """Atomic factual claims from a description.

    Without a judge backend this is a sentence/clause splitter; with one,
    the judge proposes the fact list (one per line) and the splitter is the
    failure fallback.
    """
    if not description.strip():
        raise ValueError("cannot extract facts from an empty description")
    if judge is not None and judge.batch is not None:
        prompt = (
            "List the atomic factual claims in this description, one per line, "
            f"no numbering:\n{description}"
        )
        try:
            raw = judge.complete(ModelRequest(kind="batch", prompt=prompt)).text
            facts = [line.strip() for line in raw.splitlines() if line.strip()]
            if facts:
                return facts
        except GatewayError as err:
            logger.warning("fact judge failed (%s); using clause splitter", err)
    facts = []
    for sentence in _SENTENCE_SPLIT.split(description.strip()):
        for clause in _CLAUSE_SPLIT.split(sentence):
            cleaned = clause.strip().strip(".?!").strip()
            if cleaned:
                facts.append(cleaned)
    return facts


def normalize_fact(text: str) -> str:
    return re.sub(r"[^a-z0-9 ]+", "", text.lower()).strip()


def exact_matcher(a: str, b: str) -> bool:
    return normalize_fact(a) == normalize_fact(b)


def containment_matcher(a: str, b: str) -> bool:
    na, nb = normalize_fact(a), normalize_fact(b)
    return bool(na) and bool(nb) and (na == nb or na in nb or nb in na)


def judge_matcher(judge: ModelGateway) -> Callable[[str, str], bool]:
    """Containment first, then a judge-backend equivalence call for the
    rest. Judge failures degrade to the containment answer."""

    def match(a: str, b: str) -> bool:
        if containment_matcher(a, b):
            return True
        prompt = (
            "Do these two statements assert the same fact? Answer yes or no "
            f"only.\n1: {a}\n2: {b}"
        )
        try:
            reply = judge.complete(ModelRequest(kind="batch", prompt=prompt)).text
        except GatewayError as err:
            logger.warning("equivalence judge failed (%s); using containment", err)
            return False
        return reply.strip().lower().startswith("yes")

    return match


@dataclass
class FactJudgment:
    fact: str
    category: str  # "new" | "narration_overlap" | "other"
    hallucinated: bool


@dataclass
class AtomicFactReport:
    new_facts: int
    missed_facts: int
    hallucination_rate: float | None
    judgments: list[FactJudgment] = field(default_factory=list)
    missed: list[str] = field(default_factory=list)

    @property
    def total_generated(self) -> int:
        return len(self.judgments)

    def to_dict(self) -> dict:
        return {
            "new_facts": self.new_facts,
            "missed_facts": self.missed_facts,
            "hallucination_rate": self.hallucination_rate,
            "total_generated": self.total_generated,
            "judgments": [
                {"fact": j.fact, "category": j.category, "hallucinated": j.hallucinated}
                for j in self.judgments
            ],
            "missed": list(self.missed),
        }


def score_description(
    generated: Sequence[str],
    narration: Sequence[str],
    reference: Sequence[str],
    hallucination_labels: Sequence[str] | None = None,
    matcher: Callable[[str, str], bool] = exact_matcher,
) -> AtomicFactReport:
    """Set arithmetic over atomic facts.

    new = generated facts matching the reference but not the narration;
    missed = reference facts no generated fact matches. Hallucination
    labels are human-provided fact texts; without them the rate is
    reported as unavailable (None).
    """

    def matches_any(fact: str, pool: Sequence[str]) -> bool:
        return any(matcher(fact, other) for other in pool)

    judgments: list[FactJudgment] = []
    for fact in generated:
        if matches_any(fact, narration):
            category = "narration_overlap"
        elif matches_any(fact, reference):
            category = "new"
        else:
            category = "other"
        hallucinated = (
            matches_any(fact, hallucination_labels) if hallucination_labels else False
        )
        judgments.append(FactJudgment(fact=fact, category=category, hallucinated=hallucinated))

    missed = [ref for ref in reference if not matches_any(ref, generated)]
    rate: float | None = None
    if hallucination_labels is not None and generated:
        rate = 100.0 * sum(1 for j in judgments if j.hallucinated) / len(generated)
    elif hallucination_labels is not None:
        rate = 0.0
    return AtomicFactReport(
        new_facts=sum(1 for j in judgments if j.category == "new"),
        missed_facts=len(missed),
        hallucination_rate=rate,
        judgments=judgments,
        missed=missed,
    )


@dataclass
class FrameLabel:
    frame_id: str
    action_id: str
    action_type: str
    fov: str
    gold_status: str


@dataclass
class GroupAccuracy:
    action_type: str
    fov: str
    frames: int
    matches: int

    @property
    def accuracy(self) -> float:
        return self.matches / self.frames


@dataclass
class MonitorAccuracyReport:
    groups: list[GroupAccuracy]
    total_frames: int
    notes: list[str] = field(default_factory=list)

    def accuracy_for(self, action_type: str, fov: str) -> float | None:
        for group in self.groups:
            if group.action_type == action_type and group.fov == fov:
                return group.accuracy
        return None

    def to_dict(self) -> dict:
        return {
            "total_frames": self.total_frames,
            "groups": [
                {
                    "action_type": g.action_type,
                    "fov": g.fov,
                    "frames": g.frames,
                    "matches": g.matches,
                    "accuracy": g.accuracy,
                }
                for g in self.groups
            ],
            "notes": list(self.notes),
        }

    def to_markdown(self) -> str:
        fovs = sorted({g.fov for g in self.groups})
        lines = [
            "| Action type | " + " | ".join(f.capitalize() for f in fovs) + " |",
            "|---" * (len(fovs) + 1) + "|",
        ]
        for action_type in ("punctual", "iterative", "durative"):
            row = [action_type.capitalize()]
            present = False
            for fov in fovs:
                acc = self.accuracy_for(action_type, fov)
                row.append("-" if acc is None else f"{acc:.2f}")
                present = present or acc is not None
            if present:
                lines.append("| " + " | ".join(row) + " |")
        for extra in sorted({g.action_type for g in self.groups}
                            - {"punctual", "iterative", "durative"}):
            row = [extra]
            for fov in fovs:
                acc = self.accuracy_for(extra, fov)
                row.append("-" if acc is None else f"{acc:.2f}")
            lines.append("| " + " | ".join(row) + " |")
        if self.notes:
            lines.append("")
            lines.extend(f"- {note}" for note in self.notes)
        return "\n".join(lines) + "\n"


def score_monitoring(
    predicted: Sequence[str],
    labels: Sequence[FrameLabel],
) -> MonitorAccuracyReport:
    """Per-frame accuracy grouped by (action_type, fov).

    ``predicted`` aligns index-for-index with ``labels``; misalignment is an
    argument error. Empty groups never appear; combinations present in the
    label vocabulary but without frames are noted.
    """
    if len(predicted) != len(labels):
        raise ValueError(
            f"verdicts ({len(predicted)}) and labels ({len(labels)}) misaligned"
        )
    buckets: dict[tuple[str, str], GroupAccuracy] = {}
    for status, label in zip(predicted, labels):
        key = (label.action_type, label.fov)
        bucket = buckets.setdefault(
            key, GroupAccuracy(action_type=key[0], fov=key[1], frames=0, matches=0)
        )
        bucket.frames += 1
        if status == label.gold_status:
            bucket.matches += 1
    groups = sorted(buckets.values(), key=lambda g: (g.action_type, g.fov))
    notes = []
    types = {l.action_type for l in labels}
    fovs = {l.fov for l in labels}
    for action_type in sorted(types):
        for fov in sorted(fovs):
            if (action_type, fov) not in buckets:
                notes.append(f"no frames for {action_type}/{fov}; excluded from table")
    return MonitorAccuracyReport(
        groups=groups, total_frames=len(labels), notes=notes
    )


# -- file I/O -----------------------------------------------------------


def load_frame_labels(path: str | Path) -> list[FrameLabel]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [
            FrameLabel(
                frame_id=row["frame_id"],
                action_id=row["action_id"],
                action_type=row["action_type"],
                fov=row["fov"],
                gold_status=row["gold_status"],
            )
            for row in reader
        ]


def load_verdict_map(path: str | Path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        return {str(k): str(v) for k, v in data.items()}
    raise ValueError("verdict file must map frame_id to status")


def align_verdicts(labels: Sequence[FrameLabel], verdicts: dict[str, str]) -> list[str]:
    missing = [l.frame_id for l in labels if l.frame_id not in verdicts]
    if missing:
        raise ValueError(f"verdicts missing for frames: {missing}")
    return [verdicts[l.frame_id] for l in labels]


def load_description_cases(path: str | Path) -> list[dict]:
    cases = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                cases.append(json.loads(line))
    return cases


def score_description_file(
    path: str | Path, matcher: Callable[[str, str], bool] = exact_matcher
) -> list[AtomicFactReport]:
    """Score each JSONL case: {generated, narration, reference, labels?}.

    String fields are fact-split with the offline judge; list fields are
    taken as pre-split facts.
    """
    reports = []
    for case in load_description_cases(path):
        def facts(value) -> list[str]:
            if isinstance(value, list):
                return [str(v) for v in value]
            return extract_facts(str(value))

        labels = case.get("labels")
        reports.append(
            score_description(
                facts(case["generated"]),
                facts(case["narration"]),
                facts(case["reference"]),
                hallucination_labels=[str(l) for l in labels] if labels is not None else None,
                matcher=matcher,
            )
        )
    return reports
