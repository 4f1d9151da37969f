"""Transcript ingestion, sentence splitting, and information-role filtering.

Transcripts arrive as word-timestamped JSON ({"words": [{text, start, end}]}).
Sentences are cut at terminal punctuation only; auto-punctuated transcripts
do not warrant an abbreviation dictionary.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .gateway import ModelGateway, ModelRequest
from .prompts import role_prompt

logger = logging.getLogger(__name__)

ROLES = (
    "Greeting",
    "Overview",
    "Method",
    "Supplementary",
    "Explanation",
    "Description",
    "Conclusion",
    "Miscellaneous",
)

FILTERED_ROLES = frozenset({"Greeting", "Conclusion", "Miscellaneous"})

_TERMINALS = (".", "!", "?")
_TRAILING_QUOTES = "\"')]}”’"


@dataclass(frozen=True)
class TranscriptWord:
    text: str
    start: float
    end: float


@dataclass
class TranscriptSentence:
    text: str
    start: float
    end: float
    role: str | None = None


def load_words(path: str | Path) -> list[TranscriptWord]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    words = data["words"] if isinstance(data, dict) else data
    return [TranscriptWord(w["text"], float(w["start"]), float(w["end"])) for w in words]


def _is_terminal(word_text: str) -> bool:
    stripped = word_text.rstrip().rstrip(_TRAILING_QUOTES)
    return stripped.endswith(_TERMINALS)


def ingest_transcript(words: Sequence[TranscriptWord]) -> list[TranscriptSentence]:
    """Split ordered words into sentences at terminal punctuation.

    Trailing words without terminal punctuation still form a final sentence.
    Raises ValueError on empty or unordered input.
    """
    if not words:
        raise ValueError("transcript has no words")
    for i, w in enumerate(words):
        if not (0 <= w.start <= w.end):
            raise ValueError(f"word {i} has invalid span [{w.start}, {w.end}]")
        if i and w.start < words[i - 1].start:
            raise ValueError(f"words out of order at index {i}")

    sentences: list[TranscriptSentence] = []
    current: list[TranscriptWord] = []
    for word in words:
        current.append(word)
        if _is_terminal(word.text):
            sentences.append(_sentence_from(current))
            current = []
    if current:
        sentences.append(_sentence_from(current))
    return sentences


def _sentence_from(words: list[TranscriptWord]) -> TranscriptSentence:
    return TranscriptSentence(
        text=" ".join(w.text for w in words),
        start=words[0].start,
        end=words[-1].end,
    )


def _parse_role(raw: str) -> str:
    head = raw.strip().splitlines()[0] if raw.strip() else ""
    head = head.removeprefix("Category:").strip().strip(".").strip()
    for role in ROLES:
        if head.lower() == role.lower():
            return role
    logger.warning("role %r outside taxonomy, coercing to Miscellaneous", raw.strip()[:40])
    return "Miscellaneous"


def classify_roles(
    sentences: Sequence[TranscriptSentence], gateway: ModelGateway
) -> list[TranscriptSentence]:
    """Label each sentence with one of the eight information roles.

    One batch call per sentence; any label outside the taxonomy is coerced
    to Miscellaneous and logged.
    """
    labeled = []
    for sentence in sentences:
        if not sentence.text.strip():
            raise ValueError("cannot classify an empty sentence")
        response = gateway.complete(
            ModelRequest(kind="batch", prompt=role_prompt(sentence.text))
        )
        labeled.append(
            TranscriptSentence(
                text=sentence.text,
                start=sentence.start,
                end=sentence.end,
                role=_parse_role(response.text),
            )
        )
    return labeled


def filter_sentences(
    sentences: Sequence[TranscriptSentence],
) -> list[TranscriptSentence]:
    """Drop greeting, conclusion, and miscellaneous sentences.

    Supplementary/explanation/description sentences survive; they feed the
    on-demand tips attached to actions downstream.
    """
    for i, s in enumerate(sentences):
        if s.role is None:
            raise ValueError(f"sentence {i} has no role; classify first")
        if s.role not in ROLES:
            raise ValueError(f"sentence {i} carries unknown role {s.role!r}")
    return [s for s in sentences if s.role not in FILTERED_ROLES]
