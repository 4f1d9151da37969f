"""Tolerant JSON extraction from model output."""

from __future__ import annotations

import json
import re

from .errors import DecodeError

_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def extract_json(text: str):
    """Parse the first JSON value in ``text``, tolerating code fences and
    surrounding prose. Raises :class:`DecodeError` when nothing parses."""
    candidates = [m.strip() for m in _FENCE_RE.findall(text)]
    candidates.append(text.strip())
    brace = _outermost_braces(text)
    if brace:
        candidates.append(brace)
    for candidate in candidates:
        if not candidate:
            continue
        try:
            return json.loads(candidate)
        except json.JSONDecodeError:
            continue
    raise DecodeError(f"no JSON found in model output: {text[:80]!r}")


def _outermost_braces(text: str) -> str | None:
    for opener, closer in (("{", "}"), ("[", "]")):
        start = text.find(opener)
        end = text.rfind(closer)
        if start != -1 and end > start:
            return text[start : end + 1]
    return None
