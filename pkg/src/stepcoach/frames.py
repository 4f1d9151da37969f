"""Frame sampling and task-relevance selection around each action.

Frames are sampled on a 1 Hz integer grid over a +/-15 s window, scored by
cosine similarity against the action text (cross-modal similarity realized
as caption-then-embed through the gateway), and kept against a
density-adaptive threshold confined to the published 0.27-0.30 band.
"""

from __future__ import annotations

import hashlib
import logging
import math
import shutil
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import GatewayError
from .gateway import ModelGateway, ModelRequest
from .prompts import caption_prompt

logger = logging.getLogger(__name__)

SAMPLE_WINDOW_S = 15.0


@dataclass
class FrameSample:
    timestamp: int
    image_ref: str
    score: float | None = None
    kept: bool | None = None


@dataclass(frozen=True)
class ThresholdPolicy:
    """Three-band threshold rule over the 0.27-0.30 similarity range.

    ``base`` measures frame density: the fraction of frames scoring above
    it picks the effective threshold (ceiling when dense, floor when
    sparse, base otherwise).
    """

    floor: float = 0.27
    base: float = 0.285
    ceiling: float = 0.30
    high_density_frac: float = 0.6
    low_density_frac: float = 0.1

    def __post_init__(self) -> None:
        if not (self.floor <= self.base <= self.ceiling):
            raise ValueError("policy requires floor <= base <= ceiling")


class FrameSource(Protocol):
    """Provides content-addressed frame digests at integer timestamps."""

    def duration_s(self) -> float: ...

    def frame_ref(self, timestamp: int) -> str: ...


class FfmpegFrameSource:
    """Decodes one frame per request via ffmpeg; digests over encoded bytes.

    Frames are cached in ``cache_dir`` keyed by digest so the gateway never
    re-reads the source video.
    """

    def __init__(self, video_path: str | Path, cache_dir: str | Path) -> None:
        self.video_path = Path(video_path)
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        if shutil.which("ffmpeg") is None or shutil.which("ffprobe") is None:
            raise OSError("ffmpeg/ffprobe not found on PATH")
        if not self.video_path.exists():
            raise OSError(f"video not found: {self.video_path}")
        self._duration: float | None = None

    def duration_s(self) -> float:
        if self._duration is None:
            out = subprocess.run(
                [
                    "ffprobe", "-v", "error", "-show_entries", "format=duration",
                    "-of", "default=noprint_wrappers=1:nokey=1", str(self.video_path),
                ],
                capture_output=True, text=True, check=True,
            )
            self._duration = float(out.stdout.strip())
        return self._duration

    def frame_ref(self, timestamp: int) -> str:
        out = subprocess.run(
            [
                "ffmpeg", "-v", "error", "-ss", str(timestamp), "-i",
                str(self.video_path), "-frames:v", "1", "-f", "image2pipe",
                "-vcodec", "mjpeg", "-",
            ],
            capture_output=True, check=True,
        )
        if not out.stdout:
            raise OSError(f"no frame decoded at t={timestamp}")
        digest = hashlib.sha256(out.stdout).hexdigest()
        path = self.cache_dir / f"{digest}.jpg"
        if not path.exists():
            path.write_bytes(out.stdout)
        return digest


class SyntheticFrameSource:
    """Digest-only frame source for mock runs; no media tooling required."""

    def __init__(self, video_id: str, duration: float) -> None:
        self.video_id = video_id
        self._duration = duration

    def duration_s(self) -> float:
        return self._duration

    def frame_ref(self, timestamp: int) -> str:
        return hashlib.sha256(f"{self.video_id}@{timestamp}".encode()).hexdigest()

    @staticmethod
    def ref_map(video_id: str, duration: float) -> dict[str, int]:
        src = SyntheticFrameSource(video_id, duration)
        return {src.frame_ref(t): t for t in range(int(math.floor(duration)) + 1)}


def sample_frames(
    source: FrameSource, action_start: float, action_end: float,
    window_s: float = SAMPLE_WINDOW_S,
) -> list[FrameSample]:
    """One frame per second over [max(0, start-15), min(duration, end+15)],
    inclusive integer grid."""
    if action_start > action_end:
        raise ValueError("action start must be <= end")
    duration = source.duration_s()
    lo = max(0.0, action_start - window_s)
    hi = min(duration, action_end + window_s)
    return [
        FrameSample(timestamp=t, image_ref=source.frame_ref(t))
        for t in range(math.ceil(lo), math.floor(hi) + 1)
    ]


class CaptionEmbedScorer:
    """Cross-modal scorer: caption the frame, embed the caption, cosine it
    against the action-text embedding."""

    def __init__(self, gateway: ModelGateway) -> None:
        self.gateway = gateway

    def image_vector(self, image_ref: str) -> np.ndarray:
        caption = self.gateway.complete(
            ModelRequest(kind="batch", prompt=caption_prompt(image_ref), images=(image_ref,))
        ).text
        return self.gateway.embed(caption)

    def text_vector(self, text: str) -> np.ndarray:
        return self.gateway.embed(text)


def score_frames(
    frames: Sequence[FrameSample], action_text: str, scorer: CaptionEmbedScorer
) -> list[FrameSample]:
    """Attach cosine scores; frames whose embedding fails are dropped with a
    warning rather than failing the action."""
    text_vec = scorer.text_vector(action_text)
    scored: list[FrameSample] = []
    for frame in frames:
        try:
            image_vec = scorer.image_vector(frame.image_ref)
        except (GatewayError, ValueError) as err:
            logger.warning("dropping frame t=%s: %s", frame.timestamp, err)
            continue
        frame.score = float(np.clip(np.dot(text_vec, image_vec), -1.0, 1.0))
        scored.append(frame)
    return scored


def effective_threshold(scores: Sequence[float], policy: ThresholdPolicy) -> float:
    density = sum(1 for s in scores if s > policy.base) / len(scores)
    if density > policy.high_density_frac:
        return policy.ceiling
    if density < policy.low_density_frac:
        return policy.floor
    return policy.base


def select_relevant(
    frames: Sequence[FrameSample], policy: ThresholdPolicy | None = None
) -> list[FrameSample]:
    """Keep frames at or above the density-adaptive threshold.

    When nothing passes, the single top-scoring frame (earliest on ties) is
    kept so the describer always has one frame to work from.
    """
    policy = policy or ThresholdPolicy()
    if not frames:
        return []
    if any(f.score is None for f in frames):
        raise ValueError("score frames before selecting")
    threshold = effective_threshold([f.score for f in frames], policy)
    for frame in frames:
        frame.kept = frame.score >= threshold
    kept = [f for f in frames if f.kept]
    if not kept:
        best = min(frames, key=lambda f: (-f.score, f.timestamp))
        best.kept = True
        kept = [best]
    return kept
