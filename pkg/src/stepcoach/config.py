"""Pipeline and session configuration."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .frames import ThresholdPolicy


@dataclass
class Config:
    backend: str = "mock"            # live | mock | scripted
    fixtures: str = ""               # fixture file for the mock backend
    strict_mock: bool = True
    embed_dim: int = 256
    corpus: str = "cooking"
    kb_store: str = ""
    tick_period_s: float = 5.0
    frame_buffer_size: int = 32
    monitor_frame_count: int = 5
    reframe_after_ticks: int = 3
    mistake_mode: str = "immediate"  # immediate | deferred
    retrieval_k: int = 3
    sample_window_s: float = 15.0
    threshold: ThresholdPolicy = field(default_factory=ThresholdPolicy)
    frame_cache_dir: str = ".stepcoach_frames"

    @classmethod
    def load(cls, path: str | Path | None = None) -> "Config":
        """Build from an optional JSON file, then environment overrides.

        MODEL_BACKEND wins over the file's ``backend`` so one config can be
        shared between live and offline runs.
        """
        data: dict = {}
        if path:
            with open(path, encoding="utf-8") as fh:
                data = json.load(fh)
        threshold = ThresholdPolicy(**data.pop("threshold", {}))
        known = {f.name for f in fields(cls)} - {"threshold"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(threshold=threshold, **{k: data[k] for k in data})
        env_backend = os.environ.get("MODEL_BACKEND")
        if env_backend:
            cfg.backend = env_backend
        if cfg.backend not in ("live", "mock", "scripted"):
            raise ValueError(f"unknown backend {cfg.backend!r}")
        if cfg.mistake_mode not in ("immediate", "deferred"):
            raise ValueError(f"unknown mistake_mode {cfg.mistake_mode!r}")
        return cfg
