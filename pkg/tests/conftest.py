"""Shared fixtures: repo paths, offline gateways, and a small enriched plan."""

from __future__ import annotations

from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parents[1]
DATA = REPO / "data"

from stepcoach.backends import BagOfWordsEmbedder, FixtureBackend  # noqa: E402
from stepcoach.config import Config  # noqa: E402
from stepcoach.fixturegen import bacon_plan  # noqa: E402
from stepcoach.gateway import ModelGateway  # noqa: E402


@pytest.fixture()
def data_dir() -> Path:
    return DATA


@pytest.fixture()
def embed_gateway() -> ModelGateway:
    """Embedding-only gateway (strict mock batch with no fixtures)."""
    return ModelGateway(
        batch=FixtureBackend({}),
        streamer=FixtureBackend({}),
        embedder=BagOfWordsEmbedder(),
        retries=0,
        backoff_s=0.0,
    )


def gateway_for(fixtures: dict, **kwargs) -> ModelGateway:
    backend = FixtureBackend(fixtures, strict=kwargs.pop("strict", True))
    return ModelGateway(
        batch=backend,
        streamer=backend,
        embedder=BagOfWordsEmbedder(),
        retries=0,
        backoff_s=0.0,
        **kwargs,
    )


@pytest.fixture()
def demo_plan():
    return bacon_plan()


@pytest.fixture()
def fast_config() -> Config:
    return Config()
