"""Opt-in smoke test against a live backend (set MODEL_BASE_URL to enable)."""

from __future__ import annotations

import os

import pytest

pytestmark = pytest.mark.skipif(
    not os.environ.get("MODEL_BASE_URL"),
    reason="MODEL_BASE_URL not set; live smoke test skipped",
)


def test_live_backend_answers_ok():
    from stepcoach.backends import build_gateway
    from stepcoach.gateway import ModelRequest

    gateway = build_gateway("live")
    response = gateway.complete(
        ModelRequest(kind="batch", prompt="Reply with the word OK and nothing else.")
    )
    assert "OK" in response.text.upper()


def test_live_embedding_is_unit_norm():
    import numpy as np

    from stepcoach.backends import build_gateway

    gateway = build_gateway("live")
    vec = gateway.embed("a pinch of salt")
    assert abs(np.linalg.norm(vec) - 1.0) < 1e-6
