"""Backend implementations for the model gateway.

The fixture mock keys responses by the canonical request hash so full
pipeline runs are bit-reproducible offline; the scripted mock replays an
ordered list for scheduler tests; the live backend speaks an
OpenAI-compatible HTTP API and is only exercised by opt-in smoke tests.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import BackendTimeout, DecodeError, GatewayError
from .gateway import ModelGateway, ModelRequest

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def _fixture_text(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, dict) and "text" in value:
        return str(value["text"])
    raise DecodeError(f"fixture value has no text form: {value!r}")


def _fixture_chunks(value) -> list[str]:
    if isinstance(value, dict) and "chunks" in value:
        return [str(c) for c in value["chunks"]]
    return [_fixture_text(value)]


class FixtureBackend:
    """Deterministic mock keyed by request hash.

    ``strict`` (the default) raises :class:`DecodeError` for unfixtured
    requests; lenient mode returns an empty completion with a warning so
    exploratory runs degrade instead of dying.
    """

    def __init__(self, fixtures: dict | None = None, *, strict: bool = True) -> None:
        self.fixtures = dict(fixtures or {})
        self.strict = strict

    @classmethod
    def from_file(cls, path: str | Path, *, strict: bool = True) -> "FixtureBackend":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh), strict=strict)

    def _lookup(self, request: ModelRequest):
        digest = request.digest
        if digest not in self.fixtures:
            if self.strict:
                raise DecodeError(
                    f"no fixture for request {digest[:12]}… "
                    f"(prompt starts {request.prompt[:60]!r})"
                )
            logger.warning("unfixtured request %s…, returning empty text", digest[:12])
            return ""
        return self.fixtures[digest]

    def complete(self, request: ModelRequest) -> str:
        return _fixture_text(self._lookup(request))

    def stream(self, request: ModelRequest) -> Iterator[str]:
        yield from _fixture_chunks(self._lookup(request))


class RecordingBackend:
    """Fixture builder: answers via a responder function and records the map.

    Used by the fixture-generation script so fixture files stay in sync
    with the prompt builders instead of being hand-maintained.
    """

    def __init__(self, responder: Callable[[ModelRequest], object]) -> None:
        self.responder = responder
        self.recorded: dict[str, object] = {}

    def _respond(self, request: ModelRequest):
        value = self.responder(request)
        if value is None:
            raise DecodeError(f"responder declined request: {request.prompt[:60]!r}")
        self.recorded[request.digest] = value
        return value

    def complete(self, request: ModelRequest) -> str:
        return _fixture_text(self._respond(request))

    def stream(self, request: ModelRequest) -> Iterator[str]:
        yield from _fixture_chunks(self._respond(request))


class ScriptedBackend:
    """Replays ordered scripts; raises :class:`BackendTimeout` when spent.

    Batch and stream scripts are independent queues. A stream script entry
    is a list of chunks.
    """

    def __init__(
        self,
        batch_script: Sequence[str] = (),
        stream_script: Sequence[Sequence[str]] = (),
    ) -> None:
        self.batch_script = list(batch_script)
        self.stream_script = [list(chunks) for chunks in stream_script]

    def complete(self, request: ModelRequest) -> str:
        if not self.batch_script:
            raise BackendTimeout("batch script exhausted")
        return self.batch_script.pop(0)

    def stream(self, request: ModelRequest) -> Iterator[str]:
        if not self.stream_script:
            raise BackendTimeout("stream script exhausted")
        yield from self.stream_script.pop(0)


class BagOfWordsEmbedder:
    """Hashed bag-of-words embedding, stable across platforms.

    Content-token counts land in ``dim`` buckets chosen by a SHA-256 of the
    token, so identical texts map to identical vectors and overlapping
    vocabulary yields positive cosine similarity. Function words are
    dropped; otherwise they dominate every pairwise score. The gateway
    normalizes the result.
    """

    _STOP = frozenset(
        "a an the of into with on in to for and is it its at by from".split()
    )

    def __init__(self, dim: int = 256) -> None:
        self.dim = dim

    def _bucket(self, token: str) -> int:
        h = hashlib.sha256(token.encode("utf-8")).digest()
        return int.from_bytes(h[:4], "big") % self.dim

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        tokens = [t for t in _TOKEN_RE.findall(text.lower()) if t not in self._STOP]
        if not tokens:  # keep all-stopword text embeddable
            tokens = _TOKEN_RE.findall(text.lower())
        for token in tokens:
            vec[self._bucket(token)] += 1.0
        return vec


class FixedEmbedder:
    """Maps exact texts to preset raw vectors; unknown texts fall back to
    bag-of-words. Handy for hand-computed cosine tests."""

    def __init__(self, table: dict[str, Sequence[float]], dim: int | None = None) -> None:
        self.table = {k: list(v) for k, v in table.items()}
        self.dim = dim or (len(next(iter(table.values()))) if table else 256)
        self._fallback = BagOfWordsEmbedder(self.dim)

    def embed(self, text: str) -> Sequence[float]:
        if text in self.table:
            return self.table[text]
        return self._fallback.embed(text)


class LiveBackend:
    """Minimal OpenAI-compatible HTTP client (chat completions + embeddings).

    Image refs are content digests; ``image_loader`` resolves them to bytes
    (the gateway never re-reads source video). Streaming is realized as a
    single-chunk completion; the dedicated streaming endpoint of a given
    provider can be wired in here without touching callers.
    """

    def __init__(
        self,
        base_url: str | None = None,
        api_key: str | None = None,
        model: str = "gpt-4o-mini",
        embed_model: str = "text-embedding-3-small",
        image_loader: Callable[[str], bytes] | None = None,
        timeout_s: float = 60.0,
        dim: int = 1536,
    ) -> None:
        import httpx

        self.base_url = (base_url or os.environ.get("MODEL_BASE_URL", "")).rstrip("/")
        if not self.base_url:
            raise GatewayError("MODEL_BASE_URL is not set")
        self.api_key = api_key or os.environ.get("MODEL_API_KEY", "")
        self.model = model
        self.embed_model = embed_model
        self.image_loader = image_loader
        self.dim = dim
        self._client = httpx.Client(
            base_url=self.base_url,
            headers={"Authorization": f"Bearer {self.api_key}"},
            timeout=timeout_s,
        )

    def _content(self, request: ModelRequest) -> list[dict]:
        parts: list[dict] = [{"type": "text", "text": request.prompt}]
        for ref in request.images:
            if self.image_loader is None:
                raise GatewayError("live backend needs an image_loader for image refs")
            import base64

            b64 = base64.b64encode(self.image_loader(ref)).decode("ascii")
            parts.append(
                {
                    "type": "image_url",
                    "image_url": {"url": f"data:image/jpeg;base64,{b64}"},
                }
            )
        return parts

    def complete(self, request: ModelRequest) -> str:
        import httpx

        try:
            resp = self._client.post(
                "/chat/completions",
                json={
                    "model": self.model,
                    "messages": [{"role": "user", "content": self._content(request)}],
                },
            )
        except httpx.TimeoutException as exc:
            raise BackendTimeout(str(exc)) from exc
        if resp.status_code >= 500:
            raise BackendTimeout(f"backend returned {resp.status_code}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except Exception as exc:
            raise DecodeError(f"malformed completion payload: {exc}") from exc

    def stream(self, request: ModelRequest) -> Iterator[str]:
        yield self.complete(
            ModelRequest(
                kind="batch",
                prompt=request.prompt,
                images=request.images,
                context_id=request.context_id,
            )
        )

    def embed(self, text: str) -> Sequence[float]:
        import httpx

        try:
            resp = self._client.post(
                "/embeddings", json={"model": self.embed_model, "input": text}
            )
        except httpx.TimeoutException as exc:
            raise BackendTimeout(str(exc)) from exc
        try:
            return resp.json()["data"][0]["embedding"]
        except Exception as exc:
            raise DecodeError(f"malformed embedding payload: {exc}") from exc


def build_gateway(
    backend: str = "mock",
    *,
    fixtures: str | Path | dict | None = None,
    strict: bool = True,
    batch_script: Sequence[str] = (),
    stream_script: Sequence[Sequence[str]] = (),
    embed_dim: int = 256,
    image_loader: Callable[[str], bytes] | None = None,
    retries: int = 2,
    backoff_s: float = 0.1,
) -> ModelGateway:
    """Assemble a gateway for one of the named backends.

    ``mock`` reads fixture maps (path or dict), ``scripted`` replays ordered
    scripts, ``live`` talks to MODEL_BASE_URL. All three share the
    bag-of-words embedder except ``live``, which uses the HTTP embedding
    endpoint.
    """
    if backend == "mock":
        if isinstance(fixtures, (str, Path)):
            mock = FixtureBackend.from_file(fixtures, strict=strict)
        else:
            mock = FixtureBackend(fixtures, strict=strict)
        return ModelGateway(
            batch=mock,
            streamer=mock,
            embedder=BagOfWordsEmbedder(embed_dim),
            retries=retries,
            backoff_s=0.0,
        )
    if backend == "scripted":
        scripted = ScriptedBackend(batch_script, stream_script)
        return ModelGateway(
            batch=scripted,
            streamer=scripted,
            embedder=BagOfWordsEmbedder(embed_dim),
            retries=0,
            backoff_s=0.0,
        )
    if backend == "live":
        live = LiveBackend(image_loader=image_loader)
        return ModelGateway(
            batch=live,
            streamer=live,
            embedder=live,
            retries=retries,
            backoff_s=backoff_s,
        )
    raise ValueError(f"unknown backend {backend!r}")
