"""Uniform access to batch completion, incremental streaming, and embedding.

Three backend capabilities sit behind one facade so every downstream stage
can run offline against deterministic mocks:

* ``complete`` -- full-text multimodal completion (retried on timeout),
* ``stream``   -- ordered chunk delivery with cooperative cancellation,
* ``embed``    -- unit-normalized text embeddings.

Cancellation is keyed by ``context_id``: starting a new stream on a context
cancels the previous one, and ``cancel`` may be called from any thread.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from .errors import BackendTimeout, DecodeError, GatewayError

logger = logging.getLogger(__name__)

REQUEST_KINDS = ("batch", "stream", "embed")


def request_hash(prompt: str, images: Sequence[str] = ()) -> str:
    """Canonical digest of a request: prompt text plus image digests.

    Fixture files key mock responses by this value, so it must stay stable
    across platforms and runs.
    """
    payload = json.dumps(
        {"prompt": prompt, "images": list(images)},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ModelRequest:
    kind: str
    prompt: str
    images: tuple[str, ...] = ()
    context_id: str = ""
    max_latency_hint_ms: int = 0

    def __post_init__(self) -> None:
        if self.kind not in REQUEST_KINDS:
            raise ValueError(f"unknown request kind: {self.kind!r}")
        if self.kind == "embed" and self.images:
            raise ValueError("embed requests must not carry images")

    @property
    def digest(self) -> str:
        return request_hash(self.prompt, self.images)


@dataclass
class ModelResponse:
    text: str = ""
    vector: np.ndarray | None = None
    chunks: list[str] = field(default_factory=list)
    cancelled: bool = False


class BatchBackend(Protocol):
    def complete(self, request: ModelRequest) -> str: ...


class StreamBackend(Protocol):
    def stream(self, request: ModelRequest) -> Iterable[str]: ...


class EmbedBackend(Protocol):
    dim: int

    def embed(self, text: str) -> Sequence[float]: ...


class _StreamHandle:
    """Cancellation token for one in-flight stream."""

    def __init__(self) -> None:
        self.cancelled = threading.Event()


class ModelGateway:
    """Facade over the three backend capabilities.

    Any backend may be ``None``; calling the corresponding method then
    raises :class:`GatewayError`. Batch calls retry twice with exponential
    backoff on :class:`BackendTimeout`; streams never retry, recency beats
    completeness there.
    """

    def __init__(
        self,
        batch: BatchBackend | None = None,
        streamer: StreamBackend | None = None,
        embedder: EmbedBackend | None = None,
        *,
        retries: int = 2,
        backoff_s: float = 0.1,
    ) -> None:
        self.batch = batch
        self.streamer = streamer
        self.embedder = embedder
        self.retries = retries
        self.backoff_s = backoff_s
        self._lock = threading.Lock()
        self._active_streams: dict[str, _StreamHandle] = {}

    # -- batch ---------------------------------------------------------

    def complete(self, request: ModelRequest) -> ModelResponse:
        if self.batch is None:
            raise GatewayError("no batch backend configured")
        if request.kind != "batch":
            raise ValueError("complete() requires kind='batch'")
        if not request.prompt:
            raise ValueError("prompt must be non-empty")
        attempt = 0
        while True:
            try:
                text = self.batch.complete(request)
                return ModelResponse(text=text)
            except BackendTimeout:
                if attempt >= self.retries:
                    raise
                delay = self.backoff_s * (2**attempt)
                logger.warning("batch timeout, retrying in %.2fs", delay)
                if delay:
                    time.sleep(delay)
                attempt += 1

    # -- streaming -----------------------------------------------------

    def stream(
        self, request: ModelRequest, sink: Callable[[str], None]
    ) -> ModelResponse:
        if self.streamer is None:
            raise GatewayError("no stream backend configured")
        if request.kind != "stream":
            raise ValueError("stream() requires kind='stream'")
        handle = _StreamHandle()
        with self._lock:
            previous = self._active_streams.get(request.context_id)
            if previous is not None:
                previous.cancelled.set()
            self._active_streams[request.context_id] = handle

        delivered: list[str] = []
        cancelled = False
        try:
            for chunk in self.streamer.stream(request):
                if handle.cancelled.is_set():
                    cancelled = True
                    break
                try:
                    sink(chunk)
                except Exception:
                    logger.warning("stream sink failed, aborting stream")
                    cancelled = True
                    break
                delivered.append(chunk)
                if handle.cancelled.is_set():
                    cancelled = True
                    break
        finally:
            with self._lock:
                if self._active_streams.get(request.context_id) is handle:
                    del self._active_streams[request.context_id]
        return ModelResponse(
            text="".join(delivered), chunks=delivered, cancelled=cancelled
        )

    def cancel(self, context_id: str) -> None:
        """Stop any in-flight stream for ``context_id``.

        Idempotent; a no-op when nothing is streaming under that id. After
        this returns, at most one further chunk reaches the sink.
        """
        with self._lock:
            handle = self._active_streams.get(context_id)
        if handle is not None:
            handle.cancelled.set()

    # -- embedding -----------------------------------------------------

    def embed(self, text: str) -> np.ndarray:
        if self.embedder is None:
            raise GatewayError("no embedding backend configured")
        if not text:
            raise ValueError("cannot embed empty text")
        raw = np.asarray(self.embedder.embed(text), dtype=np.float64)
        norm = float(np.linalg.norm(raw))
        if norm == 0.0:
            raise DecodeError("embedding backend returned a zero vector")
        return raw / norm

    @property
    def embedding_dim(self) -> int:
        if self.embedder is None:
            raise GatewayError("no embedding backend configured")
        return self.embedder.dim
