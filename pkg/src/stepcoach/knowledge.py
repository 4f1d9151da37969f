"""Accessibility knowledge base: ingestion, retrieval, and suggestions.

Resources (text documents and images) are chunked, embedded, and kept in an
append-only JSONL store with embeddings inline. Retrieval is exact cosine
ranking; corpora here stay small enough that an ANN index would be noise.
"""

from __future__ import annotations

import hashlib
import html.parser
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import GatewayError
from .gateway import ModelGateway, ModelRequest
from .prompts import caption_prompt, rag_prompt, rag_query

logger = logging.getLogger(__name__)

MAX_CHUNK_CHARS = 800
IMAGE_SUFFIXES = {".jpg", ".jpeg", ".png", ".gif", ".webp", ".bmp"}

NO_ANSWER = "I don't know"


@dataclass
class ResourceChunk:
    chunk_id: str
    source: str
    modality: str  # "text" | "image_caption"
    text: str
    embedding: np.ndarray
    char_span: tuple[int, int] | None = None
    image_ref: str | None = None

    def to_record(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "source": self.source,
            "modality": self.modality,
            "text": self.text,
            "embedding": [float(x) for x in self.embedding],
            "char_span": list(self.char_span) if self.char_span else None,
            "image_ref": self.image_ref,
        }

    @classmethod
    def from_record(cls, record: dict) -> "ResourceChunk":
        return cls(
            chunk_id=record["chunk_id"],
            source=record["source"],
            modality=record["modality"],
            text=record["text"],
            embedding=np.asarray(record["embedding"], dtype=np.float64),
            char_span=tuple(record["char_span"]) if record.get("char_span") else None,
            image_ref=record.get("image_ref"),
        )


@dataclass
class UserProfile:
    vision_level: str = ""
    task_experience: str = ""
    available_tools: list[str] = field(default_factory=list)
    environment_notes: str = ""

    def serialize(self) -> str:
        """Deterministic single-line form injected into retrieval queries."""
        parts = []
        if self.vision_level:
            parts.append(f"vision_level: {self.vision_level}")
        if self.task_experience:
            parts.append(f"task_experience: {self.task_experience}")
        if self.available_tools:
            parts.append(f"available_tools: {', '.join(self.available_tools)}")
        if self.environment_notes:
            parts.append(f"environment_notes: {self.environment_notes}")
        return "; ".join(parts)

    @classmethod
    def from_dict(cls, data: dict) -> "UserProfile":
        return cls(
            vision_level=str(data.get("vision_level", "")),
            task_experience=str(data.get("task_experience", "")),
            available_tools=[str(t) for t in data.get("available_tools", [])],
            environment_notes=str(data.get("environment_notes", "")),
        )


@dataclass
class RetrievedChunk:
    chunk: ResourceChunk
    score: float


class _TextExtractor(html.parser.HTMLParser):
    _SKIP = {"script", "style"}

    def __init__(self) -> None:
        super().__init__()
        self.parts: list[str] = []
        self._skipping = 0

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self._skipping += 1
        elif tag in {"p", "br", "div", "li", "h1", "h2", "h3", "h4", "tr"}:
            self.parts.append("\n\n")

    def handle_endtag(self, tag):
        if tag in self._SKIP and self._skipping:
            self._skipping -= 1

    def handle_data(self, data):
        if not self._skipping:
            self.parts.append(data)


def strip_html(markup: str) -> str:
    extractor = _TextExtractor()
    extractor.feed(markup)
    return "".join(extractor.parts)


_SENTENCE_RE = re.compile(r"(?<=[.!?])\s+")


def split_paragraph_chunks(text: str, max_chars: int = MAX_CHUNK_CHARS) -> list[tuple[str, tuple[int, int]]]:
    """Greedy paragraph packing into chunks of <= ``max_chars``.

    Oversize paragraphs fall back to sentence boundaries, then a hard wrap.
    Returns (chunk_text, (start, end)) spans into ``text``.
    """
    chunks: list[tuple[str, tuple[int, int]]] = []
    pieces: list[tuple[str, int]] = []  # (paragraph, offset)
    offset = 0
    for para in re.split(r"\n\s*\n", text):
        start = text.index(para, offset) if para else offset
        if para.strip():
            pieces.append((para.strip(), start + para.index(para.strip()[0])))
        offset = start + len(para)

    def flush(group: list[tuple[str, int]]) -> None:
        if not group:
            return
        joined = "\n\n".join(p for p, _ in group)
        begin = group[0][1]
        end = group[-1][1] + len(group[-1][0])
        chunks.append((joined, (begin, end)))

    group: list[tuple[str, int]] = []
    group_len = 0
    for para, start in pieces:
        if len(para) > max_chars:
            flush(group)
            group, group_len = [], 0
            chunks.extend(_split_oversize(para, start, max_chars))
            continue
        extra = len(para) + (2 if group else 0)
        if group_len + extra > max_chars:
            flush(group)
            group, group_len = [], 0
        group.append((para, start))
        group_len += len(para) + (2 if group_len else 0)
    flush(group)
    return chunks


def _split_oversize(para: str, start: int, max_chars: int) -> list[tuple[str, tuple[int, int]]]:
    out: list[tuple[str, tuple[int, int]]] = []
    cursor = 0
    current = ""
    current_begin = 0
    for sentence in _SENTENCE_RE.split(para):
        while len(sentence) > max_chars:  # pathological single sentence
            out.append((sentence[:max_chars], (start + cursor, start + cursor + max_chars)))
            sentence = sentence[max_chars:]
            cursor += max_chars
        candidate = f"{current} {sentence}".strip() if current else sentence
        if len(candidate) > max_chars:
            out.append((current, (start + current_begin, start + current_begin + len(current))))
            current = sentence
            current_begin = para.index(sentence, cursor)
        else:
            if not current:
                current_begin = para.index(sentence, cursor) if sentence else cursor
            current = candidate
        cursor = current_begin + len(current)
    if current:
        out.append((current, (start + current_begin, start + current_begin + len(current))))
    return out


class KnowledgeBase:
    """One named corpus: an in-memory chunk list mirrored to a JSONL store."""

    def __init__(self, gateway: ModelGateway, store_path: str | Path | None = None,
                 corpus: str = "cooking") -> None:
        self.gateway = gateway
        self.corpus = corpus
        self.store_path = Path(store_path) if store_path else None
        self.chunks: list[ResourceChunk] = []
        if self.store_path and self.store_path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.store_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    self.chunks.append(ResourceChunk.from_record(json.loads(line)))
        dims = {len(c.embedding) for c in self.chunks}
        if len(dims) > 1:
            raise ValueError(f"store mixes embedding dimensions: {sorted(dims)}")

    def _persist(self, chunks: Sequence[ResourceChunk]) -> None:
        if not self.store_path:
            return
        self.store_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.store_path, "a", encoding="utf-8") as fh:
            for chunk in chunks:
                fh.write(json.dumps(chunk.to_record(), ensure_ascii=False) + "\n")

    # -- ingestion -----------------------------------------------------

    def ingest_resource(self, path: str | Path) -> list[ResourceChunk]:
        """Chunk, embed, and persist one document (text, HTML, or image).

        Unreadable documents are skipped with a log entry; an empty document
        yields zero chunks and a warning.
        """
        path = Path(path)
        try:
            if path.suffix.lower() in IMAGE_SUFFIXES:
                chunks = self._ingest_image(path)
            else:
                chunks = self._ingest_text(path)
        except (OSError, GatewayError) as err:
            logger.error("skipping unreadable resource %s: %s", path, err)
            return []
        if not chunks:
            logger.warning("resource %s produced no chunks", path)
            return []
        self.chunks.extend(chunks)
        self._persist(chunks)
        return chunks

    def _ingest_text(self, path: Path) -> list[ResourceChunk]:
        raw = path.read_text(encoding="utf-8")
        if path.suffix.lower() in {".html", ".htm"}:
            raw = strip_html(raw)
        source = str(path)
        chunks = []
        for i, (text, span) in enumerate(split_paragraph_chunks(raw)):
            chunks.append(
                ResourceChunk(
                    chunk_id=f"{path.name}#{i:04d}",
                    source=source,
                    modality="text",
                    text=text,
                    embedding=self.gateway.embed(text),
                    char_span=span,
                )
            )
        return chunks

    def _ingest_image(self, path: Path) -> list[ResourceChunk]:
        data = path.read_bytes()
        image_ref = hashlib.sha256(data).hexdigest()
        caption = self.gateway.complete(
            ModelRequest(kind="batch", prompt=caption_prompt(image_ref), images=(image_ref,))
        ).text.strip()
        if not caption:
            return []
        return [
            ResourceChunk(
                chunk_id=f"{path.name}#0000",
                source=str(path),
                modality="image_caption",
                text=caption,
                embedding=self.gateway.embed(caption),
                image_ref=image_ref,
            )
        ]

    def ingest_manifest(self, manifest_path: str | Path) -> int:
        """Ingest every path listed in a manifest file (one per line,
        blank lines and # comments skipped). Returns chunk count."""
        base = Path(manifest_path).parent
        total = 0
        for line in Path(manifest_path).read_text(encoding="utf-8").splitlines():
            entry = line.strip()
            if not entry or entry.startswith("#"):
                continue
            target = Path(entry)
            if not target.is_absolute():
                target = base / target
            total += len(self.ingest_resource(target))
        return total

    # -- retrieval -----------------------------------------------------

    def retrieve(self, query_text: str, k: int = 3) -> list[RetrievedChunk]:
        """Top-k chunks by cosine similarity, ties broken by chunk_id."""
        if not self.chunks:
            return []
        query = self.gateway.embed(query_text)
        ranked = sorted(
            (
                RetrievedChunk(chunk=c, score=float(np.dot(query, c.embedding)))
                for c in self.chunks
            ),
            key=lambda r: (-r.score, r.chunk.chunk_id),
        )
        return ranked[:k]


@dataclass
class Suggestion:
    text: str
    context: list[RetrievedChunk]


def suggest(
    action_instruction: str,
    profile: UserProfile,
    kb: KnowledgeBase,
    k: int = 3,
) -> Suggestion:
    """Personalized tip/workaround for the current action, grounded in the
    top-k retrieved chunks. With nothing to retrieve the answer is exactly
    the no-answer sentinel; context provenance is always logged."""
    user_info = profile.serialize()
    query = rag_query(action_instruction, user_info)
    retrieved = kb.retrieve(query, k=k)
    if not retrieved:
        logger.info("suggest: empty retrieval for %r", action_instruction[:40])
        return Suggestion(text=NO_ANSWER, context=[])
    for item in retrieved:
        logger.info(
            "suggest context: %s (%s) score=%.3f",
            item.chunk.chunk_id, item.chunk.source, item.score,
        )
    context = "\n---\n".join(
        f"[{item.chunk.source}] {item.chunk.text}" for item in retrieved
    )
    prompt = rag_prompt(user_info or "(none)", action_instruction, context)
    text = kb.gateway.complete(ModelRequest(kind="batch", prompt=prompt)).text.strip()
    return Suggestion(text=text, context=retrieved)
