"""Bidirectional session endpoint: JSON messages over a WebSocket.

Each connection runs an independent session. Inbound messages and scheduler
ticks share one asyncio queue per connection, so frames, utterances, and
verdicts serialize into a single ordered event stream exactly like the
replay runner.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import logging
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .config import Config
from .intents import IntentRouter
from .knowledge import KnowledgeBase, UserProfile
from .plan import CoachPlan
from .session import SessionEngine, WallClock

logger = logging.getLogger(__name__)

CLIENT_MESSAGE_TYPES = ("frame", "utterance", "command")


def validate_client_message(message: dict) -> str | None:
    """Schema check for inbound messages; returns an error string or None.

    The web console enforces the same shape before sending.
    """
    if not isinstance(message, dict):
        return "message must be an object"
    mtype = message.get("type")
    if mtype not in CLIENT_MESSAGE_TYPES:
        return f"unknown message type {mtype!r}"
    if not isinstance(message.get("ts"), (int, float)):
        return "ts must be a number"
    if mtype == "frame" and not isinstance(message.get("image_b64"), str):
        return "frame needs image_b64"
    if mtype == "utterance" and not isinstance(message.get("text"), str):
        return "utterance needs text"
    if mtype == "command" and not isinstance(message.get("name"), str):
        return "command needs name"
    return None


class SessionConnection:
    """One websocket's session loop."""

    def __init__(
        self,
        websocket: WebSocket,
        plan: CoachPlan,
        profile: UserProfile,
        engine: SessionEngine,
        kb: KnowledgeBase | None,
        frame_dir: Path | None,
    ) -> None:
        self.websocket = websocket
        self.engine = engine
        self.router = IntentRouter(engine, kb, engine.gateway)
        self.state = engine.start_session(plan, profile, clock=WallClock())
        self.frame_dir = frame_dir
        self.queue: asyncio.Queue = asyncio.Queue()
        self._sent = 0

    async def _flush(self) -> None:
        log = self.state.event_log
        while self._sent < len(log):
            await self.websocket.send_json(log[self._sent].to_wire())
            self._sent += 1
        await self.websocket.send_json(self.state.state_wire())

    def _handle(self, message: dict) -> None:
        mtype = message["type"]
        if mtype == "frame":
            try:
                data = base64.b64decode(message["image_b64"], validate=True)
            except Exception:
                logger.warning("undecodable frame payload dropped")
                return
            digest = hashlib.sha256(data).hexdigest()
            if self.frame_dir is not None:
                path = self.frame_dir / f"{digest}.jpg"
                if not path.exists():
                    path.write_bytes(data)
            self.engine.ingest_frame(self.state, float(message["ts"]), digest)
        elif mtype == "utterance":
            self.router.handle_utterance(self.state, message["text"])
        elif mtype == "command":
            name = message["name"]
            if name in ("next", "back", "repeat"):
                self.engine.navigate(self.state, name)
            elif name in ("yes", "no"):
                if self.state.awaiting_confirmation:
                    self.engine.confirm_advance(self.state, name)
            elif name == "narration_on":
                self.engine.toggle_narration(self.state, True)
            elif name == "narration_off":
                self.engine.toggle_narration(self.state, False)
            elif name == "speech_start":
                self.router.on_speech_start(self.state)
            else:
                logger.warning("unknown command %r ignored", name)

    async def run(self) -> None:
        await self.websocket.accept()
        await self._flush()
        ticker = asyncio.create_task(self._ticker())
        receiver = asyncio.create_task(self._receiver())
        try:
            while True:
                item = await self.queue.get()
                if item is None:
                    break
                if item == "tick":
                    verdict = self.engine.batch_tick(self.state)
                    if verdict is not None:
                        self.engine.apply_verdict(self.state, verdict)
                else:
                    error = validate_client_message(item)
                    if error:
                        logger.warning("bad client message: %s", error)
                    else:
                        self._handle(item)
                await self._flush()
        except WebSocketDisconnect:
            pass
        finally:
            ticker.cancel()
            receiver.cancel()

    async def _ticker(self) -> None:
        period = self.engine.config.tick_period_s
        while True:
            await asyncio.sleep(period)
            await self.queue.put("tick")

    async def _receiver(self) -> None:
        try:
            while True:
                message = await self.websocket.receive_json()
                await self.queue.put(message)
        except (WebSocketDisconnect, RuntimeError):
            await self.queue.put(None)


def create_app(
    plan: CoachPlan,
    profile: UserProfile | None = None,
    config: Config | None = None,
    gateway=None,
    kb: KnowledgeBase | None = None,
    frame_dir: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    """Session server: GET /plan for the outline, WS /session for the live
    protocol, and (when present) the web console as static files."""
    config = config or Config()
    profile = profile or UserProfile()
    app = FastAPI(title="stepcoach session server")
    engine = SessionEngine(gateway, config)
    frames = Path(frame_dir) if frame_dir else None
    if frames is not None:
        frames.mkdir(parents=True, exist_ok=True)

    @app.get("/plan")
    async def get_plan() -> JSONResponse:
        return JSONResponse(plan.to_dict())

    @app.websocket("/session")
    async def session_socket(websocket: WebSocket) -> None:
        connection = SessionConnection(websocket, plan, profile, engine, kb, frames)
        await connection.run()

    static = Path(static_dir) if static_dir else None
    if static is not None and static.is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="console")
    return app
