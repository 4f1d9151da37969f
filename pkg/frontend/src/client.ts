/**
 * Session client: one socket, ordered message delivery, automatic
 * reconnect with capped exponential backoff.
 *
 * The socket is injected as a factory so browsers pass the native
 * WebSocket and tests pass a scripted fake.
 */

import {
  encodeClientMessage,
  parseServerMessage,
  type ClientMessage,
  type CommandName,
  type ServerMessage,
} from "./protocol.js";
import { FrameThrottle } from "./throttle.js";

export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => WebSocketLike;

export interface SessionClientOptions {
  url: string;
  socketFactory: SocketFactory;
  onMessage: (message: ServerMessage) => void;
  onStatus?: (status: "connecting" | "connected" | "disconnected") => void;
  /** Backoff schedule in ms; the last entry repeats. */
  backoffMs?: number[];
  setTimeoutFn?: (fn: () => void, ms: number) => unknown;
  /** Session clock for frame timestamps, seconds. */
  now?: () => number;
}

const DEFAULT_BACKOFF = [500, 1000, 2000, 5000];

export class SessionClient {
  private socket: WebSocketLike | null = null;
  private attempts = 0;
  private closed = false;
  private readonly throttle = new FrameThrottle();
  private readonly opts: Required<Omit<SessionClientOptions, "onStatus">> &
    Pick<SessionClientOptions, "onStatus">;

  constructor(options: SessionClientOptions) {
    this.opts = {
      backoffMs: DEFAULT_BACKOFF,
      setTimeoutFn: (fn, ms) => setTimeout(fn, ms),
      now: () => Date.now() / 1000,
      ...options,
    };
  }

  connect(): void {
    if (this.closed) return;
    this.opts.onStatus?.("connecting");
    const socket = this.opts.socketFactory(this.opts.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.opts.onStatus?.("connected");
    };
    socket.onmessage = (ev) => {
      const message = parseServerMessage(String(ev.data));
      if (message !== null) {
        this.opts.onMessage(message);
      }
    };
    socket.onerror = () => {
      // close handler owns reconnection
    };
    socket.onclose = () => {
      this.socket = null;
      if (this.closed) return;
      this.opts.onStatus?.("disconnected");
      const schedule = this.opts.backoffMs;
      const delay = schedule[Math.min(this.attempts, schedule.length - 1)];
      this.attempts += 1;
      this.opts.setTimeoutFn(() => this.connect(), delay);
    };
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
    this.socket = null;
  }

  get connected(): boolean {
    return this.socket !== null;
  }

  private send(message: ClientMessage): boolean {
    if (this.socket === null) return false;
    this.socket.send(encodeClientMessage(message));
    return true;
  }

  sendUtterance(text: string): boolean {
    return this.send({ type: "utterance", text, ts: this.opts.now() });
  }

  sendCommand(name: CommandName): boolean {
    return this.send({ type: "command", name, ts: this.opts.now() });
  }

  /** Speech onset interrupt, then the utterance itself. */
  sendSpeech(text: string): boolean {
    this.sendCommand("speech_start");
    return this.sendUtterance(text);
  }

  /**
   * Feed one captured frame; returns true when it was sent, false when the
   * 1 Hz throttle (or a closed socket) swallowed it.
   */
  sendFrame(imageB64: string, ts?: number): boolean {
    const stamp = ts ?? this.opts.now();
    if (!this.throttle.shouldSend(stamp)) return false;
    return this.send({ type: "frame", ts: stamp, image_b64: imageB64 });
  }
}
