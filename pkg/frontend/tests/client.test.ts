import { describe, expect, it } from "vitest";

import { SessionClient, type WebSocketLike } from "../src/client.js";
import type { ServerMessage } from "../src/protocol.js";

class FakeSocket implements WebSocketLike {
  sent: string[] = [];
  closedByClient = false;
  onopen: ((ev?: unknown) => void) | null = null;
  onmessage: ((ev: { data: unknown }) => void) | null = null;
  onclose: ((ev?: unknown) => void) | null = null;
  onerror: ((ev?: unknown) => void) | null = null;

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.closedByClient = true;
    this.onclose?.();
  }

  serverOpen(): void {
    this.onopen?.();
  }

  serverSend(message: unknown): void {
    this.onmessage?.({ data: JSON.stringify(message) });
  }

  serverDrop(): void {
    this.onclose?.();
  }
}

function harness(options: { backoffMs?: number[] } = {}) {
  const sockets: FakeSocket[] = [];
  const messages: ServerMessage[] = [];
  const statuses: string[] = [];
  const timers: Array<{ fn: () => void; ms: number }> = [];
  let clock = 100.0;
  const client = new SessionClient({
    url: "ws://test/session",
    socketFactory: () => {
      const socket = new FakeSocket();
      sockets.push(socket);
      return socket;
    },
    onMessage: (m) => messages.push(m),
    onStatus: (s) => statuses.push(s),
    backoffMs: options.backoffMs ?? [10, 20, 40],
    setTimeoutFn: (fn, ms) => {
      timers.push({ fn, ms });
      return 0;
    },
    now: () => clock,
  });
  return {
    client,
    sockets,
    messages,
    statuses,
    timers,
    tick: (seconds: number) => {
      clock += seconds;
    },
  };
}

describe("SessionClient", () => {
  it("delivers parsed server messages in order", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].serverOpen();
    h.sockets[0].serverSend({
      type: "event", kind: "instruction", text: "one", step_index: 0, action_index: 0, ts: 0,
    });
    h.sockets[0].serverSend({
      type: "state", step_index: 1, action_index: 0,
      narration_enabled: true, awaiting_confirmation: false,
    });
    h.sockets[0].serverSend({ garbage: true });
    expect(h.messages.map((m) => m.type)).toEqual(["event", "state"]);
  });

  it("sends validated commands and utterances over the wire", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].serverOpen();
    expect(h.client.sendCommand("next")).toBe(true);
    expect(h.client.sendUtterance("is it done yet?")).toBe(true);
    const wire = h.sockets[0].sent.map((s) => JSON.parse(s));
    expect(wire[0]).toMatchObject({ type: "command", name: "next" });
    expect(wire[1]).toMatchObject({ type: "utterance", text: "is it done yet?" });
  });

  it("speech sends the interrupt before the utterance", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].serverOpen();
    h.client.sendSpeech("which of these is salt?");
    const types = h.sockets[0].sent.map((s) => JSON.parse(s));
    expect(types[0]).toMatchObject({ type: "command", name: "speech_start" });
    expect(types[1]).toMatchObject({ type: "utterance", text: "which of these is salt?" });
  });

  it("throttles frames to one per second", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].serverOpen();
    let sentCount = 0;
    for (let i = 0; i < 30; i++) {
      if (h.client.sendFrame("YWJj")) sentCount += 1;
      h.tick(1 / 10); // 10 fps capture
    }
    expect(sentCount).toBe(3); // seconds 100, 101, 102
    const frames = h.sockets[0].sent
      .map((s) => JSON.parse(s))
      .filter((m) => m.type === "frame");
    expect(frames.length).toBe(3);
  });

  it("reconnects with the configured backoff schedule", () => {
    const h = harness({ backoffMs: [10, 20, 40] });
    h.client.connect();
    h.sockets[0].serverOpen();
    h.sockets[0].serverDrop();
    expect(h.statuses).toEqual(["connecting", "connected", "disconnected"]);
    expect(h.timers.map((t) => t.ms)).toEqual([10]);
    h.timers[0].fn(); // reconnect attempt 1
    h.sockets[1].serverDrop(); // fails before open
    expect(h.timers.map((t) => t.ms)).toEqual([10, 20]);
    h.timers[1].fn();
    h.sockets[2].serverDrop();
    h.timers[2].fn();
    h.sockets[3].serverDrop();
    // schedule caps at the last entry
    expect(h.timers.map((t) => t.ms)).toEqual([10, 20, 40, 40]);
    // a successful open resets the schedule
    h.timers[3].fn();
    h.sockets[4].serverOpen();
    h.sockets[4].serverDrop();
    expect(h.timers.map((t) => t.ms)).toEqual([10, 20, 40, 40, 10]);
  });

  it("close stops reconnection and sending", () => {
    const h = harness();
    h.client.connect();
    h.sockets[0].serverOpen();
    h.client.close();
    expect(h.sockets[0].closedByClient).toBe(true);
    expect(h.timers).toHaveLength(0);
    expect(h.client.sendCommand("next")).toBe(false);
  });
});
