/**
 * Console view state, derived purely from server messages.
 *
 * No task logic lives client-side: the view is a fold over the ordered
 * stream of state/event messages, so reconnecting and replaying the
 * server's next state message reproduces the same view.
 */

import type { EventMessage, ServerMessage, StateMessage } from "./protocol.js";

export type ConnectionStatus = "connecting" | "connected" | "disconnected";

export interface TimelineEntry extends EventMessage {
  seq: number;
}

export interface ConsoleViewState {
  connection: ConnectionStatus;
  stepIndex: number;
  actionIndex: number;
  narrationEnabled: boolean;
  awaitingConfirmation: boolean;
  timeline: TimelineEntry[];
  nextSeq: number;
}

export function initialViewState(): ConsoleViewState {
  return {
    connection: "connecting",
    stepIndex: 0,
    actionIndex: 0,
    narrationEnabled: true,
    awaitingConfirmation: false,
    timeline: [],
    nextSeq: 0,
  };
}

export function applyServerMessage(
  view: ConsoleViewState,
  message: ServerMessage,
): ConsoleViewState {
  if (message.type === "state") {
    return applyState(view, message);
  }
  return {
    ...view,
    timeline: [...view.timeline, { ...message, seq: view.nextSeq }],
    nextSeq: view.nextSeq + 1,
  };
}

function applyState(view: ConsoleViewState, message: StateMessage): ConsoleViewState {
  return {
    ...view,
    stepIndex: message.step_index,
    actionIndex: message.action_index,
    narrationEnabled: message.narration_enabled,
    awaitingConfirmation: message.awaiting_confirmation,
  };
}

export function setConnection(
  view: ConsoleViewState,
  connection: ConnectionStatus,
): ConsoleViewState {
  // the timeline survives disconnects; only mirrored fields reset on resume
  return { ...view, connection };
}
