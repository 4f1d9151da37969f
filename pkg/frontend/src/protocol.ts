/**
 * Session wire protocol: message shapes and validation.
 *
 * The server enforces the same rules on inbound messages; validating here
 * keeps a buggy console from silently dropping input on the server side.
 */

export type CommandName =
  | "next"
  | "back"
  | "repeat"
  | "yes"
  | "no"
  | "narration_on"
  | "narration_off"
  | "speech_start";

export const COMMAND_NAMES: readonly CommandName[] = [
  "next",
  "back",
  "repeat",
  "yes",
  "no",
  "narration_on",
  "narration_off",
  "speech_start",
];

export interface FrameMessage {
  type: "frame";
  ts: number;
  image_b64: string;
}

export interface UtteranceMessage {
  type: "utterance";
  text: string;
  ts: number;
}

export interface CommandMessage {
  type: "command";
  name: CommandName;
  ts: number;
}

export type ClientMessage = FrameMessage | UtteranceMessage | CommandMessage;

export const EVENT_KINDS = [
  "instruction",
  "demonstration_detail",
  "progress_update",
  "completion_prompt",
  "mistake_alert",
  "suggestion",
  "answer",
  "reframe_request",
  "error",
] as const;

export type EventKind = (typeof EVENT_KINDS)[number];

export interface EventMessage {
  type: "event";
  kind: EventKind;
  text: string;
  step_index: number;
  action_index: number;
  ts: number;
}

export interface StateMessage {
  type: "state";
  step_index: number;
  action_index: number;
  narration_enabled: boolean;
  awaiting_confirmation: boolean;
}

export type ServerMessage = EventMessage | StateMessage;

export interface PlanAction {
  instruction: string;
  supplementary: string[];
  demonstration_description: string;
  action_type: string;
  in_progress_criteria: string[];
  completion_criteria: string[];
  mistake_criteria: string[];
  nonvisual_completion_criteria: string[];
  start: number;
  end: number;
}

export interface PlanStep {
  step_name: string;
  start: number;
  end: number;
  tools: string[];
  materials: string[];
  new_tools: string[];
  new_materials: string[];
  actions: PlanAction[];
}

export interface CoachPlan {
  version: string;
  video: { title: string; duration_s: number };
  steps: PlanStep[];
}

/** Error text for an invalid outbound message, or null when well formed. */
export function validateClientMessage(message: unknown): string | null {
  if (typeof message !== "object" || message === null) {
    return "message must be an object";
  }
  const m = message as Record<string, unknown>;
  if (typeof m.ts !== "number" || !Number.isFinite(m.ts)) {
    return "ts must be a finite number";
  }
  switch (m.type) {
    case "frame":
      return typeof m.image_b64 === "string" && m.image_b64.length > 0
        ? null
        : "frame needs image_b64";
    case "utterance":
      return typeof m.text === "string" && m.text.trim().length > 0
        ? null
        : "utterance needs text";
    case "command":
      return COMMAND_NAMES.includes(m.name as CommandName)
        ? null
        : `unknown command ${String(m.name)}`;
    default:
      return `unknown message type ${String(m.type)}`;
  }
}

export function encodeClientMessage(message: ClientMessage): string {
  const error = validateClientMessage(message);
  if (error !== null) {
    throw new Error(`refusing to send invalid message: ${error}`);
  }
  return JSON.stringify(message);
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let data: unknown;
  try {
    data = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const m = data as Record<string, unknown>;
  if (m.type === "event") {
    if (
      typeof m.text === "string" &&
      typeof m.step_index === "number" &&
      typeof m.action_index === "number" &&
      typeof m.ts === "number" &&
      EVENT_KINDS.includes(m.kind as EventKind)
    ) {
      return data as EventMessage;
    }
    return null;
  }
  if (m.type === "state") {
    if (
      typeof m.step_index === "number" &&
      typeof m.action_index === "number" &&
      typeof m.narration_enabled === "boolean" &&
      typeof m.awaiting_confirmation === "boolean"
    ) {
      return data as StateMessage;
    }
    return null;
  }
  return null;
}

export function isCoachPlan(data: unknown): data is CoachPlan {
  if (typeof data !== "object" || data === null) return false;
  const p = data as Record<string, unknown>;
  return p.version === "coachplan/1" && Array.isArray(p.steps);
}
