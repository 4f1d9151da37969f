/** Console entry point: fetch the plan, connect, wire the controls. */

import { SessionClient } from "./client.js";
import { isCoachPlan, type CoachPlan } from "./protocol.js";
import { announce, renderPlanOutline, renderStatus, renderTimeline } from "./ui.js";
import {
  applyServerMessage,
  initialViewState,
  setConnection,
  type ConsoleViewState,
} from "./viewstate.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const endpoint = new URL(window.location.href);
  const wsUrl = `${endpoint.protocol === "https:" ? "wss" : "ws"}://${endpoint.host}/session`;

  let plan: CoachPlan | null = null;
  try {
    const data = await (await fetch("/plan")).json();
    if (isCoachPlan(data)) plan = data;
  } catch {
    // outline stays empty; the session still works
  }

  let view: ConsoleViewState = initialViewState();
  const outline = el<HTMLElement>("plan-outline");
  const timeline = el<HTMLElement>("timeline");
  const live = el<HTMLElement>("live-region");
  const statusEls = {
    connection: el<HTMLElement>("connection-status"),
    narration: el<HTMLElement>("narration-status"),
    confirmBar: el<HTMLElement>("confirm-bar"),
  };

  const redraw = () => {
    if (plan) renderPlanOutline(outline, plan, view);
    renderTimeline(timeline, view.timeline);
    renderStatus(statusEls, view);
  };

  const client = new SessionClient({
    url: wsUrl,
    socketFactory: (url) => new WebSocket(url) as unknown as never,
    onMessage: (message) => {
      const before = view.timeline.length;
      view = applyServerMessage(view, message);
      const added = view.timeline.slice(before);
      for (const entry of added) announce(live, entry);
      redraw();
    },
    onStatus: (status) => {
      view = setConnection(view, status);
      redraw();
    },
  });
  client.connect();
  redraw();

  for (const name of ["next", "back", "repeat", "yes", "no"] as const) {
    el<HTMLButtonElement>(`btn-${name}`).addEventListener("click", () => {
      client.sendCommand(name);
    });
  }
  const narrationToggle = el<HTMLInputElement>("narration-toggle");
  narrationToggle.addEventListener("change", () => {
    client.sendCommand(narrationToggle.checked ? "narration_on" : "narration_off");
  });

  const utterance = el<HTMLInputElement>("utterance-input");
  const sendUtterance = () => {
    const text = utterance.value.trim();
    if (!text) return;
    client.sendSpeech(text);
    utterance.value = "";
  };
  el<HTMLButtonElement>("btn-say").addEventListener("click", sendUtterance);
  utterance.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") sendUtterance();
  });
  el<HTMLButtonElement>("btn-speech-start").addEventListener("click", () => {
    client.sendCommand("speech_start");
    utterance.focus();
  });

  wireCamera(client);
}

function wireCamera(client: SessionClient): void {
  const video = el<HTMLVideoElement>("camera-preview");
  const toggle = el<HTMLButtonElement>("btn-camera");
  let stream: MediaStream | null = null;
  let timer: number | null = null;

  const stop = () => {
    if (timer !== null) window.clearInterval(timer);
    timer = null;
    stream?.getTracks().forEach((track) => track.stop());
    stream = null;
    video.srcObject = null;
    toggle.textContent = "Start camera";
    toggle.setAttribute("aria-pressed", "false");
  };

  toggle.addEventListener("click", async () => {
    if (stream) {
      stop();
      return;
    }
    try {
      stream = await navigator.mediaDevices.getUserMedia({ video: true });
    } catch {
      return;
    }
    video.srcObject = stream;
    await video.play();
    toggle.textContent = "Stop camera";
    toggle.setAttribute("aria-pressed", "true");
    // capture well above 1 Hz; the throttle keeps one frame per second
    timer = window.setInterval(() => {
      const frame = captureFrame(video);
      if (frame) client.sendFrame(frame);
    }, 200);
  });

  window.addEventListener("beforeunload", stop);
}

/** JPEG-encode the current video frame, downscaled to stay small. */
export function captureFrame(video: HTMLVideoElement, maxWidth = 640): string | null {
  const width = video.videoWidth || 0;
  const height = video.videoHeight || 0;
  if (!width || !height) return null;
  const scale = Math.min(1, maxWidth / width);
  const canvas = document.createElement("canvas");
  canvas.width = Math.round(width * scale);
  canvas.height = Math.round(height * scale);
  const ctx = canvas.getContext("2d");
  if (!ctx) return null;
  ctx.drawImage(video, 0, 0, canvas.width, canvas.height);
  const dataUrl = canvas.toDataURL("image/jpeg", 0.7);
  return dataUrl.split(",", 2)[1] ?? null;
}

boot().catch((err) => {
  console.error("console failed to start", err);
});
