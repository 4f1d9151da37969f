/**
 * DOM rendering. Everything here is a pure projection of the view state;
 * handlers call back into the client and never touch task logic.
 */

import type { CoachPlan } from "./protocol.js";
import type { ConsoleViewState, TimelineEntry } from "./viewstate.js";

const SPOKEN_KINDS = new Set([
  "instruction",
  "completion_prompt",
  "mistake_alert",
  "reframe_request",
]);

export function renderPlanOutline(
  container: HTMLElement,
  plan: CoachPlan,
  view: ConsoleViewState,
): void {
  container.textContent = "";
  const list = document.createElement("ol");
  list.className = "plan-outline";
  plan.steps.forEach((step, si) => {
    const item = document.createElement("li");
    const heading = document.createElement("span");
    heading.textContent = step.step_name;
    heading.className = si === view.stepIndex ? "step current-step" : "step";
    item.appendChild(heading);
    const actions = document.createElement("ol");
    step.actions.forEach((action, ai) => {
      const actionItem = document.createElement("li");
      actionItem.textContent = action.instruction;
      const current = si === view.stepIndex && ai === view.actionIndex;
      actionItem.className = current ? "action current-action" : "action";
      if (current) actionItem.setAttribute("aria-current", "step");
      actions.appendChild(actionItem);
    });
    item.appendChild(actions);
    list.appendChild(item);
  });
  container.appendChild(list);
}

export function renderTimeline(container: HTMLElement, entries: TimelineEntry[]): void {
  container.textContent = "";
  for (const entry of entries) {
    const row = document.createElement("div");
    row.className = `timeline-entry kind-${entry.kind}`;
    const label = document.createElement("span");
    label.className = "kind";
    label.textContent = entry.kind.replace(/_/g, " ");
    const text = document.createElement("span");
    text.className = "text";
    text.textContent = entry.text;
    row.append(label, text);
    container.appendChild(row);
  }
  container.scrollTop = container.scrollHeight;
}

export function renderStatus(elements: {
  connection: HTMLElement;
  narration: HTMLElement;
  confirmBar: HTMLElement;
}, view: ConsoleViewState): void {
  elements.connection.textContent = view.connection;
  elements.connection.dataset.state = view.connection;
  elements.narration.textContent = view.narrationEnabled
    ? "Narration: on"
    : "Narration: off";
  elements.confirmBar.hidden = !view.awaitingConfirmation;
}

/** Push assertive announcements for events a voice assistant would speak. */
export function announce(live: HTMLElement, entry: TimelineEntry): void {
  if (!SPOKEN_KINDS.has(entry.kind)) return;
  live.textContent = "";
  // clearing first makes repeated identical announcements audible
  setTimeout(() => {
    live.textContent = entry.text;
  }, 0);
}
