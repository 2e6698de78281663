// Event log rendered as an indented tree mirroring the enter/exit nesting.

import { describeEvent } from "./state.js";
import type { TraceEventDoc } from "./types.js";

export function renderTrace(container: HTMLElement, events: TraceEventDoc[]): void {
  const list = document.createElement("ol");
  list.className = "trace-view";
  let depth = 0;
  for (const event of events) {
    if (event.type === "exit-graph") depth = Math.max(0, depth - 1);
    const row = document.createElement("li");
    row.className = `trace-event trace-${event.type}`;
    row.dataset.seq = String(event.seq);
    row.style.paddingLeft = `${depth * 18}px`;
    row.textContent = `#${event.seq} ${describeEvent(event)}`;
    list.appendChild(row);
    if (event.type === "enter-graph") depth += 1;
  }
  container.replaceChildren(list);
}
