// Run view-model: a pure reducer over the ordered event stream plus the
// polled status. Events apply strictly in seq order; anything out of order is
// buffered so the log never displays a gap.

import type { RunStatusDoc, TraceEventDoc } from "./types.js";

export interface RunView {
  runId: string;
  status: string;
  reason: string;
  events: TraceEventDoc[];
  frames: { graphId: string; instance: string }[];
  currentNode: string | null;
  lastSeq: number;
  buffered: TraceEventDoc[];
}

export function emptyRunView(runId: string): RunView {
  return {
    runId,
    status: "running",
    reason: "",
    events: [],
    frames: [],
    currentNode: null,
    lastSeq: 0,
    buffered: [],
  };
}

function applyOne(view: RunView, event: TraceEventDoc): void {
  view.events.push(event);
  view.lastSeq = event.seq;
  switch (event.type) {
    case "enter-graph":
      view.frames.push({ graphId: event.graphId ?? "", instance: event.instance ?? "" });
      view.currentNode = null;
      break;
    case "exit-graph":
      view.frames.pop();
      view.currentNode = null;
      break;
    case "paused":
      view.currentNode = event.nodeId ?? null;
      break;
    case "run-finished":
    case "run-aborted":
      view.currentNode = null;
      break;
    default:
      break;
  }
}

/** Apply events in seq order; non-contiguous ones wait in the buffer. */
export function applyEvents(view: RunView, incoming: TraceEventDoc[]): RunView {
  const next: RunView = {
    ...view,
    events: [...view.events],
    frames: [...view.frames],
    buffered: [...view.buffered, ...incoming],
  };
  next.buffered.sort((a, b) => a.seq - b.seq);
  const remaining: TraceEventDoc[] = [];
  for (const event of next.buffered) {
    if (event.seq <= next.lastSeq) continue; // duplicate delivery
    if (event.seq === next.lastSeq + 1) {
      applyOne(next, event);
    } else {
      remaining.push(event);
    }
  }
  next.buffered = remaining;
  return next;
}

export function applyStatus(view: RunView, status: RunStatusDoc): RunView {
  const frames = status.frames.map((f) => ({ graphId: f.graphId, instance: f.instance }));
  const top = status.frames[status.frames.length - 1];
  return {
    ...view,
    status: status.status,
    reason: status.reason ?? status.error ?? "",
    frames: frames.length ? frames : view.frames,
    currentNode: top ? top.currentNode : view.currentNode,
  };
}

/** Steering controls are live only while the run is paused. */
export function steeringEnabled(view: RunView): boolean {
  return view.status === "paused";
}

export interface VariantPause {
  var: string;
  interfaceId: string;
}

/** Parse the pause reason of a manual-selection pause, if that is what it is. */
export function variantPause(view: RunView): VariantPause | null {
  if (!view.reason.startsWith("awaiting-variant:")) return null;
  const [, varName, interfaceId] = view.reason.split(":");
  if (!varName || !interfaceId) return null;
  return { var: varName, interfaceId };
}

export function bracketDepths(events: TraceEventDoc[]): number[] {
  let depth = 0;
  return events.map((event) => {
    if (event.type === "enter-graph") depth += 1;
    else if (event.type === "exit-graph") depth -= 1;
    return depth;
  });
}

export function describeEvent(event: TraceEventDoc): string {
  switch (event.type) {
    case "enter-graph":
      return `enter ${event.graphId} (${event.instance})`;
    case "exit-graph":
      return `exit ${event.graphId} -> ${event.branch}`;
    case "exec-activity":
      return `${event.activityId} -> ${event.branch}`;
    case "paused":
      return `paused at ${event.nodeId}: ${event.reason}`;
    case "variant-selected":
      return `variant ${event.graphId} -> ${event.var}`;
    case "edit-applied":
      return `ad-hoc ${event.newGraphId} behind ${event.interfaceId}`;
    case "synthesized":
      return `synthesized [${(event.activities ?? []).join(", ")}] at ${event.site?.nodeId}/${event.site?.branch}`;
    case "run-finished":
      return `finished -> ${event.branch}`;
    case "run-aborted":
      return `aborted: ${event.error}`;
    default:
      return event.type;
  }
}
