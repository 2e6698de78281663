// Page wiring: library browser, graph view with drill-down, run console with
// a polling trace subscription, steering panel, and loose-edge synth preview.

import { ApiClient, ApiError } from "./api.js";
import { renderGraph } from "./graphView.js";
import { RunView, applyEvents, applyStatus, emptyRunView } from "./state.js";
import { SteeringPanel } from "./steering.js";
import { renderTrace } from "./traceView.js";
import type { GraphDoc } from "./types.js";

const POLL_MS = 250;

export class RunConsole {
  readonly api: ApiClient;
  view: RunView;
  private timer: ReturnType<typeof setTimeout> | null = null;
  onUpdate: (view: RunView) => void = () => {};

  constructor(api: ApiClient, runId: string) {
    this.api = api;
    this.view = emptyRunView(runId);
  }

  /** One poll cycle: drain new events, refresh status. */
  async refresh(): Promise<RunView> {
    const events = await this.api.getTrace(this.view.runId, this.view.lastSeq);
    this.view = applyEvents(this.view, events);
    this.view = applyStatus(this.view, await this.api.getRun(this.view.runId));
    this.onUpdate(this.view);
    return this.view;
  }

  /** Ask the engine to advance, then poll. */
  async stepAndRefresh(n: number): Promise<RunView> {
    if (this.view.status === "running") {
      await this.api.step(this.view.runId, n);
    }
    return this.refresh();
  }

  /** Drive until the run pauses or terminates (server enforces the stops). */
  async driveToRest(maxBatches = 50): Promise<RunView> {
    for (let i = 0; i < maxBatches; i += 1) {
      await this.refresh();
      if (this.view.status !== "running") break;
      await this.api.step(this.view.runId, 100);
    }
    return this.refresh();
  }

  subscribe(): void {
    const tick = async () => {
      try {
        await this.refresh();
      } catch {
        // transient poll failure: next tick retries with the same since-seq
      }
      if (this.view.status === "running" || this.view.status === "paused") {
        this.timer = setTimeout(tick, POLL_MS);
      }
    };
    this.timer = setTimeout(tick, POLL_MS);
  }

  unsubscribe(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
  }
}

export async function bootstrap(root: HTMLElement, baseUrl = ""): Promise<void> {
  const api = new ApiClient(baseUrl);
  root.innerHTML = `
    <header><h1 id="lib-title"></h1></header>
    <main class="columns">
      <nav>
        <h2>Interfaces</h2><ul id="interface-list"></ul>
        <h2>Graphs</h2><ul id="graph-list"></ul>
      </nav>
      <section>
        <h2 id="graph-title">graph</h2>
        <div id="graph-canvas"></div>
        <div id="synth-preview"></div>
      </section>
      <aside>
        <h2>Run</h2>
        <div id="run-controls">
          <select id="run-graph"></select>
          <textarea id="run-inputs" rows="3">[]</textarea>
          <button id="run-start">Start run</button>
          <button id="run-step">Run to pause</button>
        </div>
        <div id="run-status"></div>
        <div id="steering"></div>
        <h2>Trace</h2>
        <div id="trace"></div>
        <div id="error-line" class="error"></div>
      </aside>
    </main>`;

  const $ = (id: string) => root.querySelector<HTMLElement>(`#${id}`)!;
  const errorLine = $("error-line");
  const showError = (message: string) => {
    errorLine.textContent = message;
  };

  const library = await api.getLibrary();
  $("lib-title").textContent = `${library.name} v${library.version}`;

  let currentDoc: GraphDoc | null = null;
  let currentRun: RunConsole | null = null;

  const steering = new SteeringPanel($("steering"), api, {
    onCommandDone: () => {
      showError("");
      currentRun?.driveToRest().catch((e) => showError(String(e)));
    },
    onError: showError,
  });

  async function showGraph(graphId: string): Promise<void> {
    const doc = await api.getGraph(graphId, currentRun?.view.runId);
    currentDoc = doc;
    $("graph-title").textContent = graphId + (doc.implements ? ` : ${doc.implements}` : "");
    const highlight = currentRun?.view.currentNode ?? null;
    renderGraph($("graph-canvas"), doc, {
      highlightNode: highlight,
      onDrillDown: (sub) => void showGraph(sub).catch((e) => showError(String(e))),
    });
    renderSynthPreview(doc);
  }

  function renderSynthPreview(doc: GraphDoc): void {
    const panel = $("synth-preview");
    panel.replaceChildren();
    for (const loose of doc.looseEdges ?? []) {
      const button = document.createElement("button");
      button.textContent = `Synthesize ${loose.src}/${loose.branch}`;
      button.addEventListener("click", async () => {
        try {
          const solution = await api.synthesize(loose.spec);
          const line = document.createElement("div");
          line.className = "synth-result";
          line.textContent = solution.sequences.length
            ? `chains of length ${solution.minimalLength}: ` +
              solution.sequences.map((s) => s.join(" -> ")).join(" | ")
            : "no solution within the bound";
          panel.appendChild(line);
        } catch (error) {
          showError(String((error as Error).message));
        }
      });
      panel.appendChild(button);
    }
  }

  function attachRun(runId: string): void {
    currentRun?.unsubscribe();
    const consoleRun = new RunConsole(api, runId);
    currentRun = consoleRun;
    consoleRun.onUpdate = (view) => {
      $("run-status").textContent = `${runId}: ${view.status} ${view.reason}`;
      renderTrace($("trace"), view.events);
      void steering.update(runId, view).catch((e) => showError(String(e)));
      if (currentDoc && view.frames.length) {
        const top = view.frames[view.frames.length - 1];
        if (top.graphId !== currentDoc.id) void showGraph(top.graphId);
        else
          renderGraph($("graph-canvas"), currentDoc, {
            highlightNode: view.currentNode,
            onDrillDown: (sub) => void showGraph(sub),
          });
      }
    };
    consoleRun.subscribe();
  }

  const interfaceList = $("interface-list");
  for (const interfaceId of Object.keys(library.interfaces).sort()) {
    const item = document.createElement("li");
    item.textContent = interfaceId;
    interfaceList.appendChild(item);
  }
  const graphList = $("graph-list");
  const runGraphPicker = $("run-graph") as HTMLSelectElement;
  for (const graphId of Object.keys(library.graphs).sort()) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = graphId;
    link.addEventListener("click", (ev) => {
      ev.preventDefault();
      void showGraph(graphId).catch((e) => showError(String(e)));
    });
    item.appendChild(link);
    graphList.appendChild(item);
    const option = document.createElement("option");
    option.value = graphId;
    option.textContent = graphId;
    runGraphPicker.appendChild(option);
  }

  $("run-start").addEventListener("click", async () => {
    try {
      const inputs = JSON.parse(($("run-inputs") as HTMLTextAreaElement).value || "[]");
      const { runId } = await api.startRun(runGraphPicker.value, inputs);
      showError("");
      attachRun(runId);
      await showGraph(runGraphPicker.value);
      await currentRun!.driveToRest();
    } catch (error) {
      showError(error instanceof ApiError ? error.message : String(error));
    }
  });
  $("run-step").addEventListener("click", () => {
    void currentRun?.driveToRest().catch((e) => showError(String(e)));
  });
}

declare global {
  interface Window {
    steeringUi?: { bootstrap: typeof bootstrap };
  }
}

if (typeof window !== "undefined") {
  window.steeringUi = { bootstrap };
  const mount = document.getElementById("app");
  if (mount) void bootstrap(mount);
}
