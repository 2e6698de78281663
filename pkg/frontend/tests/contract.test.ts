// @vitest-environment jsdom
//
// UI contract test against a live engine: the variant picker at the payment
// pause must list exactly the graphs the API reports as conforming, and the
// steer-resume flow must drive the run to finished.

import { spawn, ChildProcess } from "node:child_process";
import { resolve } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { RunConsole } from "../src/app.js";
import { SteeringPanel } from "../src/steering.js";

const PORT = 8931;
const BASE = `http://127.0.0.1:${PORT}`;
const LIB = "src/slgengine/corpus/data/ocs-library.json";

let engine: ChildProcess;

async function waitFor<T>(probe: () => Promise<T | null>, what: string, ms = 30000): Promise<T> {
  const deadline = Date.now() + ms;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const value = await probe();
      if (value !== null) return value;
    } catch (error) {
      lastError = error;
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error(`timed out waiting for ${what}: ${lastError}`);
}

beforeAll(async () => {
  // vitest runs with cwd = frontend/; the engine package sits one level up
  engine = spawn("python3", ["-m", "slgengine.cli", "serve", LIB, "--port", String(PORT)], {
    cwd: resolve(process.cwd(), ".."),
    stdio: "ignore",
  });
  await waitFor(async () => {
    const response = await fetch(`${BASE}/library`);
    return response.ok ? true : null;
  }, "engine startup");
});

afterAll(() => {
  engine?.kill();
});

const USER = { kind: "domain", type: "User", payload: { name: { kind: "prim", value: "ada" } } };
const PROCEEDINGS = { kind: "domain", type: "Proceedings", payload: {} };

describe("steering a live run", () => {
  it("lists exactly the conforming payment variants and steers to finished", async () => {
    const api = new ApiClient(BASE);
    const { runId } = await api.startRun("conference-flow", [USER, PROCEEDINGS]);
    const consoleRun = new RunConsole(api, runId);
    const panelHost = document.createElement("div");
    const errors: string[] = [];
    const panel = new SteeringPanel(panelHost, api, {
      onCommandDone: () => void consoleRun.driveToRest().catch((e) => errors.push(String(e))),
      onError: (message) => errors.push(message),
    });
    consoleRun.onUpdate = (view) => void panel.update(runId, view).catch((e) => errors.push(String(e)));

    // controls stay gated while the run is still running
    expect(panel.resumeButton.disabled).toBe(true);

    let view = await consoleRun.driveToRest();
    expect(view.status).toBe("paused");
    expect(view.reason).toBe("interactive:fill-registration-info");
    await panel.update(runId, view);
    expect(panel.picker.disabled).toBe(true); // interactive pause: no variants

    panel.resumeButton.click();
    view = await waitFor(async () => {
      const current = await consoleRun.refresh();
      return current.reason.startsWith("awaiting-variant:") ? current : null;
    }, "payment variant pause");
    expect(view.reason).toBe("awaiting-variant:paymentProcess:Payment");

    await panel.update(runId, view);
    const expected = (await api.listGraphs("Payment", runId)).map((g) => g.id);
    expect(panel.variantIds()).toEqual(expected);
    expect(expected).toEqual(["CreditCardPayment", "InvoicePayment"]);
    expect(panel.picker.disabled).toBe(false);

    panel.picker.value = "InvoicePayment";
    panel.selectButton.click();
    await waitFor(async () => {
      const trace = await api.getTrace(runId);
      return trace.some((e) => e.type === "variant-selected" && e.graphId === "InvoicePayment")
        ? true
        : null;
    }, "variant-selected event");

    panel.resumeButton.click();
    const finished = await waitFor(async () => {
      const status = await api.getRun(runId);
      return status.status === "finished" ? status : null;
    }, "run completion");
    expect(finished.branch).toBe("completed");

    const trace = await api.getTrace(runId);
    expect(trace.some((e) => e.activityId === "get-invoice-provider")).toBe(true);
    expect(trace.at(-1)?.type).toBe("run-finished");
    expect(errors).toEqual([]);
  });

  it("run console view matches the server trace after completion", async () => {
    const api = new ApiClient(BASE);
    const { runId } = await api.startRun("prepare-proceedings", [PROCEEDINGS]);
    const consoleRun = new RunConsole(api, runId);
    const view = await consoleRun.driveToRest();
    expect(view.status).toBe("finished");
    const serverTrace = await api.getTrace(runId);
    expect(view.events).toEqual(serverTrace);
    expect(view.events.some((e) => e.type === "synthesized")).toBe(true);
  });

  it("server remains authoritative: stale commands are rejected with a reason", async () => {
    const api = new ApiClient(BASE);
    const { runId } = await api.startRun("prepare-proceedings", [PROCEEDINGS]);
    const consoleRun = new RunConsole(api, runId);
    await consoleRun.driveToRest();
    await expect(api.command(runId, { kind: "resume" })).rejects.toMatchObject({ status: 409 });
  });
});
