// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { renderGraph } from "../src/graphView.js";
import { renderTrace } from "../src/traceView.js";
import { LOOSE_GRAPH } from "./fixtures.js";
import type { TraceEventDoc } from "../src/types.js";

describe("graph rendering", () => {
  it("renders every branch label losslessly", () => {
    const host = document.createElement("div");
    renderGraph(host, LOOSE_GRAPH);
    const rendered = Array.from(host.querySelectorAll("line.edge"))
      .map((el) => `${el.getAttribute("data-src")}/${el.getAttribute("data-branch")}`)
      .sort();
    const declared = [
      ...LOOSE_GRAPH.edges.map((e) => `${e.src}/${e.branch}`),
      ...(LOOSE_GRAPH.looseEdges ?? []).map((e) => `${e.src}/${e.branch}`),
    ].sort();
    expect(rendered).toEqual(declared);
  });

  it("marks loose edges and their ? hole", () => {
    const host = document.createElement("div");
    renderGraph(host, LOOSE_GRAPH);
    expect(host.querySelectorAll("line.loose-edge").length).toBe(1);
    const hole = host.querySelector(".node-loose .node-label");
    expect(hole?.textContent).toBe("?");
  });

  it("highlights the current node only", () => {
    const host = document.createElement("div");
    renderGraph(host, LOOSE_GRAPH, { highlightNode: "iterate-papers" });
    const current = host.querySelectorAll(".node-current");
    expect(current.length).toBe(1);
    expect(current[0].getAttribute("data-node-id")).toBe("iterate-papers");
  });

  it("wires drill-down clicks on graph call nodes", () => {
    const doc = structuredClone(LOOSE_GRAPH);
    doc.nodes["call"] = {
      kind: "graphSib",
      graphType: { kind: "graph", id: "validate-payment", graphKind: "service" },
      instanceSource: { kind: "fresh" },
      inputs: [],
      outputTargets: {},
    };
    doc.edges = doc.edges.filter((e) => e.branch !== "done");
    doc.edges.push(
      { src: "iterate-papers", branch: "done", dst: "call" },
      { src: "call", branch: "valid", dst: "end-valid" },
      { src: "call", branch: "invalid", dst: "end-invalid" },
    );
    const host = document.createElement("div");
    const drilled: string[] = [];
    renderGraph(host, doc, { onDrillDown: (g) => drilled.push(g) });
    (host.querySelector('[data-node-id="call"]') as SVGElement).dispatchEvent(
      new window.MouseEvent("click", { bubbles: true }),
    );
    expect(drilled).toEqual(["validate-payment"]);
  });
});

describe("trace rendering", () => {
  it("indents by bracket nesting and keys rows by seq", () => {
    const events: TraceEventDoc[] = [
      { seq: 1, type: "enter-graph", graphId: "outer", instance: "i1" },
      { seq: 2, type: "enter-graph", graphId: "inner", instance: "i2" },
      { seq: 3, type: "exec-activity", activityId: "margins?", branch: "yes" },
      { seq: 4, type: "exit-graph", graphId: "inner", branch: "valid" },
      { seq: 5, type: "run-finished", branch: "valid" },
    ];
    const host = document.createElement("div");
    renderTrace(host, events);
    const rows = Array.from(host.querySelectorAll("li"));
    expect(rows.map((r) => r.dataset.seq)).toEqual(["1", "2", "3", "4", "5"]);
    expect(rows.map((r) => r.style.paddingLeft)).toEqual(["0px", "18px", "36px", "18px", "18px"]);
    expect(rows[2].textContent).toContain("margins?");
  });
});
