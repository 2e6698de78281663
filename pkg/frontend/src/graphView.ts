// SVG rendering of one graph: branch-labeled edges, loose edges marked "?",
// optional highlight of the node currently executing.

import { NODE_H, NODE_W, layoutGraph } from "./layout.js";
import type { GraphDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface GraphViewOptions {
  highlightNode?: string | null;
  onDrillDown?: (graphId: string) => void;
}

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) el.setAttribute(key, value);
  return el;
}

export function renderGraph(
  container: HTMLElement,
  doc: GraphDoc,
  options: GraphViewOptions = {},
): SVGSVGElement {
  const layout = layoutGraph(doc);
  const svg = svgEl("svg", {
    width: String(Math.max(layout.width, NODE_W) + 20),
    height: String(layout.height + 20),
    class: "graph-view",
  }) as SVGSVGElement;
  const origin = new Map(layout.nodes.map((n) => [n.id, n]));

  for (const edge of layout.edges) {
    const from = origin.get(edge.src);
    const to = origin.get(edge.dst);
    if (!from || !to) continue;
    const x1 = from.x + NODE_W / 2 + 10;
    const y1 = from.y + NODE_H + 10;
    const x2 = to.x + NODE_W / 2 + 10;
    const y2 = to.y + 10;
    const line = svgEl("line", {
      x1: String(x1),
      y1: String(y1),
      x2: String(x2),
      y2: String(y2),
      class: edge.loose ? "edge loose-edge" : "edge",
      "data-branch": edge.branch,
      "data-src": edge.src,
      "data-dst": edge.dst,
    });
    svg.appendChild(line);
    const label = svgEl("text", {
      x: String((x1 + x2) / 2 + 4),
      y: String((y1 + y2) / 2),
      class: "edge-label",
    });
    label.textContent = edge.branch;
    svg.appendChild(label);
  }

  for (const node of layout.nodes) {
    const group = svgEl("g", {
      class:
        `node node-${node.kind}` +
        (options.highlightNode === node.id ? " node-current" : "") +
        (node.loose ? " node-loose" : ""),
      "data-node-id": node.id,
    });
    const shape = svgEl("rect", {
      x: String(node.x + 10),
      y: String(node.y + 10),
      width: String(NODE_W),
      height: String(NODE_H),
      rx: node.kind === "start" || node.kind === "end" ? "22" : "6",
    });
    group.appendChild(shape);
    const text = svgEl("text", {
      x: String(node.x + 10 + NODE_W / 2),
      y: String(node.y + 10 + NODE_H / 2 + 4),
      "text-anchor": "middle",
      class: "node-label",
    });
    text.textContent = node.label;
    group.appendChild(text);
    const nodeDoc = doc.nodes[node.id];
    if (nodeDoc?.kind === "graphSib" && nodeDoc.graphType?.id && options.onDrillDown) {
      group.addEventListener("click", () => options.onDrillDown!(nodeDoc.graphType!.id!));
      group.setAttribute("class", group.getAttribute("class") + " node-drill");
    }
    svg.appendChild(group);
  }

  container.replaceChildren(svg);
  return svg;
}
