// Deterministic layered DAG layout: nodes are layered by longest path from
// the start node (back edges ignored for layering), ordered within a layer by
// id, and placed on a fixed grid. Same document in, same coordinates out.

import type { GraphDoc } from "./types.js";

export const NODE_W = 150;
export const NODE_H = 44;
const GAP_X = 40;
const GAP_Y = 56;

export interface LayoutNode {
  id: string;
  kind: string;
  label: string;
  loose: boolean;
  x: number;
  y: number;
}

export interface LayoutEdge {
  src: string;
  dst: string;
  branch: string;
  loose: boolean;
}

export interface GraphLayout {
  nodes: LayoutNode[];
  edges: LayoutEdge[];
  width: number;
  height: number;
}

export function nodeLabel(doc: GraphDoc, nodeId: string): string {
  const node = doc.nodes[nodeId];
  if (!node) return nodeId;
  switch (node.kind) {
    case "start":
      return "start";
    case "end":
      return `end: ${node.branch}`;
    case "atomic":
      return node.activityId ?? nodeId;
    case "graphSib":
      return node.graphType?.id ?? nodeId;
    case "constructor":
      return `new ${node.serviceGraphId}`;
    default:
      return nodeId;
  }
}

function looseHoleId(src: string, branch: string): string {
  return `?${src}/${branch}`;
}

export function layoutGraph(doc: GraphDoc): GraphLayout {
  const nodeIds = Object.keys(doc.nodes).sort();
  const startId = nodeIds.find((id) => doc.nodes[id].kind === "start") ?? nodeIds[0];
  const edges = [...doc.edges].sort(
    (a, b) => a.src.localeCompare(b.src) || a.branch.localeCompare(b.branch),
  );

  const layer = new Map<string, number>();
  layer.set(startId, 0);
  // longest-path layering; a pass per node bounds the relaxation, and edges
  // that would push a node back up (cycles) keep their first assignment
  for (let pass = 0; pass < nodeIds.length; pass += 1) {
    let changed = false;
    for (const edge of edges) {
      const from = layer.get(edge.src);
      if (from === undefined || !(edge.dst in doc.nodes)) continue;
      const proposed = from + 1;
      const current = layer.get(edge.dst);
      if (current === undefined || (proposed > current && !onPathBack(edge.dst, edge.src))) {
        layer.set(edge.dst, current === undefined ? proposed : Math.max(current, proposed));
        changed = true;
      }
    }
    if (!changed) break;
  }

  function onPathBack(from: string, to: string): boolean {
    // conservative cycle guard: stop raising layers once both ends are placed
    // and the edge points upward or sideways
    const a = layer.get(from);
    const b = layer.get(to);
    return a !== undefined && b !== undefined && a <= b;
  }

  for (const id of nodeIds) {
    if (!layer.has(id)) layer.set(id, 0);
  }

  const looseEdges = [...(doc.looseEdges ?? [])].sort(
    (a, b) => a.src.localeCompare(b.src) || a.branch.localeCompare(b.branch),
  );

  const layers = new Map<number, string[]>();
  const push = (depth: number, id: string) => {
    const bucket = layers.get(depth) ?? [];
    bucket.push(id);
    layers.set(depth, bucket);
  };
  for (const id of nodeIds) push(layer.get(id)!, id);
  for (const loose of looseEdges) {
    push((layer.get(loose.src) ?? 0) + 1, looseHoleId(loose.src, loose.branch));
  }

  const nodes: LayoutNode[] = [];
  let width = 0;
  const depths = [...layers.keys()].sort((a, b) => a - b);
  for (const depth of depths) {
    const row = layers.get(depth)!.sort();
    row.forEach((id, index) => {
      const hole = id.startsWith("?");
      nodes.push({
        id,
        kind: hole ? "loose" : doc.nodes[id].kind,
        label: hole ? "?" : nodeLabel(doc, id),
        loose: hole,
        x: index * (NODE_W + GAP_X),
        y: depth * (NODE_H + GAP_Y),
      });
    });
    width = Math.max(width, row.length * (NODE_W + GAP_X));
  }
  const height = (depths[depths.length - 1] + 1) * (NODE_H + GAP_Y);

  const layoutEdges: LayoutEdge[] = [
    ...edges.map((e) => ({ src: e.src, dst: e.dst, branch: e.branch, loose: false })),
    ...looseEdges.map((e) => ({
      src: e.src,
      dst: looseHoleId(e.src, e.branch),
      branch: e.branch,
      loose: true,
    })),
  ];
  return { nodes, edges: layoutEdges, width, height };
}
