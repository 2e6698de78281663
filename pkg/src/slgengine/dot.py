"""DOT rendering of service graphs for visualization tooling."""

from __future__ import annotations

from .model import (
    AtomicNode,
    ConstructorNode,
    EndNode,
    GraphLibrary,
    GraphSibNode,
    ServiceGraph,
    StartNode,
)


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _node_line(node) -> str:
    if isinstance(node, StartNode):
        return f"{_quote(node.id)} [label=\"start\", shape=circle];"
    if isinstance(node, EndNode):
        return f"{_quote(node.id)} [label={_quote('end: ' + node.branch)}, shape=doublecircle];"
    if isinstance(node, AtomicNode):
        label = node.activity_id
        if node.instance_var is not None:
            label += f"\\non {node.instance_var}"
        return f"{_quote(node.id)} [label={_quote(label)}, shape=box];"
    if isinstance(node, GraphSibNode):
        label = node.graph_type.graph_id
        if node.instance_var is not None:
            label += f"\\nfrom {node.instance_var}"
        shape = "box3d" if node.graph_type.kind == "service" else "component"
        return f"{_quote(node.id)} [label={_quote(label)}, shape={shape}];"
    if isinstance(node, ConstructorNode):
        label = f"new {node.service_graph_id}\\n-> {node.target_var}"
        return f"{_quote(node.id)} [label={_quote(label)}, shape=cds];"
    raise ValueError(f"unknown node {node!r}")


def graph_to_dot(graph: ServiceGraph, lib: GraphLibrary | None = None) -> str:
    lines = [f"digraph {_quote(graph.id)} {{", "  rankdir=TB;"]
    for nid in sorted(graph.nodes):
        lines.append("  " + _node_line(graph.nodes[nid]))
    for (src, branch), dst in sorted(graph.edges.items()):
        lines.append(f"  {_quote(src)} -> {_quote(dst)} [label={_quote(branch)}];")
    for k, (src, branch) in enumerate(sorted(graph.loose_edges)):
        hole = f"__loose_{k}"
        lines.append(f"  {_quote(hole)} [label=\"?\", shape=diamond, style=dashed];")
        lines.append(
            f"  {_quote(src)} -> {_quote(hole)} [label={_quote(branch)}, style=dashed];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
