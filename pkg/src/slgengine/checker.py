"""Static, flow-sensitive type checking of service graphs.

Definite assignment is computed by a forward dataflow over the graph with
set-intersection meet (a variable assigned on only one arm of a diamond counts
as unassigned at the join).  Back edges are handled by iterating to a fixed
point; the lattice (sets of declared variables) is finite, so this terminates.
Instance variables typed with an *interface* graph type are exempt from the
definite-assignment requirement: reading one while unassigned is the runtime's
manual-variant-selection pause point, not an error.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    AtomicNode,
    Binding,
    ConstructorNode,
    ContextBinding,
    EndNode,
    GraphLibrary,
    GraphSibNode,
    GraphType,
    InterfaceGraph,
    Node,
    Param,
    PrimitiveType,
    ServiceGraph,
    Signature,
    StartNode,
    StaticBinding,
    conforms,
    resolved_signature,
    subtype_of,
)

KINDS = (
    "unassigned-read",
    "type-mismatch",
    "instance-mismatch",
    "undeclared-var",
    "static-illegal",
    "conformance",
)


@dataclass(frozen=True)
class Diagnostic:
    graph_id: str
    node_id: str
    kind: str
    message: str

    def to_json(self) -> dict:
        return {
            "graphId": self.graph_id,
            "nodeId": self.node_id,
            "kind": self.kind,
            "message": self.message,
        }


def literal_matches(value: object, t: PrimitiveType) -> bool:
    if t.kind == "string":
        return isinstance(value, str)
    if t.kind == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if t.kind == "bool":
        return isinstance(value, bool)
    if t.kind == "real":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if t.kind == "file-handle":
        return isinstance(value, str)
    if t.kind == "enum":
        return isinstance(value, str) and value in t.literals
    return False


class _GraphChecker:
    def __init__(self, g: ServiceGraph, lib: GraphLibrary):
        self.g = g
        self.lib = lib
        self.diags: list[Diagnostic] = []

    def report(self, node_id: str, kind: str, message: str) -> None:
        self.diags.append(Diagnostic(self.g.id, node_id, kind, message))

    # -- bindings ----------------------------------------------------------

    def check_binding(
        self, node_id: str, binding: Binding, expected: Param, assigned: frozenset, role: str
    ) -> None:
        if isinstance(binding, StaticBinding):
            if not isinstance(expected.type, PrimitiveType):
                self.report(
                    node_id,
                    "static-illegal",
                    f"static value for non-primitive {role} {expected.name!r}",
                )
            elif not literal_matches(binding.value, expected.type):
                self.report(
                    node_id,
                    "type-mismatch",
                    f"static value {binding.value!r} does not fit {role} "
                    f"{expected.name!r} of kind {expected.type.kind}",
                )
            return
        var = binding.var
        decl = self.g.context_decls.get(var)
        if decl is None:
            self.report(node_id, "undeclared-var", f"{role} reads undeclared var {var!r}")
            return
        if var not in assigned:
            self.report(
                node_id,
                "unassigned-read",
                f"{role} reads {var!r}, which may be unassigned on some path",
            )
        if not subtype_of(decl, expected.type, self.lib):
            self.report(
                node_id,
                "type-mismatch",
                f"{role} {expected.name!r} expects a subtype of its declared parameter "
                f"type but var {var!r} is incompatible",
            )

    def check_inputs(
        self, node_id: str, bindings: tuple, sig: Signature, assigned: frozenset, what: str
    ) -> None:
        if len(bindings) != len(sig.inputs):
            self.report(
                node_id,
                "type-mismatch",
                f"{what} provides {len(bindings)} inputs, signature declares {len(sig.inputs)}",
            )
            return
        for binding, param in zip(bindings, sig.inputs):
            self.check_binding(node_id, binding, param, assigned, "input")

    def check_output_targets(self, node_id: str, targets: dict, sig: Signature) -> None:
        for branch, vars_ in targets.items():
            outs = sig.branches.get(branch)
            if outs is None:
                self.report(
                    node_id, "type-mismatch", f"output target on unknown branch {branch!r}"
                )
                continue
            if len(vars_) != len(outs):
                self.report(
                    node_id,
                    "type-mismatch",
                    f"branch {branch!r} has {len(outs)} outputs but {len(vars_)} targets",
                )
                continue
            for var, param in zip(vars_, outs):
                decl = self.g.context_decls.get(var)
                if decl is None:
                    self.report(
                        node_id, "undeclared-var", f"output target {var!r} is not declared"
                    )
                elif not subtype_of(param.type, decl, self.lib):
                    self.report(
                        node_id,
                        "type-mismatch",
                        f"output {param.name!r} of branch {branch!r} does not fit var {var!r}",
                    )

    # -- per-node checks run once (flow-insensitive parts) ------------------

    def check_node_static(self, node: Node) -> None:
        if isinstance(node, AtomicNode):
            activity = self.lib.activity(node.activity_id)
            self.check_output_targets(node.id, node.output_targets, activity.signature)
            if activity.instance_type is not None and node.instance_var is None:
                self.report(
                    node.id,
                    "instance-mismatch",
                    f"activity {activity.id!r} dispatches on an instance but none is bound",
                )
            if node.instance_var is not None:
                if activity.instance_type is None:
                    self.report(
                        node.id,
                        "instance-mismatch",
                        f"activity {activity.id!r} takes no instance",
                    )
                else:
                    decl = self.g.context_decls.get(node.instance_var)
                    if decl is None:
                        self.report(
                            node.id,
                            "undeclared-var",
                            f"instance var {node.instance_var!r} is not declared",
                        )
                    elif not subtype_of(decl, activity.instance_type, self.lib):
                        self.report(
                            node.id,
                            "instance-mismatch",
                            f"instance var {node.instance_var!r} is not a subtype of "
                            f"domain {activity.instance_type.name!r}",
                        )
        elif isinstance(node, GraphSibNode):
            sig = resolved_signature(node, self.lib)
            self.check_output_targets(node.id, node.output_targets, sig)
            if node.instance_var is not None:
                decl = self.g.context_decls.get(node.instance_var)
                if decl is None:
                    self.report(
                        node.id,
                        "undeclared-var",
                        f"instance var {node.instance_var!r} is not declared",
                    )
                elif not subtype_of(decl, node.graph_type, self.lib):
                    self.report(
                        node.id,
                        "instance-mismatch",
                        f"instance var {node.instance_var!r} does not hold a subtype of "
                        f"{node.graph_type.kind} graph {node.graph_type.graph_id!r}",
                    )
        elif isinstance(node, ConstructorNode):
            target_type = GraphType(node.service_graph_id, "service")
            decl = self.g.context_decls.get(node.target_var)
            if decl is None:
                self.report(
                    node.id, "undeclared-var", f"target var {node.target_var!r} is not declared"
                )
            elif not subtype_of(target_type, decl, self.lib):
                self.report(
                    node.id,
                    "type-mismatch",
                    f"constructed instance of {node.service_graph_id!r} does not fit "
                    f"var {node.target_var!r}",
                )

    # -- flow-sensitive reads (run at the fixed point) -----------------------

    def check_node_reads(self, node: Node, assigned: frozenset) -> None:
        if isinstance(node, AtomicNode):
            activity = self.lib.activity(node.activity_id)
            self.check_inputs(node.id, node.inputs, activity.signature, assigned, "atomic node")
            if node.instance_var is not None and node.instance_var in self.g.context_decls:
                if node.instance_var not in assigned:
                    self.report(
                        node.id,
                        "unassigned-read",
                        f"instance var {node.instance_var!r} may be unassigned",
                    )
        elif isinstance(node, GraphSibNode):
            sig = resolved_signature(node, self.lib)
            self.check_inputs(node.id, node.inputs, sig, assigned, "graph call")
            if node.instance_var is not None:
                decl = self.g.context_decls.get(node.instance_var)
                interface_typed = isinstance(decl, GraphType) and decl.kind == "interface"
                # Unassigned interface-typed instances pause for manual
                # selection at runtime; anything else must be assigned.
                if decl is not None and not interface_typed and node.instance_var not in assigned:
                    self.report(
                        node.id,
                        "unassigned-read",
                        f"instance var {node.instance_var!r} may be unassigned",
                    )
        elif isinstance(node, ConstructorNode):
            target = self.lib.service(node.service_graph_id)
            if node.init_inputs:
                self.check_inputs(
                    node.id, node.init_inputs, target.signature, assigned, "constructor"
                )
        elif isinstance(node, EndNode):
            outs = self.g.signature.branches.get(node.branch, ())
            if len(node.outputs) == len(outs):
                for binding, param in zip(node.outputs, outs):
                    self.check_binding(node.id, binding, param, assigned, "end output")

    # -- transfer function ---------------------------------------------------

    def writes(self, node: Node, branch: str) -> frozenset:
        if isinstance(node, (AtomicNode, GraphSibNode)):
            return frozenset(
                v for v in node.output_targets.get(branch, ()) if v in self.g.context_decls
            )
        if isinstance(node, ConstructorNode):
            if node.target_var in self.g.context_decls:
                return frozenset({node.target_var})
        return frozenset()

    def run(self) -> list[Diagnostic]:
        g, lib = self.g, self.lib
        start = g.start_node()

        for name, _t in ((p.name, p.type) for p in g.signature.inputs):
            if name not in g.context_decls:
                self.report(
                    start.id, "undeclared-var", f"graph input {name!r} has no context declaration"
                )
        for p in g.signature.inputs:
            decl = g.context_decls.get(p.name)
            if decl is not None and not subtype_of(p.type, decl, lib):
                self.report(
                    start.id,
                    "type-mismatch",
                    f"graph input {p.name!r} does not fit its context declaration",
                )

        for node in g.nodes.values():
            self.check_node_static(node)

        all_vars = frozenset(g.context_decls)
        start_out = frozenset(p.name for p in g.signature.inputs if p.name in g.context_decls)

        # entry state per node; top = all vars (refined downward to the meet)
        entry: dict[str, frozenset] = {nid: all_vars for nid in g.nodes}
        entry[start.id] = frozenset()

        changed = True
        while changed:
            changed = False
            for (src, branch), dst in g.edges.items():
                if src not in g.nodes or dst not in g.nodes:
                    continue
                node = g.nodes[src]
                if isinstance(node, StartNode):
                    out = start_out
                else:
                    out = entry[src] | self.writes(node, branch)
                met = entry[dst] & out
                if met != entry[dst]:
                    entry[dst] = met
                    changed = True

        for nid, node in g.nodes.items():
            self.check_node_reads(node, entry[nid])
        return self.diags


def check_graph(g: ServiceGraph, lib: GraphLibrary) -> list[Diagnostic]:
    """All type diagnostics for one structurally valid service graph."""
    return _GraphChecker(g, lib).run()


def check_library(lib: GraphLibrary) -> list[Diagnostic]:
    """check_graph over every service graph plus interface conformance."""
    diags: list[Diagnostic] = []
    for gid in sorted(lib.services):
        g = lib.services[gid]
        diags.extend(check_graph(g, lib))
        if g.implements_id is not None and g.implements_id in lib.interfaces:
            iface = lib.interfaces[g.implements_id]
            for err in conforms(g, iface, lib):
                diags.append(Diagnostic(gid, "", "conformance", f"vs {iface.id}: {err}"))
    return diags


def check_swap(
    current_interface_id: str, replacement: ServiceGraph, lib: GraphLibrary
) -> list[Diagnostic]:
    """Gate for runtime instance swaps behind an interface-typed site."""
    diags = check_graph(replacement, lib)
    if replacement.implements_id != current_interface_id:
        diags.append(
            Diagnostic(
                replacement.id,
                "",
                "conformance",
                f"graph implements {replacement.implements_id!r}, "
                f"site requires {current_interface_id!r}",
            )
        )
        return diags
    iface = lib.interface(current_interface_id)
    for err in conforms(replacement, iface, lib):
        diags.append(Diagnostic(replacement.id, "", "conformance", f"vs {iface.id}: {err}"))
    return diags
