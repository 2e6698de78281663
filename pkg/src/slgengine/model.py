"""Data model for hierarchical service logic graphs.

A graph library bundles interface graphs (signature-only contracts), service
graphs (executable process graphs that may implement an interface), activity
descriptors, and a flat domain-type taxonomy.  Loading a library document
performs full structural validation and reports *every* violation instead of
stopping at the first one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Union

from .specs import SynthesisSpec, spec_from_json, spec_to_json

START_BRANCH = "start"
CREATED_BRANCH = "created"

PRIMITIVE_KINDS = ("string", "int", "bool", "real", "file-handle", "enum")


class ModelError(Exception):
    """Base class for model-level failures."""


class UnresolvedTypeError(ModelError):
    """A semantic type refers to a domain or graph unknown to the library."""


# ---------------------------------------------------------------------------
# Semantic types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PrimitiveType:
    kind: str  # string | int | bool | real | file-handle | enum
    enum_name: str | None = None
    literals: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in PRIMITIVE_KINDS:
            raise ModelError(f"unknown primitive kind {self.kind!r}")
        if self.kind == "enum" and not self.enum_name:
            raise ModelError("enum type requires a name")


@dataclass(frozen=True)
class DomainType:
    """Nominal domain type; the supertype chain lives in the library."""

    name: str


@dataclass(frozen=True)
class GraphType:
    graph_id: str
    kind: str  # "interface" | "service"

    def __post_init__(self) -> None:
        if self.kind not in ("interface", "service"):
            raise ModelError(f"graph type kind must be interface or service, got {self.kind!r}")


SemanticType = Union[PrimitiveType, DomainType, GraphType]

STRING = PrimitiveType("string")
INT = PrimitiveType("int")
BOOL = PrimitiveType("bool")
REAL = PrimitiveType("real")
FILE_HANDLE = PrimitiveType("file-handle")


def type_to_json(t: SemanticType) -> dict:
    if isinstance(t, PrimitiveType):
        if t.kind == "enum":
            return {"kind": "enum", "name": t.enum_name, "literals": list(t.literals)}
        return {"kind": t.kind}
    if isinstance(t, DomainType):
        return {"kind": "domain", "name": t.name}
    return {"kind": "graph", "id": t.graph_id, "graphKind": t.kind}


def type_from_json(obj: object, where: str, issues: "IssueList") -> SemanticType | None:
    if not isinstance(obj, Mapping):
        issues.add("parse", where, f"type must be an object, got {type(obj).__name__}")
        return None
    kind = obj.get("kind")
    if kind in ("string", "int", "bool", "real", "file-handle"):
        _reject_unknown(obj, {"kind"}, where, issues)
        return PrimitiveType(kind)
    if kind == "enum":
        _reject_unknown(obj, {"kind", "name", "literals"}, where, issues)
        name = obj.get("name")
        lits = obj.get("literals", [])
        if not isinstance(name, str) or not isinstance(lits, list):
            issues.add("parse", where, "enum type needs a string name and a literals list")
            return None
        return PrimitiveType("enum", enum_name=name, literals=tuple(str(x) for x in lits))
    if kind == "domain":
        _reject_unknown(obj, {"kind", "name"}, where, issues)
        name = obj.get("name")
        if not isinstance(name, str):
            issues.add("parse", where, "domain type needs a string name")
            return None
        return DomainType(name)
    if kind == "graph":
        _reject_unknown(obj, {"kind", "id", "graphKind"}, where, issues)
        gid = obj.get("id")
        gk = obj.get("graphKind")
        if not isinstance(gid, str) or gk not in ("interface", "service"):
            issues.add("parse", where, "graph type needs an id and graphKind interface|service")
            return None
        return GraphType(gid, gk)
    issues.add("parse", where, f"unknown type kind {kind!r}")
    return None


# ---------------------------------------------------------------------------
# Signatures and bindings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    name: str
    type: SemanticType


@dataclass(frozen=True)
class Signature:
    inputs: tuple[Param, ...]
    branches: dict[str, tuple[Param, ...]]  # insertion order = document order

    def branch_names(self) -> set[str]:
        return set(self.branches)


@dataclass(frozen=True)
class StaticBinding:
    value: object  # primitive literal: str | int | float | bool


@dataclass(frozen=True)
class ContextBinding:
    var: str


Binding = Union[StaticBinding, ContextBinding]


def binding_to_json(b: Binding) -> dict:
    if isinstance(b, StaticBinding):
        return {"kind": "static", "value": b.value}
    return {"kind": "fromContext", "var": b.var}


def binding_from_json(obj: object, where: str, issues: "IssueList") -> Binding | None:
    if not isinstance(obj, Mapping):
        issues.add("parse", where, "binding must be an object")
        return None
    kind = obj.get("kind")
    if kind == "static":
        _reject_unknown(obj, {"kind", "value"}, where, issues)
        value = obj.get("value")
        if not isinstance(value, (str, int, float, bool)):
            issues.add("parse", where, "static binding value must be a primitive literal")
            return None
        return StaticBinding(value)
    if kind == "fromContext":
        _reject_unknown(obj, {"kind", "var"}, where, issues)
        var = obj.get("var")
        if not isinstance(var, str):
            issues.add("parse", where, "fromContext binding needs a var name")
            return None
        return ContextBinding(var)
    issues.add("parse", where, f"unknown binding kind {kind!r}")
    return None


# ---------------------------------------------------------------------------
# Activities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ActivityDescriptor:
    id: str
    signature: Signature
    instance_type: DomainType | None = None
    taxonomy_tags: frozenset[str] = frozenset()
    interactive: bool = False
    docs: str = ""


# ---------------------------------------------------------------------------
# Nodes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StartNode:
    id: str


@dataclass(frozen=True)
class EndNode:
    id: str
    branch: str
    outputs: tuple[Binding, ...]


@dataclass(frozen=True)
class AtomicNode:
    id: str
    activity_id: str
    instance_var: str | None
    inputs: tuple[Binding, ...]
    output_targets: dict[str, tuple[str, ...]]


FRESH = "fresh"  # instance source marker


@dataclass(frozen=True)
class GraphSibNode:
    id: str
    graph_type: GraphType
    instance_var: str | None  # None means a fresh instance is created per call
    inputs: tuple[Binding, ...]
    output_targets: dict[str, tuple[str, ...]]


@dataclass(frozen=True)
class ConstructorNode:
    id: str
    service_graph_id: str
    init_inputs: tuple[Binding, ...]
    target_var: str


Node = Union[StartNode, EndNode, AtomicNode, GraphSibNode, ConstructorNode]


# ---------------------------------------------------------------------------
# Graphs and the library
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InterfaceGraph:
    id: str
    signature: Signature
    docs: str = ""


@dataclass
class ServiceGraph:
    id: str
    signature: Signature
    implements_id: str | None
    context_decls: dict[str, SemanticType]
    nodes: dict[str, Node]
    edges: dict[tuple[str, str], str]  # (src, branch) -> dst
    loose_edges: dict[tuple[str, str], SynthesisSpec]
    icon: str = ""
    docs: str = ""

    def start_node(self) -> StartNode:
        for n in self.nodes.values():
            if isinstance(n, StartNode):
                return n
        raise ModelError(f"graph {self.id} has no start node")

    def successor(self, node_id: str, branch: str) -> str | None:
        return self.edges.get((node_id, branch))


@dataclass
class DomainDecl:
    name: str
    supertype: str | None = None
    docs: str = ""


@dataclass
class GraphLibrary:
    """Immutable-by-convention bundle of graphs, activities, and domain types.

    Edits never mutate a loaded library; run-scoped additions go through
    :meth:`extended`, which produces a fresh value sharing nothing mutable.
    """

    name: str
    version: int
    domain_types: dict[str, DomainDecl]
    activities: dict[str, ActivityDescriptor]
    interfaces: dict[str, InterfaceGraph]
    services: dict[str, ServiceGraph]

    def domain(self, name: str) -> DomainDecl:
        try:
            return self.domain_types[name]
        except KeyError:
            raise UnresolvedTypeError(f"unknown domain type {name!r}") from None

    def interface(self, graph_id: str) -> InterfaceGraph:
        try:
            return self.interfaces[graph_id]
        except KeyError:
            raise UnresolvedTypeError(f"unknown interface graph {graph_id!r}") from None

    def service(self, graph_id: str) -> ServiceGraph:
        try:
            return self.services[graph_id]
        except KeyError:
            raise UnresolvedTypeError(f"unknown service graph {graph_id!r}") from None

    def activity(self, activity_id: str) -> ActivityDescriptor:
        try:
            return self.activities[activity_id]
        except KeyError:
            raise UnresolvedTypeError(f"unknown activity {activity_id!r}") from None

    def implementers(self, interface_id: str) -> list[ServiceGraph]:
        return sorted(
            (g for g in self.services.values() if g.implements_id == interface_id),
            key=lambda g: g.id,
        )

    def supertype_chain(self, name: str) -> list[str]:
        """Domain name followed by its declared ancestors, nearest first."""
        chain = [name]
        cur = self.domain(name)
        while cur.supertype is not None:
            chain.append(cur.supertype)
            cur = self.domain(cur.supertype)
        return chain

    def extended(self, extra_services: Mapping[str, ServiceGraph]) -> "GraphLibrary":
        merged = dict(self.services)
        for gid, g in extra_services.items():
            if gid in merged or gid in self.interfaces:
                raise ModelError(f"duplicate graph id {gid!r} in overlay")
            merged[gid] = g
        return GraphLibrary(
            name=self.name,
            version=self.version,
            domain_types=self.domain_types,
            activities=self.activities,
            interfaces=self.interfaces,
            services=merged,
        )


# ---------------------------------------------------------------------------
# Subtyping and conformance
# ---------------------------------------------------------------------------


def subtype_of(a: SemanticType, b: SemanticType, lib: GraphLibrary) -> bool:
    """Reflexive, transitive subtype relation over the enhanced type lattice.

    Primitives relate only to themselves; a domain is a subtype of everything
    on its declared supertype chain; a service graph is a subtype of the
    interface graph it implements.
    """
    if isinstance(a, PrimitiveType) and isinstance(b, PrimitiveType):
        return a == b
    if isinstance(a, DomainType) and isinstance(b, DomainType):
        return b.name in lib.supertype_chain(a.name)
    if isinstance(a, GraphType) and isinstance(b, GraphType):
        _resolve_graph_type(a, lib)
        _resolve_graph_type(b, lib)
        if a == b:
            return True
        if a.kind == "service" and b.kind == "interface":
            return lib.service(a.graph_id).implements_id == b.graph_id
        return False
    return False


def _resolve_graph_type(t: GraphType, lib: GraphLibrary) -> None:
    if t.kind == "interface":
        lib.interface(t.graph_id)
    else:
        lib.service(t.graph_id)


def conforms(g: ServiceGraph, i: InterfaceGraph, lib: GraphLibrary) -> list[str]:
    """Substitutability check: empty list means g may stand in for i.

    Inputs are checked contravariantly (the service must accept at least what
    the interface promises), outputs covariantly, and the branch sets must be
    equal -- extra branches would be uncallable at interface-typed sites.
    """
    errors: list[str] = []
    gb, ib = g.signature.branch_names(), i.signature.branch_names()
    if gb != ib:
        errors.append(
            f"branch-set mismatch: service {sorted(gb)} vs interface {sorted(ib)}"
        )
    if len(g.signature.inputs) != len(i.signature.inputs):
        errors.append(
            f"input arity mismatch: service {len(g.signature.inputs)} vs "
            f"interface {len(i.signature.inputs)}"
        )
    else:
        for k, (gi, ii) in enumerate(zip(g.signature.inputs, i.signature.inputs)):
            if not subtype_of(ii.type, gi.type, lib):
                errors.append(f"variance violation at input {k} ({ii.name})")
    for branch in sorted(gb & ib):
        gouts = g.signature.branches[branch]
        iouts = i.signature.branches[branch]
        if len(gouts) != len(iouts):
            errors.append(
                f"output arity mismatch on branch {branch}: service {len(gouts)} "
                f"vs interface {len(iouts)}"
            )
            continue
        for k, (go, io) in enumerate(zip(gouts, iouts)):
            if not subtype_of(go.type, io.type, lib):
                errors.append(f"variance violation at branch {branch} output {k} ({io.name})")
    return errors


def resolved_signature(node: Node, lib: GraphLibrary) -> Signature:
    """The call signature a node executes against."""
    if isinstance(node, AtomicNode):
        return lib.activity(node.activity_id).signature
    if isinstance(node, GraphSibNode):
        if node.graph_type.kind == "interface":
            return lib.interface(node.graph_type.graph_id).signature
        return lib.service(node.graph_type.graph_id).signature
    if isinstance(node, ConstructorNode):
        target = lib.service(node.service_graph_id)
        return Signature(
            inputs=target.signature.inputs,
            branches={
                CREATED_BRANCH: (Param("instance", GraphType(node.service_graph_id, "service")),)
            },
        )
    raise ModelError(f"node {node.id} has no call signature")


def node_branches(node: Node, lib: GraphLibrary) -> set[str]:
    """Branches a node may exit through; edges must cover exactly these."""
    if isinstance(node, StartNode):
        return {START_BRANCH}
    if isinstance(node, EndNode):
        return set()
    if isinstance(node, ConstructorNode):
        return {CREATED_BRANCH}
    return resolved_signature(node, lib).branch_names()


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LoadIssue:
    kind: str  # parse | duplicate | dangling-ref | cycle | structure
    where: str
    message: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "where": self.where, "message": self.message}


class IssueList:
    def __init__(self) -> None:
        self.items: list[LoadIssue] = []

    def add(self, kind: str, where: str, message: str) -> None:
        self.items.append(LoadIssue(kind, where, message))

    def __bool__(self) -> bool:
        return bool(self.items)


class LibraryLoadError(ModelError):
    def __init__(self, issues: list[LoadIssue]):
        self.issues = issues
        lines = "; ".join(f"{i.where}: {i.message}" for i in issues[:8])
        more = "" if len(issues) <= 8 else f" (+{len(issues) - 8} more)"
        super().__init__(f"invalid library document: {lines}{more}")


_TOP_KEYS = {"name", "version", "domainTypes", "activities", "interfaces", "graphs"}


def load_library(source: Union[str, Path, Mapping]) -> GraphLibrary:
    """Load and validate a library document (dict, JSON file, or directory).

    A directory is merged entry-by-entry across its ``*.json`` files; duplicate
    ids across files are reported.  Raises :class:`LibraryLoadError` carrying
    every violation found.
    """
    issues = IssueList()
    doc = _read_document(source, issues)
    lib = _parse_document(doc, issues) if doc is not None else None
    if lib is not None:
        _validate_library(lib, issues)
    if issues:
        raise LibraryLoadError(issues.items)
    assert lib is not None
    return lib


def _read_document(source: Union[str, Path, Mapping], issues: IssueList) -> Mapping | None:
    if isinstance(source, Mapping):
        return source
    path = Path(source)
    if path.is_dir():
        merged: dict = {"domainTypes": {}, "activities": {}, "interfaces": {}, "graphs": {}}
        seen_meta = False
        for f in sorted(path.glob("*.json")):
            part = _read_document(f, issues)
            if part is None:
                continue
            for key in ("name", "version"):
                if key in part:
                    if seen_meta and merged.get(key) != part[key]:
                        issues.add("parse", str(f), f"conflicting library {key}")
                    merged[key] = part[key]
            seen_meta = seen_meta or "name" in part
            for key in ("domainTypes", "activities", "interfaces", "graphs"):
                for ident, entry in part.get(key, {}).items():
                    if ident in merged[key]:
                        issues.add("duplicate", f"{key}.{ident}", "duplicate id across files")
                    else:
                        merged[key][ident] = entry
        return merged
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        issues.add("parse", str(path), f"cannot read: {exc}")
        return None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        issues.add("parse", str(path), f"invalid JSON: {exc}")
        return None
    if not isinstance(doc, Mapping):
        issues.add("parse", str(path), "library document must be a JSON object")
        return None
    return doc


def _reject_unknown(obj: Mapping, allowed: set[str], where: str, issues: IssueList) -> None:
    unknown = set(obj) - allowed
    for key in sorted(unknown):
        issues.add("parse", where, f"unknown key {key!r}")


def _parse_signature(obj: object, where: str, issues: IssueList) -> Signature | None:
    if not isinstance(obj, Mapping):
        issues.add("parse", where, "signature must be an object")
        return None
    _reject_unknown(obj, {"inputs", "branches"}, where, issues)
    inputs = _parse_params(obj.get("inputs", []), f"{where}.inputs", issues)
    branches_obj = obj.get("branches")
    if not isinstance(branches_obj, Mapping) or not branches_obj:
        issues.add("structure", where, "signature needs at least one branch")
        return None
    branches: dict[str, tuple[Param, ...]] = {}
    for bname, outs in branches_obj.items():
        params = _parse_params(outs, f"{where}.branches.{bname}", issues)
        if params is None:
            return None
        branches[str(bname)] = params
    if inputs is None:
        return None
    names = [p.name for p in inputs]
    if len(names) != len(set(names)):
        issues.add("structure", where, "duplicate input names")
    for bname, outs in branches.items():
        onames = [p.name for p in outs]
        if len(onames) != len(set(onames)):
            issues.add("structure", f"{where}.branches.{bname}", "duplicate output names")
    return Signature(inputs=inputs, branches=branches)


def _parse_params(obj: object, where: str, issues: IssueList) -> tuple[Param, ...] | None:
    if not isinstance(obj, list):
        issues.add("parse", where, "parameter list expected")
        return None
    out: list[Param] = []
    for k, entry in enumerate(obj):
        if not isinstance(entry, Mapping):
            issues.add("parse", f"{where}[{k}]", "parameter must be an object")
            return None
        _reject_unknown(entry, {"name", "type"}, f"{where}[{k}]", issues)
        name = entry.get("name")
        t = type_from_json(entry.get("type"), f"{where}[{k}].type", issues)
        if not isinstance(name, str) or t is None:
            issues.add("parse", f"{where}[{k}]", "parameter needs a name and a type")
            return None
        out.append(Param(name, t))
    return tuple(out)


def _parse_bindings(obj: object, where: str, issues: IssueList) -> tuple[Binding, ...] | None:
    if not isinstance(obj, list):
        issues.add("parse", where, "binding list expected")
        return None
    out: list[Binding] = []
    for k, entry in enumerate(obj):
        b = binding_from_json(entry, f"{where}[{k}]", issues)
        if b is None:
            return None
        out.append(b)
    return tuple(out)


def _parse_output_targets(
    obj: object, where: str, issues: IssueList
) -> dict[str, tuple[str, ...]] | None:
    if obj is None:
        return {}
    if not isinstance(obj, Mapping):
        issues.add("parse", where, "outputTargets must map branch names to var lists")
        return None
    out: dict[str, tuple[str, ...]] = {}
    for bname, vars_ in obj.items():
        if not isinstance(vars_, list) or not all(isinstance(v, str) for v in vars_):
            issues.add("parse", f"{where}.{bname}", "target must be a list of var names")
            return None
        out[str(bname)] = tuple(vars_)
    return out


def _parse_node(node_id: str, obj: object, where: str, issues: IssueList) -> Node | None:
    if not isinstance(obj, Mapping):
        issues.add("parse", where, "node must be an object")
        return None
    kind = obj.get("kind")
    if kind == "start":
        _reject_unknown(obj, {"kind"}, where, issues)
        return StartNode(node_id)
    if kind == "end":
        _reject_unknown(obj, {"kind", "branch", "outputs"}, where, issues)
        branch = obj.get("branch")
        outputs = _parse_bindings(obj.get("outputs", []), f"{where}.outputs", issues)
        if not isinstance(branch, str) or outputs is None:
            issues.add("parse", where, "end node needs a branch and outputs")
            return None
        return EndNode(node_id, branch, outputs)
    if kind == "atomic":
        _reject_unknown(
            obj, {"kind", "activityId", "instanceVar", "inputs", "outputTargets"}, where, issues
        )
        activity_id = obj.get("activityId")
        instance_var = obj.get("instanceVar")
        inputs = _parse_bindings(obj.get("inputs", []), f"{where}.inputs", issues)
        targets = _parse_output_targets(obj.get("outputTargets"), f"{where}.outputTargets", issues)
        if (
            not isinstance(activity_id, str)
            or inputs is None
            or targets is None
            or not (instance_var is None or isinstance(instance_var, str))
        ):
            issues.add("parse", where, "malformed atomic node")
            return None
        return AtomicNode(node_id, activity_id, instance_var, inputs, targets)
    if kind == "graphSib":
        _reject_unknown(
            obj, {"kind", "graphType", "instanceSource", "inputs", "outputTargets"}, where, issues
        )
        gt = type_from_json(obj.get("graphType"), f"{where}.graphType", issues)
        src = obj.get("instanceSource")
        inputs = _parse_bindings(obj.get("inputs", []), f"{where}.inputs", issues)
        targets = _parse_output_targets(obj.get("outputTargets"), f"{where}.outputTargets", issues)
        if not isinstance(gt, GraphType) or inputs is None or targets is None:
            issues.add("parse", where, "malformed graphSib node")
            return None
        instance_var: str | None
        if isinstance(src, Mapping) and src.get("kind") == "fromContext":
            _reject_unknown(src, {"kind", "var"}, f"{where}.instanceSource", issues)
            var = src.get("var")
            if not isinstance(var, str):
                issues.add("parse", f"{where}.instanceSource", "fromContext needs a var")
                return None
            instance_var = var
        elif isinstance(src, Mapping) and src.get("kind") == "fresh":
            _reject_unknown(src, {"kind"}, f"{where}.instanceSource", issues)
            instance_var = None
        else:
            issues.add("parse", f"{where}.instanceSource", "instanceSource must be fromContext or fresh")
            return None
        return GraphSibNode(node_id, gt, instance_var, inputs, targets)
    if kind == "constructor":
        _reject_unknown(obj, {"kind", "serviceGraphId", "initInputs", "targetVar"}, where, issues)
        gid = obj.get("serviceGraphId")
        init_inputs = _parse_bindings(obj.get("initInputs", []), f"{where}.initInputs", issues)
        target_var = obj.get("targetVar")
        if not isinstance(gid, str) or init_inputs is None or not isinstance(target_var, str):
            issues.add("parse", where, "malformed constructor node")
            return None
        return ConstructorNode(node_id, gid, init_inputs, target_var)
    issues.add("parse", where, f"unknown node kind {kind!r}")
    return None


def _parse_graph(graph_id: str, obj: object, issues: IssueList) -> ServiceGraph | None:
    where = f"graphs.{graph_id}"
    if not isinstance(obj, Mapping):
        issues.add("parse", where, "graph must be an object")
        return None
    _reject_unknown(
        obj,
        {"signature", "implements", "contextDecls", "nodes", "edges", "looseEdges", "icon", "docs"},
        where,
        issues,
    )
    signature = _parse_signature(obj.get("signature"), f"{where}.signature", issues)
    implements = obj.get("implements")
    if not (implements is None or isinstance(implements, str)):
        issues.add("parse", where, "implements must be an interface id")
        implements = None
    decls_obj = obj.get("contextDecls", {})
    decls: dict[str, SemanticType] = {}
    if not isinstance(decls_obj, Mapping):
        issues.add("parse", f"{where}.contextDecls", "contextDecls must be an object")
    else:
        for var, tobj in decls_obj.items():
            t = type_from_json(tobj, f"{where}.contextDecls.{var}", issues)
            if t is not None:
                decls[str(var)] = t
    nodes_obj = obj.get("nodes", {})
    nodes: dict[str, Node] = {}
    if not isinstance(nodes_obj, Mapping):
        issues.add("parse", f"{where}.nodes", "nodes must be an object")
    else:
        for nid, nobj in nodes_obj.items():
            node = _parse_node(str(nid), nobj, f"{where}.nodes.{nid}", issues)
            if node is not None:
                nodes[str(nid)] = node
    edges: dict[tuple[str, str], str] = {}
    edges_obj = obj.get("edges", [])
    if not isinstance(edges_obj, list):
        issues.add("parse", f"{where}.edges", "edges must be a list")
    else:
        for k, eobj in enumerate(edges_obj):
            if not isinstance(eobj, Mapping):
                issues.add("parse", f"{where}.edges[{k}]", "edge must be an object")
                continue
            _reject_unknown(eobj, {"src", "branch", "dst"}, f"{where}.edges[{k}]", issues)
            src, branch, dst = eobj.get("src"), eobj.get("branch"), eobj.get("dst")
            if not all(isinstance(x, str) for x in (src, branch, dst)):
                issues.add("parse", f"{where}.edges[{k}]", "edge needs src, branch, dst")
                continue
            if (src, branch) in edges:
                issues.add("duplicate", f"{where}.edges[{k}]", f"duplicate edge on ({src}, {branch})")
                continue
            edges[(src, branch)] = dst  # type: ignore[index]
    loose: dict[tuple[str, str], SynthesisSpec] = {}
    loose_obj = obj.get("looseEdges", [])
    if not isinstance(loose_obj, list):
        issues.add("parse", f"{where}.looseEdges", "looseEdges must be a list")
    else:
        for k, lobj in enumerate(loose_obj):
            lwhere = f"{where}.looseEdges[{k}]"
            if not isinstance(lobj, Mapping):
                issues.add("parse", lwhere, "loose edge must be an object")
                continue
            _reject_unknown(lobj, {"src", "branch", "spec"}, lwhere, issues)
            src, branch = lobj.get("src"), lobj.get("branch")
            if not (isinstance(src, str) and isinstance(branch, str)):
                issues.add("parse", lwhere, "loose edge needs src and branch")
                continue
            try:
                spec = spec_from_json(lobj.get("spec"))
            except ValueError as exc:
                issues.add("parse", f"{lwhere}.spec", str(exc))
                continue
            if (src, branch) in loose or (src, branch) in edges:
                issues.add("duplicate", lwhere, f"({src}, {branch}) already wired")
                continue
            loose[(src, branch)] = spec
    if signature is None:
        return None
    icon = obj.get("icon", "")
    docs = obj.get("docs", "")
    return ServiceGraph(
        id=graph_id,
        signature=signature,
        implements_id=implements,
        context_decls=decls,
        nodes=nodes,
        edges=edges,
        loose_edges=loose,
        icon=str(icon),
        docs=str(docs),
    )


def _parse_document(doc: Mapping, issues: IssueList) -> GraphLibrary | None:
    _reject_unknown(doc, _TOP_KEYS, "library", issues)
    name = doc.get("name")
    version = doc.get("version")
    if not isinstance(name, str):
        issues.add("parse", "library.name", "library needs a string name")
        name = ""
    if not isinstance(version, int) or isinstance(version, bool):
        issues.add("parse", "library.version", "library needs an integer version")
        version = 0

    domain_types: dict[str, DomainDecl] = {}
    dt_obj = doc.get("domainTypes", {})
    if not isinstance(dt_obj, Mapping):
        issues.add("parse", "library.domainTypes", "domainTypes must be an object")
    else:
        for dname, dobj in dt_obj.items():
            where = f"domainTypes.{dname}"
            if not isinstance(dobj, Mapping):
                issues.add("parse", where, "domain declaration must be an object")
                continue
            _reject_unknown(dobj, {"supertype", "docs"}, where, issues)
            sup = dobj.get("supertype")
            if not (sup is None or isinstance(sup, str)):
                issues.add("parse", where, "supertype must be a domain name")
                sup = None
            domain_types[str(dname)] = DomainDecl(str(dname), sup, str(dobj.get("docs", "")))

    activities: dict[str, ActivityDescriptor] = {}
    act_obj = doc.get("activities", {})
    if not isinstance(act_obj, Mapping):
        issues.add("parse", "library.activities", "activities must be an object")
    else:
        for aid, aobj in act_obj.items():
            where = f"activities.{aid}"
            if not isinstance(aobj, Mapping):
                issues.add("parse", where, "activity must be an object")
                continue
            _reject_unknown(
                aobj, {"signature", "instanceType", "taxonomyTags", "interactive", "docs"}, where, issues
            )
            signature = _parse_signature(aobj.get("signature"), f"{where}.signature", issues)
            itype_obj = aobj.get("instanceType")
            instance_type: DomainType | None = None
            if itype_obj is not None:
                t = type_from_json(itype_obj, f"{where}.instanceType", issues)
                if isinstance(t, DomainType):
                    instance_type = t
                elif t is not None:
                    issues.add("structure", where, "instanceType must be a domain type")
            tags_obj = aobj.get("taxonomyTags", [])
            tags = (
                frozenset(str(t) for t in tags_obj) if isinstance(tags_obj, list) else frozenset()
            )
            interactive = bool(aobj.get("interactive", False))
            if signature is None:
                continue
            activities[str(aid)] = ActivityDescriptor(
                id=str(aid),
                signature=signature,
                instance_type=instance_type,
                taxonomy_tags=tags,
                interactive=interactive,
                docs=str(aobj.get("docs", "")),
            )

    interfaces: dict[str, InterfaceGraph] = {}
    if_obj = doc.get("interfaces", {})
    if not isinstance(if_obj, Mapping):
        issues.add("parse", "library.interfaces", "interfaces must be an object")
    else:
        for iid, iobj in if_obj.items():
            where = f"interfaces.{iid}"
            if not isinstance(iobj, Mapping):
                issues.add("parse", where, "interface must be an object")
                continue
            _reject_unknown(iobj, {"signature", "docs"}, where, issues)
            signature = _parse_signature(iobj.get("signature"), f"{where}.signature", issues)
            if signature is None:
                continue
            interfaces[str(iid)] = InterfaceGraph(str(iid), signature, str(iobj.get("docs", "")))

    services: dict[str, ServiceGraph] = {}
    g_obj = doc.get("graphs", {})
    if not isinstance(g_obj, Mapping):
        issues.add("parse", "library.graphs", "graphs must be an object")
    else:
        for gid, gobj in g_obj.items():
            graph = _parse_graph(str(gid), gobj, issues)
            if graph is not None:
                services[str(gid)] = graph

    for gid in set(interfaces) & set(services):
        issues.add("duplicate", f"graphs.{gid}", "id used by both an interface and a service graph")

    return GraphLibrary(
        name=name,
        version=version,
        domain_types=domain_types,
        activities=activities,
        interfaces=interfaces,
        services=services,
    )


# ---------------------------------------------------------------------------
# Structural validation
# ---------------------------------------------------------------------------


def _validate_library(lib: GraphLibrary, issues: IssueList) -> None:
    _check_domain_chains(lib, issues)
    for act in lib.activities.values():
        _check_type_refs(act.signature, lib, f"activities.{act.id}", issues)
        if act.instance_type is not None and act.instance_type.name not in lib.domain_types:
            issues.add("dangling-ref", f"activities.{act.id}", f"unknown instance domain {act.instance_type.name!r}")
    for iface in lib.interfaces.values():
        _check_type_refs(iface.signature, lib, f"interfaces.{iface.id}", issues)
    for graph in lib.services.values():
        _validate_graph_structure(graph, lib, issues)
    _check_recursion(lib, issues)


def _check_domain_chains(lib: GraphLibrary, issues: IssueList) -> None:
    for decl in lib.domain_types.values():
        seen = {decl.name}
        cur = decl
        while cur.supertype is not None:
            if cur.supertype not in lib.domain_types:
                issues.add("dangling-ref", f"domainTypes.{decl.name}", f"unknown supertype {cur.supertype!r}")
                break
            if cur.supertype in seen:
                issues.add("cycle", f"domainTypes.{decl.name}", "supertype chain forms a cycle")
                break
            seen.add(cur.supertype)
            cur = lib.domain_types[cur.supertype]


def _check_type_ref(t: SemanticType, lib: GraphLibrary, where: str, issues: IssueList) -> None:
    if isinstance(t, DomainType) and t.name not in lib.domain_types:
        issues.add("dangling-ref", where, f"unknown domain type {t.name!r}")
    elif isinstance(t, GraphType):
        pool = lib.interfaces if t.kind == "interface" else lib.services
        if t.graph_id not in pool:
            issues.add("dangling-ref", where, f"unknown {t.kind} graph {t.graph_id!r}")


def _check_type_refs(sig: Signature, lib: GraphLibrary, where: str, issues: IssueList) -> None:
    for p in sig.inputs:
        _check_type_ref(p.type, lib, f"{where}.inputs.{p.name}", issues)
    for bname, outs in sig.branches.items():
        for p in outs:
            _check_type_ref(p.type, lib, f"{where}.branches.{bname}.{p.name}", issues)


def _validate_graph_structure(g: ServiceGraph, lib: GraphLibrary, issues: IssueList) -> None:
    where = f"graphs.{g.id}"
    _check_type_refs(g.signature, lib, where, issues)
    for var, t in g.context_decls.items():
        _check_type_ref(t, lib, f"{where}.contextDecls.{var}", issues)
    if g.implements_id is not None and g.implements_id not in lib.interfaces:
        issues.add("dangling-ref", where, f"unknown interface {g.implements_id!r}")

    starts = [n for n in g.nodes.values() if isinstance(n, StartNode)]
    if len(starts) != 1:
        issues.add("structure", where, f"expected exactly one start node, found {len(starts)}")
        return

    # Reference resolution per node; unresolved nodes are skipped for edge checks.
    resolvable: set[str] = set()
    for node in g.nodes.values():
        nwhere = f"{where}.nodes.{node.id}"
        ok = True
        if isinstance(node, AtomicNode):
            if node.activity_id not in lib.activities:
                issues.add("dangling-ref", nwhere, f"unknown activity {node.activity_id!r}")
                ok = False
        elif isinstance(node, GraphSibNode):
            pool = lib.interfaces if node.graph_type.kind == "interface" else lib.services
            if node.graph_type.graph_id not in pool:
                issues.add(
                    "dangling-ref",
                    nwhere,
                    f"unknown {node.graph_type.kind} graph {node.graph_type.graph_id!r}",
                )
                ok = False
            elif node.instance_var is None and node.graph_type.kind != "service":
                issues.add("structure", nwhere, "fresh instances require a service graph type")
        elif isinstance(node, ConstructorNode):
            if node.service_graph_id not in lib.services:
                issues.add("dangling-ref", nwhere, f"unknown service graph {node.service_graph_id!r}")
                ok = False
        if ok:
            resolvable.add(node.id)

    for (src, branch), dst in g.edges.items():
        if src not in g.nodes:
            issues.add("dangling-ref", f"{where}.edges", f"edge source {src!r} is not a node")
        if dst not in g.nodes:
            issues.add("dangling-ref", f"{where}.edges", f"edge target {dst!r} is not a node")
    for src, branch in g.loose_edges:
        if src not in g.nodes:
            issues.add("dangling-ref", f"{where}.looseEdges", f"loose source {src!r} is not a node")

    # Branch coverage: one outgoing edge or loose edge per resolved branch.
    for node in g.nodes.values():
        if node.id not in resolvable:
            continue
        nwhere = f"{where}.nodes.{node.id}"
        expected = node_branches(node, lib)
        wired = {b for (s, b) in g.edges if s == node.id} | {
            b for (s, b) in g.loose_edges if s == node.id
        }
        for b in sorted(expected - wired):
            issues.add("structure", nwhere, f"branch {b!r} has no outgoing edge")
        for b in sorted(wired - expected):
            issues.add("structure", nwhere, f"edge on undeclared branch {b!r}")
        if isinstance(node, EndNode):
            if node.branch not in g.signature.branches:
                issues.add("structure", nwhere, f"end branch {node.branch!r} not in signature")
            elif len(node.outputs) != len(g.signature.branches[node.branch]):
                issues.add(
                    "structure",
                    nwhere,
                    f"end outputs arity {len(node.outputs)} != "
                    f"{len(g.signature.branches[node.branch])} declared for branch {node.branch!r}",
                )

    end_branches = {n.branch for n in g.nodes.values() if isinstance(n, EndNode)}
    if end_branches != g.signature.branch_names():
        issues.add(
            "structure",
            where,
            f"end branches {sorted(end_branches)} must equal signature branches "
            f"{sorted(g.signature.branch_names())}",
        )

    # Reachability from start over normal edges.
    reachable = {starts[0].id}
    frontier = [starts[0].id]
    while frontier:
        cur = frontier.pop()
        for (src, _branch), dst in g.edges.items():
            if src == cur and dst not in reachable:
                reachable.add(dst)
                frontier.append(dst)
    for nid in sorted(set(g.nodes) - reachable):
        issues.add("structure", f"{where}.nodes.{nid}", "node unreachable from start")

    for src, branch in g.loose_edges:
        node = g.nodes.get(src)
        if node is not None and src in resolvable and branch not in node_branches(node, lib):
            issues.add("structure", f"{where}.looseEdges", f"loose branch {branch!r} not declared on {src!r}")


def validate_graph_in(g: ServiceGraph, lib: GraphLibrary) -> list[LoadIssue]:
    """Structural validation of a single graph against a resolving library."""
    issues = IssueList()
    _validate_graph_structure(g, lib, issues)
    return issues.items


def graph_from_json(graph_id: str, obj: object) -> tuple[ServiceGraph | None, list[LoadIssue]]:
    """Parse one graph document entry; used for ad-hoc graph uploads."""
    issues = IssueList()
    graph = _parse_graph(graph_id, obj, issues)
    return graph, issues.items


def reference_targets(g: ServiceGraph, lib: GraphLibrary) -> set[str]:
    """Service graphs g can transfer control into, widened over interfaces."""
    targets: set[str] = set()
    for node in g.nodes.values():
        if isinstance(node, ConstructorNode) and node.service_graph_id in lib.services:
            targets.add(node.service_graph_id)
        elif isinstance(node, GraphSibNode):
            if node.graph_type.kind == "service":
                if node.graph_type.graph_id in lib.services:
                    targets.add(node.graph_type.graph_id)
            else:
                targets.update(i.id for i in lib.implementers(node.graph_type.graph_id))
    return targets


def _check_recursion(lib: GraphLibrary, issues: IssueList) -> None:
    """Reject cycles in the inter-graph reference relation.

    Conservative: an interface-typed call site counts as an edge to every
    implementing graph, so a cycle closed by any candidate implementation is
    rejected at load time.
    """
    colors: dict[str, int] = {}  # 0 visiting, 1 done

    def visit(gid: str, path: list[str]) -> None:
        state = colors.get(gid)
        if state == 1:
            return
        if state == 0:
            loop = path[path.index(gid):] + [gid]
            issues.add("cycle", f"graphs.{gid}", "inter-graph recursion: " + " -> ".join(loop))
            return
        colors[gid] = 0
        for target in sorted(reference_targets(lib.services[gid], lib)):
            visit(target, path + [gid])
        colors[gid] = 1

    for gid in sorted(lib.services):
        if colors.get(gid) != 1:
            visit(gid, [])


# ---------------------------------------------------------------------------
# Serialization back to documents
# ---------------------------------------------------------------------------


def signature_to_json(sig: Signature) -> dict:
    return {
        "inputs": [{"name": p.name, "type": type_to_json(p.type)} for p in sig.inputs],
        "branches": {
            b: [{"name": p.name, "type": type_to_json(p.type)} for p in outs]
            for b, outs in sig.branches.items()
        },
    }


def node_to_json(node: Node) -> dict:
    if isinstance(node, StartNode):
        return {"kind": "start"}
    if isinstance(node, EndNode):
        return {
            "kind": "end",
            "branch": node.branch,
            "outputs": [binding_to_json(b) for b in node.outputs],
        }
    if isinstance(node, AtomicNode):
        out: dict = {
            "kind": "atomic",
            "activityId": node.activity_id,
            "inputs": [binding_to_json(b) for b in node.inputs],
            "outputTargets": {b: list(vs) for b, vs in node.output_targets.items()},
        }
        if node.instance_var is not None:
            out["instanceVar"] = node.instance_var
        return out
    if isinstance(node, GraphSibNode):
        src = (
            {"kind": "fresh"}
            if node.instance_var is None
            else {"kind": "fromContext", "var": node.instance_var}
        )
        return {
            "kind": "graphSib",
            "graphType": type_to_json(node.graph_type),
            "instanceSource": src,
            "inputs": [binding_to_json(b) for b in node.inputs],
            "outputTargets": {b: list(vs) for b, vs in node.output_targets.items()},
        }
    return {
        "kind": "constructor",
        "serviceGraphId": node.service_graph_id,
        "initInputs": [binding_to_json(b) for b in node.init_inputs],
        "targetVar": node.target_var,
    }


def graph_to_json(g: ServiceGraph) -> dict:
    out: dict = {
        "signature": signature_to_json(g.signature),
        "contextDecls": {v: type_to_json(t) for v, t in g.context_decls.items()},
        "nodes": {nid: node_to_json(n) for nid, n in g.nodes.items()},
        "edges": [
            {"src": src, "branch": branch, "dst": dst}
            for (src, branch), dst in g.edges.items()
        ],
    }
    if g.implements_id is not None:
        out["implements"] = g.implements_id
    if g.loose_edges:
        out["looseEdges"] = [
            {"src": src, "branch": branch, "spec": spec_to_json(spec)}
            for (src, branch), spec in g.loose_edges.items()
        ]
    if g.icon:
        out["icon"] = g.icon
    if g.docs:
        out["docs"] = g.docs
    return out


def interface_to_json(i: InterfaceGraph) -> dict:
    out: dict = {"signature": signature_to_json(i.signature)}
    if i.docs:
        out["docs"] = i.docs
    return out


def library_to_json(lib: GraphLibrary) -> dict:
    def domain_json(d: DomainDecl) -> dict:
        out: dict = {}
        if d.supertype is not None:
            out["supertype"] = d.supertype
        if d.docs:
            out["docs"] = d.docs
        return out

    def activity_json(a: ActivityDescriptor) -> dict:
        out: dict = {"signature": signature_to_json(a.signature)}
        if a.instance_type is not None:
            out["instanceType"] = type_to_json(a.instance_type)
        if a.taxonomy_tags:
            out["taxonomyTags"] = sorted(a.taxonomy_tags)
        if a.interactive:
            out["interactive"] = True
        if a.docs:
            out["docs"] = a.docs
        return out

    return {
        "name": lib.name,
        "version": lib.version,
        "domainTypes": {n: domain_json(d) for n, d in lib.domain_types.items()},
        "activities": {a: activity_json(d) for a, d in lib.activities.items()},
        "interfaces": {i: interface_to_json(d) for i, d in lib.interfaces.items()},
        "graphs": {gid: graph_to_json(g) for gid, g in lib.services.items()},
    }
