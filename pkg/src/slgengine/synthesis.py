"""Completion of loosely specified branches by bounded activity-chain search.

Search is iterative deepening over sequence length with dataflow pruning: an
activity may occupy a position only once its required data is covered by the
initially available set plus the provides-sets of earlier positions.  Complete
candidates are accepted when the goal formulas and all derived dataflow
constraints hold on the candidate's trace.  All satisfying sequences of the
first admitting length are returned, ordered lexicographically, so identical
specs always yield identical solutions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .checker import check_graph
from .logic import Formula, derive_dataflow_constraints, evaluate
from .model import (
    BOOL,
    START_BRANCH,
    AtomicNode,
    ContextBinding,
    EndNode,
    GraphLibrary,
    GraphType,
    Param,
    PrimitiveType,
    ServiceGraph,
    Signature,
    StartNode,
    StaticBinding,
    conforms,
)
from .specs import ActivityProfile, SynthesisSpec

POSITIVE_BRANCH = "yes"
NEGATIVE_BRANCH = "no"
VALID_BRANCH = "valid"
INVALID_BRANCH = "invalid"


class MaterializeError(Exception):
    pass


@dataclass(frozen=True)
class Solution:
    length: int
    sequences: tuple[tuple[str, ...], ...]


def _profile_index(spec: SynthesisSpec) -> dict[str, ActivityProfile]:
    return {p.activity_id: p for p in spec.candidates}


def sequence_trace(seq: tuple[str, ...], spec: SynthesisSpec) -> list[frozenset]:
    """Trace of a candidate chain: one position per activity, labeled with its
    id plus its taxonomy tags (tags act as derived propositions)."""
    index = _profile_index(spec)
    trace = []
    for aid in seq:
        profile = index.get(aid)
        tags = profile.taxonomy_tags if profile is not None else frozenset()
        trace.append(frozenset({aid}) | tags)
    return trace


def all_constraints(spec: SynthesisSpec) -> list[Formula]:
    """Derived dataflow constraints first (deterministic order), then goals."""
    derived = derive_dataflow_constraints(spec.candidates, spec.initially_available)
    return derived + list(spec.goals)


def validate_solution(seq: tuple[str, ...], spec: SynthesisSpec) -> Formula | None:
    """Re-evaluate every goal and derived constraint on seq's trace.

    Returns the first violated formula, or None when the sequence satisfies
    everything.  Deliberately ignorant of the search's pruning.
    """
    trace = sequence_trace(tuple(seq), spec)
    if not trace:
        return None
    for formula in all_constraints(spec):
        if not evaluate(formula, trace, 0):
            return formula
    return None


def synthesize(spec: SynthesisSpec) -> Solution | None:
    """All minimal-length satisfying chains, or None within maxLength."""
    candidates = sorted(spec.candidates, key=lambda p: p.activity_id)
    constraints = all_constraints(spec)

    def accept(seq: list[str]) -> bool:
        trace = sequence_trace(tuple(seq), spec)
        return all(evaluate(f, trace, 0) for f in constraints)

    def extend(
        seq: list[str], available: frozenset, remaining: int, found: list[tuple[str, ...]]
    ) -> None:
        if remaining == 0:
            if accept(seq):
                found.append(tuple(seq))
            return
        for profile in candidates:
            if not spec.allow_repeats and profile.activity_id in seq:
                continue
            if not profile.requires <= available:
                continue
            seq.append(profile.activity_id)
            extend(seq, available | profile.provides, remaining - 1, found)
            seq.pop()

    for length in range(1, spec.max_length + 1):
        found: list[tuple[str, ...]] = []
        extend([], frozenset(spec.initially_available), length, found)
        if found:
            return Solution(length=length, sequences=tuple(sorted(found)))
    return None


def materialize(
    seq: tuple[str, ...] | list[str],
    spec: SynthesisSpec,
    lib: GraphLibrary,
    graph_id: str = "synthesized-process",
) -> ServiceGraph:
    """Turn a satisfying chain into an executable, interface-conforming graph.

    The chain template is linear: every activity's positive branch ("yes")
    advances, every negative branch ("no") exits through the invalid end.
    Activity inputs are bound by name against the interface inputs and the
    outputs of earlier chain positions; an activity whose shape does not fit
    this template is rejected.
    """
    seq = tuple(seq)
    if not seq:
        raise MaterializeError("cannot materialize an empty chain")
    iface = lib.interface(spec.interface_id)
    branch_names = iface.signature.branch_names()
    if branch_names != {VALID_BRANCH, INVALID_BRANCH}:
        raise MaterializeError(
            f"interface {iface.id!r} has branches {sorted(branch_names)}; the chain "
            f"template needs exactly {{{VALID_BRANCH}, {INVALID_BRANCH}}}"
        )
    for branch in (VALID_BRANCH, INVALID_BRANCH):
        for param in iface.signature.branches[branch]:
            if not (isinstance(param.type, PrimitiveType) and param.type.kind == "bool"):
                raise MaterializeError(
                    f"interface output {param.name!r} on branch {branch!r} is not a bool; "
                    "the chain template cannot fill it"
                )

    decls: dict = {p.name: p.type for p in iface.signature.inputs}
    nodes: dict = {"start": StartNode("start")}
    edges: dict = {}

    previous: tuple[str, str] = ("start", START_BRANCH)
    for k, activity_id in enumerate(seq):
        activity = lib.activity(activity_id)
        sig = activity.signature
        if set(sig.branches) != {POSITIVE_BRANCH, NEGATIVE_BRANCH}:
            raise MaterializeError(
                f"activity {activity_id!r} has branches {sorted(sig.branches)}; the chain "
                f"template needs exactly {{{POSITIVE_BRANCH}, {NEGATIVE_BRANCH}}}"
            )
        if activity.instance_type is not None:
            raise MaterializeError(
                f"activity {activity_id!r} dispatches on an instance; not chainable"
            )
        inputs = []
        for param in sig.inputs:
            if param.name not in decls:
                raise MaterializeError(
                    f"activity {activity_id!r} input {param.name!r} has no producer "
                    "among interface inputs or earlier chain outputs"
                )
            inputs.append(ContextBinding(param.name))
        targets: dict = {}
        outs = sig.branches[POSITIVE_BRANCH]
        if outs:
            for param in outs:
                existing = decls.get(param.name)
                if existing is not None and existing != param.type:
                    raise MaterializeError(
                        f"output {param.name!r} of {activity_id!r} clashes with an "
                        "earlier declaration of a different type"
                    )
                decls[param.name] = param.type
            targets[POSITIVE_BRANCH] = tuple(p.name for p in outs)
        node_id = f"a{k + 1}-{activity_id}"
        nodes[node_id] = AtomicNode(node_id, activity_id, None, tuple(inputs), targets)
        edges[previous] = node_id
        edges[(node_id, NEGATIVE_BRANCH)] = "end-invalid"
        previous = (node_id, POSITIVE_BRANCH)

    def end_outputs(flag: bool) -> tuple:
        return tuple(StaticBinding(flag) for _ in iface.signature.branches[VALID_BRANCH if flag else INVALID_BRANCH])

    nodes["end-valid"] = EndNode("end-valid", VALID_BRANCH, end_outputs(True))
    nodes["end-invalid"] = EndNode("end-invalid", INVALID_BRANCH, end_outputs(False))
    edges[previous] = "end-valid"

    graph = ServiceGraph(
        id=graph_id,
        signature=Signature(inputs=iface.signature.inputs, branches=dict(iface.signature.branches)),
        implements_id=iface.id,
        context_decls=decls,
        nodes=nodes,
        edges=edges,
        loose_edges={},
        docs=f"synthesized chain: {', '.join(seq)}",
    )

    conf = conforms(graph, iface, lib)
    if conf:
        raise MaterializeError(f"materialized graph does not conform: {conf}")
    scoped = lib.extended({graph_id: graph})
    diags = check_graph(graph, scoped)
    if diags:
        raise MaterializeError(
            "materialized graph fails type checking: "
            + "; ".join(d.message for d in diags)
        )
    return graph
