"""Runtime values and level-local execution contexts.

Process and service instances are first-class values: a context may hold them
alongside plain data, and storing an instance in two variables stores one
shared, stateful object (reference semantics).  Each process instance owns its
own context; nesting happens only through instances stored in some context,
never through parent/child variable sharing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union

from .checker import literal_matches
from .model import (
    DomainType,
    GraphLibrary,
    GraphType,
    PrimitiveType,
    SemanticType,
    ServiceGraph,
    type_to_json,
)


class RuntimeFault(Exception):
    """A context or typing violation at run time; aborts the affected run."""

    def __init__(self, kind: str, message: str):
        self.kind = kind
        super().__init__(message)


@dataclass(frozen=True)
class PrimValue:
    value: object  # str | int | float | bool


@dataclass(frozen=True)
class DomainValue:
    type: DomainType
    payload: Mapping[str, "Value"] = field(default_factory=dict)


@dataclass(eq=False)
class ServiceInstance:
    """Stateful service object; state is opaque to the engine."""

    type: DomainType
    state: dict[str, "Value"] = field(default_factory=dict)


PROC_STATUSES = ("fresh", "running", "paused", "finished", "aborted")

_ALLOWED_TRANSITIONS = {
    ("fresh", "running"),
    ("running", "paused"),
    ("paused", "running"),
    ("running", "finished"),
    ("running", "aborted"),
    ("paused", "aborted"),  # user abort at a pause point
    # a finished instance may be re-run; its context persists
    ("finished", "running"),
}


@dataclass(eq=False)
class ProcessInstance:
    graph_id: str
    context: "Context"
    status: str = "fresh"
    finished_branch: str | None = None
    pending_inputs: tuple["Value", ...] = ()
    status_history: list[str] = field(default_factory=list)

    def transition(self, status: str) -> None:
        if (self.status, status) not in _ALLOWED_TRANSITIONS:
            raise RuntimeFault(
                "status", f"illegal instance transition {self.status} -> {status}"
            )
        self.status_history.append(status)
        self.status = status

    def finish(self, branch: str) -> None:
        self.transition("finished")
        self.finished_branch = branch


Value = Union[PrimValue, DomainValue, ServiceInstance, ProcessInstance]


def value_fits(v: Value, declared: SemanticType, lib: GraphLibrary) -> bool:
    """Runtime counterpart of the static subtype relation."""
    if isinstance(v, PrimValue):
        return isinstance(declared, PrimitiveType) and literal_matches(v.value, declared)
    if isinstance(v, (DomainValue, ServiceInstance)):
        if not isinstance(declared, DomainType):
            return False
        return declared.name in lib.supertype_chain(v.type.name)
    if isinstance(v, ProcessInstance):
        if not isinstance(declared, GraphType):
            return False
        if declared.kind == "service":
            return v.graph_id == declared.graph_id
        return lib.service(v.graph_id).implements_id == declared.graph_id
    return False


def describe_value(v: Value) -> str:
    if isinstance(v, PrimValue):
        return f"primitive {v.value!r}"
    if isinstance(v, DomainValue):
        return f"domain value of {v.type.name}"
    if isinstance(v, ServiceInstance):
        return f"service instance of {v.type.name}"
    return f"process instance of {v.graph_id}"


class Context:
    """Typed variable store local to one hierarchy level."""

    def __init__(self, decls: Mapping[str, SemanticType]):
        self.decls: dict[str, SemanticType] = dict(decls)
        self.values: dict[str, Value] = {}

    def write(self, var: str, value: Value, lib: GraphLibrary) -> None:
        decl = self.decls.get(var)
        if decl is None:
            raise RuntimeFault("undeclared-var", f"write to undeclared var {var!r}")
        if not value_fits(value, decl, lib):
            raise RuntimeFault(
                "type-mismatch",
                f"cannot store {describe_value(value)} in var {var!r}",
            )
        self.values[var] = value

    def read(self, var: str) -> Value:
        if var not in self.decls:
            raise RuntimeFault("undeclared-var", f"read of undeclared var {var!r}")
        if var not in self.values:
            raise RuntimeFault("unassigned-read", f"read of unassigned var {var!r}")
        return self.values[var]

    def is_assigned(self, var: str) -> bool:
        return var in self.values

    def audit(self, lib: GraphLibrary) -> list[str]:
        """Typed-store invariant walk; nonempty result means a store bug."""
        problems = []
        for var, value in self.values.items():
            decl = self.decls.get(var)
            if decl is None:
                problems.append(f"value stored under undeclared var {var!r}")
            elif not value_fits(value, decl, lib):
                problems.append(f"var {var!r} holds ill-typed {describe_value(value)}")
        return problems

    def snapshot(self) -> dict:
        return {var: value_to_json(self.values[var]) for var in sorted(self.values)}


def instantiate(
    graph_id: str, init_inputs: list[Value] | tuple[Value, ...], lib: GraphLibrary
) -> ProcessInstance:
    """Create a fresh process instance of a service graph.

    Initial inputs (all of them or none) are retained and delivered when the
    instance's start node next runs; a call site's own inputs overwrite them.
    """
    graph = lib.service(graph_id)
    inputs = tuple(init_inputs)
    if inputs and len(inputs) != len(graph.signature.inputs):
        raise RuntimeFault(
            "arity",
            f"graph {graph_id!r} takes {len(graph.signature.inputs)} inputs, "
            f"got {len(inputs)}",
        )
    for value, param in zip(inputs, graph.signature.inputs):
        if not value_fits(value, param.type, lib):
            raise RuntimeFault(
                "type-mismatch",
                f"init input {param.name!r}: {describe_value(value)} does not fit",
            )
    return ProcessInstance(
        graph_id=graph_id,
        context=Context(graph.context_decls),
        pending_inputs=inputs,
    )


# ---------------------------------------------------------------------------
# JSON views (trace/debug API)
# ---------------------------------------------------------------------------


def value_to_json(v: Value) -> dict:
    if isinstance(v, PrimValue):
        return {"kind": "prim", "value": v.value}
    if isinstance(v, DomainValue):
        return {
            "kind": "domain",
            "type": v.type.name,
            "payload": {k: value_to_json(x) for k, x in sorted(v.payload.items())},
        }
    if isinstance(v, ServiceInstance):
        return {
            "kind": "service-instance",
            "type": v.type.name,
            "state": {k: value_to_json(x) for k, x in sorted(v.state.items())},
        }
    return {
        "kind": "process",
        "graphId": v.graph_id,
        "status": v.status,
        "vars": v.context.snapshot(),
    }


def value_from_json(obj: object, lib: GraphLibrary) -> Value:
    """Inverse of value_to_json for plain data; process instances are rebuilt fresh."""
    if not isinstance(obj, Mapping):
        raise RuntimeFault("parse", "value must be an object")
    kind = obj.get("kind")
    if kind == "prim":
        value = obj.get("value")
        if not isinstance(value, (str, int, float, bool)):
            raise RuntimeFault("parse", "prim value must be a JSON scalar")
        return PrimValue(value)
    if kind == "domain":
        name = obj.get("type")
        if not isinstance(name, str):
            raise RuntimeFault("parse", "domain value needs a type name")
        payload_obj = obj.get("payload", {})
        if not isinstance(payload_obj, Mapping):
            raise RuntimeFault("parse", "payload must be an object")
        payload = {str(k): value_from_json(x, lib) for k, x in payload_obj.items()}
        return DomainValue(DomainType(name), payload)
    if kind == "service-instance":
        name = obj.get("type")
        if not isinstance(name, str):
            raise RuntimeFault("parse", "service instance needs a type name")
        state_obj = obj.get("state", {})
        if not isinstance(state_obj, Mapping):
            raise RuntimeFault("parse", "state must be an object")
        return ServiceInstance(
            DomainType(name), {str(k): value_from_json(x, lib) for k, x in state_obj.items()}
        )
    if kind == "process":
        graph_id = obj.get("graphId")
        if not isinstance(graph_id, str):
            raise RuntimeFault("parse", "process value needs a graphId")
        return instantiate(graph_id, [], lib)
    raise RuntimeFault("parse", f"unknown value kind {kind!r}")
