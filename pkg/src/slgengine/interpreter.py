"""Execution engine for hierarchical service graphs.

A run advances one observable event per step.  Entering a graph call pushes a
frame, delivers call inputs through the callee's start node, and descends
(concretization); when the callee reaches an end node its branch and outputs
are handed back to the call site, which selects its successor (abstraction).
Runs pause at interactive activities and at interface-typed instance reads
that are still unassigned -- the two spots where a human picks or swaps the
process that will actually execute.  Loosely specified branches are completed
at runtime: the embedded spec is synthesized, materialized into a run-scoped
graph overlay, and executed like any other sub-process.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Iterator, Mapping, Union

from .checker import Diagnostic, check_graph, check_library, check_swap
from .model import (
    CREATED_BRANCH,
    START_BRANCH,
    AtomicNode,
    ConstructorNode,
    ContextBinding,
    EndNode,
    GraphLibrary,
    GraphSibNode,
    GraphType,
    ModelError,
    Node,
    ServiceGraph,
    Signature,
    StartNode,
    StaticBinding,
    conforms,
    reference_targets,
    resolved_signature,
    validate_graph_in,
)
from .registry import ActivityCall, ActivityError, ActivityRegistry
from .runtime import (
    Context,
    PrimValue,
    ProcessInstance,
    RuntimeFault,
    Value,
    describe_value,
    instantiate,
    value_fits,
    value_to_json,
)
from .synthesis import MaterializeError, materialize, synthesize


class EngineError(Exception):
    pass


class EngineStateError(EngineError):
    """Operation not valid for the run's current status."""


class UnknownRunError(EngineError):
    pass


class UncheckedGraphError(EngineError):
    def __init__(self, graph_id: str, diagnostics: list[Diagnostic]):
        self.graph_id = graph_id
        self.diagnostics = diagnostics
        super().__init__(
            f"graph {graph_id!r} (or a graph reachable from it) has "
            f"{len(diagnostics)} static diagnostics"
        )


# ---------------------------------------------------------------------------
# Trace events
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnterGraph:
    graph_id: str
    instance: str
    seq: int = 0

    def to_json(self) -> dict:
        return {"seq": self.seq, "type": "enter-graph", "graphId": self.graph_id, "instance": self.instance}


@dataclass(frozen=True)
class ExecActivity:
    activity_id: str
    branch: str
    seq: int = 0

    def to_json(self) -> dict:
        return {"seq": self.seq, "type": "exec-activity", "activityId": self.activity_id, "branch": self.branch}


@dataclass(frozen=True)
class ExitGraph:
    graph_id: str
    branch: str
    seq: int = 0

    def to_json(self) -> dict:
        return {"seq": self.seq, "type": "exit-graph", "graphId": self.graph_id, "branch": self.branch}


@dataclass(frozen=True)
class Paused:
    node_id: str
    reason: str
    seq: int = 0

    def to_json(self) -> dict:
        return {"seq": self.seq, "type": "paused", "nodeId": self.node_id, "reason": self.reason}


@dataclass(frozen=True)
class VariantSelected:
    var: str
    graph_id: str
    seq: int = 0

    def to_json(self) -> dict:
        return {"seq": self.seq, "type": "variant-selected", "var": self.var, "graphId": self.graph_id}


@dataclass(frozen=True)
class EditApplied:
    interface_id: str
    new_graph_id: str
    seq: int = 0

    def to_json(self) -> dict:
        return {
            "seq": self.seq,
            "type": "edit-applied",
            "interfaceId": self.interface_id,
            "newGraphId": self.new_graph_id,
        }


@dataclass(frozen=True)
class Synthesized:
    site: tuple[str, str]
    activities: tuple[str, ...]
    seq: int = 0

    def to_json(self) -> dict:
        return {
            "seq": self.seq,
            "type": "synthesized",
            "site": {"nodeId": self.site[0], "branch": self.site[1]},
            "activities": list(self.activities),
        }


@dataclass(frozen=True)
class RunFinished:
    branch: str
    seq: int = 0

    def to_json(self) -> dict:
        return {"seq": self.seq, "type": "run-finished", "branch": self.branch}


@dataclass(frozen=True)
class RunAborted:
    error: str
    seq: int = 0

    def to_json(self) -> dict:
        return {"seq": self.seq, "type": "run-aborted", "error": self.error}


TraceEvent = Union[
    EnterGraph,
    ExecActivity,
    ExitGraph,
    Paused,
    VariantSelected,
    EditApplied,
    Synthesized,
    RunFinished,
    RunAborted,
]


# ---------------------------------------------------------------------------
# Steering commands
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Resume:
    pass


@dataclass(frozen=True)
class SelectVariant:
    var: str
    graph_id: str


@dataclass(frozen=True)
class ApplyEdit:
    var: str
    replacement_graph_id: str


@dataclass(frozen=True)
class Abort:
    pass


SteeringCommand = Union[Resume, SelectVariant, ApplyEdit, Abort]


def command_from_json(obj: object) -> SteeringCommand:
    if not isinstance(obj, Mapping):
        raise ValueError("steering command must be an object")
    kind = obj.get("kind")
    if kind == "resume":
        _expect_keys(obj, {"kind"})
        return Resume()
    if kind == "abort":
        _expect_keys(obj, {"kind"})
        return Abort()
    if kind == "select-variant":
        _expect_keys(obj, {"kind", "var", "graphId"})
        var, gid = obj.get("var"), obj.get("graphId")
        if not (isinstance(var, str) and isinstance(gid, str)):
            raise ValueError("select-variant needs var and graphId")
        return SelectVariant(var, gid)
    if kind == "apply-edit":
        _expect_keys(obj, {"kind", "var", "replacementGraphId"})
        var, gid = obj.get("var"), obj.get("replacementGraphId")
        if not (isinstance(var, str) and isinstance(gid, str)):
            raise ValueError("apply-edit needs var and replacementGraphId")
        return ApplyEdit(var, gid)
    raise ValueError(f"unknown command kind {kind!r}")


@dataclass(frozen=True)
class CommandResult:
    accepted: bool
    reason: str = ""


# ---------------------------------------------------------------------------
# Run state
# ---------------------------------------------------------------------------


@dataclass
class Frame:
    instance: ProcessInstance
    graph: ServiceGraph
    current_node: str = ""
    last_branch: str | None = None


class Run:
    def __init__(self, run_id: str, graph_id: str, base_lib: GraphLibrary):
        self.run_id = run_id
        self.graph_id = graph_id
        self.base_lib = base_lib
        self.overlay: dict[str, ServiceGraph] = {}
        self.frames: list[Frame] = []
        self.trace: list[TraceEvent] = []
        self.status = "running"  # running | paused | finished | aborted
        self.pause_reason = ""
        self.error = ""
        self.result_branch: str | None = None
        self.result_outputs: list[Value] = []
        self.next_synth = 1
        self._machine: Iterator[TraceEvent] | None = None
        # keyed by instance identity; also keeps every entered instance alive
        self._refs: dict[ProcessInstance, str] = {}
        self._ref_count = itertools.count(1)

    def lib_view(self) -> GraphLibrary:
        return self.base_lib.extended(self.overlay) if self.overlay else self.base_lib

    def instance_ref(self, instance: ProcessInstance) -> str:
        ref = self._refs.get(instance)
        if ref is None:
            ref = f"i{next(self._ref_count)}"
            self._refs[instance] = ref
        return ref

    def events_since(self, seq: int) -> list[TraceEvent]:
        return [e for e in self.trace if e.seq > seq]

    def status_json(self) -> dict:
        out: dict = {
            "runId": self.run_id,
            "graphId": self.graph_id,
            "status": self.status,
            "frames": [
                {
                    "graphId": f.graph.id,
                    "instance": self.instance_ref(f.instance),
                    "currentNode": f.current_node,
                }
                for f in self.frames
            ],
        }
        if self.status == "paused":
            out["reason"] = self.pause_reason
        if self.status == "aborted":
            out["error"] = self.error
        if self.status == "finished":
            out["branch"] = self.result_branch
            out["outputs"] = [value_to_json(v) for v in self.result_outputs]
        return out


def _expect_keys(obj: Mapping, allowed: set) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ValueError(f"unknown command keys {sorted(unknown)}")


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

_ABORT_ERRORS = (RuntimeFault, ActivityError, MaterializeError, ModelError)


class _RunHooks:
    """Engine facilities exposed to activity implementations."""

    def __init__(self, run: Run):
        self._run = run

    def instantiate(self, graph_id: str, init_inputs: list[Value] | None = None) -> Value:
        return instantiate(graph_id, init_inputs or [], self._run.lib_view())


class Engine:
    def __init__(self, lib: GraphLibrary, registry: ActivityRegistry):
        self.lib = lib
        self.registry = registry
        self.runs: dict[str, Run] = {}
        self._run_ids = itertools.count(1)
        self._diags_by_graph: dict[str, list[Diagnostic]] = {}
        for diag in check_library(lib):
            self._diags_by_graph.setdefault(diag.graph_id, []).append(diag)

    # -- run lifecycle -------------------------------------------------------

    def start_run(self, graph_id: str, inputs: list[Value]) -> str:
        graph = self.lib.service(graph_id)
        bad: list[Diagnostic] = []
        for gid in sorted(self._reachable_graphs(graph_id)):
            bad.extend(self._diags_by_graph.get(gid, []))
        if bad:
            raise UncheckedGraphError(graph_id, bad)
        if len(inputs) != len(graph.signature.inputs):
            raise EngineError(
                f"graph {graph_id!r} takes {len(graph.signature.inputs)} inputs, "
                f"got {len(inputs)}"
            )
        for value, param in zip(inputs, graph.signature.inputs):
            if not value_fits(value, param.type, self.lib):
                raise EngineError(
                    f"input {param.name!r}: {describe_value(value)} does not fit"
                )
        run_id = f"run-{next(self._run_ids)}"
        run = Run(run_id, graph_id, self.lib)
        self.runs[run_id] = run
        root = instantiate(graph_id, [], self.lib)
        run._machine = self._machine(run, root, inputs)
        first = self.step_machine(run)
        if isinstance(first, RunAborted):
            raise EngineError(f"run aborted before entering the graph: {first.error}")
        return run_id

    def get_run(self, run_id: str) -> Run:
        run = self.runs.get(run_id)
        if run is None:
            raise UnknownRunError(f"unknown run {run_id!r}")
        return run

    def step(self, run_id: str) -> TraceEvent:
        run = self.get_run(run_id)
        if run.status != "running":
            raise EngineStateError(f"cannot step a run that is {run.status}")
        return self.step_machine(run)

    def step_machine(self, run: Run) -> TraceEvent:
        assert run._machine is not None
        try:
            event = next(run._machine)
        except _ABORT_ERRORS as exc:
            return self._abort(run, str(exc))
        except StopIteration:  # pragma: no cover - machine ends on RunFinished
            raise EngineError("machine stopped without a final event") from None
        event = self._record(run, event)
        if isinstance(event, Paused):
            run.status = "paused"
            run.pause_reason = event.reason
        elif isinstance(event, RunFinished):
            run.status = "finished"
        return event

    def run_to_completion(
        self, run_id: str, script: list[SteeringCommand] | None = None
    ) -> Run:
        """Step until the run leaves the running state for good.

        Steering commands are consumed at pause points, in order; a Resume (or
        Abort) ends each pause.  An exhausted script leaves the run paused.
        """
        run = self.get_run(run_id)
        pending = list(script or [])
        while True:
            if run.status == "running":
                self.step(run_id)
            elif run.status == "paused":
                if not pending:
                    return run
                progressed = False
                while pending:
                    cmd = pending.pop(0)
                    result = self.submit_command(run_id, cmd)
                    if not result.accepted:
                        raise EngineError(f"scripted command rejected: {result.reason}")
                    if isinstance(cmd, (Resume, Abort)):
                        progressed = True
                        break
                if not progressed:
                    return run
            else:
                return run

    # -- steering -------------------------------------------------------------

    def submit_command(self, run_id: str, cmd: SteeringCommand) -> CommandResult:
        run = self.get_run(run_id)
        if run.status != "paused":
            return CommandResult(False, f"run is {run.status}, not paused")
        if isinstance(cmd, Resume):
            run.status = "running"
            run.pause_reason = ""
            return CommandResult(True)
        if isinstance(cmd, Abort):
            self._abort(run, "aborted by steering command")
            return CommandResult(True)
        if isinstance(cmd, (SelectVariant, ApplyEdit)):
            var = cmd.var
            gid = cmd.graph_id if isinstance(cmd, SelectVariant) else cmd.replacement_graph_id
            frame = run.frames[-1]
            decl = frame.graph.context_decls.get(var)
            if not (isinstance(decl, GraphType) and decl.kind == "interface"):
                return CommandResult(
                    False, f"var {var!r} is not an interface-typed context var"
                )
            lib_view = run.lib_view()
            replacement = lib_view.services.get(gid)
            if replacement is None:
                return CommandResult(False, f"unknown service graph {gid!r}")
            diags = check_swap(decl.graph_id, replacement, lib_view)
            if diags:
                return CommandResult(
                    False, "; ".join(f"{d.kind}: {d.message}" for d in diags)
                )
            inst = instantiate(gid, [], lib_view)
            frame.instance.context.write(var, inst, lib_view)
            if isinstance(cmd, SelectVariant):
                self._record(run, VariantSelected(var, gid))
            else:
                self._record(run, EditApplied(decl.graph_id, gid))
            return CommandResult(True)
        return CommandResult(False, f"unsupported command {cmd!r}")

    def upload_graph(self, run_id: str, graph: ServiceGraph) -> None:
        """Admit an ad-hoc graph into the run's overlay after full checking."""
        run = self.get_run(run_id)
        candidate = run.lib_view().extended({graph.id: graph})
        issues = validate_graph_in(graph, candidate)
        if issues:
            raise EngineError(
                "uploaded graph failed structural validation: "
                + "; ".join(i.message for i in issues)
            )
        diags = check_graph(graph, candidate)
        if graph.implements_id is not None:
            iface = candidate.interface(graph.implements_id)
            diags = diags + [
                Diagnostic(graph.id, "", "conformance", f"vs {iface.id}: {err}")
                for err in conforms(graph, iface, candidate)
            ]
        if diags:
            raise UncheckedGraphError(graph.id, diags)
        run.overlay[graph.id] = graph

    # -- internals -------------------------------------------------------------

    def _reachable_graphs(self, graph_id: str) -> set:
        seen: set[str] = set()
        frontier = [graph_id]
        while frontier:
            gid = frontier.pop()
            if gid in seen or gid not in self.lib.services:
                continue
            seen.add(gid)
            frontier.extend(reference_targets(self.lib.services[gid], self.lib))
        return seen

    def _record(self, run: Run, event: TraceEvent) -> TraceEvent:
        sealed = replace(event, seq=len(run.trace) + 1)
        run.trace.append(sealed)
        return sealed

    def _abort(self, run: Run, error: str) -> TraceEvent:
        event = self._record(run, RunAborted(error))
        run.status = "aborted"
        run.error = error
        for frame in run.frames:
            if frame.instance.status in ("running", "paused"):
                frame.instance.transition("aborted")
        return event

    # -- the state machine -----------------------------------------------------

    def _machine(
        self, run: Run, root: ProcessInstance, inputs: list[Value]
    ) -> Iterator[TraceEvent]:
        branch, outputs = yield from self._exec_instance(run, root, list(inputs))
        run.result_branch = branch
        run.result_outputs = outputs
        yield RunFinished(branch)

    def _exec_instance(
        self, run: Run, instance: ProcessInstance, call_inputs: list[Value]
    ):
        lib = run.lib_view()
        graph = lib.service(instance.graph_id)
        if instance.status in ("running", "paused"):
            raise RuntimeFault(
                "reentrant", f"instance of {graph.id!r} is already executing"
            )
        if len(call_inputs) != len(graph.signature.inputs):
            raise RuntimeFault(
                "arity",
                f"graph {graph.id!r} takes {len(graph.signature.inputs)} inputs, "
                f"got {len(call_inputs)}",
            )
        instance.transition("running")
        frame = Frame(instance=instance, graph=graph)
        run.frames.append(frame)

        ctx = instance.context
        start = graph.start_node()
        frame.current_node = start.id
        pending, instance.pending_inputs = instance.pending_inputs, ()
        for value, param in zip(pending, graph.signature.inputs):
            ctx.write(param.name, value, lib)
        for value, param in zip(call_inputs, graph.signature.inputs):
            ctx.write(param.name, value, lib)
        yield EnterGraph(graph.id, run.instance_ref(instance))

        node_id, branch_taken = start.id, START_BRANCH
        while True:
            nxt = graph.successor(node_id, branch_taken)
            if nxt is None:
                site = (node_id, branch_taken)
                spec = graph.loose_edges.get(site)
                if spec is None:
                    raise RuntimeFault(
                        "structure",
                        f"no successor for branch {branch_taken!r} of node {node_id!r}",
                    )
                result = yield from self._exec_loose(run, frame, site, spec)
                branch, outputs = result
                frame.last_branch = branch
                instance.finish(branch)
                run.frames.pop()
                yield ExitGraph(graph.id, branch)
                return branch, outputs

            node = graph.nodes[nxt]
            frame.current_node = nxt
            if isinstance(node, EndNode):
                outputs = [self._eval_binding(b, ctx) for b in node.outputs]
                frame.last_branch = node.branch
                instance.finish(node.branch)
                run.frames.pop()
                yield ExitGraph(graph.id, node.branch)
                return node.branch, outputs

            if isinstance(node, AtomicNode):
                branch_taken = yield from self._exec_atomic(run, frame, node)
            elif isinstance(node, GraphSibNode):
                branch_taken = yield from self._exec_graph_sib(run, frame, node)
            elif isinstance(node, ConstructorNode):
                branch_taken = yield from self._exec_constructor(run, frame, node)
            else:
                raise RuntimeFault("structure", f"unexpected node kind at {nxt!r}")
            frame.last_branch = branch_taken
            node_id = nxt

    def _exec_atomic(self, run: Run, frame: Frame, node: AtomicNode):
        lib = run.lib_view()
        activity = lib.activity(node.activity_id)
        if activity.interactive:
            frame.instance.transition("paused")
            yield Paused(node.id, f"interactive:{activity.id}")
            frame.instance.transition("running")
        ctx = frame.instance.context
        inputs = [self._eval_binding(b, ctx) for b in node.inputs]
        instance_val = ctx.read(node.instance_var) if node.instance_var else None
        impl = self.registry.resolve(activity.id, instance_val, lib)
        try:
            branch, outputs = impl(ActivityCall(activity, inputs, instance_val, _RunHooks(run)))
        except ActivityError:
            raise
        except Exception as exc:
            raise ActivityError(f"activity {activity.id!r} failed: {exc}") from exc
        self._deliver_outputs(run, frame, node.output_targets, activity.signature, branch, outputs, activity.id)
        yield ExecActivity(activity.id, branch)
        return branch

    def _deliver_outputs(
        self,
        run: Run,
        frame: Frame,
        targets: Mapping,
        sig: Signature,
        branch: str,
        outputs: list[Value],
        what: str,
    ) -> None:
        lib = run.lib_view()
        declared = sig.branches.get(branch)
        if declared is None:
            raise RuntimeFault("branch", f"{what!r} returned undeclared branch {branch!r}")
        if len(outputs) != len(declared):
            raise RuntimeFault(
                "arity",
                f"{what!r} returned {len(outputs)} outputs on branch {branch!r}, "
                f"declared {len(declared)}",
            )
        for value, param in zip(outputs, declared):
            if not value_fits(value, param.type, lib):
                raise RuntimeFault(
                    "type-mismatch",
                    f"{what!r} output {param.name!r}: {describe_value(value)} does not fit",
                )
        for var, value in zip(targets.get(branch, ()), outputs):
            frame.instance.context.write(var, value, lib)

    def _exec_graph_sib(self, run: Run, frame: Frame, node: GraphSibNode):
        ctx = frame.instance.context
        if node.instance_var is not None:
            decl = frame.graph.context_decls.get(node.instance_var)
            if isinstance(decl, GraphType) and decl.kind == "interface":
                while not ctx.is_assigned(node.instance_var):
                    frame.instance.transition("paused")
                    yield Paused(
                        node.id,
                        f"awaiting-variant:{node.instance_var}:{decl.graph_id}",
                    )
                    frame.instance.transition("running")
        lib = run.lib_view()
        sig = resolved_signature(node, lib)
        inputs = [self._eval_binding(b, ctx) for b in node.inputs]
        if node.instance_var is None:
            sub = instantiate(node.graph_type.graph_id, [], lib)
        else:
            value = ctx.read(node.instance_var)
            if not isinstance(value, ProcessInstance):
                raise RuntimeFault(
                    "type-mismatch",
                    f"var {node.instance_var!r} holds {describe_value(value)}, "
                    "not a process instance",
                )
            sub = value
        self._gate_instance(run, sub, node.graph_type)
        result = yield from self._exec_instance(run, sub, inputs)
        branch, outputs = result
        self._deliver_outputs(run, frame, node.output_targets, sig, branch, outputs, node.graph_type.graph_id)
        return branch

    def _exec_constructor(self, run: Run, frame: Frame, node: ConstructorNode):
        lib = run.lib_view()
        ctx = frame.instance.context
        init_inputs = [self._eval_binding(b, ctx) for b in node.init_inputs]
        inst = instantiate(node.service_graph_id, init_inputs, lib)
        ctx.write(node.target_var, inst, lib)
        yield ExecActivity(f"constructor:{node.service_graph_id}", CREATED_BRANCH)
        return CREATED_BRANCH

    def _exec_loose(self, run: Run, frame: Frame, site: tuple, spec):
        """Resolve a loose branch: synthesize, materialize, execute, deliver.

        The materialized chain conforms to the spec's interface; its inputs are
        bound by name from the host context, and its exit branch and outputs
        become the host graph's own result (the chain completes the graph).
        """
        lib = run.lib_view()
        iface = lib.interface(spec.interface_id)
        solution = synthesize(spec)
        while solution is None:
            frame.instance.transition("paused")
            yield Paused(site[0], f"synthesis-no-solution:{site[0]}:{site[1]}")
            frame.instance.transition("running")
            solution = synthesize(spec)
        sequence = solution.sequences[0]
        synth_id = f"synth-{run.run_id}-{run.next_synth}"
        run.next_synth += 1
        graph = materialize(sequence, spec, lib, graph_id=synth_id)
        run.overlay[synth_id] = graph
        lib = run.lib_view()
        yield Synthesized(site, sequence)

        host_sig = frame.graph.signature
        ctx = frame.instance.context
        inputs: list[Value] = []
        for param in iface.signature.inputs:
            if not ctx.is_assigned(param.name):
                raise RuntimeFault(
                    "unassigned-read",
                    f"loose-branch input {param.name!r} is not assigned in the host context",
                )
            inputs.append(ctx.read(param.name))
        for branch, outs in iface.signature.branches.items():
            host_outs = host_sig.branches.get(branch)
            if host_outs is None:
                raise RuntimeFault(
                    "branch",
                    f"host graph {frame.graph.id!r} lacks branch {branch!r} delivered "
                    f"by interface {iface.id!r}",
                )
            if len(host_outs) != len(outs):
                raise RuntimeFault(
                    "arity",
                    f"branch {branch!r}: interface delivers {len(outs)} outputs, host "
                    f"declares {len(host_outs)}",
                )
        sub = instantiate(synth_id, [], lib)
        self._gate_instance(run, sub, GraphType(iface.id, "interface"))
        result = yield from self._exec_instance(run, sub, inputs)
        branch, outputs = result
        for value, param in zip(outputs, host_sig.branches[branch]):
            if not value_fits(value, param.type, lib):
                raise RuntimeFault(
                    "type-mismatch",
                    f"loose-branch output {param.name!r}: {describe_value(value)} "
                    "does not fit the host signature",
                )
        return branch, outputs

    def _gate_instance(self, run: Run, instance: ProcessInstance, expected: GraphType) -> None:
        """Dynamic conformance gate at every graph call.

        Statics already guarantee this for library graphs, but synthesized and
        ad-hoc graphs enter after load time, so the gate is enforced here for
        every entry uniformly.
        """
        lib = run.lib_view()
        graph = lib.service(instance.graph_id)
        if expected.kind == "service":
            if graph.id != expected.graph_id:
                raise RuntimeFault(
                    "conformance",
                    f"instance of {graph.id!r} used where service graph "
                    f"{expected.graph_id!r} is required",
                )
            return
        iface = lib.interface(expected.graph_id)
        if graph.implements_id != iface.id:
            raise RuntimeFault(
                "conformance",
                f"instance of {graph.id!r} does not implement {iface.id!r}",
            )
        errors = conforms(graph, iface, lib)
        if errors:
            raise RuntimeFault(
                "conformance", f"instance of {graph.id!r} fails conformance: {errors}"
            )

    @staticmethod
    def _eval_binding(binding, ctx: Context) -> Value:
        if isinstance(binding, StaticBinding):
            return PrimValue(binding.value)
        return ctx.read(binding.var)
