from __future__ import annotations

import json

import pytest

from conftest import altered
from slgengine.corpus import default_fixtures, proceedings_value, user_value
from slgengine.interpreter import (
    Abort,
    ApplyEdit,
    EnterGraph,
    EngineError,
    EngineStateError,
    ExitGraph,
    Paused,
    Resume,
    SelectVariant,
    Synthesized,
    command_from_json,
)
from slgengine.model import DomainType, load_library
from slgengine.registry import ActivityRegistry
from slgengine.runtime import DomainValue, PrimValue, ServiceInstance


def trace_types(run) -> list[str]:
    return [e.to_json()["type"] for e in run.trace]


def bracket_depths(run) -> list[int]:
    depth = 0
    depths = []
    for e in run.trace:
        if isinstance(e, EnterGraph):
            depth += 1
        elif isinstance(e, ExitGraph):
            depth -= 1
        depths.append(depth)
    return depths


# ---------------------------------------------------------------------------
# run lifecycle
# ---------------------------------------------------------------------------


def test_start_run_emits_enter_graph_and_executes_nothing(make_engine, proceedings):
    engine = make_engine()
    rid = engine.start_run("prepare-proceedings", [proceedings])
    run = engine.get_run(rid)
    assert [type(e) for e in run.trace] == [EnterGraph]
    assert run.status == "running"
    assert run.frames[-1].instance.context.is_assigned("proceedings")


def test_trivial_start_to_end_graph_finishes_without_activities():
    lib = load_library(
        {
            "name": "tiny",
            "version": 1,
            "domainTypes": {},
            "activities": {},
            "interfaces": {},
            "graphs": {
                "identity": {
                    "signature": {
                        "inputs": [{"name": "x", "type": {"kind": "int"}}],
                        "branches": {"out": [{"name": "x", "type": {"kind": "int"}}]},
                    },
                    "contextDecls": {"x": {"kind": "int"}},
                    "nodes": {
                        "start": {"kind": "start"},
                        "end": {"kind": "end", "branch": "out", "outputs": [{"kind": "fromContext", "var": "x"}]},
                    },
                    "edges": [{"src": "start", "branch": "start", "dst": "end"}],
                }
            },
        }
    )
    from slgengine.interpreter import Engine

    engine = Engine(lib, ActivityRegistry())
    rid = engine.start_run("identity", [PrimValue(41)])
    run = engine.run_to_completion(rid)
    assert run.status == "finished"
    assert run.result_branch == "out"
    assert run.result_outputs == [PrimValue(41)]
    assert trace_types(run) == ["enter-graph", "exit-graph", "run-finished"]


def test_wrong_input_arity_is_rejected(make_engine, proceedings):
    engine = make_engine()
    with pytest.raises(EngineError):
        engine.start_run("prepare-proceedings", [proceedings, proceedings])


def test_step_on_finished_run_is_an_error(make_engine, proceedings):
    engine = make_engine()
    rid = engine.start_run("prepare-proceedings", [proceedings])
    engine.run_to_completion(rid)
    with pytest.raises(EngineStateError):
        engine.step(rid)


def test_two_level_run_has_balanced_brackets(make_engine, proceedings, user):
    engine = make_engine()
    rid = engine.start_run("conference-flow", [user, proceedings])
    run = engine.run_to_completion(
        rid, [Resume(), SelectVariant("paymentProcess", "CreditCardPayment"), Resume()]
    )
    assert run.status == "finished"
    depths = bracket_depths(run)
    assert depths[-1] == 0
    assert min(depths) == 0
    assert max(depths) <= 4  # static hierarchy depth bound


def test_determinism_same_script_same_trace(make_engine, proceedings, user):
    def run_once():
        engine = make_engine()
        rid = engine.start_run("conference-flow", [user, proceedings])
        run = engine.run_to_completion(
            rid, [Resume(), SelectVariant("paymentProcess", "InvoicePayment"), Resume()]
        )
        return [json.dumps(e.to_json(), sort_keys=True) for e in run.trace]

    assert run_once() == run_once()


# ---------------------------------------------------------------------------
# atomic execution and virtual dispatch
# ---------------------------------------------------------------------------


def test_author_paid_check_follows_fixture_data(make_engine, fixtures, proceedings):
    engine = make_engine()
    rid = engine.start_run("validate-payment", [proceedings])
    run = engine.run_to_completion(rid)
    assert run.status == "finished"
    assert run.result_branch == "valid"
    assert run.result_outputs == [PrimValue(True)]


def test_author_unpaid_takes_no_branch(make_engine, fixtures, proceedings):
    fixtures.data["payments"] = []
    engine = make_engine(fixtures)
    rid = engine.start_run("validate-payment", [proceedings])
    run = engine.run_to_completion(rid)
    assert run.result_branch == "invalid"
    assert run.result_outputs == [PrimValue(False)]


def test_virtual_dispatch_selects_implementation_by_runtime_subtype(corpus):
    from slgengine.interpreter import Engine
    from slgengine.registry import ActivityCall

    registry = ActivityRegistry()
    seen = []

    def cc_impl(call: ActivityCall):
        seen.append("credit-card")
        return "ok", [PrimValue("cc")]

    def inv_impl(call: ActivityCall):
        seen.append("invoice")
        return "ok", [PrimValue("inv")]

    registry.register("payment-service-call", cc_impl, domain="CreditCardProvider")
    registry.register("payment-service-call", inv_impl, domain="InvoiceProvider")
    engine = Engine(corpus, registry)
    for domain in ("CreditCardProvider", "InvoiceProvider"):
        impl = registry.resolve("payment-service-call", ServiceInstance(DomainType(domain)), corpus)
        impl(None)
    assert seen == ["credit-card", "invoice"]


def test_dispatch_falls_back_along_supertype_chain(corpus):
    registry = ActivityRegistry()
    registry.register("payment-service-call", lambda call: ("ok", []), domain="PaymentProvider")
    impl = registry.resolve(
        "payment-service-call", ServiceInstance(DomainType("CreditCardProvider")), corpus
    )
    assert impl is not None


def test_activity_failure_aborts_run(corpus, proceedings):
    from slgengine.interpreter import Engine

    registry = ActivityRegistry()

    def explode(call):
        raise RuntimeError("boom")

    registry.register("did-at-least-one-author-pay?", explode)
    engine = Engine(corpus, registry)
    rid = engine.start_run("validate-payment", [proceedings])
    run = engine.run_to_completion(rid)
    assert run.status == "aborted"
    assert "boom" in run.error
    assert trace_types(run)[-1] == "run-aborted"


# ---------------------------------------------------------------------------
# graph calls: isolation, reuse, opacity
# ---------------------------------------------------------------------------


def test_sub_process_cannot_touch_parent_context_except_outputs(make_engine, proceedings):
    engine = make_engine()
    rid = engine.start_run("simple-proceedings-validation", [proceedings])
    run = engine.get_run(rid)
    parent_ctx = run.frames[0].instance.context
    before_keys = set(parent_ctx.values)
    engine.run_to_completion(rid)
    after_keys = set(parent_ctx.values)
    # only declared writes appeared: constructor target + delivered output
    assert after_keys - before_keys == {"vpProcess", "paymentOk"}
    assert parent_ctx.read("paymentOk") == PrimValue(True)


REUSE_LIB = {
    "name": "reuse",
    "version": 1,
    "domainTypes": {},
    "activities": {},
    "interfaces": {},
    "graphs": {
        "identity": {
            "signature": {
                "inputs": [{"name": "x", "type": {"kind": "int"}}],
                "branches": {"out": [{"name": "x", "type": {"kind": "int"}}]},
            },
            "contextDecls": {"x": {"kind": "int"}},
            "nodes": {
                "start": {"kind": "start"},
                "end": {"kind": "end", "branch": "out", "outputs": [{"kind": "fromContext", "var": "x"}]},
            },
            "edges": [{"src": "start", "branch": "start", "dst": "end"}],
        },
        "twice": {
            "signature": {"inputs": [], "branches": {"done": [{"name": "last", "type": {"kind": "int"}}]}},
            "contextDecls": {"x": {"kind": "int"}, "p": {"kind": "graph", "id": "identity", "graphKind": "service"}},
            "nodes": {
                "start": {"kind": "start"},
                "make": {"kind": "constructor", "serviceGraphId": "identity", "initInputs": [], "targetVar": "p"},
                "first": {
                    "kind": "graphSib",
                    "graphType": {"kind": "graph", "id": "identity", "graphKind": "service"},
                    "instanceSource": {"kind": "fromContext", "var": "p"},
                    "inputs": [{"kind": "static", "value": 41}],
                    "outputTargets": {"out": ["x"]},
                },
                "second": {
                    "kind": "graphSib",
                    "graphType": {"kind": "graph", "id": "identity", "graphKind": "service"},
                    "instanceSource": {"kind": "fromContext", "var": "p"},
                    "inputs": [{"kind": "static", "value": 42}],
                    "outputTargets": {"out": ["x"]},
                },
                "end": {"kind": "end", "branch": "done", "outputs": [{"kind": "fromContext", "var": "x"}]},
            },
            "edges": [
                {"src": "start", "branch": "start", "dst": "make"},
                {"src": "make", "branch": "created", "dst": "first"},
                {"src": "first", "branch": "out", "dst": "second"},
                {"src": "second", "branch": "out", "dst": "end"},
            ],
        },
    },
}


def test_finished_instance_rerun_keeps_identity_and_context():
    from slgengine.interpreter import Engine

    engine = Engine(load_library(REUSE_LIB), ActivityRegistry())
    rid = engine.start_run("twice", [])
    run = engine.run_to_completion(rid)
    assert run.status == "finished"
    assert run.result_outputs == [PrimValue(42)]
    enters = [e for e in run.trace if isinstance(e, EnterGraph) and e.graph_id == "identity"]
    assert len(enters) == 2
    assert enters[0].instance == enters[1].instance  # one stateful instance, run twice
    exits = [e for e in run.trace if isinstance(e, ExitGraph) and e.graph_id == "identity"]
    assert len(exits) == 2


def test_swapping_conforming_instance_changes_only_inner_events(make_engine, proceedings, user):
    def run_with(variant):
        engine = make_engine()
        rid = engine.start_run("conference-flow", [user, proceedings])
        return engine.run_to_completion(
            rid, [Resume(), SelectVariant("paymentProcess", variant), Resume()]
        )

    def split(run, graph_id):
        events = [json.dumps(e.to_json(), sort_keys=True) for e in run.trace]
        enter = next(i for i, e in enumerate(run.trace) if isinstance(e, EnterGraph) and e.graph_id == graph_id)
        exit_ = next(i for i, e in enumerate(run.trace) if isinstance(e, ExitGraph) and e.graph_id == graph_id)
        return events[:enter], events[enter : exit_ + 1], events[exit_ + 1 :]

    cc = run_with("CreditCardPayment")
    inv = run_with("InvoicePayment")
    cc_pre, cc_inner, cc_post = split(cc, "CreditCardPayment")
    inv_pre, inv_inner, inv_post = split(inv, "InvoicePayment")
    # the variant-selected echo naturally differs; everything else outside the
    # bracket must be identical
    drop = lambda events: [e for e in events if '"variant-selected"' not in e]
    assert drop(cc_pre) == drop(inv_pre)
    assert cc_post == inv_post
    assert cc_inner != inv_inner


# ---------------------------------------------------------------------------
# steering
# ---------------------------------------------------------------------------


def test_pause_reasons_and_select_variant_flow(make_engine, proceedings, user):
    engine = make_engine()
    rid = engine.start_run("conference-flow", [user, proceedings])
    run = engine.run_to_completion(rid)  # no script: stuck at first pause
    assert run.status == "paused"
    assert run.pause_reason.startswith("interactive:fill-registration-info")
    assert engine.submit_command(rid, Resume()).accepted
    run = engine.run_to_completion(rid)
    assert run.pause_reason == "awaiting-variant:paymentProcess:Payment"
    result = engine.submit_command(rid, SelectVariant("paymentProcess", "InvoicePayment"))
    assert result.accepted
    assert engine.submit_command(rid, Resume()).accepted
    run = engine.run_to_completion(rid)
    assert run.status == "finished"
    activity_ids = [e.to_json().get("activityId") for e in run.trace]
    assert "get-invoice-provider" in activity_ids


def test_resume_on_running_run_is_rejected(make_engine, proceedings):
    engine = make_engine()
    rid = engine.start_run("prepare-proceedings", [proceedings])
    result = engine.submit_command(rid, Resume())
    assert not result.accepted and "not paused" in result.reason


def test_select_variant_rejects_nonconforming_graph(make_engine, proceedings, user):
    engine = make_engine()
    rid = engine.start_run("conference-flow", [user, proceedings])
    engine.run_to_completion(rid)
    engine.submit_command(rid, Resume())
    engine.run_to_completion(rid)  # paused awaiting variant
    result = engine.submit_command(rid, SelectVariant("paymentProcess", "validate-payment"))
    assert not result.accepted
    assert "conformance" in result.reason
    result = engine.submit_command(rid, SelectVariant("paymentProcess", "no-such-graph"))
    assert not result.accepted and "unknown" in result.reason


def test_apply_edit_swaps_validation_process(make_engine, fixtures, proceedings):
    fixtures.data["defaultValidationProcess"] = None
    engine = make_engine(fixtures)
    rid = engine.start_run("prepare-proceedings", [proceedings])
    run = engine.run_to_completion(rid)
    assert run.pause_reason == "awaiting-variant:validationProcess:ProceedingsValidation"
    result = engine.submit_command(
        rid, ApplyEdit("validationProcess", "validate-payment-flight-hotel")
    )
    assert result.accepted
    engine.submit_command(rid, Resume())
    run = engine.run_to_completion(rid)
    assert run.status == "finished"
    activity_ids = [e.to_json().get("activityId") for e in run.trace]
    assert "flight-booked?" in activity_ids and "hotel-booked?" in activity_ids
    assert any(e.to_json()["type"] == "edit-applied" for e in run.trace)


def test_abort_command(make_engine, proceedings, user):
    engine = make_engine()
    rid = engine.start_run("conference-flow", [user, proceedings])
    engine.run_to_completion(rid)
    assert engine.submit_command(rid, Abort()).accepted
    run = engine.get_run(rid)
    assert run.status == "aborted"
    with pytest.raises(EngineStateError):
        engine.step(rid)


def test_command_json_round_trip():
    assert command_from_json({"kind": "resume"}) == Resume()
    assert command_from_json({"kind": "select-variant", "var": "v", "graphId": "g"}) == SelectVariant("v", "g")
    assert command_from_json(
        {"kind": "apply-edit", "var": "v", "replacementGraphId": "g"}
    ) == ApplyEdit("v", "g")
    with pytest.raises(ValueError):
        command_from_json({"kind": "resume", "extra": 1})


# ---------------------------------------------------------------------------
# loose branches
# ---------------------------------------------------------------------------


def test_loose_branch_synthesizes_and_executes(make_engine, proceedings):
    engine = make_engine()
    rid = engine.start_run("loose-proceedings-validation", [proceedings])
    run = engine.run_to_completion(rid)
    assert run.status == "finished"
    assert run.result_branch == "valid"
    synth = [e for e in run.trace if isinstance(e, Synthesized)]
    assert len(synth) == 1
    assert synth[0].activities == ("final-version?", "margins?")
    assert synth[0].site == ("iterate-papers", "next")
    # the chain executed inside a run-scoped overlay graph
    assert any(
        isinstance(e, EnterGraph) and e.graph_id.startswith("synth-") for e in run.trace
    )
    assert not any(g.startswith("synth-") for g in engine.lib.services)


def test_loose_branch_failure_pauses_for_steering(make_engine, corpus_doc, proceedings):
    # goal F "margins?" with margins? removed from the candidate set
    def mutate(doc):
        loose = doc["graphs"]["loose-proceedings-validation"]["looseEdges"][0]
        loose["spec"]["candidateActivities"] = [
            p for p in loose["spec"]["candidateActivities"] if p["activityId"] != "margins?"
        ]

    lib = load_library(altered(corpus_doc, mutate))
    engine = make_engine(lib=lib)
    rid = engine.start_run("loose-proceedings-validation", [proceedings])
    run = engine.run_to_completion(rid)
    assert run.status == "paused"
    assert run.pause_reason.startswith("synthesis-no-solution")
    assert engine.submit_command(rid, Abort()).accepted


def test_chain_failure_exits_through_host_invalid_branch(make_engine, fixtures, proceedings):
    fixtures.data["artifacts"]["marginsOk"] = False
    engine = make_engine(fixtures)
    rid = engine.start_run("loose-proceedings-validation", [proceedings])
    run = engine.run_to_completion(rid)
    assert run.status == "finished"
    assert run.result_branch == "invalid"
    assert run.result_outputs == [PrimValue(False)]
