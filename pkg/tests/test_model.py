from __future__ import annotations

import itertools

import pytest

from conftest import altered
from slgengine.model import (
    DomainType,
    GraphType,
    LibraryLoadError,
    PrimitiveType,
    Signature,
    UnresolvedTypeError,
    conforms,
    library_to_json,
    load_library,
    node_branches,
    resolved_signature,
    subtype_of,
)

MINIMAL_LIB = {
    "name": "minimal",
    "version": 1,
    "domainTypes": {},
    "activities": {},
    "interfaces": {
        "Echo": {
            "signature": {
                "inputs": [{"name": "x", "type": {"kind": "int"}}],
                "branches": {"out": [{"name": "x", "type": {"kind": "int"}}]},
            }
        }
    },
    "graphs": {
        "EchoImpl": {
            "implements": "Echo",
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


def load_errors(doc) -> list:
    with pytest.raises(LibraryLoadError) as err:
        load_library(doc)
    return err.value.issues


# ---------------------------------------------------------------------------
# load_library
# ---------------------------------------------------------------------------


def test_minimal_library_loads():
    lib = load_library(MINIMAL_LIB)
    assert lib.version == 1
    assert set(lib.interfaces) == {"Echo"}
    assert set(lib.services) == {"EchoImpl"}


def test_corpus_loads_with_expected_interfaces(corpus):
    assert set(corpus.interfaces) == {"Payment", "ProceedingsValidation"}
    assert {
        "conference-flow",
        "register-to-conference",
        "CreditCardPayment",
        "InvoicePayment",
        "prepare-proceedings",
        "simple-proceedings-validation",
        "loose-proceedings-validation",
        "validate-payment",
        "validate-payment-flight-hotel",
    } <= set(corpus.services)


def test_dangling_graph_reference_is_reported(corpus_doc):
    doc = altered(
        corpus_doc,
        lambda d: d["graphs"]["register-to-conference"]["nodes"]["pay-conference-fee"].update(
            {"graphType": {"kind": "graph", "id": "PaymentX", "graphKind": "interface"}}
        ),
    )
    issues = load_errors(doc)
    assert any(i.kind == "dangling-ref" and "PaymentX" in i.message for i in issues)


def test_unknown_keys_rejected(corpus_doc):
    doc = altered(corpus_doc, lambda d: d.update({"surprise": 1}))
    issues = load_errors(doc)
    assert any(i.kind == "parse" and "surprise" in i.message for i in issues)


def test_injected_intergraph_cycle_rejected(corpus_doc):
    # validate-payment gains a call back into prepare-proceedings, closing
    # prepare-proceedings -> (interface site) -> validate-payment -> ... cycle
    def mutate(d):
        g = d["graphs"]["validate-payment"]
        g["contextDecls"]["dummy"] = {"kind": "bool"}
        g["nodes"]["loopback"] = {
            "kind": "graphSib",
            "graphType": {"kind": "graph", "id": "prepare-proceedings", "graphKind": "service"},
            "instanceSource": {"kind": "fresh"},
            "inputs": [{"kind": "fromContext", "var": "proceedings"}],
            "outputTargets": {},
        }
        g["edges"] = [e for e in g["edges"] if not (e["src"] == "author-paid" and e["branch"] == "yes")]
        g["edges"] += [
            {"src": "author-paid", "branch": "yes", "dst": "loopback"},
            {"src": "loopback", "branch": "done", "dst": "end-valid"},
            {"src": "loopback", "branch": "rejected", "dst": "end-invalid"},
        ]

    issues = load_errors(altered(corpus_doc, mutate))
    assert any(i.kind == "cycle" for i in issues)


def test_self_recursion_rejected():
    doc = altered(
        MINIMAL_LIB,
        lambda d: d["graphs"]["EchoImpl"]["nodes"].update(
            {
                "again": {
                    "kind": "graphSib",
                    "graphType": {"kind": "graph", "id": "EchoImpl", "graphKind": "service"},
                    "instanceSource": {"kind": "fresh"},
                    "inputs": [{"kind": "fromContext", "var": "x"}],
                    "outputTargets": {"out": ["x"]},
                }
            }
        )
        or d["graphs"]["EchoImpl"].update(
            {
                "edges": [
                    {"src": "start", "branch": "start", "dst": "again"},
                    {"src": "again", "branch": "out", "dst": "end"},
                ]
            }
        ),
    )
    issues = load_errors(doc)
    assert any(i.kind == "cycle" for i in issues)


def test_duplicate_ids_across_directory_files(tmp_path, corpus_doc):
    import json

    part = {"name": "conference-service", "version": 1, "graphs": {"validate-payment": corpus_doc["graphs"]["validate-payment"]}}
    (tmp_path / "a.json").write_text(json.dumps(corpus_doc), encoding="utf-8")
    (tmp_path / "b.json").write_text(json.dumps(part), encoding="utf-8")
    issues = load_errors(tmp_path)
    assert any(i.kind == "duplicate" for i in issues)


def test_missing_edge_for_declared_branch(corpus_doc):
    doc = altered(
        corpus_doc,
        lambda d: d["graphs"]["validate-payment"].update(
            {"edges": [e for e in d["graphs"]["validate-payment"]["edges"] if e["branch"] != "no"]}
        ),
    )
    issues = load_errors(doc)
    assert any("no outgoing edge" in i.message for i in issues)


def test_structural_validation_idempotent_over_serialization(corpus):
    doc = library_to_json(corpus)
    reloaded = load_library(doc)
    assert library_to_json(reloaded) == doc


# ---------------------------------------------------------------------------
# subtype_of
# ---------------------------------------------------------------------------


def corpus_types(lib):
    types = [PrimitiveType("string"), PrimitiveType("int"), PrimitiveType("bool")]
    types += [DomainType(name) for name in lib.domain_types]
    types += [GraphType(i, "interface") for i in lib.interfaces]
    types += [GraphType(g, "service") for g in lib.services]
    return types


def test_subtype_reflexive_for_all_corpus_types(corpus):
    for t in corpus_types(corpus):
        assert subtype_of(t, t, corpus)


def test_domain_supertype_chain_walk(corpus):
    assert subtype_of(DomainType("CreditCardProvider"), DomainType("PaymentProvider"), corpus)
    assert not subtype_of(DomainType("PaymentProvider"), DomainType("CreditCardProvider"), corpus)
    assert not subtype_of(DomainType("CreditCardProvider"), DomainType("InvoiceProvider"), corpus)


def test_service_graph_subtype_of_its_interface(corpus):
    assert subtype_of(
        GraphType("simple-proceedings-validation", "service"),
        GraphType("ProceedingsValidation", "interface"),
        corpus,
    )
    assert subtype_of(GraphType("CreditCardPayment", "service"), GraphType("Payment", "interface"), corpus)
    assert not subtype_of(
        GraphType("CreditCardPayment", "service"),
        GraphType("ProceedingsValidation", "interface"),
        corpus,
    )


def test_primitive_only_subtype_of_itself(corpus):
    assert not subtype_of(PrimitiveType("int"), PrimitiveType("real"), corpus)
    assert not subtype_of(PrimitiveType("bool"), DomainType("User"), corpus)


def test_subtype_is_partial_order_over_corpus(corpus):
    types = corpus_types(corpus)
    rel = {
        (i, j)
        for i, a in enumerate(types)
        for j, b in enumerate(types)
        if subtype_of(a, b, corpus)
    }
    for i in range(len(types)):
        assert (i, i) in rel
    for i, j in rel:
        if i != j:
            assert (j, i) not in rel, f"antisymmetry broken for {types[i]} vs {types[j]}"
    for (i, j), (k, m) in itertools.product(rel, rel):
        if j == k:
            assert (i, m) in rel, f"transitivity broken via {types[j]}"


def test_unresolved_type_raises(corpus):
    with pytest.raises(UnresolvedTypeError):
        subtype_of(DomainType("Nope"), DomainType("User"), corpus)


# ---------------------------------------------------------------------------
# conforms
# ---------------------------------------------------------------------------


def test_corpus_payment_graphs_conform(corpus):
    iface = corpus.interfaces["Payment"]
    assert conforms(corpus.services["CreditCardPayment"], iface, corpus) == []
    assert conforms(corpus.services["InvoicePayment"], iface, corpus) == []


def test_identical_signature_conforms():
    lib = load_library(MINIMAL_LIB)
    assert conforms(lib.services["EchoImpl"], lib.interfaces["Echo"], lib) == []


def test_missing_branch_is_branch_set_mismatch():
    doc = altered(
        MINIMAL_LIB,
        lambda d: d["interfaces"].update(
            {
                "Echo": {
                    "signature": {
                        "inputs": [{"name": "x", "type": {"kind": "int"}}],
                        "branches": {
                            "out": [{"name": "x", "type": {"kind": "int"}}],
                            "invalid": [],
                        },
                    }
                }
            }
        ),
    )
    lib = load_library(doc)
    errors = conforms(lib.services["EchoImpl"], lib.interfaces["Echo"], lib)
    assert any("branch-set mismatch" in e for e in errors)


def test_variance_violation_reported_with_position(corpus, corpus_doc):
    doc = altered(
        corpus_doc,
        lambda d: d["graphs"]["CreditCardPayment"]["signature"]["branches"].update(
            {"paid": [{"name": "receipt", "type": {"kind": "int"}}]}
        ),
    )
    lib = load_library(doc)
    errors = conforms(lib.services["CreditCardPayment"], lib.interfaces["Payment"], lib)
    assert any("variance violation at branch paid output 0" in e for e in errors)


# ---------------------------------------------------------------------------
# resolved_signature
# ---------------------------------------------------------------------------


def test_resolved_signature_atomic(corpus):
    node = corpus.services["validate-payment"].nodes["author-paid"]
    sig = resolved_signature(node, corpus)
    assert set(sig.branches) == {"yes", "no"}


def test_resolved_signature_constructor(corpus):
    node = corpus.services["simple-proceedings-validation"].nodes["new-payment-check"]
    sig = resolved_signature(node, corpus)
    assert set(sig.branches) == {"created"}
    out = sig.branches["created"][0]
    assert out.type == GraphType("validate-payment", "service")


def test_resolved_signature_interface_site(corpus):
    node = corpus.services["register-to-conference"].nodes["pay-conference-fee"]
    sig = resolved_signature(node, corpus)
    assert sig == corpus.interfaces["Payment"].signature


def test_node_branches_cover_kinds(corpus):
    g = corpus.services["simple-proceedings-validation"]
    assert node_branches(g.nodes["start"], corpus) == {"start"}
    assert node_branches(g.nodes["end-valid"], corpus) == set()
    assert node_branches(g.nodes["new-payment-check"], corpus) == {"created"}
    assert node_branches(g.nodes["validate-payment"], corpus) == {"valid", "invalid"}
