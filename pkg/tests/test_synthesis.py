from __future__ import annotations

import itertools
import random

import pytest

from slgengine.checker import check_graph
from slgengine.logic import evaluate, formula_to_text, parse_formula
from slgengine.model import conforms
from slgengine.specs import ActivityProfile, SynthesisSpec, spec_from_json, spec_to_json
from slgengine.synthesis import (
    MaterializeError,
    all_constraints,
    materialize,
    sequence_trace,
    synthesize,
    validate_solution,
)


def corpus_spec(corpus) -> SynthesisSpec:
    return corpus.services["loose-proceedings-validation"].loose_edges[("iterate-papers", "next")]


def brute_force_solutions(spec: SynthesisSpec, max_len: int) -> tuple[int | None, set]:
    """Exhaustive enumerator, independent of the search's pruning."""
    ids = sorted(p.activity_id for p in spec.candidates)
    constraints = all_constraints(spec)
    for length in range(1, max_len + 1):
        hits = set()
        for seq in itertools.permutations(ids, length) if not spec.allow_repeats else itertools.product(ids, repeat=length):
            trace = sequence_trace(tuple(seq), spec)
            if all(evaluate(f, trace, 0) for f in constraints):
                hits.add(tuple(seq))
        if hits:
            return length, hits
    return None, set()


def test_validation_scenario_minimal_chain(corpus):
    spec = corpus_spec(corpus)
    solution = synthesize(spec)
    assert solution is not None
    assert solution.length == 2
    assert ("final-version?", "margins?") in solution.sequences
    for seq in solution.sequences:
        assert validate_solution(seq, spec) is None


def test_validation_scenario_matches_bruteforce(corpus):
    spec = corpus_spec(corpus)
    solution = synthesize(spec)
    oracle_len, oracle_set = brute_force_solutions(spec, 3)
    assert oracle_len == solution.length == 2
    assert set(solution.sequences) == oracle_set


def simple_spec(goal: str, candidates: list[ActivityProfile], max_length: int = 4) -> SynthesisSpec:
    return SynthesisSpec(
        interface_id="ProceedingsValidation",
        candidates=tuple(candidates),
        initially_available=frozenset(),
        goals=(parse_formula(goal),),
        max_length=max_length,
    )


def test_single_activity_goal(corpus):
    spec = simple_spec('F "a"', [ActivityProfile("a")])
    solution = synthesize(spec)
    assert solution is not None
    assert solution.length == 1
    assert solution.sequences == (("a",),)


def test_unsatisfiable_requirement_prunes_everything():
    spec = simple_spec('F "a"', [ActivityProfile("a", requires=frozenset({"gold"}))])
    assert synthesize(spec) is None


def test_goal_beyond_max_length_is_no_solution():
    spec = SynthesisSpec(
        interface_id="ProceedingsValidation",
        candidates=(ActivityProfile("a"), ActivityProfile("b")),
        initially_available=frozenset(),
        goals=(parse_formula('F "a" & F "b" & F "c"'),),
        max_length=2,
    )
    assert synthesize(spec) is None


def test_validate_solution_accepts_longer_chain(corpus):
    spec = corpus_spec(corpus)
    assert validate_solution(("source-archive?", "compiles?", "margins?"), spec) is None


def test_validate_solution_reports_first_violated_formula(corpus):
    spec = corpus_spec(corpus)
    violated = validate_solution(("margins?",), spec)
    assert violated is not None
    assert formula_to_text(violated) == '!"margins?" WU "compiles?" | "final-version?"'


def test_validate_solution_with_trivial_constraints():
    spec = simple_spec("G true", [ActivityProfile("a"), ActivityProfile("b")])
    assert validate_solution(("b", "a"), spec) is None


def test_determinism_identical_specs_identical_solutions(corpus):
    spec_doc = spec_to_json(corpus_spec(corpus))
    first = synthesize(spec_from_json(spec_doc))
    second = synthesize(spec_from_json(spec_doc))
    assert first == second


def test_repetition_disallowed_by_default_but_flaggable():
    profiles = [ActivityProfile("a", provides=frozenset({"x"}))]
    base = dict(
        interface_id="ProceedingsValidation",
        candidates=tuple(profiles),
        initially_available=frozenset(),
        goals=(parse_formula('X "a"'),),  # needs two positions
    )
    assert synthesize(SynthesisSpec(max_length=3, **base)) is None
    doubled = synthesize(SynthesisSpec(max_length=3, allow_repeats=True, **base))
    assert doubled is not None and doubled.sequences == (("a", "a"),)


def test_randomized_specs_soundness_and_minimality(corpus):
    rng = random.Random(7)
    data_kinds = ["p", "q", "r"]
    for trial in range(25):
        profiles = []
        for k in range(rng.randint(2, 5)):
            requires = frozenset(d for d in data_kinds if rng.random() < 0.3)
            provides = frozenset(d for d in data_kinds if rng.random() < 0.4)
            profiles.append(ActivityProfile(f"act{k}", requires, provides))
        goal_atom = f"act{rng.randrange(len(profiles))}"
        spec = simple_spec(f'F "{goal_atom}"', profiles, max_length=3)
        solution = synthesize(spec)
        oracle_len, oracle_set = brute_force_solutions(spec, 3)
        if solution is None:
            assert oracle_len is None, f"trial {trial}: search missed solutions {oracle_set}"
        else:
            assert solution.length == oracle_len
            assert set(solution.sequences) == oracle_set
            for seq in solution.sequences:
                assert validate_solution(seq, spec) is None


# ---------------------------------------------------------------------------
# materialize
# ---------------------------------------------------------------------------


def test_materialized_chain_conforms_and_checks_clean(corpus):
    spec = corpus_spec(corpus)
    graph = materialize(("final-version?", "margins?"), spec, corpus, graph_id="chain2")
    assert graph.implements_id == "ProceedingsValidation"
    scoped = corpus.extended({"chain2": graph})
    assert conforms(graph, corpus.interfaces["ProceedingsValidation"], scoped) == []
    assert check_graph(graph, scoped) == []
    names = [n.activity_id for n in graph.nodes.values() if hasattr(n, "activity_id")]
    assert names == ["final-version?", "margins?"]


def test_materialized_single_activity_chain(corpus):
    spec = corpus_spec(corpus)
    graph = materialize(("registered?",), spec, corpus, graph_id="chain1")
    scoped = corpus.extended({"chain1": graph})
    assert check_graph(graph, scoped) == []


def test_materialize_rejects_activity_with_wrong_branches(corpus):
    spec = corpus_spec(corpus)
    with pytest.raises(MaterializeError):
        materialize(("send-to-springer",), spec, corpus)


def test_materialize_rejects_unproducible_input(corpus):
    spec = corpus_spec(corpus)
    # margins? needs the pdf var, which nothing earlier in the chain provides
    with pytest.raises(MaterializeError):
        materialize(("margins?",), spec, corpus)
