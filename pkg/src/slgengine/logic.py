"""Finite-trace temporal logic and Kripke transition systems.

Formulas are evaluated over finite, nonempty traces of proposition sets with
strong-next semantics: X f requires a successor position.  Weak until is
phi WU psi == (phi U psi) | G phi.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union


class LogicError(Exception):
    pass


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    prop: str


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Next:
    sub: "Formula"


@dataclass(frozen=True)
class Finally:
    sub: "Formula"


@dataclass(frozen=True)
class Globally:
    sub: "Formula"


@dataclass(frozen=True)
class Until:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class WeakUntil:
    left: "Formula"
    right: "Formula"


Formula = Union[Atom, TrueF, Not, And, Or, Next, Finally, Globally, Until, WeakUntil]

Trace = Sequence[frozenset]


def disjunction(parts: Sequence[Formula]) -> Formula:
    """Left-associated disjunction; empty input is the unsatisfiable !true."""
    if not parts:
        return Not(TrueF())
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def evaluate(f: Formula, trace: Trace, i: int = 0) -> bool:
    """Truth of f on trace at position i (finite-trace semantics)."""
    n = len(trace)
    if not 0 <= i < n:
        raise LogicError(f"position {i} out of range for trace of length {n}")
    return _eval(f, trace, i, n)


def _eval(f: Formula, trace: Trace, i: int, n: int) -> bool:
    tag = f.__class__
    if tag is Atom:
        return f.prop in trace[i]
    if tag is TrueF:
        return True
    if tag is Not:
        return not _eval(f.sub, trace, i, n)
    if tag is And:
        return _eval(f.left, trace, i, n) and _eval(f.right, trace, i, n)
    if tag is Or:
        return _eval(f.left, trace, i, n) or _eval(f.right, trace, i, n)
    if tag is Next:
        return i + 1 < n and _eval(f.sub, trace, i + 1, n)
    if tag is Finally:
        return any(_eval(f.sub, trace, j, n) for j in range(i, n))
    if tag is Globally:
        return all(_eval(f.sub, trace, j, n) for j in range(i, n))
    if tag is Until:
        for j in range(i, n):
            if _eval(f.right, trace, j, n):
                return True
            if not _eval(f.left, trace, j, n):
                return False
        return False
    if tag is WeakUntil:
        for j in range(i, n):
            if _eval(f.right, trace, j, n):
                return True
            if not _eval(f.left, trace, j, n):
                return False
        return True  # G(left) held to the end of the trace
    raise LogicError(f"unknown formula node {f!r}")


# ---------------------------------------------------------------------------
# Text syntax
# ---------------------------------------------------------------------------
#
#   formula := disj (("U" | "WU") formula)?          right-associative
#   disj    := conj ("|" conj)*
#   conj    := unary ("&" unary)*
#   unary   := ("!" | "X" | "F" | "G") unary | atom
#   atom    := "true" | '"..."' | bare-ident | "(" formula ")"

_TOKEN_RE = re.compile(r'\s*("(?:[^"]*)"|WU\b|U\b|X\b|F\b|G\b|true\b|[!&|()]|[A-Za-z_][\w?-]*)')

_PREC_UNTIL = 0
_PREC_OR = 1
_PREC_AND = 2
_PREC_UNARY = 3
_PREC_ATOM = 4


def parse_formula(text: str) -> Formula:
    tokens = _tokenize(text)
    formula, pos = _parse_until(tokens, 0)
    if pos != len(tokens):
        raise LogicError(f"trailing input after formula: {tokens[pos:]}")
    return formula


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip():
                raise LogicError(f"cannot tokenize formula at: {text[pos:]!r}")
            break
        tokens.append(m.group(1))
        pos = m.end()
    return tokens


def _parse_until(tokens: list[str], pos: int) -> tuple[Formula, int]:
    left, pos = _parse_or(tokens, pos)
    if pos < len(tokens) and tokens[pos] in ("U", "WU"):
        op = tokens[pos]
        right, pos = _parse_until(tokens, pos + 1)
        return (Until(left, right) if op == "U" else WeakUntil(left, right)), pos
    return left, pos


def _parse_or(tokens: list[str], pos: int) -> tuple[Formula, int]:
    left, pos = _parse_and(tokens, pos)
    while pos < len(tokens) and tokens[pos] == "|":
        right, pos = _parse_and(tokens, pos + 1)
        left = Or(left, right)
    return left, pos


def _parse_and(tokens: list[str], pos: int) -> tuple[Formula, int]:
    left, pos = _parse_unary(tokens, pos)
    while pos < len(tokens) and tokens[pos] == "&":
        right, pos = _parse_unary(tokens, pos + 1)
        left = And(left, right)
    return left, pos


def _parse_unary(tokens: list[str], pos: int) -> tuple[Formula, int]:
    if pos >= len(tokens):
        raise LogicError("unexpected end of formula")
    tok = tokens[pos]
    if tok == "!":
        sub, pos = _parse_unary(tokens, pos + 1)
        return Not(sub), pos
    if tok in ("X", "F", "G"):
        sub, pos = _parse_unary(tokens, pos + 1)
        return {"X": Next, "F": Finally, "G": Globally}[tok](sub), pos
    return _parse_atom(tokens, pos)


def _parse_atom(tokens: list[str], pos: int) -> tuple[Formula, int]:
    tok = tokens[pos]
    if tok == "(":
        inner, pos = _parse_until(tokens, pos + 1)
        if pos >= len(tokens) or tokens[pos] != ")":
            raise LogicError("missing closing parenthesis")
        return inner, pos + 1
    if tok == "true":
        return TrueF(), pos + 1
    if tok.startswith('"') and tok.endswith('"'):
        return Atom(tok[1:-1]), pos + 1
    if re.fullmatch(r"[A-Za-z_][\w?-]*", tok):
        return Atom(tok), pos + 1
    raise LogicError(f"unexpected token {tok!r}")


def formula_to_text(f: Formula) -> str:
    return _fmt(f, -1)


def _prec(f: Formula) -> int:
    tag = f.__class__
    if tag in (Atom, TrueF):
        return _PREC_ATOM
    if tag in (Not, Next, Finally, Globally):
        return _PREC_UNARY
    if tag is And:
        return _PREC_AND
    if tag is Or:
        return _PREC_OR
    return _PREC_UNTIL


def _fmt(f: Formula, parent_prec: int) -> str:
    prec = _prec(f)
    if isinstance(f, Atom):
        text = f'"{f.prop}"'
    elif isinstance(f, TrueF):
        text = "true"
    elif isinstance(f, Not):
        text = "!" + _fmt(f.sub, _PREC_UNARY)
    elif isinstance(f, Next):
        text = "X " + _fmt(f.sub, _PREC_UNARY)
    elif isinstance(f, Finally):
        text = "F " + _fmt(f.sub, _PREC_UNARY)
    elif isinstance(f, Globally):
        text = "G " + _fmt(f.sub, _PREC_UNARY)
    elif isinstance(f, And):
        text = _fmt(f.left, _PREC_AND) + " & " + _fmt(f.right, _PREC_AND)
    elif isinstance(f, Or):
        text = _fmt(f.left, _PREC_OR) + " | " + _fmt(f.right, _PREC_OR)
    elif isinstance(f, Until):
        text = _fmt(f.left, _PREC_UNTIL + 1) + " U " + _fmt(f.right, _PREC_UNTIL)
    elif isinstance(f, WeakUntil):
        text = _fmt(f.left, _PREC_UNTIL + 1) + " WU " + _fmt(f.right, _PREC_UNTIL)
    else:
        raise LogicError(f"unknown formula node {f!r}")
    if prec < parent_prec or (prec == parent_prec and isinstance(f, (Until, WeakUntil))):
        return "(" + text + ")"
    return text


def atoms_of(f: Formula) -> frozenset:
    if isinstance(f, Atom):
        return frozenset({f.prop})
    if isinstance(f, TrueF):
        return frozenset()
    if isinstance(f, (Not, Next, Finally, Globally)):
        return atoms_of(f.sub)
    return atoms_of(f.left) | atoms_of(f.right)


# ---------------------------------------------------------------------------
# Kripke transition systems
# ---------------------------------------------------------------------------

TAU = "τ"


@dataclass(frozen=True)
class Kts:
    """Finite transition system with propositions on states, actions on edges.

    The transition relation is total; construction helpers add a self-loop on
    the distinguished action TAU wherever a state would otherwise be stuck.
    """

    states: frozenset
    actions: frozenset
    transitions: frozenset  # of (state, action, state)
    labels: Mapping[str, frozenset]
    initial: str

    def successors(self, state: str) -> list[tuple[str, str]]:
        return sorted((a, d) for (s, a, d) in self.transitions if s == state)

    def is_total(self) -> bool:
        with_out = {s for (s, _a, _d) in self.transitions}
        return self.states <= with_out


@dataclass(frozen=True)
class KtsCheckResult:
    holds: bool
    counterexample: tuple | None = None  # tuple of frozensets (a trace)


def check_kts(kts: Kts, f: Formula, bound: int) -> KtsCheckResult:
    """Bounded universal check of f from the initial state.

    Explores all simple-extension paths (no repeated state, except that the
    final state may close a loop) up to ``bound`` states, evaluating f at
    position 0 of each maximal path's label trace.  The verdict is explicitly
    bounded: "holds" means no counterexample within the bound.  A returned
    counterexample is trimmed to its shortest failing prefix.
    """
    if bound < 1:
        raise LogicError("bound must be >= 1")

    def path_trace(path: list[str]) -> tuple:
        return tuple(kts.labels[s] for s in path)

    def shortest_failing_prefix(trace: tuple) -> tuple:
        for length in range(1, len(trace) + 1):
            if not evaluate(f, trace[:length], 0):
                return trace[:length]
        return trace

    def explore(path: list[str], visited: set) -> tuple | None:
        state = path[-1]
        if len(path) >= bound:
            trace = path_trace(path)
            return None if evaluate(f, trace, 0) else shortest_failing_prefix(trace)
        succs = kts.successors(state)
        if not succs:
            trace = path_trace(path)
            return None if evaluate(f, trace, 0) else shortest_failing_prefix(trace)
        for _action, dst in succs:
            if dst in visited:
                trace = path_trace(path + [dst])
                if not evaluate(f, trace, 0):
                    return shortest_failing_prefix(trace)
                continue
            visited.add(dst)
            failure = explore(path + [dst], visited)
            visited.discard(dst)
            if failure is not None:
                return failure
        return None

    failure = explore([kts.initial], {kts.initial})
    if failure is None:
        return KtsCheckResult(holds=True)
    return KtsCheckResult(holds=False, counterexample=failure)


def slg_to_kts(graph, lib) -> Kts:
    """Interpret a service graph as a KTS.

    States are node ids labeled with the node's activity/graph id plus a
    node-kind proposition; actions are branch names; end nodes self-loop on
    TAU to keep the transition relation total.
    """
    from . import model  # local import; model does not depend on this module

    labels: dict[str, frozenset] = {}
    transitions: set[tuple[str, str, str]] = set()
    for nid, node in graph.nodes.items():
        props: set[str] = set()
        if isinstance(node, model.StartNode):
            props.add("start")
        elif isinstance(node, model.EndNode):
            props.update({"end", f"end:{node.branch}"})
        elif isinstance(node, model.AtomicNode):
            props.update({"atomic", node.activity_id})
        elif isinstance(node, model.GraphSibNode):
            props.update({"graph-sib", node.graph_type.graph_id})
        elif isinstance(node, model.ConstructorNode):
            props.update({"constructor", node.service_graph_id})
        labels[nid] = frozenset(props)
    for (src, branch), dst in graph.edges.items():
        transitions.add((src, branch, dst))
    states_with_out = {s for (s, _a, _d) in transitions}
    for nid in graph.nodes:
        if nid not in states_with_out:
            transitions.add((nid, TAU, nid))
    actions = {a for (_s, a, _d) in transitions}
    return Kts(
        states=frozenset(graph.nodes),
        actions=frozenset(actions),
        transitions=frozenset(transitions),
        labels=labels,
        initial=graph.start_node().id,
    )


# ---------------------------------------------------------------------------
# Dataflow-derived ordering constraints
# ---------------------------------------------------------------------------


def derive_dataflow_constraints(
    profiles: Sequence, initially_available: Iterable = ()
) -> list[Formula]:
    """One weak-until constraint per (consumer, datum) data dependency.

    For every activity a requiring a datum d that is not initially available:
    ``!a WU (p1 | ... | pn)`` over the activities providing d (sorted by id,
    the consumer itself excluded).  With no providers the constraint
    degenerates to ``G !a``: the activity can never legally run.  Ordering is
    deterministic by (activity id, datum).
    """
    available = set(initially_available)
    constraints: list[Formula] = []
    for profile in sorted(profiles, key=lambda p: p.activity_id):
        for datum in sorted(profile.requires):
            if datum in available:
                continue
            producers = sorted(
                p.activity_id
                for p in profiles
                if datum in p.provides and p.activity_id != profile.activity_id
            )
            consumer = Not(Atom(profile.activity_id))
            if not producers:
                constraints.append(Globally(consumer))
            else:
                constraints.append(
                    WeakUntil(consumer, disjunction([Atom(p) for p in producers]))
                )
    return constraints


def unproducible_data(profiles: Sequence, initially_available: Iterable = ()) -> list[tuple]:
    """(activity, datum) pairs whose requirement no candidate can ever meet."""
    available = set(initially_available)
    problems = []
    for profile in sorted(profiles, key=lambda p: p.activity_id):
        for datum in sorted(profile.requires):
            if datum in available:
                continue
            if not any(
                datum in p.provides and p.activity_id != profile.activity_id for p in profiles
            ):
                problems.append((profile.activity_id, datum))
    return problems
