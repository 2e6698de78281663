"""Batch entry points: check, run, synth, export-dot, serve.

Exit codes: 0 success, 1 validation failure, 2 runtime abort, 3 usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .checker import check_library
from .corpus import Fixtures, default_fixtures, proceedings_value, register_stub_activities, user_value
from .dot import graph_to_dot
from .interpreter import Engine, EngineError, UncheckedGraphError, command_from_json
from .model import GraphLibrary, LibraryLoadError, load_library
from .registry import ActivityRegistry
from .runtime import PrimValue, Value, value_from_json
from .specs import spec_from_json
from .synthesis import MaterializeError, materialize, synthesize

USAGE_EXIT = 3
ABORT_EXIT = 2
VALIDATION_EXIT = 1


def _emit(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True, ensure_ascii=False))


def _load_or_fail(path: str) -> GraphLibrary:
    try:
        return load_library(path)
    except LibraryLoadError as exc:
        for issue in exc.issues:
            _emit(issue.to_json())
        raise SystemExit(VALIDATION_EXIT)


def _load_fixtures(path: str | None) -> Fixtures:
    if path is None:
        return default_fixtures()
    return Fixtures.from_file(path)


def _parse_input_arg(raw: str) -> tuple[str, object]:
    if "=" not in raw:
        raise SystemExit(USAGE_EXIT)
    name, text = raw.split("=", 1)
    try:
        return name, json.loads(text)
    except json.JSONDecodeError:
        return name, text


def _build_inputs(lib: GraphLibrary, graph_id: str, pairs: list[str], fixtures: Fixtures) -> list[Value]:
    graph = lib.service(graph_id)
    given = dict(_parse_input_arg(p) for p in pairs)
    values: list[Value] = []
    for param in graph.signature.inputs:
        if param.name in given:
            raw = given.pop(param.name)
            if isinstance(raw, dict):
                values.append(value_from_json(raw, lib))
            else:
                values.append(PrimValue(raw))
        elif param.name == "user":
            values.append(user_value(fixtures))
        elif param.name == "proceedings":
            values.append(proceedings_value(fixtures))
        else:
            print(f"missing --input for {param.name!r}", file=sys.stderr)
            raise SystemExit(USAGE_EXIT)
    if given:
        print(f"unknown input names: {sorted(given)}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)
    return values


def cmd_check(args: argparse.Namespace) -> int:
    lib = _load_or_fail(args.lib_path)
    diagnostics = check_library(lib)
    for diag in diagnostics:
        _emit(diag.to_json())
    return VALIDATION_EXIT if diagnostics else 0


def cmd_run(args: argparse.Namespace) -> int:
    lib = _load_or_fail(args.lib_path)
    fixtures = _load_fixtures(args.fixtures)
    registry = ActivityRegistry()
    register_stub_activities(registry, fixtures)
    script = []
    if args.script:
        raw = json.loads(Path(args.script).read_text(encoding="utf-8"))
        if not isinstance(raw, list):
            print("steering script must be a JSON list", file=sys.stderr)
            return USAGE_EXIT
        script = [command_from_json(c) for c in raw]
    engine = Engine(lib, registry)
    try:
        inputs = _build_inputs(lib, args.graph_id, args.input, fixtures)
        run_id = engine.start_run(args.graph_id, inputs)
        run = engine.run_to_completion(run_id, script)
    except UncheckedGraphError as exc:
        for diag in exc.diagnostics:
            print(json.dumps(diag.to_json(), sort_keys=True), file=sys.stderr)
        return VALIDATION_EXIT
    except EngineError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return ABORT_EXIT
    for event in run.trace:
        _emit(event.to_json())
    if run.status == "finished":
        return 0
    if run.status == "paused":
        print("run still paused after script was exhausted", file=sys.stderr)
    return ABORT_EXIT


def cmd_synth(args: argparse.Namespace) -> int:
    try:
        spec = spec_from_json(json.loads(Path(args.spec_path).read_text(encoding="utf-8")))
    except (ValueError, OSError) as exc:
        print(f"bad spec: {exc}", file=sys.stderr)
        return VALIDATION_EXIT
    lib = _load_or_fail(args.lib_path) if args.lib_path else None
    solution = synthesize(spec)
    out: dict = {
        "minimalLength": solution.length if solution else None,
        "sequences": [list(s) for s in solution.sequences] if solution else [],
        "graph": None,
    }
    if solution is not None and lib is not None:
        try:
            graph = materialize(solution.sequences[0], spec, lib)
        except MaterializeError as exc:
            print(f"materialization failed: {exc}", file=sys.stderr)
            _emit(out)
            return VALIDATION_EXIT
        from .model import graph_to_json

        doc = graph_to_json(graph)
        doc["id"] = graph.id
        out["graph"] = doc
    _emit(out)
    return 0 if solution is not None else VALIDATION_EXIT


def cmd_export_dot(args: argparse.Namespace) -> int:
    lib = _load_or_fail(args.lib_path)
    if args.graph_id not in lib.services:
        print(f"unknown service graph {args.graph_id!r}", file=sys.stderr)
        return VALIDATION_EXIT
    sys.stdout.write(graph_to_dot(lib.services[args.graph_id], lib))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    lib = _load_or_fail(args.lib_path)
    fixtures = _load_fixtures(args.fixtures)
    registry = ActivityRegistry()
    register_stub_activities(registry, fixtures)
    app = create_app(lib, registry, snapshot_dir=args.snapshot_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate and type-check a library")
    p.add_argument("lib_path")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("run", help="execute a graph headlessly with scripted steering")
    p.add_argument("lib_path")
    p.add_argument("graph_id")
    p.add_argument("--input", action="append", default=[], metavar="name=value")
    p.add_argument("--script", help="JSON list of steering commands, consumed at pause points")
    p.add_argument("--fixtures", help="fixture JSON for the stub activities")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("synth", help="synthesize a chain for a spec")
    p.add_argument("spec_path")
    p.add_argument("--lib", dest="lib_path", help="library for materialization", default=None)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("export-dot", help="print a graph as DOT")
    p.add_argument("lib_path")
    p.add_argument("graph_id")
    p.set_defaults(fn=cmd_export_dot)

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("lib_path")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--snapshot-dir", default=None)
    p.add_argument("--fixtures", default=None)
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; 0 passes through (e.g. --help)
        raise SystemExit(USAGE_EXIT if exc.code not in (0, None) else 0)
    try:
        return args.fn(args)
    except SystemExit:
        raise
    except json.JSONDecodeError as exc:
        print(f"bad JSON input: {exc}", file=sys.stderr)
        return VALIDATION_EXIT
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return VALIDATION_EXIT


if __name__ == "__main__":
    sys.exit(main())
