"""Command line entry points.

Exit codes: 0 success, 1 usage error, 2 compile error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .compiler import compile_pattern, compile_text, serialize
from .engine import Engine, EngineConfig, replay_log, run_script
from .errors import CGDialogError, CompileError, EngineError
from .inference import apply_rules
from .matcher import match
from .pack import load_pack, validate_pack

USAGE_EXIT = 1
COMPILE_EXIT = 2
RUNTIME_EXIT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cgdialog",
        description="Concept-graph dialogue engine: chat, compile, match, "
                    "infer, serve, replay.")
    sub = parser.add_subparsers(dest="command", required=True)

    chat = sub.add_parser("chat", help="interactive conversation on stdin")
    chat.add_argument("--manifest", help="content pack manifest path")
    chat.add_argument("--seed", help="seed name from the manifest")
    chat.add_argument("--trace", action="store_true",
                      help="print the full turn record after each reply")
    chat.add_argument("--naive-parse", action="store_true",
                      help="fall back to gazetteer-only parsing for free text")
    chat.set_defaults(func=cmd_chat)

    comp = sub.add_parser("compile", help="compile and validate a content pack")
    comp.add_argument("--manifest", help="content pack manifest path")
    comp.set_defaults(func=cmd_compile)

    mat = sub.add_parser("match", help="match a query pattern against data")
    mat.add_argument("query", help="pattern source file")
    mat.add_argument("data", help="knowledge source file")
    mat.set_defaults(func=cmd_match)

    inf = sub.add_parser("infer", help="run inference rules over data")
    inf.add_argument("rules", help="rule source file")
    inf.add_argument("data", help="knowledge source file")
    inf.add_argument("--passes", type=int, default=2)
    inf.set_defaults(func=cmd_infer)

    srv = sub.add_parser("serve", help="start the HTTP service")
    srv.add_argument("--manifest", help="content pack manifest path")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8350)
    srv.add_argument("--frontend", help="directory with the built inspector UI")
    srv.add_argument("--log-dir", help="write turn record logs here")
    srv.add_argument("--naive-parse", action="store_true")
    srv.set_defaults(func=cmd_serve)

    rep = sub.add_parser("replay", help="re-run a record log and compare")
    rep.add_argument("log", help="JSONL record log")
    rep.add_argument("--manifest", help="content pack manifest path")
    rep.set_defaults(func=cmd_replay)

    gold = sub.add_parser("golden", help="run the pack's golden conversations")
    gold.add_argument("--manifest", help="content pack manifest path")
    gold.set_defaults(func=cmd_golden)

    return parser


def cmd_chat(args) -> int:
    pack = load_pack(args.manifest)
    engine = Engine(pack, EngineConfig(naive_parse=args.naive_parse))
    conv = engine.create_conversation(seed=args.seed)
    record = engine.process_turn(conv.id, "")
    if record["response"]:
        print(f"bot> {record['response']}")
    while True:
        try:
            text = input("you> ")
        except EOFError:
            print()
            return 0
        if text.strip() in ("/quit", "/exit"):
            return 0
        record = engine.process_turn(conv.id, text)
        print(f"bot> {record['response'] or '...'}")
        if args.trace:
            print(json.dumps(record, indent=2, sort_keys=True))


def cmd_compile(args) -> int:
    pack = load_pack(args.manifest)
    kinds: dict[str, int] = {}
    for rule in pack.rules + pack.templates:
        kinds[rule.kind] = kinds.get(rule.kind, 0) + 1
    print(f"pack {pack.name!r}: {len(pack.kb.features)} concepts, "
          f"{len(pack.kb.signatures)} predicates")
    for kind in sorted(kinds):
        print(f"  {kind}: {kinds[kind]} rules")
    print(f"  lexicon: {len(pack.lexicon.entries)} entries, "
          f"fixtures: {len(pack.fixtures)}, goldens: {len(pack.goldens)}")
    for warning in pack.warnings:
        print(f"warning: {warning}")
    for issue in validate_pack(pack):
        print(f"check: {issue}")
    return 0


def cmd_match(args) -> int:
    data = compile_text(Path(args.data).read_text(), path=args.data).graph
    query, warnings = compile_pattern(Path(args.query).read_text(),
                                      kb=data, path=args.query)
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    solutions = match(query, data)
    for sol in solutions:
        print(json.dumps(sol.as_dict(), sort_keys=True))
    print(f"{len(solutions)} solution(s)", file=sys.stderr)
    return 0


def cmd_infer(args) -> int:
    from .compiler import IdMint

    data_result = compile_text(Path(args.data).read_text(), path=args.data)
    graph = data_result.graph
    rule_result = compile_text(Path(args.rules).read_text(), kb=graph,
                               path=args.rules)
    graph.absorb(rule_result.graph)
    rules = [r for r in rule_result.rules if r.kind == "inference"]
    mint = IdMint(set(graph.features) | {"_"})
    firings = apply_rules(rules, graph, mint.fresh, set(), passes=args.passes)
    for firing in firings:
        print(f"# {firing.rule} {json.dumps(firing.solution.as_dict(), sort_keys=True)}",
              file=sys.stderr)
    print(serialize(graph), end="")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    pack = load_pack(args.manifest)
    engine = Engine(pack, EngineConfig(naive_parse=args.naive_parse,
                                       log_dir=args.log_dir))
    frontend = args.frontend
    if frontend is None:
        for candidate in (Path.cwd() / "frontend" / "dist",
                          Path(__file__).resolve().parents[2].parent / "frontend" / "dist"):
            if candidate.is_dir():
                frontend = candidate
                break
    serve(engine, host=args.host, port=args.port, frontend_dir=frontend)
    return 0


def cmd_replay(args) -> int:
    pack = load_pack(args.manifest)
    lines = Path(args.log).read_text().splitlines()
    ok, mismatches = replay_log(pack, lines)
    for mismatch in mismatches:
        print(mismatch, file=sys.stderr)
    print("replay matched" if ok else "replay diverged")
    return 0 if ok else RUNTIME_EXIT


def cmd_golden(args) -> int:
    pack = load_pack(args.manifest)
    failures = 0
    for script in pack.goldens:
        engine = Engine(pack)
        try:
            run_script(engine, script)
            print(f"golden {script.name}: ok")
        except AssertionError as exc:
            failures += 1
            print(f"golden {script.name}: FAIL ({exc})")
    return 0 if failures == 0 else RUNTIME_EXIT


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else USAGE_EXIT
    try:
        return args.func(args)
    except CompileError as exc:
        print(f"compile error: {exc}", file=sys.stderr)
        return COMPILE_EXIT
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (EngineError, CGDialogError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT
    except KeyboardInterrupt:
        return 0


if __name__ == "__main__":
    sys.exit(main())
