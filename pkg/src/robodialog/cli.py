"""Command-line entry point: interact, batch, serve, replay.

Exit codes: 0 success/resolved, 2 usage error, 1 runtime error,
3 session not resolved, 4 replay divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import policies as pol
from . import session as sess
from .explain import load_templates
from .intent import load_ruleset
from .levels import DialogVariant, load_tables
from .sim import MoveCube, SimError, SwapCube, load_scenario

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_UNRESOLVED = 3
EXIT_DIVERGED = 4

_HELP_LINE = (
    "commands: :continue | :swap <cube> <qr> | :move <cube> <x> <y> | :state | :quit; "
    "anything else is said to the robot"
)


def _parse_variant(value: str) -> DialogVariant:
    try:
        return DialogVariant(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown variant {value!r} (use AD1 or AD2)")


def _resolve_scenario(value: str):
    """A builtin scenario name, or a path to a scenario config document."""
    if Path(value).suffix == ".json" or "/" in value:
        return load_scenario(value)
    return value


def _load_overrides(args, variant: DialogVariant) -> dict:
    overrides = {}
    if args.table:
        tables = load_tables(args.table)
        if variant not in tables:
            raise ValueError(f"table file has no entries for {variant.value}")
        overrides["table"] = tables[variant]
    if args.templates:
        overrides["templates"] = load_templates(args.templates)
    if args.rules:
        overrides["rules"] = load_ruleset(args.rules)
    return overrides


def _print_events(events) -> None:
    for event in events:
        if event.kind is sess.EventKind.ROBOT_UTTERANCE:
            print(f"robot [{event.payload['level']}]: {event.payload['text']}")
        elif event.kind is sess.EventKind.FALLBACK:
            print(f"robot: {event.payload['text']}")
        elif event.kind is sess.EventKind.ERROR_RAISED:
            print(f"! error {event.payload['error']} on cube {event.payload['cube_id']}")
        elif event.kind is sess.EventKind.SORTED:
            print(f"* cube {event.payload['cube_id']} sorted onto {event.payload['shelf']}")
        elif event.kind is sess.EventKind.SESSION_RESOLVED:
            print("* all cubes sorted; session resolved")


def cmd_interact(args) -> int:
    # A deterministic id keeps the whole transcript a pure function of
    # flags + seed + stdin.
    scenario_tag = Path(args.scenario).stem if "/" in args.scenario else args.scenario
    session = sess.create_session(args.variant, _resolve_scenario(args.scenario),
                                  args.seed, **_load_overrides(args, args.variant),
                                  session_id=f"cli-{args.variant.value}-{scenario_tag}-{args.seed}")
    print(f"session {session.id} variant={session.variant.value} "
          f"scenario={args.scenario} seed={args.seed}")
    print(_HELP_LINE)
    _print_events(sess.advance(session))
    while session.status is sess.SessionStatus.RUNNING:
        try:
            line = input("> ").strip()
        except EOFError:
            break
        if not line:
            continue
        if line.startswith(":"):
            parts = line.split()
            try:
                if parts[0] == ":quit":
                    break
                elif parts[0] == ":state":
                    print(json.dumps(sess.world_summary(session), indent=2))
                elif parts[0] == ":continue" and len(parts) == 1:
                    _print_events(sess.handle_continue(session))
                elif parts[0] == ":swap" and len(parts) == 3:
                    action = SwapCube(cube_id=int(parts[1]), new_qr=parts[2])
                    _print_events(sess.handle_repair(session, action))
                    print(f"* swapped cube {parts[1]} to QR {parts[2]}")
                elif parts[0] == ":move" and len(parts) == 4:
                    action = MoveCube(cube_id=int(parts[1]),
                                      new_position=(int(parts[2]), int(parts[3])))
                    _print_events(sess.handle_repair(session, action))
                    print(f"* moved cube {parts[1]} to ({parts[2]}, {parts[3]})")
                else:
                    print(_HELP_LINE)
            except (SimError, sess.SessionError, ValueError) as exc:
                print(f"! {exc}")
        else:
            try:
                _print_events(sess.handle_utterance(session, line))
            except sess.SessionError as exc:
                print(f"! {exc}")
    if session.status is sess.SessionStatus.RUNNING:
        # :quit or end of input while unresolved
        session.status = sess.SessionStatus.ABANDONED
        print("session abandoned")
    if args.out:
        sess.write_transcript(session, args.out)
        print(f"transcript written to {args.out}")
    resolved = session.status is sess.SessionStatus.RESOLVED
    return EXIT_OK if resolved else EXIT_UNRESOLVED


def cmd_batch(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    results = []
    for variant in args.variants or [DialogVariant.AD1, DialogVariant.AD2]:
        overrides = _load_overrides(args, variant)
        for name in args.policies:
            policy = pol.make_policy(name)
            results.append(pol.run_batch(policy, variant, scenario, args.n, args.seed,
                                         turn_cap=args.turn_cap, overrides=overrides))
    print(f"{'variant':4} {'policy':20} {'scenario':18} n      resolved  mean_turns")
    for result in results:
        print(result.summary_line())
    if args.out:
        report = {"results": [r.to_dict() for r in results]}
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        print(f"report written to {args.out}")
    return EXIT_OK


def cmd_replay(args) -> int:
    text = Path(args.transcript).read_text(encoding="utf-8")
    try:
        _, divergence = sess.replay_transcript(text)
    except (ValueError, KeyError, SimError, sess.SessionError) as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if divergence is None:
        print(f"replay OK: {args.transcript} reproduces byte-exact")
        return EXIT_OK
    print(f"replay DIVERGED: {args.transcript}", file=sys.stderr)
    print(divergence.describe(), file=sys.stderr)
    return EXIT_DIVERGED


def cmd_serve(args) -> int:
    from .server import SessionStore, run_server

    host, _, port = args.addr.rpartition(":")
    store = SessionStore(
        transcript_dir=args.transcript_dir,
        default_tables=load_tables(args.table) if args.table else None,
        default_templates=load_templates(args.templates) if args.templates else None,
        default_rules=load_ruleset(args.rules) if args.rules else None,
        extra_scenarios={
            Path(p).stem: load_scenario(p) for p in (args.scenarios or [])
        },
    )
    run_server(host=host or "127.0.0.1", port=int(port), store=store)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="robodialog",
        description="Adaptive explanation dialogs for robot error recovery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_variant=True):
        if with_variant:
            p.add_argument("--variant", type=_parse_variant, default=DialogVariant.AD1,
                           help="dialog variant: AD1 or AD2")
        p.add_argument("--scenario", default="both_random_order",
                       help="builtin scenario name or path to a scenario JSON file")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--table", help="path to a transition-table JSON file")
        p.add_argument("--templates", help="path to a template JSON file")
        p.add_argument("--rules", help="path to an intent-rules JSON file")
        p.add_argument("--out", help="output path (transcript or report)")

    p_interact = sub.add_parser("interact", help="run one session in the terminal")
    add_common(p_interact)
    p_interact.set_defaults(fn=cmd_interact)

    p_batch = sub.add_parser("batch", help="run scripted-user batch experiments")
    add_common(p_batch, with_variant=False)
    p_batch.add_argument("--variant", dest="variants", type=_parse_variant,
                         action="append", help="dialog variant (repeatable; default both)")
    p_batch.add_argument("--policy", dest="policies", action="append", required=True,
                         choices=sorted(pol.BUILTIN_POLICIES),
                         help="scripted user policy (repeatable)")
    p_batch.add_argument("--n", type=int, default=10, help="sessions per combination")
    p_batch.add_argument("--turn-cap", type=int, default=pol.DEFAULT_TURN_CAP)
    p_batch.set_defaults(fn=cmd_batch)

    p_serve = sub.add_parser("serve", help="run the HTTP session service")
    p_serve.add_argument("--addr",
                         default=os.environ.get("ROBODIALOG_ADDR", "127.0.0.1:8765"),
                         help="host:port to listen on (env: ROBODIALOG_ADDR)")
    p_serve.add_argument("--transcript-dir", help="persist transcripts here for replay")
    p_serve.add_argument("--table", help="transition-table override file for all sessions")
    p_serve.add_argument("--templates", help="template override file for all sessions")
    p_serve.add_argument("--rules", help="intent-rule override file for all sessions")
    p_serve.add_argument("--scenario", dest="scenarios", action="append",
                         help="extra named scenario file (repeatable; name = file stem)")
    p_serve.set_defaults(fn=cmd_serve)

    p_replay = sub.add_parser("replay", help="verify a transcript replays byte-exact")
    p_replay.add_argument("--transcript", required=True, help="transcript file to verify")
    p_replay.set_defaults(fn=cmd_replay)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (SimError, sess.SessionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
