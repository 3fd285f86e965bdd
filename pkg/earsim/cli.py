"""Command line: run scenarios, score run logs, serve the ear, validate scenes.

Exit codes: 0 success, 1 an expectation or scorecard item failed, 2 bad input.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import load_config, setup_logging
from .engine import EarEngine
from .errors import EarSimError, SceneSemanticError, SceneSyntaxError
from .harness import EXIT_EXPECTATION, EXIT_INPUT, EXIT_OK, evaluate_scorecard, find_runs, load_script, run_scenario, to_markdown
from .protocol.server import serve
from .scene import load_scene

logger = logging.getLogger(__name__)


def _scenario_paths(targets: List[str]) -> List[str]:
    """Expand directories to the scenario scripts directly inside them."""
    paths = []
    for target in targets:
        p = Path(target)
        if p.is_dir():
            paths.extend(str(x) for x in sorted(p.glob("*.json")))
        else:
            paths.append(target)
    return paths


def cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    paths = _scenario_paths(args.scenario)
    if not paths:
        raise EarSimError("no scenario scripts given")
    status = EXIT_OK
    for path in paths:
        script = load_script(path)
        out = None
        if args.log:
            out = args.log if len(paths) == 1 else str(Path(args.log) / script.name)
        result = run_scenario(script, config, args.seed, out, args.realtime)
        met = sum(v.met for v in result.verdicts)
        failed_checks = [c.name for c in result.checks if not c.ok]
        print(
            f"{script.name}: {len(result.log.events)} events, {met}/{len(result.verdicts)} expectations met"
            + (f", failed checks: {', '.join(failed_checks)}" if failed_checks else "")
        )
        status = max(status, result.exit_status)
    return status


def cmd_scorecard(args: argparse.Namespace) -> int:
    runs = find_runs(args.log_dir)
    if not runs:
        raise EarSimError(f"no run directories under {args.log_dir}")
    card = evaluate_scorecard(runs)
    report = to_markdown(card)
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
    else:
        print(report, end="")
    return EXIT_EXPECTATION if card.failed else EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    config = load_config(args.config, overrides)
    listen = args.listen or config.protocol.listen
    http = args.http or config.protocol.http
    engine = EarEngine(load_scene(args.scene), config)
    print(f"earsim serving {args.scene} on {listen}" + (f", control panel on {http}" if http else ""))
    try:
        serve(engine, listen, http, realtime=not args.fast)
    except KeyboardInterrupt:
        pass
    except OSError as e:
        print(f"bind failed: {e}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        scene = load_scene(args.scene)
    except SceneSyntaxError as e:
        print(f"{args.scene}: syntax error: {e.message}", file=sys.stderr)
        return EXIT_INPUT
    except SceneSemanticError as e:
        for v in e.violations or [e.message]:
            print(f"{args.scene}: {v}", file=sys.stderr)
        return EXIT_INPUT
    print(json.dumps({"scene": args.scene, "duration_s": scene.duration_s, "sources": len(scene.sources)}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="earsim", description="Simulated binaural ear for cognitive architectures")
    parser.add_argument("--log-level", default=None, help="Python log level (default from EARSIM_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run scenario scripts (files or directories)")
    run.add_argument("scenario", nargs="+", help="Scenario script(s) or a directory of them")
    run.add_argument("--config", default=None, help="Engine config JSON")
    run.add_argument("--seed", type=int, default=None, help="Override the random seed")
    run.add_argument("--realtime", action="store_true", help="Pace the virtual clock to wall time")
    run.add_argument("--log", default=None, help="Run directory (one subdirectory per scenario when several)")
    run.set_defaults(func=cmd_run)

    score = sub.add_parser("scorecard", help="Score run directories against their scenes")
    score.add_argument("log_dir", help="A run directory or a directory of them")
    score.add_argument("--out", default=None, help="Write the markdown report here")
    score.set_defaults(func=cmd_scorecard)

    srv = sub.add_parser("serve", help="Serve one scene to external clients")
    srv.add_argument("--scene", required=True, help="Scene document")
    srv.add_argument("--listen", default=None, help="host:port for the line protocol")
    srv.add_argument("--http", default=None, help="host:port for the HTTP control panel")
    srv.add_argument("--config", default=None, help="Engine config JSON")
    srv.add_argument("--seed", type=int, default=None, help="Override the random seed")
    srv.add_argument("--fast", action="store_true", help="Step as fast as possible instead of real time")
    srv.set_defaults(func=cmd_serve)

    val = sub.add_parser("validate", help="Check a scene document")
    val.add_argument("scene", help="Scene document")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.func(args)
    except EarSimError as e:
        print(f"earsim: {e.message}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
