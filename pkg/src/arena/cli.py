"""The ``arena`` command line.

Subcommands: ``run`` (dispatch a scenario timeline), ``simulate`` (synthetic
teams), ``finalize`` (score a log), ``analyze`` (replay analytics and files),
``serve`` (socket intake service). Exit codes: 0 success, 1 validation
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .logio import read_log, write_log
from .model import ArenaError
from .orchestrator import finalize, report_to_bytes, run
from .scenario import load_scenario
from .sim import load_team_configs, simulate

FORMATS = ("csv", "json", "svg")


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arena")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="dispatch a scenario timeline into an event log")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--out", required=True)

    p_sim = sub.add_parser("simulate", help="run synthetic strategy agents")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--teams", required=True, help="team profile/policy JSON")
    p_sim.add_argument(
        "--seed",
        type=int,
        default=int(os.environ.get("ARENA_SEED", "0")),
        help="RNG seed (default: $ARENA_SEED or 0)",
    )
    p_sim.add_argument("--out", required=True)

    p_fin = sub.add_parser("finalize", help="score a finished event log")
    p_fin.add_argument("--log", required=True)
    p_fin.add_argument("--report", required=True)

    p_an = sub.add_parser("analyze", help="replay analytics: tables and figures")
    p_an.add_argument("--log", required=True)
    p_an.add_argument(
        "--series",
        default="every-event",
        help="sampling: 'every-event' or a grid like '600s'",
    )
    p_an.add_argument("--out", default=".", help="output directory")
    p_an.add_argument(
        "--format",
        default="csv,json,svg",
        help=f"comma-separated subset of {','.join(FORMATS)}",
    )

    p_srv = sub.add_parser("serve", help="socket intake service on a virtual clock")
    p_srv.add_argument("--scenario", required=True)
    p_srv.add_argument("--port", type=int, required=True)
    p_srv.add_argument("--time-scale", type=float, default=1.0)
    p_srv.add_argument("--out", help="write the event log here on shutdown")

    return parser


def _parse_series(text: str) -> str | float:
    if text == "every-event":
        return text
    if text.endswith("s"):
        text = text[:-1]
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"bad --series value {text!r}") from None
    if value <= 0:
        raise ValueError("--series interval must be positive")
    return value


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            log = run(load_scenario(args.scenario))
            write_log(args.out, log)
            print(f"wrote {len(log.events)} events to {args.out}")
        elif args.command == "simulate":
            scenario = load_scenario(args.scenario)
            configs = load_team_configs(args.teams)
            missing = [t for t in scenario.teams if t not in configs]
            if missing:
                raise ArenaError(f"no config for teams: {', '.join(missing)}")
            profiles = {t: configs[t][0] for t in scenario.teams}
            policies = {t: configs[t][1] for t in scenario.teams}
            log = simulate(scenario, profiles, policies, args.seed)
            write_log(args.out, log)
            print(f"wrote {len(log.events)} events to {args.out}")
        elif args.command == "finalize":
            report = finalize(read_log(args.log))
            Path(args.report).write_bytes(report_to_bytes(report))
            for team, total in sorted(report.team_totals().items()):
                print(f"{team}\t{float(total):.4f}")
        elif args.command == "analyze":
            formats = [f.strip() for f in args.format.split(",") if f.strip()]
            for fmt in formats:
                if fmt not in FORMATS:
                    parser.error(f"unknown format {fmt!r}")  # exits 2
            try:
                series = _parse_series(args.series)
            except ValueError as exc:
                parser.error(str(exc))
            from .render import render  # matplotlib import is slow; keep it lazy

            log = read_log(args.log)
            stem = Path(args.log).stem
            written = render(log, stem, args.out, formats, series)
            for path in written:
                print(path)
        elif args.command == "serve":
            from .service import serve

            serve(
                load_scenario(args.scenario),
                port=args.port,
                time_scale=args.time_scale,
                log_path=args.out,
            )
    except ArenaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
