"""Command-line front door.

Subcommands:
    run <scenario.scn> [...]   headless scenario execution with trace export
    sweep <kind>               figure-shaped parameter sweeps to CSV
    letters <waypoints.json>   waypoint-following trajectory run
    serve                      live teleoperation service (WebSocket)

Exit codes: 0 success, 2 assertion/stall failure, 3 schema error.  A config
JSON may be supplied with --config or the MICROFORGE_CONFIG environment
variable; scenario-embedded config sections override it.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import math
import os
import sys
from pathlib import Path

from .config import ENV_VAR
from .errors import MicroforgeError, SchemaError
from .scenario import ScenarioRunner, load_scenario
from .sweeps import SWEEP_KINDS, run_sweep

EXIT_OK = 0
EXIT_ASSERTION = 2
EXIT_SCHEMA = 3


def _load_config_doc(path):
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read config: {exc}", path=str(path))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not valid JSON: {exc}", path=str(path))
    if not isinstance(doc, dict):
        raise SchemaError("config document must be a JSON object", path=str(path))
    return doc


def _run_one(path, out_dir, config_doc, seed, dt_s):
    result = None
    doc = load_scenario(path)
    runner = ScenarioRunner(doc, config_doc=config_doc, out_dir=out_dir, seed=seed, dt_s=dt_s)
    result = runner.run()
    return result.exit_code, doc["name"], str(result.failure) if result.failure else ""


def cmd_run(args):
    config_doc = _load_config_doc(args.config)
    dt_s = args.dt / 1000.0 if args.dt is not None else None
    jobs = max(1, args.jobs)
    worst = EXIT_OK
    if jobs == 1 or len(args.scenarios) == 1:
        outcomes = [
            _run_one(path, args.out, config_doc, args.seed, dt_s) for path in args.scenarios
        ]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_run_one, path, args.out, config_doc, args.seed, dt_s)
                for path in args.scenarios
            ]
            outcomes = [f.result() for f in futures]
    for code, name, detail in outcomes:
        status = "PASS" if code == EXIT_OK else "FAIL"
        line = f"{status} {name}"
        if detail:
            line += f": {detail}"
        print(line)
        worst = max(worst, code)
    return worst


def cmd_sweep(args):
    config_doc = _load_config_doc(args.config)
    from .config import config_from_dict, default_config

    config = config_from_dict(config_doc) if config_doc else default_config()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    run_sweep(args.kind, config, out_path=out)
    print(f"wrote {out}")
    return EXIT_OK


def _load_waypoints(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read waypoints: {exc}", path=str(path))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"waypoints not valid JSON: {exc}", path=str(path))
    points = doc["points_um"] if isinstance(doc, dict) else doc
    if not isinstance(points, list) or any(len(p) != 2 for p in points):
        raise SchemaError("waypoints must be a list of [x, y] pairs", path=str(path))
    return [(float(x), float(y)) for x, y in points]


def letters_doc(points, base_type, phi=None, seed=0, accept_um=5.0):
    """Synthetic scenario document for a letter/waypoint trajectory run.

    Pin-carrying bases draw at the 40%-water operating point, plain bases in
    pure water, unless phi overrides.
    """
    if base_type == "type1":
        kind = "Type1Base"
        phi = 0.40 if phi is None else phi
    elif base_type == "type2":
        kind = "Type2Base"
        phi = 1.00 if phi is None else phi
    else:
        raise SchemaError(f"unknown base type {base_type!r}")
    x0, y0 = points[0]
    return {
        "schema_version": 1,
        "name": f"letters_{base_type}",
        "description": "waypoint-following trajectory run",
        "seed": seed,
        "duration_s": 0,
        "world": {
            "water_fraction": phi,
            "bodies": [{"id": "base", "kind": kind, "x": x0, "y": y0}],
        },
        "script": [
            {
                "t": 0,
                "action": {
                    "kind": "run_maneuver",
                    "maneuver": "follow_waypoints",
                    "body": "base",
                    "waypoints": [list(p) for p in points],
                    "accept_um": accept_um,
                    "timeout_s": 1200.0,
                },
            }
        ],
    }


def cmd_letters(args):
    config_doc = _load_config_doc(args.config)
    points = _load_waypoints(args.waypoints)
    doc = letters_doc(points, args.base_type, phi=args.phi, seed=args.seed or 0)
    runner = ScenarioRunner(doc, config_doc=config_doc, out_dir=args.out)
    result = runner.run()
    if result.failure is not None:
        print(f"FAIL: {result.failure}", file=sys.stderr)
        return EXIT_ASSERTION
    report = {
        "base_type": args.base_type,
        "waypoints": len(points),
        "duration_s": result.world.time_s,
        "max_cross_track_um": result.maneuvers[-1]["max_cross_track_um"],
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / f"letters_{args.base_type}_report.json"
    report_path.write_text(json.dumps(report, indent=1), encoding="utf-8")
    print(json.dumps(report))
    return EXIT_OK


def cmd_serve(args):
    from .teleop import bundled_scenario_path, serve

    path = Path(args.scenario)
    if not path.is_file():
        path = bundled_scenario_path(args.scenario)
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    config_doc = _load_config_doc(args.config)
    serve(
        doc,
        config_doc=config_doc,
        port=args.port,
        speed=args.speed,
        replay_out=args.replay_out,
    )
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="microforge",
        description="simulation workbench for solvent-actuated modular microrobots",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run scenario files headlessly")
    p_run.add_argument("scenarios", nargs="+", help="paths to .scn scenario documents")
    p_run.add_argument("--out", default="out", help="output directory for traces")
    p_run.add_argument("--config", help="config JSON path")
    p_run.add_argument("--seed", type=int, help="override the scenario seed")
    p_run.add_argument("--dt", type=float, help="tick length in ms (default from scenario)")
    p_run.add_argument("--jobs", type=int, default=1, help="run scenarios in parallel")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="parameter sweeps to CSV")
    p_sweep.add_argument("kind", choices=SWEEP_KINDS)
    p_sweep.add_argument("--out", default="sweep.csv")
    p_sweep.add_argument("--config")
    p_sweep.set_defaults(func=cmd_sweep)

    p_let = sub.add_parser("letters", help="drive a base along a waypoint polyline")
    p_let.add_argument("waypoints", help="JSON file with points_um: [[x, y], ...]")
    p_let.add_argument("--base-type", choices=("type1", "type2"), default="type2")
    p_let.add_argument("--phi", type=float, help="override the solvent water fraction")
    p_let.add_argument("--out", default="out")
    p_let.add_argument("--config")
    p_let.add_argument("--seed", type=int)
    p_let.set_defaults(func=cmd_letters)

    p_serve = sub.add_parser("serve", help="live teleoperation service")
    p_serve.add_argument("--scenario", default="teleop_default", help="bundled name or path")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--speed", type=float, default=1.0, help="sim seconds per wall second")
    p_serve.add_argument("--replay-out", help="write the session replay log here")
    p_serve.add_argument("--config")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except MicroforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ASSERTION


if __name__ == "__main__":
    sys.exit(main())
