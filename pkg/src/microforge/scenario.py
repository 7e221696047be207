"""Scenario documents and the headless runner.

A scenario is a JSON document (conventionally *.scn) holding the initial world,
an ordered script of timed actions, and assertions.  The script is sequential:
each entry fires at its scheduled time or as soon as the previous blocking
action finishes, whichever is later.  Traces (CSV) and mating transition logs
are written per run; replay logs recorded by the teleop service use this same
schema.  Full format reference: docs/formats.md.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from . import controllers
from .bodies import (
    BodyKind,
    make_effector,
    make_sphere,
    make_type1_base,
    make_type2_base,
    make_wall,
    mated_base_pose,
)
from .config import config_from_dict, default_config
from .errors import (
    MicroforgeError,
    NoContactError,
    ScenarioAssertionError,
    SchemaError,
    UnreachableWaypointError,
)
from .magnetics import FieldCommand
from .mating import MateState, MatingManager, swap_end_effector
from .world import World

SCENARIO_SCHEMA_VERSION = 1

_ACTION_KINDS = [
    "set_solvent_target",
    "field_command",
    "run_maneuver",
    "assert",
    "mark",
    "swap_end_effector",
]

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "name", "duration_s", "world"],
    "properties": {
        "schema_version": {"const": SCENARIO_SCHEMA_VERSION},
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "seed": {"type": "integer"},
        "dt_ms": {"type": "number", "exclusiveMinimum": 0},
        "trace_every_ms": {"type": "number", "exclusiveMinimum": 0},
        "duration_s": {"type": "number", "minimum": 0},
        "config": {"type": "object"},
        "world": {
            "type": "object",
            "required": ["water_fraction", "bodies"],
            "properties": {
                "water_fraction": {"type": "number", "minimum": 0, "maximum": 1},
                "water_fraction_target": {"type": "number", "minimum": 0, "maximum": 1},
                "enclosure": {"type": "boolean"},
                "bounds": {
                    "type": "array",
                    "items": {"type": "number"},
                    "minItems": 4,
                    "maxItems": 4,
                },
                "bodies": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["id", "kind"],
                        "properties": {
                            "id": {"type": "string", "minLength": 1},
                            "kind": {"enum": [k.value for k in BodyKind]},
                            "x": {"type": "number"},
                            "y": {"type": "number"},
                            "theta_deg": {"type": "number"},
                            "lam": {"type": "number", "exclusiveMinimum": 0},
                            "lp_mw": {"type": "number", "exclusiveMinimum": 0},
                            "radius_um": {"type": "number", "exclusiveMinimum": 0},
                            "width_um": {"type": "number", "exclusiveMinimum": 0},
                            "height_um": {"type": "number", "exclusiveMinimum": 0},
                            "moment_am2": {"type": "number", "exclusiveMinimum": 0},
                        },
                    },
                },
                "pairs": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["base", "effector"],
                        "properties": {
                            "base": {"type": "string"},
                            "effector": {"type": "string"},
                            "initial_state": {"enum": [s.value for s in MateState]},
                        },
                    },
                },
            },
        },
        "script": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["t", "action"],
                "properties": {
                    "t": {"type": "number", "minimum": 0},
                    "action": {
                        "type": "object",
                        "required": ["kind"],
                        "properties": {"kind": {"enum": _ACTION_KINDS}},
                    },
                },
            },
        },
    },
}


def load_scenario(path):
    """Parse and validate a scenario document; SchemaError on any violation."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read scenario: {exc}", path=str(path))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}", path=str(path))
    return validate_scenario(doc)


def validate_scenario(doc):
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(exc.message, path=where)
    times = [entry["t"] for entry in doc.get("script", [])]
    if any(b < a for a, b in zip(times, times[1:])):
        raise SchemaError("script times must be non-decreasing", path="script")
    ids = [b["id"] for b in doc["world"]["bodies"]]
    if len(set(ids)) != len(ids):
        raise SchemaError("duplicate body ids", path="world/bodies")
    known = set(ids)
    for i, pair in enumerate(doc["world"].get("pairs", [])):
        for key in ("base", "effector"):
            if pair[key] not in known:
                raise SchemaError(f"unknown body id {pair[key]!r}", path=f"world/pairs/{i}")
    for i, entry in enumerate(doc.get("script", [])):
        for key in ("body", "base", "effector", "id"):
            ref = entry["action"].get(key)
            if ref is not None and ref not in known:
                raise SchemaError(f"unknown body id {ref!r}", path=f"script/{i}")
    return doc


def build_world(doc, config, seed=None):
    """World plus mating managers from a validated scenario document."""
    wspec = doc["world"]
    world = World(
        config=config,
        water_fraction=wspec["water_fraction"],
        seed=doc.get("seed", 0) if seed is None else seed,
        enclosure=wspec.get("enclosure", False),
        bounds=wspec.get("bounds"),
    )
    phi0 = wspec["water_fraction"]
    for spec in wspec["bodies"]:
        kind = BodyKind(spec["kind"])
        x, y = spec.get("x", 0.0), spec.get("y", 0.0)
        theta = math.radians(spec.get("theta_deg", 0.0))
        lp = spec.get("lp_mw", 12.0)
        lam_eq = config.calibration_for_lp(lp).lambda_eq(phi0)
        lam = spec.get("lam", lam_eq)
        if kind is BodyKind.TYPE1_BASE:
            body = make_type1_base(
                spec["id"], x, y, theta, lam=lam, lam_eq=lam_eq, lp_mw=lp,
                **({"moment_am2": spec["moment_am2"]} if "moment_am2" in spec else {}),
            )
        elif kind is BodyKind.TYPE2_BASE:
            body = make_type2_base(
                spec["id"], x, y, theta,
                **({"moment_am2": spec["moment_am2"]} if "moment_am2" in spec else {}),
            )
        elif kind in (BodyKind.EFFECTOR_SINGLE, BodyKind.EFFECTOR_MULTI, BodyKind.EFFECTOR_GRIPPER):
            body = make_effector(
                spec["id"], kind, x, y, theta, gel_params=config.gel, lam=lam, lam_eq=lam_eq, lp_mw=lp
            )
        elif kind is BodyKind.SPHERE:
            body = make_sphere(spec["id"], x, y, radius_um=spec.get("radius_um", 15.0))
        else:
            body = make_wall(spec["id"], x, y, spec.get("width_um", 100.0), spec.get("height_um", 100.0))
        world.add_body(body)

    managers = {}
    for pair in wspec.get("pairs", []):
        mgr = MatingManager(world, pair["base"], pair["effector"])
        initial = pair.get("initial_state", "Disengaged")
        if initial == MateState.LOCKED.value:
            base = world.body(pair["base"])
            eff = world.body(pair["effector"])
            if world.separation_um(pair["base"], pair["effector"]) > 5.0:
                raise SchemaError(
                    f"pair {pair['base']}/{pair['effector']} declared Locked but not mated",
                    path="world/pairs",
                )
            base.set_pose(*mated_base_pose(eff))  # snap to the exact mated pose
            world.commands[base.id].heading = base.theta
            world.lock_pair(pair["base"], pair["effector"])
            mgr.fsm = mgr.fsm.stamped(MateState.LOCKED, 0.0)
        elif initial != MateState.DISENGAGED.value:
            raise SchemaError(f"unsupported initial_state {initial!r}", path="world/pairs")
        managers[(pair["base"], pair["effector"])] = mgr

    if "water_fraction_target" in wspec:
        world.set_solvent_target(wspec["water_fraction_target"])
    return world, managers


@dataclass
class RunResult:
    exit_code: int
    failure: Exception | None
    trace_path: Path | None
    transitions_path: Path | None
    world: World
    managers: dict
    marks: dict
    maneuvers: list = field(default_factory=list)

    @property
    def ok(self):
        return self.exit_code == 0


class ScenarioRunner:
    """Fixed-tick execution of one scenario with trace and transition logs."""

    def __init__(self, doc, config_doc=None, out_dir=None, seed=None, dt_s=None):
        self.doc = validate_scenario(doc) if isinstance(doc, dict) else doc
        merged = dict(config_doc or {})
        for key, value in self.doc.get("config", {}).items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = {**merged[key], **value}
            else:
                merged[key] = value
        self.config = config_from_dict(merged) if merged else default_config()
        self.dt_s = dt_s if dt_s is not None else self.doc.get("dt_ms", 1.0) / 1000.0
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.world, self.managers = build_world(self.doc, self.config, seed=seed)
        trace_every_ms = self.doc.get("trace_every_ms", 10.0)
        self.trace_every = max(1, round(trace_every_ms / 1000.0 / self.dt_s))
        self.marks = {}
        self._trace_rows = []
        self._tick_count = 0
        self.maneuvers = []

    # ------------------------------------------------------------------ run

    def run(self):
        failure = None
        try:
            self._sample()
            for entry in self.doc.get("script", []):
                self._advance_to(entry["t"])
                self._execute(entry["action"])
            self._advance_to(self.doc["duration_s"])
            if self._tick_count % self.trace_every != 0:
                self._sample()
        except (ScenarioAssertionError, UnreachableWaypointError, NoContactError) as exc:
            failure = exc
        trace_path, transitions_path = self._write_outputs()
        return RunResult(
            exit_code=0 if failure is None else 2,
            failure=failure,
            trace_path=trace_path,
            transitions_path=transitions_path,
            world=self.world,
            managers=self.managers,
            marks=self.marks,
            maneuvers=self.maneuvers,
        )

    # ------------------------------------------------------------------ core loop

    def _tick(self, commands=None):
        self.world.tick(commands, self.dt_s)
        for mgr in self.managers.values():
            mgr.step()
        self._tick_count += 1
        if self._tick_count % self.trace_every == 0:
            self._sample()

    def _advance_to(self, t_end):
        while self.world.time_s < t_end - self.dt_s / 2.0:
            self._tick()

    def _run_maneuver(self, maneuver, label):
        maneuver.start(self.world)
        deadline = self.world.time_s + maneuver.timeout_s
        while not maneuver.done(self.world):
            if self.world.time_s >= deadline:
                raise ScenarioAssertionError(
                    f"maneuver {label!r} timed out after {maneuver.timeout_s} s",
                    time_s=self.world.time_s,
                )
            self._tick(maneuver.commands(self.world))
        for body_id in maneuver.commands(self.world):
            self.world.apply_command(body_id, FieldCommand())
        self.maneuvers.append(
            {
                "maneuver": label,
                "finished_t_s": self.world.time_s,
                "max_cross_track_um": getattr(maneuver, "max_cross_track_um", None),
            }
        )

    # ------------------------------------------------------------------ actions

    def _execute(self, action):
        kind = action["kind"]
        if kind == "set_solvent_target":
            self.world.set_solvent_target(action["phi"])
        elif kind == "field_command":
            self.world.apply_command(
                action["body"],
                FieldCommand(
                    grad_x_t_per_m=action.get("grad_x", 0.0),
                    grad_y_t_per_m=action.get("grad_y", 0.0),
                    heading_rad=action.get("heading"),
                    rotate_rate_rad_s=action.get("rotate_rate", 0.0),
                ),
            )
        elif kind == "mark":
            self.marks[action["name"]] = {
                "time_s": self.world.time_s,
                "positions": {b.id: (b.x, b.y) for b in self.world.bodies.values()},
            }
        elif kind == "assert":
            self._evaluate_assert(action)
        elif kind == "run_maneuver":
            name = action["maneuver"]
            self._run_maneuver(self._make_maneuver(action), name)
        elif kind == "swap_end_effector":
            plan = swap_end_effector(
                action["base"], action["from_effector"], action["to_effector"], self.world
            )
            if (action["base"], action["to_effector"]) not in self.managers:
                self.managers[(action["base"], action["to_effector"])] = MatingManager(
                    self.world, action["base"], action["to_effector"]
                )
            for step in plan:
                self._execute(step)
        else:  # unreachable past validation
            raise SchemaError(f"unknown action kind {kind!r}")

    def _make_maneuver(self, a):
        name = a["maneuver"]
        if name == "goto":
            return controllers.GoTo(
                a["body"],
                a["target"],
                heading=a.get("heading"),
                accept_um=a.get("accept_um", controllers.DEFAULT_ACCEPT_UM),
                timeout_s=a.get("timeout_s", 60.0),
            )
        if name == "mate_insert":
            return controllers.MateInsert(a["base"], a["effector"], timeout_s=a.get("timeout_s", 120.0))
        if name == "detach_pull":
            return controllers.DetachPull(a["base"], a["effector"], timeout_s=a.get("timeout_s", 150.0))
        if name == "release":
            return controllers.Release(
                a["base"],
                duration_s=a.get("duration_s", 2.5),
                timeout_s=a.get("timeout_s", 30.0),
            )
        if name == "rotate":
            return controllers.Rotate(
                a["base"], rate_rad_s=a.get("rate", 1.0), duration_s=a.get("duration_s", 2.0)
            )
        if name == "wait_time":
            return controllers.WaitTime(a["duration_s"])
        if name == "wait_state":
            mgr = self.managers.get((a["base"], a["effector"]))
            if mgr is None:
                raise SchemaError(f"no mating pair {a['base']}/{a['effector']}")
            return controllers.WaitState(mgr, a["state"], timeout_s=a.get("timeout_s", 60.0))
        if name == "follow_waypoints":
            return controllers.WaypointFollower(
                a["body"],
                a["waypoints"],
                accept_um=a.get("accept_um", 5.0),
                timeout_s=a.get("timeout_s", 600.0),
            )
        raise SchemaError(f"unknown maneuver {name!r}")

    # ------------------------------------------------------------------ assertions

    def _evaluate_assert(self, a):
        check = a["check"]
        w = self.world
        if check == "fsm_state":
            mgr = self.managers[(a["base"], a["effector"])]
            ok = mgr.state.value == a["equals"]
            actual = mgr.state.value
        elif check == "reached_state":
            mgr = self.managers[(a["base"], a["effector"])]
            actual = [t[2] for t in mgr.transitions]
            ok = a["state"] in actual or mgr.state.value == a["state"]
        elif check == "locked":
            actual = w.is_locked(a["base"], a["effector"])
            ok = actual == a["equals"]
        elif check == "separation":
            actual = w.separation_um(a["base"], a["effector"])
            ok = _op(actual, a["op"], a["value"], a.get("tol"))
        elif check == "detach_feasible":
            feasible, reason = w.detach_feasible(a["base"], a["effector"])
            actual = (feasible, reason.value)
            ok = feasible == a["equals"] and (
                "reason" not in a or reason.value == a["reason"]
            )
        elif check == "displacement":
            mark = self.marks[a["since_mark"]]
            x0, y0 = mark["positions"][a["id"]]
            b = w.body(a["id"])
            actual = math.hypot(b.x - x0, b.y - y0)
            ok = _op(actual, a["op"], a["value"], a.get("tol"))
        elif check == "position":
            b = w.body(a["id"])
            actual = math.hypot(b.x - a["of"][0], b.y - a["of"][1])
            ok = actual <= a["within_um"]
        elif check == "distance":
            b1, b2 = w.body(a["a"]), w.body(a["b"])
            actual = math.hypot(b1.x - b2.x, b1.y - b2.y)
            ok = _op(actual, a["op"], a["value"], a.get("tol"))
        elif check == "lam":
            actual = w.body(a["id"]).lam
            ok = _op(actual, a["op"], a["value"], a.get("tol"))
        elif check == "water_fraction":
            actual = w.water_fraction
            ok = _op(actual, a["op"], a["value"], a.get("tol"))
        elif check == "gripper_state":
            body = w.body(a["id"])
            actual = body.aperture.state.value if body.aperture else None
            ok = actual == a["equals"]
        elif check == "mate_report":
            report = w.check_mate_geometry(a["base"], a["effector"])
            actual = getattr(report, a["field"])
            if "equals" in a:
                ok = actual == a["equals"]
            else:
                ok = _op(actual, a["op"], a["value"], a.get("tol"))
        else:
            raise SchemaError(f"unknown assertion check {check!r}")
        if not ok:
            raise ScenarioAssertionError(
                f"assertion {check!r} failed at t={w.time_s:.3f}s: "
                f"actual={actual!r} predicate={a!r}",
                time_s=w.time_s,
                predicate=a,
            )

    # ------------------------------------------------------------------ outputs

    def _sample(self):
        t = self.world.time_s
        phi = self.world.water_fraction
        state_of = {}
        for (base_id, eff_id), mgr in self.managers.items():
            state_of.setdefault(base_id, mgr.state.value)
            state_of.setdefault(eff_id, mgr.state.value)
        for b in self.world.bodies.values():
            self._trace_rows.append(
                (t, b.id, b.x, b.y, b.theta, b.lam, phi, state_of.get(b.id, ""))
            )

    def _write_outputs(self):
        if self.out_dir is None:
            return None, None
        self.out_dir.mkdir(parents=True, exist_ok=True)
        stem = re.sub(r"[^A-Za-z0-9_.-]+", "_", self.doc["name"])
        trace_path = self.out_dir / f"{stem}_trace.csv"
        with open(trace_path, "w", encoding="utf-8", newline="") as fh:
            fh.write("time_s,body_id,x_um,y_um,theta_rad,lam,water_fraction,mate_state\n")
            for row in self._trace_rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        transitions_path = self.out_dir / f"{stem}_transitions.csv"
        with open(transitions_path, "w", encoding="utf-8", newline="") as fh:
            fh.write("time_s,base,effector,from,to,guards\n")
            for (base_id, eff_id), mgr in self.managers.items():
                for t, src, dst, guards in mgr.transitions:
                    blob = json.dumps(guards, sort_keys=True, separators=(",", ":"))
                    fh.write(
                        f"{_fmt(t)},{base_id},{eff_id},{src},{dst},\"{blob.replace(chr(34), chr(34)*2)}\"\n"
                    )
        return trace_path, transitions_path


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _op(actual, op, value, tol=None):
    if op == "lt":
        return actual < value
    if op == "le":
        return actual <= value
    if op == "gt":
        return actual > value
    if op == "ge":
        return actual >= value
    if op == "eq":
        return actual == value
    if op == "near":
        return abs(actual - value) <= (tol if tol is not None else 1e-9)
    raise SchemaError(f"unknown comparison op {op!r}")


def run_scenario(path, out_dir, config_doc=None, seed=None, dt_s=None):
    """Load, run, and write outputs; returns a RunResult (exit code 0 or 2)."""
    doc = load_scenario(path)
    runner = ScenarioRunner(doc, config_doc=config_doc, out_dir=out_dir, seed=seed, dt_s=dt_s)
    return runner.run()
