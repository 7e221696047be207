"""Bundled scenarios, schema validation, exit codes, determinism."""

import copy
import json
import time
from importlib.resources import files
from pathlib import Path

import pytest

from microforge.errors import SchemaError
from microforge.scenario import ScenarioRunner, load_scenario, run_scenario, validate_scenario

SCENARIO_DIR = files("microforge").joinpath("scenarios")
BUNDLED = [
    "mate_type1",
    "mate_type2",
    "detach_type2",
    "detach_type1_walls",
    "detach_type1_free",
    "push_single_sphere",
    "push_multi_sphere",
    "swap_type2",
    "teleop_default",
]


def scenario_path(name):
    return str(SCENARIO_DIR.joinpath(f"{name}.scn"))


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_scenario_passes_under_budget(name, tmp_path):
    t0 = time.monotonic()
    result = run_scenario(scenario_path(name), out_dir=tmp_path)
    wall = time.monotonic() - t0
    assert result.exit_code == 0, f"{name}: {result.failure}"
    assert wall < 10.0, f"{name} took {wall:.1f}s wall-clock"
    assert result.trace_path.exists()
    assert result.transitions_path.exists()


def test_mate_scenarios_lock_within_60_simulated_seconds(tmp_path):
    for name in ("mate_type1", "mate_type2"):
        result = run_scenario(scenario_path(name), out_dir=tmp_path)
        assert result.exit_code == 0
        locked_at = [t for t, _, dst, _ in next(iter(result.managers.values())).transitions if dst == "Locked"]
        assert locked_at and locked_at[0] <= 60.0


def test_determinism_byte_identical_traces(tmp_path):
    a = run_scenario(scenario_path("mate_type1"), out_dir=tmp_path / "a")
    b = run_scenario(scenario_path("mate_type1"), out_dir=tmp_path / "b")
    assert a.trace_path.read_bytes() == b.trace_path.read_bytes()
    assert a.transitions_path.read_bytes() == b.transitions_path.read_bytes()


def test_empty_script_zero_duration(tmp_path):
    doc = {
        "schema_version": 1,
        "name": "empty",
        "duration_s": 0,
        "world": {"water_fraction": 0.4, "bodies": [{"id": "s", "kind": "Sphere", "x": 0, "y": 0}]},
        "script": [],
    }
    result = ScenarioRunner(doc, out_dir=tmp_path).run()
    assert result.exit_code == 0
    assert result.world.time_s == 0.0
    rows = result.trace_path.read_text().strip().splitlines()
    assert rows[0].startswith("time_s,")
    assert all(line.startswith("0.0,") for line in rows[1:])


def test_schema_error_cases():
    base = {
        "schema_version": 1,
        "name": "x",
        "duration_s": 1,
        "world": {"water_fraction": 0.4, "bodies": [{"id": "a", "kind": "Sphere"}]},
    }
    with pytest.raises(SchemaError):
        validate_scenario({})
    bad = copy.deepcopy(base)
    bad["schema_version"] = 99
    with pytest.raises(SchemaError):
        validate_scenario(bad)
    bad = copy.deepcopy(base)
    bad["world"]["bodies"].append({"id": "a", "kind": "Sphere"})
    with pytest.raises(SchemaError, match="duplicate"):
        validate_scenario(bad)
    bad = copy.deepcopy(base)
    bad["script"] = [{"t": 2, "action": {"kind": "mark", "name": "m"}},
                     {"t": 1, "action": {"kind": "mark", "name": "n"}}]
    with pytest.raises(SchemaError, match="non-decreasing"):
        validate_scenario(bad)
    bad = copy.deepcopy(base)
    bad["script"] = [{"t": 0, "action": {"kind": "warp_drive"}}]
    with pytest.raises(SchemaError):
        validate_scenario(bad)
    bad = copy.deepcopy(base)
    bad["script"] = [{"t": 0, "action": {"kind": "field_command", "body": "ghost"}}]
    with pytest.raises(SchemaError, match="ghost"):
        validate_scenario(bad)


def test_load_scenario_missing_file(tmp_path):
    with pytest.raises(SchemaError):
        load_scenario(tmp_path / "nope.scn")
    bad = tmp_path / "bad.scn"
    bad.write_text("{ not json")
    with pytest.raises(SchemaError):
        load_scenario(bad)


def test_assertion_failure_exit_code_2(tmp_path):
    doc = json.loads(Path(scenario_path("teleop_default")).read_text())
    doc["script"] = [
        {"t": 0, "action": {"kind": "assert", "check": "water_fraction", "op": "near", "value": 0.9, "tol": 0.01}}
    ]
    result = ScenarioRunner(doc, out_dir=tmp_path).run()
    assert result.exit_code == 2
    assert result.failure is not None
    assert result.failure.predicate["check"] == "water_fraction"


def test_marks_and_displacement_predicates(tmp_path):
    doc = {
        "schema_version": 1,
        "name": "marks",
        "duration_s": 0,
        "world": {
            "water_fraction": 0.4,
            "bodies": [{"id": "b", "kind": "Type2Base", "x": 100, "y": 100}],
        },
        "script": [
            {"t": 0, "action": {"kind": "mark", "name": "m0"}},
            {"t": 0, "action": {"kind": "field_command", "body": "b", "grad_x": 2.0}},
            {"t": 0, "action": {"kind": "run_maneuver", "maneuver": "wait_time", "duration_s": 1.0}},
            {"t": 0, "action": {"kind": "assert", "check": "displacement", "id": "b", "since_mark": "m0", "op": "ge", "value": 90}},
        ],
    }
    result = ScenarioRunner(doc, out_dir=None).run()
    assert result.exit_code == 0, result.failure


def test_seed_override_changes_nothing_physical_but_is_recorded(tmp_path):
    # seeded rng only feeds sampling helpers; trajectories stay deterministic
    r1 = run_scenario(scenario_path("push_single_sphere"), out_dir=tmp_path / "s1", seed=99)
    r2 = run_scenario(scenario_path("push_single_sphere"), out_dir=tmp_path / "s2", seed=99)
    assert r1.world.seed == 99
    assert r1.trace_path.read_bytes() == r2.trace_path.read_bytes()


def test_detach_free_scenario_reports_adhesion(tmp_path):
    result = run_scenario(scenario_path("detach_type1_free"), out_dir=tmp_path)
    assert result.exit_code == 0
    mgr = next(iter(result.managers.values()))
    assert mgr.state.value == "DetachPending"
    feasible, reason = result.world.detach_feasible("base1", "eff1")
    assert not feasible and reason.value == "SurfaceTensionAdhesion"


def test_swap_reaches_new_lock(tmp_path):
    result = run_scenario(scenario_path("swap_type2"), out_dir=tmp_path)
    assert result.exit_code == 0
    assert result.world.is_locked("base2", "gripB")
    assert not result.world.is_locked("base2", "gripA")
