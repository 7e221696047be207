"""Mating and detachment protocol for base/end-effector pairs.

One linear transition graph serves both connection styles; only the guard
computations differ (pin interference for the shrinking-pin design, jaw state
for the gripper design):

    Disengaged -> Approaching -> MateReady -> LockPending -> Locked
        -> DetachPending -> Detached (alias of Disengaged)

The machine is a pure reducer over world snapshots: it observes solvent
targets and geometry, never commands hardware.  A MatingManager wires the
state changes to the world's rigid-lock constraints and keeps the transition
log.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .bodies import BodyKind, mated_base_pose
from .errors import IllegalTransitionError, MissingConstraintWallsError
from .world import DetachReason


class MateState(enum.Enum):
    DISENGAGED = "Disengaged"
    APPROACHING = "Approaching"
    MATE_READY = "MateReady"
    LOCK_PENDING = "LockPending"
    LOCKED = "Locked"
    DETACH_PENDING = "DetachPending"
    DETACHED = "Detached"


_SUCCESSOR = {
    MateState.DISENGAGED: MateState.APPROACHING,
    MateState.APPROACHING: MateState.MATE_READY,
    MateState.MATE_READY: MateState.LOCK_PENDING,
    MateState.LOCK_PENDING: MateState.LOCKED,
    MateState.LOCKED: MateState.DETACH_PENDING,
    MateState.DETACH_PENDING: MateState.DETACHED,
    MateState.DETACHED: MateState.APPROACHING,  # Detached re-enters as Disengaged
}


@dataclass(frozen=True)
class MatingState:
    state: MateState = MateState.DISENGAGED
    type_tag: str = "Type1"
    timestamps: tuple = ()  # ((state_name, time_s), ...) entry times

    def stamped(self, state, time_s):
        return replace(
            self, state=state, timestamps=self.timestamps + ((state.value, time_s),)
        )


def pair_guards(world, base_id, effector_id):
    """All guard observations for one pair, as plain values for logs and UI."""
    base = world.body(base_id)
    eff = world.body(effector_id)
    report = world.check_mate_geometry(base, eff)
    cfg = world.config.mate
    inserted = (
        abs(report.lateral_error_um) <= cfg.lateral_tol_um
        and abs(report.angular_error_deg) <= cfg.angular_tol_deg
        and cfg.axial_window_um[0] <= report.axial_offset_um <= cfg.axial_window_um[1]
    )
    locked = world.is_locked(base_id, effector_id)
    if locked:
        feasible, reason = world.detach_feasible(base_id, effector_id)
    else:
        feasible, reason = False, None
    # the wall-proximity scan is expensive; reuse the feasibility outcome
    # instead of re-scanning (None = not evaluated on this path)
    wall_constrained = None
    if reason is DetachReason.FEASIBLE and eff.kind is not BodyKind.EFFECTOR_GRIPPER:
        wall_constrained = True
    elif reason is DetachReason.SURFACE_TENSION_ADHESION and world.enclosure:
        wall_constrained = False  # enclosure present, so the walls were the gap
    target = world.water_fraction_target
    return {
        "can_insert": report.can_insert,
        "interference_locked": report.interference_locked,
        "inserted": inserted,
        "separation_um": world.separation_um(base_id, effector_id),
        "lock_solvent_target": abs(target - cfg.lock_phi_target) <= cfg.phi_target_tol,
        "detach_solvent_target": target >= cfg.detach_phi_target - cfg.phi_target_tol,
        "world_locked": locked,
        "detach_feasible": feasible,
        "detach_reason": reason.value if reason is not None else None,
        "wall_constrained": wall_constrained,
        "gripper_state": (eff.aperture.state.value if eff.aperture is not None else None),
    }


def _guard_for(state, guards, approach_radius_um, detach_separation_um):
    nxt = _SUCCESSOR[state]
    if nxt is MateState.APPROACHING:
        return guards["separation_um"] <= approach_radius_um
    if nxt is MateState.MATE_READY:
        return guards["can_insert"] and guards["inserted"]
    if nxt is MateState.LOCK_PENDING:
        return guards["lock_solvent_target"]
    if nxt is MateState.LOCKED:
        return guards["interference_locked"]
    if nxt is MateState.DETACH_PENDING:
        # detach intent, or the physical interference has already dissolved
        return guards["detach_solvent_target"] or not guards["interference_locked"]
    if nxt is MateState.DETACHED:
        # once the manager has released the world constraint, feasibility was
        # already established; only the physical separation remains
        released = guards["detach_feasible"] or not guards["world_locked"]
        return released and guards["separation_um"] > detach_separation_um
    return False


def advance(fsm, world, pair):
    """One guarded transition step; returns the (possibly unchanged) state."""
    base_id, effector_id = pair
    cfg = world.config.mate
    guards = pair_guards(world, base_id, effector_id)
    if _guard_for(fsm.state, guards, cfg.approach_radius_um, cfg.detach_separation_um):
        return fsm.stamped(_SUCCESSOR[fsm.state], world.time_s), guards
    return fsm, guards


def try_transition(fsm, to_state, world, pair):
    """Commanded transition; raises unless it is the legal guarded successor."""
    if _SUCCESSOR[fsm.state] is not to_state:
        raise IllegalTransitionError(f"{fsm.state.value} -> {to_state.value} is not an edge")
    nxt, _ = advance(fsm, world, pair)
    if nxt.state is not to_state:
        raise IllegalTransitionError(
            f"guard for {fsm.state.value} -> {to_state.value} not satisfied"
        )
    return nxt


class MatingManager:
    """Drives one pair's FSM each tick and mirrors it into world constraints.

    Entering Locked installs the rigid-lock constraint; once DetachPending
    becomes feasible the constraint is released so a pulling motion can grow
    the separation.  All transitions are logged (time, from, to, guards).
    """

    def __init__(self, world, base_id, effector_id):
        self.world = world
        self.base_id = base_id
        self.effector_id = effector_id
        eff = world.body(effector_id)
        tag = "Type2" if eff.kind is BodyKind.EFFECTOR_GRIPPER else "Type1"
        self.fsm = MatingState(type_tag=tag)
        self.transitions = []

    @property
    def pair(self):
        return (self.base_id, self.effector_id)

    @property
    def state(self):
        return self.fsm.state

    def step(self):
        prev = self.fsm.state
        self.fsm, guards = advance(self.fsm, self.world, self.pair)
        if self.fsm.state is not prev:
            self.transitions.append(
                (self.world.time_s, prev.value, self.fsm.state.value, guards)
            )
            if self.fsm.state is MateState.LOCKED:
                self.world.lock_pair(self.base_id, self.effector_id)
        if self.fsm.state is MateState.DETACH_PENDING and self.world.is_locked(*self.pair):
            feasible, _ = self.world.detach_feasible(*self.pair)
            if feasible:
                self.world.unlock_pair(*self.pair)
        return self.fsm


def swap_end_effector(base_id, from_effector, to_effector, world):
    """Scripted command plan that re-mates a base onto a different effector.

    Returns a list of scenario-action dicts (the shared script schema); the
    plan is empty when the base is already locked to the target.  Raises
    MissingConstraintWallsError when a shrinking-pin detach has no wall gap or
    enclosure to work in.
    """
    if from_effector == to_effector and world.is_locked(base_id, to_effector):
        return []
    base = world.body(base_id)
    from_eff = world.body(from_effector)
    to_eff = world.body(to_effector)
    cfg = world.config.mate
    plan = []

    type1 = from_eff.kind is not BodyKind.EFFECTOR_GRIPPER
    if type1:
        gap_pose = _wall_gap_pose(world)
        if gap_pose is None or not world.enclosure:
            raise MissingConstraintWallsError(
                "shrinking-pin detach needs flanking walls and a top enclosure"
            )
        gx, gy, gtheta = gap_pose
        # drive the locked assembly until the effector sits inside the gap
        bx = gx - 100.0 * math.cos(gtheta)
        by = gy - 100.0 * math.sin(gtheta)
        plan.append(_goto(base_id, bx, by, heading=gtheta))
    plan.append({"kind": "set_solvent_target", "phi": cfg.detach_phi_target})
    plan.append(
        {
            "kind": "run_maneuver",
            "maneuver": "detach_pull",
            "base": base_id,
            "effector": from_effector,
            "timeout_s": 150.0,
        }
    )
    # dogleg into the target's approach lane (plans are scripted primitives,
    # not a path planner; bundled layouts keep the lanes axis-aligned), then
    # stage in front of the slot and slide in along its axis
    fx, fy, ft = to_eff.port()
    ux, uy = math.cos(ft), math.sin(ft)
    sx, sy = fx - 95.0 * ux, fy - 95.0 * uy
    plan.append(_goto(base_id, base.x, sy))
    plan.append(
        {
            "kind": "run_maneuver",
            "maneuver": "mate_insert",
            "base": base_id,
            "effector": to_effector,
            "timeout_s": 120.0,
        }
    )
    plan.append({"kind": "set_solvent_target", "phi": cfg.lock_phi_target})
    plan.append(
        {
            "kind": "run_maneuver",
            "maneuver": "wait_state",
            "base": base_id,
            "effector": to_effector,
            "state": MateState.LOCKED.value,
            "timeout_s": 60.0,
        }
    )
    return plan


def _goto(body_id, x, y, heading=None):
    step = {"kind": "run_maneuver", "maneuver": "goto", "body": body_id, "target": [x, y]}
    if heading is not None:
        step["heading"] = heading
    return step


def _wall_gap_pose(world):
    """Center pose of the narrowest flanking-wall gap, or None."""
    walls = [b for b in world.bodies.values() if b.kind is BodyKind.WALL]
    best = None
    for i in range(len(walls)):
        for j in range(i + 1, len(walls)):
            a, b = walls[i], walls[j]
            dx, dy = b.x - a.x, b.y - a.y
            gap = math.hypot(dx, dy)
            if gap < 1.0:
                continue
            # usable gaps are slightly wider than the robot body
            clear = gap - _wall_half_extent(a, dx, dy) - _wall_half_extent(b, dx, dy)
            if 100.0 <= clear <= 200.0:
                axis = math.atan2(dy, dx) + math.pi / 2.0
                cand = ((a.x + b.x) / 2.0, (a.y + b.y) / 2.0, axis)
                if best is None or clear < best[0]:
                    best = (clear, cand)
    return best[1] if best is not None else None


def _wall_half_extent(wall, dx, dy):
    norm = math.hypot(dx, dy)
    ux, uy = dx / norm, dy / norm
    return abs(ux) * wall.half_w + abs(uy) * wall.half_h
