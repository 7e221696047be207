"""The 2-D microchannel world and its fixed-tick update loop.

One world owns all mutable state: bodies, the lumped solvent composition,
field-command latches and the lock constraints joining mated pairs.  A tick
advances, in order: solvent exchange, swelling kinetics, gripper apertures,
magnetic stepping, contact projection, lock enforcement, time.  Everything is
deterministic for a fixed seed and command stream; snapshots are plain value
dicts safe to hand to other threads.

Distances um, forces N, time s.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import bilayer as bilayer_mod
from . import geometry, kinetics
from .bodies import BASE_KINDS, EFFECTOR_KINDS, Body, BodyKind, PIN_DESIGNED_LENGTH, PIN_DESIGNED_WIDTH
from .config import Config
from .errors import InvalidCommandError, KindMismatchError, NotMatedError, StepTooLargeError
from .magnetics import FieldCommand, magnetic_force, magnetic_torque, step_overdamped

CONTACT_RESIDUAL_UM = 1e-9
CONTACT_MAX_ITERATIONS = 50
_RANK = {  # who yields in a contact: higher rank gets pushed
    BodyKind.WALL: 0,
    BodyKind.TYPE1_BASE: 1,
    BodyKind.TYPE2_BASE: 1,
    BodyKind.EFFECTOR_SINGLE: 1,
    BodyKind.EFFECTOR_MULTI: 1,
    BodyKind.EFFECTOR_GRIPPER: 1,
    BodyKind.SPHERE: 2,
}


class DetachReason(enum.Enum):
    FEASIBLE = "Feasible"
    GRIPPER_CLOSED = "GripperClosed"
    PIN_ENGAGED = "PinEngaged"
    SURFACE_TENSION_ADHESION = "SurfaceTensionAdhesion"


@dataclass(frozen=True)
class MateGeometryReport:
    clearance_x_um: float
    clearance_y_um: float
    can_insert: bool
    interference_locked: bool
    lateral_error_um: float
    angular_error_deg: float
    axial_offset_um: float


@dataclass
class _CommandState:
    grad_x: float = 0.0
    grad_y: float = 0.0
    heading: float = 0.0
    rotate_rate: float = 0.0


class World:
    def __init__(self, config=None, water_fraction=0.40, seed=0, enclosure=False, bounds=None):
        self.config = config or Config()
        self.bodies = {}
        self.locks = {}  # (base_id, effector_id) -> (dx, dy, dtheta) effector in base frame
        self.commands = {}
        self.time_s = 0.0
        self.water_fraction = float(water_fraction)
        self.water_fraction_target = float(water_fraction)
        self.enclosure = bool(enclosure)
        self.bounds = tuple(bounds) if bounds is not None else None
        self.seed = int(seed)
        self.rng = np.random.default_rng(self.seed)

    # ------------------------------------------------------------- population

    def add_body(self, body):
        if body.id in self.bodies:
            raise ValueError(f"duplicate body id {body.id!r}")
        self.bodies[body.id] = body
        if body.magnetic is not None:
            self.commands[body.id] = _CommandState(heading=body.theta)
        if body.gripper is not None:
            body.aperture = bilayer_mod.gripper_aperture_kinetic(body.gripper, body.lam)
        return body

    def body(self, body_id):
        try:
            return self.bodies[body_id]
        except KeyError:
            raise InvalidCommandError(f"unknown body id {body_id!r}") from None

    # ------------------------------------------------------------- solvent

    def set_solvent_target(self, phi):
        if not 0.0 <= phi <= 1.0:
            raise ValueError(f"water fraction target {phi} outside [0, 1]")
        self.water_fraction_target = float(phi)

    # ------------------------------------------------------------- commands

    def apply_command(self, base_id, cmd):
        body = self.body(base_id)
        if body.magnetic is None:
            raise InvalidCommandError(f"body {base_id!r} has no magnetic moment")
        state = self.commands[base_id]
        cmd = cmd.clamped(self.config.world.coil_limit_t_per_m)
        state.grad_x = cmd.grad_x_t_per_m
        state.grad_y = cmd.grad_y_t_per_m
        if cmd.heading_rad is not None:
            state.heading = cmd.heading_rad
        state.rotate_rate = cmd.rotate_rate_rad_s

    # ------------------------------------------------------------- tick

    def tick(self, commands=None, dt_s=1e-3):
        """Advance the world by one fixed step (dt at most config dt_max)."""
        cfg = self.config
        if not 0.0 < dt_s <= cfg.world.dt_max_s:
            if dt_s <= 0.0:
                raise ValueError("dt must be positive")
            raise StepTooLargeError(f"dt={dt_s} exceeds dt_max={cfg.world.dt_max_s}")
        if commands:
            for base_id, cmd in commands.items():
                self.apply_command(base_id, cmd)

        # (1) lumped solvent exchange, exact first-order step
        phi = self.water_fraction_target + (
            self.water_fraction - self.water_fraction_target
        ) * math.exp(-dt_s / cfg.world.exchange_tau_s)
        self.water_fraction = phi

        # (2) swelling kinetics toward the calibrated equilibrium at current phi
        for body in self.bodies.values():
            if body.swell is None:
                continue
            target = cfg.calibration_for_lp(body.lp_mw).lambda_eq(phi)
            body.swell = kinetics.relax(
                body.swell, target, dt_s, cfg.kinetics, laser_power_mw=body.lp_mw
            )
            body.invalidate_shape()

        # (3) gripper apertures follow the jaws' kinetic swelling state
        for body in self.bodies.values():
            if body.gripper is not None:
                body.aperture = bilayer_mod.gripper_aperture_kinetic(body.gripper, body.lam)

        # (4) magnetic forces and overdamped stepping, lock groups move rigidly
        for base_id in self.commands:
            self._step_base(base_id, dt_s)

        # (5) contact projection
        self.resolve_contacts()

        # (6) lock constraints re-enforced exactly
        self._enforce_locks()

        # (7)
        self.time_s += dt_s
        return self

    def _step_base(self, base_id, dt_s):
        cfg = self.config
        body = self.bodies[base_id]
        state = self.commands[base_id]
        state.heading += state.rotate_rate * dt_s
        cmd = FieldCommand(grad_x_t_per_m=state.grad_x, grad_y_t_per_m=state.grad_y)
        misalign = state.heading - body.theta
        force = magnetic_force(body.magnetic, cmd, misalignment_rad=misalign)
        torque = magnetic_torque(body.magnetic, state.heading, body.theta, cfg.world.b_align_t)

        multiplier = 1.0
        min_force = 0.0
        if body.kind is BodyKind.TYPE1_BASE and self.water_fraction >= cfg.world.sticky_phi_threshold:
            multiplier = cfg.drag.wall_amplification
            min_force = cfg.world.stick_force_n

        old = body.pose
        new = step_overdamped(
            old,
            force,
            torque,
            cfg.drag,
            dt_s,
            dt_max_s=cfg.world.dt_max_s,
            drag_multiplier=multiplier,
            min_force_n=min_force,
        )
        self._move_group(body, old, new)

    def _move_group(self, body, old_pose, new_pose):
        """Apply the rigid transform old->new to the body and its lock partners."""
        body.set_pose(*new_pose)
        partners = self._lock_partners(body.id)
        if not partners:
            return
        ox, oy, ot = old_pose
        nx, ny, nt = new_pose
        dth = nt - ot
        c, s = math.cos(dth), math.sin(dth)
        for pid in partners:
            p = self.bodies[pid]
            rx, ry = p.x - ox, p.y - oy
            p.set_pose(nx + rx * c - ry * s, ny + rx * s + ry * c, p.theta + dth)

    def _lock_partners(self, body_id):
        out = []
        for (b, e) in self.locks:
            if b == body_id:
                out.append(e)
            elif e == body_id:
                out.append(b)
        return out

    # ------------------------------------------------------------- locking

    def lock_pair(self, base_id, effector_id):
        base = self.body(base_id)
        eff = self.body(effector_id)
        c, s = math.cos(-base.theta), math.sin(-base.theta)
        dx, dy = eff.x - base.x, eff.y - base.y
        rel = (dx * c - dy * s, dx * s + dy * c, eff.theta - base.theta)
        self.locks[(base_id, effector_id)] = rel

    def unlock_pair(self, base_id, effector_id):
        self.locks.pop((base_id, effector_id), None)

    def is_locked(self, base_id, effector_id):
        return (base_id, effector_id) in self.locks

    def _enforce_locks(self):
        for (base_id, eff_id), (rx, ry, rt) in self.locks.items():
            base = self.bodies[base_id]
            eff = self.bodies[eff_id]
            c, s = math.cos(base.theta), math.sin(base.theta)
            eff.set_pose(base.x + rx * c - ry * s, base.y + rx * s + ry * c, base.theta + rt)

    def _group_root(self, body_id):
        for (b, e) in self.locks:
            if body_id == e:
                return b
        return body_id

    # ------------------------------------------------------------- contacts

    def resolve_contacts(self):
        """Minimal-translation projection until no overlap remains.

        Gauss-Seidel sweeps: every overlapping piece pair found in a sweep is
        projected out immediately, repeating until a sweep finds nothing.
        Walls never move; spheres yield to robots; equal ranks split the
        correction.  Locked pairs move as one unit.
        """
        ids = sorted(self.bodies)
        candidates = []
        for i, aid in enumerate(ids):
            a = self.bodies[aid]
            box_a = a.aabb()
            for bid in ids[i + 1 :]:
                b = self.bodies[bid]
                if not a.movable and not b.movable:
                    continue
                if self._group_root(aid) == self._group_root(bid):
                    continue
                if geometry.aabb_overlap(box_a, b.aabb(), margin=5.0):
                    candidates.append((a, b))
        if not candidates:
            return
        for _ in range(CONTACT_MAX_ITERATIONS):
            moved = False
            for a, b in candidates:
                if not geometry.aabb_overlap(a.aabb(), b.aabb()):
                    continue
                if self._resolve_body_pair(a, b):
                    moved = True
            if not moved:
                break

    def _resolve_body_pair(self, a, b):
        """Clear every piece overlap between two bodies with one joint push.

        Contact normals are summed and the push is scaled so the deepest
        contact clears along the combined direction; a wedge of contacts (a
        sphere seated in a vee pocket) resolves in one application instead of
        ping-ponging between faces.
        """
        contacts = []
        cx, cy = b.x - a.x, b.y - a.y
        for pa, box_a in zip(a.pieces(), a.piece_aabbs()):
            for pb, box_b in zip(b.pieces(), b.piece_aabbs()):
                if not geometry.aabb_overlap(box_a, box_b):
                    continue
                mtv = geometry.piece_mtv(pa, pb)
                if mtv is not None and mtv[0] > CONTACT_RESIDUAL_UM:
                    d, nx, ny = mtv
                    # orient by body centers: piece centroids disagree when a
                    # protruding piece overlaps deeply, and mixed directions
                    # would cancel in the joint push
                    if nx * cx + ny * cy < -1e-12:
                        nx, ny = -nx, -ny
                    contacts.append((d, nx, ny))
        if not contacts:
            return False
        sx = sum(d * nx for d, nx, ny in contacts)
        sy = sum(d * ny for d, nx, ny in contacts)
        norm = math.hypot(sx, sy)
        if norm < 1e-15:
            d, ux, uy = contacts[0]
            scale = d
        else:
            ux, uy = sx / norm, sy / norm
            # cap the amplification so near-opposing normals cannot explode;
            # genuinely squeezed stacks settle over the outer sweeps instead
            scale = max(d / max(nx * ux + ny * uy, 0.2) for d, nx, ny in contacts)
        self._resolve_pair(a, b, scale, ux, uy)
        return True

    def _resolve_pair(self, a, b, depth, nx, ny):
        rank_a = _RANK[a.kind] if a.movable else 0
        rank_b = _RANK[b.kind] if b.movable else 0
        if rank_b > rank_a:
            self._translate_group(b, depth * nx, depth * ny)
        elif rank_a > rank_b:
            self._translate_group(a, -depth * nx, -depth * ny)
        else:
            self._translate_group(b, 0.5 * depth * nx, 0.5 * depth * ny)
            self._translate_group(a, -0.5 * depth * nx, -0.5 * depth * ny)

    def _translate_group(self, body, dx, dy):
        if not body.movable:
            return
        members = [body.id] + self._lock_partners(body.id)
        for mid in members:
            m = self.bodies[mid]
            m.set_pose(m.x + dx, m.y + dy, m.theta)

    def max_overlap_um(self):
        """Deepest residual interpenetration among non-wall pairs (diagnostic)."""
        worst = 0.0
        ids = sorted(self.bodies)
        for i, aid in enumerate(ids):
            a = self.bodies[aid]
            for bid in ids[i + 1 :]:
                b = self.bodies[bid]
                if not a.movable and not b.movable:
                    continue
                if self._group_root(aid) == self._group_root(bid):
                    continue
                if not geometry.aabb_overlap(a.aabb(), b.aabb()):
                    continue
                for pa in a.pieces():
                    for pb in b.pieces():
                        mtv = geometry.piece_mtv(pa, pb)
                        if mtv is not None:
                            worst = max(worst, mtv[0])
        return worst

    # ------------------------------------------------------------- mating geometry

    def check_mate_geometry(self, base, effector, tol_um=None):
        """Insertion and interference report for a male/female pair."""
        if isinstance(base, str):
            base = self.body(base)
        if isinstance(effector, str):
            effector = self.body(effector)
        if base.kind not in BASE_KINDS or effector.kind not in EFFECTOR_KINDS:
            raise KindMismatchError(f"{base.kind.value} / {effector.kind.value} is not a male/female pair")
        cfg = self.config.mate
        tol = cfg.lateral_tol_um if tol_um is None else tol_um
        male_w = base.male_width_um()

        bx, by, bt = base.port()
        fx, fy, ft = effector.port()
        c, s = math.cos(-ft), math.sin(-ft)
        dx_w, dy_w = bx - fx, by - fy
        axial = dx_w * c - dy_w * s
        lateral = dx_w * s + dy_w * c
        dtheta = math.degrees(_wrap_angle(bt - ft))

        aligned = abs(lateral) <= tol and abs(dtheta) <= cfg.angular_tol_deg
        inserted = aligned and cfg.axial_window_um[0] <= axial <= cfg.axial_window_um[1]

        if effector.kind is BodyKind.EFFECTOR_GRIPPER:
            report = effector.aperture or bilayer_mod.gripper_aperture_kinetic(
                effector.gripper, effector.lam
            )
            slot_eff = report.aperture_um
            can_insert = (
                report.state is bilayer_mod.GripperState.OPEN
                and male_w <= slot_eff - cfg.insert_clearance_um
                and aligned
            )
            locked = report.state is bilayer_mod.GripperState.CLOSED and inserted
        else:
            slot_eff = cfg.slot_width_um
            can_insert = male_w <= slot_eff - cfg.insert_clearance_um and aligned
            locked = male_w >= slot_eff - cfg.lock_interference_um and inserted

        lam = base.lam
        return MateGeometryReport(
            clearance_x_um=slot_eff - male_w,
            clearance_y_um=cfg.slot_depth_um - PIN_DESIGNED_LENGTH * lam,
            can_insert=can_insert,
            interference_locked=locked,
            lateral_error_um=lateral,
            angular_error_deg=dtheta,
            axial_offset_um=axial,
        )

    def separation_um(self, base_id, effector_id):
        bx, by, _ = self.bodies[base_id].port()
        fx, fy, _ = self.bodies[effector_id].port()
        return math.hypot(bx - fx, by - fy)

    # ------------------------------------------------------------- detachment

    def detach_feasible(self, base_id, effector_id):
        """Whether the mated pair can be separated right now, and why not."""
        if (base_id, effector_id) not in self.locks:
            raise NotMatedError(f"{base_id}/{effector_id} is not a mated pair")
        base = self.bodies[base_id]
        eff = self.bodies[effector_id]
        if eff.kind is BodyKind.EFFECTOR_GRIPPER:
            report = eff.aperture or bilayer_mod.gripper_aperture_kinetic(eff.gripper, eff.lam)
            if report.state is bilayer_mod.GripperState.OPEN:
                return True, DetachReason.FEASIBLE
            return False, DetachReason.GRIPPER_CLOSED
        # shrunken-pin detach needs the pin clear of interference plus external
        # help against surface tension: walls pinning the effector and a top
        # enclosure against out-of-plane escape
        if base.lam > self.config.mate.detach_lambda:
            return False, DetachReason.PIN_ENGAGED
        if self.wall_constrained(eff) and self.enclosure:
            return True, DetachReason.FEASIBLE
        return False, DetachReason.SURFACE_TENSION_ADHESION

    def wall_constrained(self, body):
        """True when walls flank the body on two opposing sides within tolerance."""
        tol = self.config.mate.wall_proximity_um
        directions = []
        for other in self.bodies.values():
            if other.kind is not BodyKind.WALL:
                continue
            if not geometry.aabb_overlap(body.aabb(), other.aabb(), margin=tol):
                continue
            gap = min(
                geometry.separation_distance(pa, pb)
                for pa in body.pieces()
                for pb in other.pieces()
            )
            if gap <= tol:
                dx, dy = other.x - body.x, other.y - body.y
                norm = math.hypot(dx, dy)
                if norm > 1e-9:
                    directions.append((dx / norm, dy / norm))
        for i in range(len(directions)):
            for j in range(i + 1, len(directions)):
                dot = directions[i][0] * directions[j][0] + directions[i][1] * directions[j][1]
                if dot < -0.5:
                    return True
        return False

    # ------------------------------------------------------------- queries

    def bodies_in_contact(self, body_id, kind=None, tol_um=0.5):
        """Ids of bodies within tol of the given body or its locked assembly."""
        group_ids = sorted({body_id, *self._lock_partners(body_id)})
        members = [self.body(i) for i in group_ids]
        out = []
        for other in self.bodies.values():
            if other.id in group_ids:
                continue
            if kind is not None and other.kind is not kind:
                continue
            near = [
                m for m in members
                if geometry.aabb_overlap(m.aabb(), other.aabb(), margin=tol_um)
            ]
            if not near:
                continue
            gap = min(
                geometry.separation_distance(pa, pb)
                for m in near
                for pa in m.pieces()
                for pb in other.pieces()
            )
            if gap <= tol_um:
                out.append(other.id)
        return out

    def snapshot(self):
        """Immutable value snapshot for telemetry, traces and assertions."""
        bodies = []
        for b in self.bodies.values():
            entry = {
                "id": b.id,
                "kind": b.kind.value,
                "x": b.x,
                "y": b.y,
                "theta": b.theta,
                "lam": b.lam,
            }
            if b.aperture is not None:
                entry["aperture_um"] = b.aperture.aperture_um
                entry["gripper_state"] = b.aperture.state.value
            bodies.append(entry)
        return {
            "time_s": self.time_s,
            "water_fraction": self.water_fraction,
            "water_fraction_target": self.water_fraction_target,
            "bodies": bodies,
        }


def _wrap_angle(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi
