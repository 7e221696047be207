"""Scripted motion primitives: go-to, mate insertion, detach pull, release,
and the waypoint follower used for letter trajectories.

Each maneuver produces field commands per tick and reports completion; the
scenario runner (or plan executor) owns the tick loop.  Steering is a
proportional gradient toward the target, decomposed per axis and saturated at
the coil limit, mirroring manual joystick operation.
"""

from __future__ import annotations

import math

from .bodies import BodyKind
from .errors import NoContactError, UnreachableWaypointError
from .magnetics import FieldCommand

DEFAULT_GAIN_T_PER_M_PER_UM = 0.01
DEFAULT_ACCEPT_UM = 2.0
STALL_WINDOW_S = 8.0
STALL_PROGRESS_UM = 0.1


def _wrap(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


class Maneuver:
    """Base class; subclasses fill commands() and done()."""

    timeout_s = 60.0

    def start(self, world):
        pass

    def commands(self, world):
        return {}

    def done(self, world):
        raise NotImplementedError


class GoTo(Maneuver):
    def __init__(self, body_id, target_um, heading=None, accept_um=DEFAULT_ACCEPT_UM,
                 gain=DEFAULT_GAIN_T_PER_M_PER_UM, timeout_s=60.0, stall_check=True):
        self.body_id = body_id
        self.target = (float(target_um[0]), float(target_um[1]))
        self.heading = heading
        self.accept_um = accept_um
        self.gain = gain
        self.timeout_s = timeout_s
        self.stall_check = stall_check
        self._best = math.inf
        self._best_t = 0.0

    def _error(self, world):
        b = world.body(self.body_id)
        return (self.target[0] - b.x, self.target[1] - b.y)

    def start(self, world):
        self._best = math.hypot(*self._error(world))
        self._best_t = world.time_s

    def commands(self, world):
        ex, ey = self._error(world)
        cmd = FieldCommand(
            grad_x_t_per_m=self.gain * ex,
            grad_y_t_per_m=self.gain * ey,
            heading_rad=self.heading,
        )
        return {self.body_id: cmd}

    def done(self, world):
        ex, ey = self._error(world)
        dist = math.hypot(ex, ey)
        if dist < self._best - STALL_PROGRESS_UM:
            self._best = dist
            self._best_t = world.time_s
        elif self.stall_check and world.time_s - self._best_t > STALL_WINDOW_S:
            raise UnreachableWaypointError(
                f"{self.body_id} stalled {dist:.1f} um from target {self.target}"
            )
        if dist > self.accept_um:
            return False
        if self.heading is None:
            return True
        b = world.body(self.body_id)
        return abs(_wrap(b.theta - self.heading)) <= math.radians(1.0)


class MateInsert(Maneuver):
    """Two-phase approach: stage in front of the slot mouth, then slide in
    along the effector axis until the geometry reports full insertion."""

    STAGING_UM = 45.0
    SEAT_UM = 1.0
    # coarser than GoTo: stick-slip in water stalls ~4 um short of the target
    STAGING_ACCEPT_UM = 5.0

    def __init__(self, base_id, effector_id, timeout_s=120.0, gain=DEFAULT_GAIN_T_PER_M_PER_UM):
        self.base_id = base_id
        self.effector_id = effector_id
        self.timeout_s = timeout_s
        self.gain = gain
        self._phase = 0

    def _base_target(self, world, standoff_um):
        eff = world.body(self.effector_id)
        fx, fy, ft = eff.port()
        ux, uy = math.cos(ft), math.sin(ft)
        # base center sits 50 um behind its own port
        px, py = fx - standoff_um * ux, fy - standoff_um * uy
        return (px - 50.0 * ux, py - 50.0 * uy, ft)

    def commands(self, world):
        standoff = self.STAGING_UM if self._phase == 0 else self.SEAT_UM
        tx, ty, heading = self._base_target(world, standoff)
        b = world.body(self.base_id)
        return {
            self.base_id: FieldCommand(
                grad_x_t_per_m=self.gain * (tx - b.x),
                grad_y_t_per_m=self.gain * (ty - b.y),
                heading_rad=heading,
            )
        }

    def done(self, world):
        b = world.body(self.base_id)
        standoff = self.STAGING_UM if self._phase == 0 else self.SEAT_UM
        tx, ty, heading = self._base_target(world, standoff)
        dist = math.hypot(tx - b.x, ty - b.y)
        aligned = abs(_wrap(b.theta - heading)) <= math.radians(1.0)
        if self._phase == 0:
            if dist <= self.STAGING_ACCEPT_UM and aligned:
                self._phase = 1
            return False
        report = world.check_mate_geometry(self.base_id, self.effector_id)
        cfg = world.config.mate
        return (
            abs(report.lateral_error_um) <= cfg.lateral_tol_um
            and abs(report.angular_error_deg) <= cfg.angular_tol_deg
            and cfg.axial_window_um[0] <= report.axial_offset_um <= cfg.axial_window_um[1]
        )


class DetachPull(Maneuver):
    """Back the base out of its effector once the lock constraint releases.

    While the pair is still physically locked the maneuver idles (the mating
    manager drops the constraint when detach becomes feasible); afterwards a
    straight backward pull grows the separation past the detach threshold.
    """

    def __init__(self, base_id, effector_id, timeout_s=150.0, grad_t_per_m=0.8):
        self.base_id = base_id
        self.effector_id = effector_id
        self.timeout_s = timeout_s
        self.grad = grad_t_per_m

    def commands(self, world):
        if world.is_locked(self.base_id, self.effector_id):
            return {self.base_id: FieldCommand()}
        eff = world.body(self.effector_id)
        ux, uy = math.cos(eff.theta), math.sin(eff.theta)
        return {
            self.base_id: FieldCommand(
                grad_x_t_per_m=-self.grad * ux,
                grad_y_t_per_m=-self.grad * uy,
            )
        }

    def done(self, world):
        if world.is_locked(self.base_id, self.effector_id):
            return False
        margin = world.config.mate.detach_separation_um + 5.0
        return world.separation_um(self.base_id, self.effector_id) > margin


class Release(Maneuver):
    """Simultaneous backward-and-rotate motion that sheds pushed spheres.

    Requires at least one sphere in pushing contact at start (NoContactError
    otherwise).  The canned sequence backs away for a fixed duration while the
    heading sweeps, leaving released objects roughly where they were.
    """

    def __init__(self, base_id, duration_s=2.5, grad_t_per_m=2.0, rotate_rate=0.5, timeout_s=30.0):
        self.base_id = base_id
        self.duration_s = duration_s
        self.grad = grad_t_per_m
        self.rotate_rate = rotate_rate
        self.timeout_s = timeout_s
        self._t0 = None
        self._heading0 = None

    def start(self, world):
        touching = world.bodies_in_contact(self.base_id, kind=BodyKind.SPHERE, tol_um=1.0)
        if not touching:
            raise NoContactError(f"{self.base_id} has no sphere in pushing contact")
        self._t0 = world.time_s
        self._heading0 = world.body(self.base_id).theta

    def commands(self, world):
        back = self._heading0 + math.pi
        return {
            self.base_id: FieldCommand(
                grad_x_t_per_m=self.grad * math.cos(back),
                grad_y_t_per_m=self.grad * math.sin(back),
                rotate_rate_rad_s=self.rotate_rate,
            )
        }

    def done(self, world):
        if world.time_s - self._t0 < self.duration_s:
            return False
        # stop cleanly: zero the latched command
        world.apply_command(self.base_id, FieldCommand(rotate_rate_rad_s=0.0))
        return True


class WaitState(Maneuver):
    """Idle until a pair's mating state reaches the requested value."""

    def __init__(self, manager, state_value, timeout_s=60.0):
        self.manager = manager
        self.state_value = state_value
        self.timeout_s = timeout_s

    def done(self, world):
        return self.manager.state.value == self.state_value


class WaitTime(Maneuver):
    def __init__(self, duration_s):
        self.duration_s = duration_s
        self.timeout_s = duration_s + 1.0
        self._t0 = None

    def start(self, world):
        self._t0 = world.time_s

    def done(self, world):
        return world.time_s - self._t0 >= self.duration_s


class Rotate(Maneuver):
    """Spin the alignment heading for a fixed duration (detach assistance)."""

    def __init__(self, base_id, rate_rad_s=1.0, duration_s=2.0, timeout_s=None):
        self.base_id = base_id
        self.rate = rate_rad_s
        self.duration_s = duration_s
        self.timeout_s = timeout_s or duration_s + 5.0
        self._t0 = None

    def start(self, world):
        self._t0 = world.time_s

    def commands(self, world):
        return {self.base_id: FieldCommand(rotate_rate_rad_s=self.rate)}

    def done(self, world):
        if world.time_s - self._t0 < self.duration_s:
            return False
        world.apply_command(self.base_id, FieldCommand(rotate_rate_rad_s=0.0))
        return True


class WaypointFollower(Maneuver):
    """Visit a polyline of waypoints with per-axis proportional steering.

    Tracks the maximum cross-track error against the segment being followed
    and raises UnreachableWaypointError when progress stalls (stick-slip in
    water-rich solvent can do this for hydrogel-bearing bases).
    """

    def __init__(self, body_id, waypoints_um, accept_um=5.0,
                 gain=DEFAULT_GAIN_T_PER_M_PER_UM, timeout_s=600.0):
        self.body_id = body_id
        self.waypoints = [(float(x), float(y)) for x, y in waypoints_um]
        self.accept_um = accept_um
        self.gain = gain
        self.timeout_s = timeout_s
        self.index = 0
        self.max_cross_track_um = 0.0
        self._segment_start = None
        self._best = math.inf
        self._best_t = 0.0

    def start(self, world):
        b = world.body(self.body_id)
        self._segment_start = (b.x, b.y)
        self._best_t = world.time_s

    def commands(self, world):
        if self.index >= len(self.waypoints):
            return {self.body_id: FieldCommand()}
        b = world.body(self.body_id)
        wx, wy = self.waypoints[self.index]
        return {
            self.body_id: FieldCommand(
                grad_x_t_per_m=self.gain * (wx - b.x),
                grad_y_t_per_m=self.gain * (wy - b.y),
            )
        }

    def done(self, world):
        if self.index >= len(self.waypoints):
            return True
        b = world.body(self.body_id)
        wx, wy = self.waypoints[self.index]
        self.max_cross_track_um = max(
            self.max_cross_track_um,
            _segment_distance(b.x, b.y, *self._segment_start, wx, wy),
        )
        dist = math.hypot(wx - b.x, wy - b.y)
        if dist < self._best - STALL_PROGRESS_UM:
            self._best = dist
            self._best_t = world.time_s
        elif world.time_s - self._best_t > STALL_WINDOW_S:
            raise UnreachableWaypointError(
                f"{self.body_id} stalled {dist:.1f} um short of waypoint {self.index}"
            )
        if dist <= self.accept_um:
            self._segment_start = self.waypoints[self.index]
            self.index += 1
            self._best = math.inf
            self._best_t = world.time_s
            if self.index >= len(self.waypoints):
                world.apply_command(self.body_id, FieldCommand())
                return True
        return False


def release_maneuver(world, base_id, dt_s=1e-3, **kwargs):
    """Run the canned release on a world in place; returns the world.

    Raises NoContactError when nothing is being pushed.  Scripted scenarios
    use the Release maneuver through the runner instead; this entry point
    serves direct API use.
    """
    m = Release(base_id, **kwargs)
    m.start(world)
    while not m.done(world):
        world.tick(m.commands(world), dt_s)
    world.apply_command(base_id, FieldCommand())
    return world


def _segment_distance(px, py, x0, y0, x1, y1):
    ex, ey = x1 - x0, y1 - y0
    seg2 = ex * ex + ey * ey
    if seg2 <= 1e-18:
        return math.hypot(px - x0, py - y0)
    t = ((px - x0) * ex + (py - y0) * ey) / seg2
    t = min(max(t, 0.0), 1.0)
    return math.hypot(px - (x0 + t * ex), py - (y0 + t * ey))
