"""Gradient-field actuation of remanent-moment bases in the overdamped regime.

Two coil pairs impose field gradients along x and y; a uniform alignment field
sets the heading.  A base with remanent moment m feels a pulling force m*g per
axis and an aligning torque m*B*sin(heading error).  At this scale inertia is
irrelevant: velocity is force over drag, and the drag coefficients are
calibration parameters chosen so a base at full gradient crosses one body
length (200 um) in about two seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import StepTooLargeError

EMU_TO_AM2 = 1e-3

# Remanent moments measured after 3 T magnetization: 1.310e-5 emu for the
# pin-carrying base, 1.308e-5 emu for the plain base; sample spread < 15%.
DEFAULT_MOMENT_TYPE1_AM2 = 1.310e-8
DEFAULT_MOMENT_TYPE2_AM2 = 1.308e-8
MOMENT_ENVELOPE_FRACTION = 0.15

DEFAULT_COIL_LIMIT_T_PER_M = 2.0
DEFAULT_B_ALIGN_T = 5e-3  # uniform alignment field magnitude; plumbing constant

# Drag calibration: 1.308e-8 A.m2 * 2 T/m / c_translation = 100 um/s.
DEFAULT_C_TRANSLATION = 2.616e-4  # N.s/m
DEFAULT_C_ROTATION = 2.2e-11      # N.m.s/rad
DEFAULT_DT_MAX_S = 1e-3


@dataclass(frozen=True)
class MagneticBase:
    """Remanent magnetic moment of one base, with its sample-to-sample spread."""

    moment_am2: float = DEFAULT_MOMENT_TYPE1_AM2
    moment_axis: tuple = (1.0, 0.0)  # body frame
    variation_sigma: float = 0.05

    def __post_init__(self):
        if self.moment_am2 <= 0:
            raise ValueError("moment must be positive")
        ax, ay = self.moment_axis
        norm = math.hypot(ax, ay)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError("moment axis must be a unit vector")

    @property
    def moment_emu(self):
        return self.moment_am2 / EMU_TO_AM2

    def sample(self, rng):
        """Draw a fabrication sample; the spread never leaves the +/-15% envelope."""
        lo = (1.0 - MOMENT_ENVELOPE_FRACTION) * self.moment_am2
        hi = (1.0 + MOMENT_ENVELOPE_FRACTION) * self.moment_am2
        m = rng.normal(self.moment_am2, self.variation_sigma * self.moment_am2)
        return replace(self, moment_am2=min(max(m, lo), hi))


@dataclass(frozen=True)
class FieldCommand:
    """One teleop/scripted actuation sample.

    heading_rad is the uniform-field direction the base aligns to; None keeps
    the previous heading.  rotate_rate spins that heading.
    """

    grad_x_t_per_m: float = 0.0
    grad_y_t_per_m: float = 0.0
    heading_rad: float | None = None
    rotate_rate_rad_s: float = 0.0

    def clamped(self, limit=DEFAULT_COIL_LIMIT_T_PER_M):
        """Command with the gradient vector saturated at the coil limit."""
        g = math.hypot(self.grad_x_t_per_m, self.grad_y_t_per_m)
        if g <= limit:
            return self
        s = limit / g
        return replace(
            self,
            grad_x_t_per_m=self.grad_x_t_per_m * s,
            grad_y_t_per_m=self.grad_y_t_per_m * s,
        )


@dataclass(frozen=True)
class DragModel:
    """Lumped viscous drag; wall_amplification multiplies translation drag for
    hydrogel-bearing bases in water-rich solvent (substrate adhesion)."""

    c_translation: float = DEFAULT_C_TRANSLATION  # N.s/m
    c_rotation: float = DEFAULT_C_ROTATION        # N.m.s/rad
    wall_amplification: float = 3.0

    def __post_init__(self):
        if min(self.c_translation, self.c_rotation) <= 0:
            raise ValueError("drag coefficients must be positive")
        if self.wall_amplification < 1.0:
            raise ValueError("wall amplification must be >= 1")


def magnetic_force(base, cmd, misalignment_rad=0.0):
    """Pulling force (N, N) from the gradient on the moment's field projection."""
    m_eff = base.moment_am2 * math.cos(misalignment_rad)
    return (m_eff * cmd.grad_x_t_per_m, m_eff * cmd.grad_y_t_per_m)


def magnetic_torque(base, heading_cmd_rad, body_heading_rad, b_align_t=DEFAULT_B_ALIGN_T):
    """Aligning torque in N.m; zero at alignment, maximal at 90 degrees."""
    return base.moment_am2 * b_align_t * math.sin(heading_cmd_rad - body_heading_rad)


def step_overdamped(
    pose_um,
    force_n,
    torque_nm,
    drag,
    dt_s,
    dt_max_s=DEFAULT_DT_MAX_S,
    drag_multiplier=1.0,
    min_force_n=0.0,
):
    """Advance a pose (x um, y um, theta rad) one overdamped step.

    Velocity is instantaneous force over drag (no inertia, no velocity state).
    min_force_n is the stick-slip threshold: below it the body does not
    translate at all.  Raises StepTooLargeError for dt > dt_max.
    """
    if dt_s <= 0:
        raise ValueError("dt must be positive")
    if dt_s > dt_max_s:
        raise StepTooLargeError(f"dt={dt_s} exceeds dt_max={dt_max_s}")
    x, y, theta = pose_um
    fx, fy = force_n
    c_t = drag.c_translation * drag_multiplier
    if math.hypot(fx, fy) > min_force_n:
        x += fx / c_t * 1e6 * dt_s  # m/s -> um/s
        y += fy / c_t * 1e6 * dt_s
    theta += torque_nm / drag.c_rotation * dt_s
    return (x, y, theta)
