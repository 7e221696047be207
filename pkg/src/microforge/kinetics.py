"""Transient swelling dynamics of the responsive parts.

Measured transitions are strongly asymmetric: recovery toward EL-rich
compositions settles within ~5 s while deswelling toward water takes minutes.
Two anchor points (95% settled at 5 s fast; 0.838 reached at 45 s on the
0.927 -> 0.753 slow transition) only support a single-exponential model per
direction, so that is what this is: exact first-order relaxation with a
direction-dependent time constant, optionally scaled by the printing laser
power for the slow branch.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .gel import SwellState


class Direction(enum.Enum):
    TOWARD_WATER = "toward_water"  # deswelling, slow branch
    TOWARD_EL = "toward_el"        # recovery, fast branch


# tau_slow solves 0.753 + (0.927 - 0.753) * exp(-45/tau) = 0.838.
DEFAULT_TAU_SLOW_S = 62.8
# tau_fast puts the fast branch >= 95% settled at 5 s (exp(-5/1.5) ~ 0.036).
DEFAULT_TAU_FAST_S = 1.5
# Higher laser power -> denser crosslinking -> faster deswelling.  Scale
# factors are a configuration choice; only the decreasing trend is measured.
DEFAULT_LP_SPEEDUP = ((12.0, 1.0), (13.0, 0.7))


@dataclass(frozen=True)
class KineticsParams:
    """Direction-dependent time constants plus the laser-power speedup table.

    lp_speedup maps laser power in mW to a multiplicative scale on the slow
    (deswelling) time constant; interpolated linearly between keys and clamped
    outside.  The fast branch is direction-dominated and ignores the table.
    """

    tau_fast_s: float = DEFAULT_TAU_FAST_S
    tau_slow_s: float = DEFAULT_TAU_SLOW_S
    lp_speedup: tuple = DEFAULT_LP_SPEEDUP

    def __post_init__(self):
        if not 0 < self.tau_fast_s < self.tau_slow_s:
            raise ValueError("need 0 < tau_fast < tau_slow")
        keys = [k for k, _ in self.lp_speedup]
        scales = [s for _, s in self.lp_speedup]
        if any(b <= a for a, b in zip(keys, keys[1:])):
            raise ValueError("laser-power keys must be strictly increasing")
        if any(b >= a for a, b in zip(scales, scales[1:])):
            raise ValueError("speedup scales must be strictly decreasing in LP")
        if any(s <= 0 for s in scales):
            raise ValueError("speedup scales must be positive")


def tau_for(direction, laser_power_mw, params=None):
    """Relaxation time constant in seconds for a direction and laser power."""
    p = params or _DEFAULTS
    if direction is Direction.TOWARD_EL:
        return p.tau_fast_s
    keys = [k for k, _ in p.lp_speedup]
    scales = [s for _, s in p.lp_speedup]
    lp = float(laser_power_mw)
    if lp <= keys[0]:
        scale = scales[0]
    elif lp >= keys[-1]:
        scale = scales[-1]
    else:
        for (k0, s0), (k1, s1) in zip(p.lp_speedup, p.lp_speedup[1:]):
            if k0 <= lp <= k1:
                t = (lp - k0) / (k1 - k0)
                scale = s0 + t * (s1 - s0)
                break
    return p.tau_slow_s * scale


def relax(state, lambda_target, dt_s, params=None, direction=None, laser_power_mw=12.0):
    """Advance a swell state toward lambda_target by dt seconds.

    Closed-form first-order step: lam' = target + (lam - target)*exp(-dt/tau).
    Exact for any dt, so substepping introduces no accumulation error.  When
    direction is None it is inferred from the sign of the remaining approach
    (shrinking = slow water branch, swelling = fast recovery branch).
    """
    if dt_s < 0:
        raise ValueError("dt must be non-negative")
    if dt_s == 0.0:
        return SwellState(lam=state.lam, lam_eq=state.lam_eq)
    if direction is None:
        direction = Direction.TOWARD_WATER if lambda_target < state.lam else Direction.TOWARD_EL
    tau = tau_for(direction, laser_power_mw, params)
    lam = lambda_target + (state.lam - lambda_target) * math.exp(-dt_s / tau)
    return SwellState(lam=lam, lam_eq=lambda_target)


_DEFAULTS = KineticsParams()
