"""Figure-shaped parameter sweeps, exported as CSV.

Sweeps call the physics modules directly (no world, no ticking): equilibrium
swelling vs composition, transient swelling both directions, bilayer angle vs
thickness ratio, and the eight-cycle repeatability run.  Column layouts are
documented in docs/formats.md and pinned by golden-file tests.
"""

from __future__ import annotations

import math

from . import bilayer as bilayer_mod
from . import gel as gel_mod
from . import kinetics as kin_mod
from .errors import GridError

SWEEP_KINDS = ("SwellCurve", "TransitionCurve", "BilayerRatio", "CycleRepeat")

# Endpoint swelling anchors for the transition and cycling sweeps.
LAM_EL = 0.927
LAM_WATER = 0.753

# Cycle phases settle far past 6 tau so successive cycles agree to < 1e-9;
# at exactly 6 tau the first cycle still carries a ~1e-6 transient.
CYCLE_SETTLE_FACTOR = 30.0


def swell_curve(config, points=101):
    """Equilibrium ratio vs water fraction through the full solver loop."""
    if points < 2:
        raise GridError("swell curve needs at least 2 grid points")
    rows = [("phi", "lambda_eq")]
    params = config.gel
    for i in range(points):
        phi = i / (points - 1)
        lam = gel_mod.equilibrium_lambda(gel_mod.env_to_mu(phi, params), params)
        rows.append((phi, lam))
    return rows

def transition_curve(config, t_end_s=60.0, step_s=0.5, laser_power_mw=12.0):
    """lambda(t) for the slow (toward water) and fast (toward EL) directions."""
    if t_end_s <= 0 or step_s <= 0:
        raise GridError("transition grid must have positive extent and step")
    rows = [("t_s", "lambda_toward_water", "lambda_toward_el")]
    kin = config.kinetics
    n = int(round(t_end_s / step_s))
    for i in range(n + 1):
        t = i * step_s
        slow = kin_mod.relax(
            kin_mod.SwellState(lam=LAM_EL, lam_eq=LAM_WATER),
            LAM_WATER, t, kin,
            direction=kin_mod.Direction.TOWARD_WATER,
            laser_power_mw=laser_power_mw,
        )
        fast = kin_mod.relax(
            kin_mod.SwellState(lam=LAM_WATER, lam_eq=LAM_EL),
            LAM_EL, t, kin,
            direction=kin_mod.Direction.TOWARD_EL,
            laser_power_mw=laser_power_mw,
        )
        rows.append((t, slow.lam, fast.lam))
    return rows


def bilayer_ratio(config, ratios=None):
    """Jaw angle and its water-vs-reference swing across thickness ratios.

    Soft-layer thickness is held at its printed value while the ratio varies;
    this normalization reproduces the measured swing peak location (between
    1.5 and 2.5) with the gel-calibrated mismatch strain.
    """
    if ratios is None:
        ratios = [0.25 + 0.05 * i for i in range(96)]  # 0.25 .. 5.0
    if not ratios or any(r <= 0 for r in ratios):
        raise GridError("ratios must be a non-empty positive list")
    eps_fn = bilayer_mod.calibrated_mismatch(config.gel)
    phi_bent = bilayer_mod.CALIBRATION_PHI_BENT
    phi_ref = bilayer_mod.CALIBRATION_PHI_REFERENCE
    rows = [("ratio", "r_um_water", "theta_deg_water", "theta_deg_ref40", "delta_theta_deg")]
    h_soft = bilayer_mod.DEFAULT_H_SOFT_UM
    for ratio, r_w, th_w in bilayer_mod.sweep_thickness_ratio(
        bilayer_mod.DEFAULT_MODULUS_RATIO, eps_fn(phi_bent), ratios,
        mode="fixed_soft", h_soft_um=h_soft,
    ):
        th_ref = bilayer_mod.sweep_thickness_ratio(
            bilayer_mod.DEFAULT_MODULUS_RATIO, eps_fn(phi_ref), [ratio],
            mode="fixed_soft", h_soft_um=h_soft,
        )[0][2]
        rows.append((ratio, r_w, th_w, th_ref, th_w - th_ref))
    return rows


def cycle_repeat(config, cycles=8, laser_power_mw=12.0):
    """Per-phase end ratios across alternating water/EL cycles."""
    if cycles < 1:
        raise GridError("need at least one cycle")
    kin = config.kinetics
    rows = [("cycle", "lambda_end_water", "lambda_end_el")]
    state = kin_mod.SwellState(lam=LAM_EL, lam_eq=LAM_EL)
    for cycle in range(1, cycles + 1):
        t_water = CYCLE_SETTLE_FACTOR * kin_mod.tau_for(
            kin_mod.Direction.TOWARD_WATER, laser_power_mw, kin
        )
        state = kin_mod.relax(state, LAM_WATER, t_water, kin,
                              direction=kin_mod.Direction.TOWARD_WATER,
                              laser_power_mw=laser_power_mw)
        end_water = state.lam
        t_el = CYCLE_SETTLE_FACTOR * kin_mod.tau_for(
            kin_mod.Direction.TOWARD_EL, laser_power_mw, kin
        )
        state = kin_mod.relax(state, LAM_EL, t_el, kin,
                              direction=kin_mod.Direction.TOWARD_EL,
                              laser_power_mw=laser_power_mw)
        rows.append((cycle, end_water, state.lam))
    return rows


def run_sweep(kind, config, out_path=None, **kwargs):
    """Dispatch a sweep by kind name and optionally write its CSV."""
    if kind == "SwellCurve":
        rows = swell_curve(config, **kwargs)
    elif kind == "TransitionCurve":
        rows = transition_curve(config, **kwargs)
    elif kind == "BilayerRatio":
        rows = bilayer_ratio(config, **kwargs)
    elif kind == "CycleRepeat":
        rows = cycle_repeat(config, **kwargs)
    else:
        raise GridError(f"unknown sweep kind {kind!r}; choose from {SWEEP_KINDS}")
    if out_path is not None:
        write_csv(rows, out_path)
    return rows


def write_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        header, data = rows[0], rows[1:]
        fh.write(",".join(header) + "\n")
        for row in data:
            fh.write(",".join(repr(v) if isinstance(v, float) else str(v) for v in row) + "\n")
