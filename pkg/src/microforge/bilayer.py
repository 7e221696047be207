"""Bimorph beam bending for the double-bilayer gripper jaws.

Two bonded layers with mismatched expansion bend into an arc.  With m the
soft-to-hard thickness ratio, n the hard-to-soft modulus ratio and eps the
expansion mismatch strain, the bending radius follows the modified bimorph
relation

    R = (h1 + h2) * (8*(1+m)^2 + (1+mn)*(m^2 + 1/(mn))) / (6*eps*(1+m)^2)

and the tip angle of a beam of length L is theta = L/R.  eps = 0 leaves the
beam straight (infinite radius); the sign of eps selects the bend direction.

Symbol convention note: the source material defines m and n only loosely, and
its claimed analytic optimum (soft-to-hard ratio 0.47 at n = 2) is not
reproduced by the convention fixed here (m = h_soft/h_hard, n = E_hard/E_soft,
fixed total thickness), which gives ~0.71.  convention_scan() enumerates the
four m/n interpretations under the three sweep normalizations; the combination
nearest 0.47 (soft-to-hard 0.466: inverted modulus ratio, hard thickness held
fixed) is reported alongside rather than silently adopted.  See
docs/bilayer_conventions.md.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from . import gel

DEG = 180.0 / math.pi

# Printed jaw geometry: hard layer 59 um x 6 um (x 20 um depth, unused in the
# beam model); soft layer printed at twice the hard thickness.
DEFAULT_LENGTH_UM = 59.0
DEFAULT_H_HARD_UM = 6.0
DEFAULT_H_SOFT_UM = 12.0
DEFAULT_MODULUS_RATIO = 2.0

# Measured peak angle difference between pure water and the 40%-water
# reference, used to scale the gel-derived mismatch strain.
TARGET_DELTA_THETA_DEG = 27.0
CALIBRATION_RATIO = 2.0
CALIBRATION_PHI_BENT = 1.0
CALIBRATION_PHI_REFERENCE = 0.40


def bend_radius_formula(m, n, eps, total_thickness):
    """Raw bimorph radius; +/-inf when the mismatch strain is zero."""
    if m <= 0 or n <= 0:
        raise ValueError("thickness and modulus ratios must be positive")
    if eps == 0.0:
        return math.inf
    mn = m * n
    numer = total_thickness * (8.0 * (1.0 + m) ** 2 + (1.0 + mn) * (m * m + 1.0 / mn))
    return numer / (6.0 * eps * (1.0 + m) ** 2)


class _GelMismatch:
    """Mismatch strain from the gel equilibrium: eps(phi) = scale*(lambda_eq(phi)-1).

    The hard layer is treated as inert; a single multiplicative scale is fitted
    so the jaw-angle swing between pure water and the 40%-water reference hits
    the measured value at thickness ratio 2.
    """

    def __init__(self, gel_params=None, scale=1.0):
        self.gel_params = gel_params or gel.HydrogelParams()
        self.scale = scale

    def __call__(self, water_fraction):
        return self.scale * (self.gel_params.calibration.lambda_eq(water_fraction) - 1.0)

    def strain_at_lambda(self, lam):
        """Mismatch for an out-of-equilibrium soft layer at swelling ratio lam."""
        return self.scale * (lam - 1.0)


@dataclass(frozen=True)
class BilayerSpec:
    """Geometry and stiffness of one soft/hard bimorph strip (lengths in um)."""

    length_um: float = DEFAULT_LENGTH_UM
    h_hard_um: float = DEFAULT_H_HARD_UM
    h_soft_um: float = DEFAULT_H_SOFT_UM
    modulus_ratio_n: float = DEFAULT_MODULUS_RATIO  # hard over soft
    epsilon_fn: object = field(default_factory=_GelMismatch)

    def __post_init__(self):
        if min(self.length_um, self.h_hard_um, self.h_soft_um) <= 0:
            raise ValueError("beam dimensions must be positive")
        if self.modulus_ratio_n <= 0:
            raise ValueError("modulus ratio must be positive")

    @property
    def thickness_ratio(self):
        return self.h_soft_um / self.h_hard_um


def bend_radius(spec, water_fraction):
    """Signed bending radius in um for the spec's mismatch at this composition."""
    eps = spec.epsilon_fn(water_fraction)
    if not math.isfinite(eps):
        raise ValueError(f"mismatch strain not finite at phi={water_fraction}")
    return bend_radius_formula(
        spec.thickness_ratio,
        spec.modulus_ratio_n,
        eps,
        spec.h_hard_um + spec.h_soft_um,
    )


def bend_angle(spec, water_fraction):
    """Tip angle in degrees; zero for a straight beam, sign follows the radius."""
    r = bend_radius(spec, water_fraction)
    if math.isinf(r):
        return 0.0
    return spec.length_um / r * DEG


def sweep_thickness_ratio(
    n,
    epsilon,
    ratios,
    mode="fixed_total",
    total_um=1.0,
    h_hard_um=DEFAULT_H_HARD_UM,
    h_soft_um=DEFAULT_H_SOFT_UM,
    length_um=DEFAULT_LENGTH_UM,
):
    """Radius and angle across soft-to-hard thickness ratios.

    mode picks what stays constant while the ratio changes: "fixed_total"
    (h_soft + h_hard = total_um), "fixed_hard" or "fixed_soft".  Returns
    [(ratio, radius_um, theta_deg)] in input order.
    """
    if not ratios:
        raise ValueError("ratio list must be non-empty")
    if any(r <= 0 for r in ratios):
        raise ValueError("ratios must be positive")
    out = []
    for ratio in ratios:
        if mode == "fixed_total":
            hh = total_um / (1.0 + ratio)
            hs = total_um - hh
        elif mode == "fixed_hard":
            hh = h_hard_um
            hs = ratio * hh
        elif mode == "fixed_soft":
            hs = h_soft_um
            hh = hs / ratio
        else:
            raise ValueError(f"unknown sweep mode {mode!r}")
        r = bend_radius_formula(ratio, n, epsilon, hh + hs)
        theta = 0.0 if math.isinf(r) else length_um / r * DEG
        out.append((ratio, r, theta))
    return out


def analytic_optimum_ratio(n, mode="fixed_total", lo=0.05, hi=20.0, points=20000):
    """Soft-to-hard ratio minimizing |R| on a dense grid, with local refinement."""
    step = (hi / lo) ** (1.0 / (points - 1))
    best_m, best_r = lo, math.inf
    m = lo
    for _ in range(points):
        r = abs(_mode_radius(m, n, mode))
        if r < best_r:
            best_m, best_r = m, r
        m *= step
    # golden-section refinement around the grid minimum
    a, b = best_m / step, best_m * step
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - (b - a) * invphi
    d = a + (b - a) * invphi
    for _ in range(80):
        if abs(_mode_radius(c, n, mode)) < abs(_mode_radius(d, n, mode)):
            b = d
        else:
            a = c
        c = b - (b - a) * invphi
        d = a + (b - a) * invphi
    return (a + b) / 2.0


def _mode_radius(ratio, n, mode):
    if mode == "fixed_total":
        total = 1.0
    elif mode == "fixed_hard":
        total = 1.0 + ratio
    elif mode == "fixed_soft":
        total = (1.0 + ratio) / ratio
    else:
        raise ValueError(f"unknown sweep mode {mode!r}")
    return bend_radius_formula(ratio, n, 1.0, total)


def convention_scan(modulus_ratio_hard_over_soft=2.0):
    """Argmin soft-to-hard ratio for every symbol convention and sweep mode.

    The four conventions interpret the formula's m as s or 1/s (s = soft/hard
    thickness) and its n as the hard/soft or soft/hard modulus ratio.  Returns
    {(m_convention, n_convention, mode): argmin_s}.
    """
    results = {}
    n_phys = modulus_ratio_hard_over_soft
    for m_conv in ("soft_over_hard", "hard_over_soft"):
        for n_conv in ("hard_over_soft", "soft_over_hard"):
            n_val = n_phys if n_conv == "hard_over_soft" else 1.0 / n_phys
            for mode in ("fixed_total", "fixed_hard", "fixed_soft"):
                best_s, best_r = None, math.inf
                s = 0.05
                step = (20.0 / 0.05) ** (1.0 / 79999)
                for _ in range(80000):
                    m_val = s if m_conv == "soft_over_hard" else 1.0 / s
                    # sweep normalization is defined in terms of the physical
                    # soft-to-hard ratio s regardless of the m convention
                    if mode == "fixed_total":
                        total = 1.0
                    elif mode == "fixed_hard":
                        total = 1.0 + s
                    else:
                        total = (1.0 + s) / s
                    r = abs(bend_radius_formula(m_val, n_val, 1.0, total))
                    if r < best_r:
                        best_s, best_r = s, r
                    s *= step
                results[(m_conv, n_conv, mode)] = best_s
    return results


def nearest_convention(target=0.47, modulus_ratio_hard_over_soft=2.0):
    """Convention/mode combination whose argmin lies nearest the target ratio."""
    scan = convention_scan(modulus_ratio_hard_over_soft)
    key = min(scan, key=lambda k: abs(scan[k] - target))
    return key, scan[key]


def fit_epsilon_scale(
    gel_params=None,
    target_delta_deg=TARGET_DELTA_THETA_DEG,
    ratio=CALIBRATION_RATIO,
    h_hard_um=DEFAULT_H_HARD_UM,
    length_um=DEFAULT_LENGTH_UM,
    modulus_ratio_n=DEFAULT_MODULUS_RATIO,
):
    """Scale on the gel-derived mismatch so the jaw swing hits its measured peak.

    theta is linear in eps, so the fit is a single division: scale the raw
    water-vs-reference angle difference at the calibration ratio up to the
    target.
    """
    raw = _GelMismatch(gel_params, scale=1.0)
    spec = BilayerSpec(
        length_um=length_um,
        h_hard_um=h_hard_um,
        h_soft_um=ratio * h_hard_um,
        modulus_ratio_n=modulus_ratio_n,
        epsilon_fn=raw,
    )
    delta_raw = bend_angle(spec, CALIBRATION_PHI_BENT) - bend_angle(spec, CALIBRATION_PHI_REFERENCE)
    if delta_raw == 0.0:
        raise ValueError("calibration anchors produce no angle swing")
    return target_delta_deg / abs(delta_raw)


def calibrated_mismatch(gel_params=None):
    """Default mismatch strain function with the measured-swing scale applied."""
    return _GelMismatch(gel_params, scale=fit_epsilon_scale(gel_params))


class GripperState(enum.Enum):
    OPEN = "Open"
    CLOSED = "Closed"
    INTERMEDIATE = "Intermediate"


@dataclass(frozen=True)
class GripperSpec:
    """Two mirrored jaws plus the thresholds that classify the aperture.

    mount_sign orients the jaw bilayers: the soft layer sits outboard, so a
    water-shrunken soft layer curls the jaws outward (positive opening).
    """

    left: BilayerSpec
    right: BilayerSpec
    jaw_gap_closed_um: float = 61.0
    open_threshold_deg: float = 15.0
    close_threshold_deg: float = 5.0
    mount_sign: float = -1.0

    def __post_init__(self):
        if not self.open_threshold_deg > self.close_threshold_deg >= 0:
            raise ValueError("need open threshold > close threshold >= 0")

    @classmethod
    def default(cls, gel_params=None):
        eps = calibrated_mismatch(gel_params)
        jaw = BilayerSpec(epsilon_fn=eps)
        return cls(left=jaw, right=jaw)


@dataclass(frozen=True)
class ApertureReport:
    aperture_um: float
    state: GripperState
    opening_deg: float  # mean jaw opening, positive = jaws spread


def gripper_aperture(grip, water_fraction):
    """Jaw opening between the gripper tips at the given composition.

    Positive opening widens the aperture by L*sin(theta) per jaw; negative
    opening presses the jaws against their closed stop, leaving the aperture at
    the closed gap.  Classification is threshold-only (no hysteresis).
    """
    open_l = grip.mount_sign * bend_angle(grip.left, water_fraction)
    open_r = grip.mount_sign * bend_angle(grip.right, water_fraction)
    return _classify(grip, open_l, open_r)


def gripper_aperture_kinetic(grip, lam):
    """Aperture while the jaw soft layers sit at an out-of-equilibrium ratio.

    Used by the world tick: the jaws track the kinetic swelling state, not the
    instantaneous solvent equilibrium.  Requires mismatch functions exposing
    strain_at_lambda (the gel-derived default does).
    """
    openings = []
    for spec in (grip.left, grip.right):
        eps = spec.epsilon_fn.strain_at_lambda(lam)
        r = bend_radius_formula(
            spec.thickness_ratio, spec.modulus_ratio_n, eps, spec.h_hard_um + spec.h_soft_um
        )
        theta = 0.0 if math.isinf(r) else spec.length_um / r * DEG
        openings.append(grip.mount_sign * theta)
    return _classify(grip, openings[0], openings[1])


def _classify(grip, open_l, open_r):
    aperture = grip.jaw_gap_closed_um
    for spec, opening in ((grip.left, open_l), (grip.right, open_r)):
        swing = math.radians(min(max(opening, 0.0), 90.0))
        aperture += spec.length_um * math.sin(swing)
    if min(open_l, open_r) >= grip.open_threshold_deg:
        state = GripperState.OPEN
    elif max(open_l, open_r) <= grip.close_threshold_deg:
        state = GripperState.CLOSED
    else:
        state = GripperState.INTERMEDIATE
    return ApertureReport(aperture_um=aperture, state=state, opening_deg=(open_l + open_r) / 2.0)
