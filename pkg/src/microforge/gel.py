"""Swelling thermodynamics of the responsive hydrogel parts.

The responsive features are modeled with a Gibbs-type free energy density W for
a crosslinked network swollen by solvent, written with the free-swelling state
as reference.  Inputs are all dimensionless:

    jp        volume ratio to the free-swelling state (isotropic: jp = lam**3)
    i1bar     deviatoric first invariant of the deformation (isotropic: 3)
    mu_over_kt  solvent chemical potential normalized by kT

    W = Nv/2 * [ lam0^-1 * jp^(2/3) * i1bar - 3*lam0^-3 - 2*lam0^-1 * ln(lam0^3 * jp) ]
        + (jp - lam0^-3) * ln( jp / (jp - lam0^-3) )
        - chi / (lam0^6 * jp)
        - (mu/kT) * (jp - lam0^-3)

lam0 is the stretch of the free-swelling state relative to the dry network, Nv
the dimensionless chain density and chi the polymer/solvent interaction
parameter.  Everything downstream (equilibrium sizes, mating clearances,
gripper angles) reduces to the linear swelling ratio lam = jp^(1/3), the
stimulated size over the designed size.

Equilibrium at a given mu/kT is the swollen-branch minimum of W, i.e. the
ascending root of dW/djp inside a fixed physical bracket.  The solvent mixture
is described only by its water fraction phi in [0, 1]; a monotone
piecewise-cubic calibration table maps phi to the measured equilibrium ratio,
and env_to_mu inverts the energy model so that the equilibrium solver
reproduces the table exactly.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import GelDomainError, NoRootError

# Constitutive defaults for the printed responsive material (12 mW laser power).
DEFAULT_NV = 0.0854
DEFAULT_LAMBDA0 = 2.2617
DEFAULT_CHI = -0.7363

# Measured deswelling anchors: pure EL 0.927, pure water 0.753, and a reswelling
# peak slightly above 1 around 40% water.  The peak magnitude 1.02 is a
# configuration choice; only ">1" is measured.
DEFAULT_ANCHORS = ((0.0, 0.927), (0.40, 1.02), (1.0, 0.753))

# Physical root bracket for the volume ratio: just above the dry-state floor
# lam0^-3 up to lam = 3.  Outside this window the model is declared unphysical.
BRACKET_FLOOR_FACTOR = 1.001
BRACKET_JP_MAX = 27.0
_SCAN_POINTS = 512


class CompositionCalibration:
    """Monotone piecewise-cubic map from water fraction to equilibrium ratio.

    Anchors are (water_fraction, lambda_eq) pairs with strictly increasing
    water fractions.  Shape-preserving interpolation keeps the interior peak at
    its anchor and never overshoots between knots.
    """

    def __init__(self, anchors=DEFAULT_ANCHORS):
        anchors = [(float(p), float(l)) for p, l in anchors]
        if len(anchors) < 2:
            raise ValueError("need at least two calibration anchors")
        phis = [p for p, _ in anchors]
        lams = [l for _, l in anchors]
        if any(b <= a for a, b in zip(phis, phis[1:])):
            raise ValueError("anchor water fractions must be strictly increasing")
        if any(l <= 0 for l in lams):
            raise ValueError("anchor swelling ratios must be positive")
        if phis[0] < 0 or phis[-1] > 1:
            raise ValueError("water fractions must lie in [0, 1]")
        self.anchors = tuple(anchors)
        interp = PchipInterpolator(np.asarray(phis), np.asarray(lams), extrapolate=False)
        # Unpack the piecewise polynomial once; scalar Horner evaluation below is
        # ~10x faster than the array path and sits on the world tick hot loop.
        self._breaks = [float(x) for x in interp.x]
        self._coeffs = [[float(c) for c in col] for col in interp.c.T.tolist()]

    def lambda_eq(self, water_fraction):
        """Equilibrium linear swelling ratio at the given water fraction."""
        phi = float(water_fraction)
        if not 0.0 <= phi <= 1.0:
            raise ValueError(f"water fraction {phi} outside [0, 1]")
        lo, hi = self._breaks[0], self._breaks[-1]
        phi = min(max(phi, lo), hi)  # clamp to the anchored range
        i = bisect.bisect_right(self._breaks, phi) - 1
        i = min(max(i, 0), len(self._coeffs) - 1)
        t = phi - self._breaks[i]
        c3, c2, c1, c0 = self._coeffs[i]
        return ((c3 * t + c2) * t + c1) * t + c0

    def peak(self):
        """(water_fraction, lambda_eq) of the largest anchor."""
        return max(self.anchors, key=lambda a: a[1])


@dataclass(frozen=True)
class HydrogelParams:
    """Dimensionless constitutive constants plus the composition calibration."""

    nv: float = DEFAULT_NV
    lambda0: float = DEFAULT_LAMBDA0
    chi: float = DEFAULT_CHI
    calibration: CompositionCalibration = field(default_factory=CompositionCalibration)

    def __post_init__(self):
        if not self.nv > 0:
            raise ValueError("nv must be positive")
        if not self.lambda0 > 1:
            raise ValueError("lambda0 must exceed 1")
        if not math.isfinite(self.chi):
            raise ValueError("chi must be finite")

    @property
    def jp_floor(self):
        """Dry-state volume-ratio floor lam0^-3."""
        return self.lambda0 ** -3


@dataclass
class SwellState:
    """Current and target linear swelling ratio of one responsive feature.

    lam tracks the instantaneous stimulated-over-designed size ratio; lam_eq is
    the equilibrium it relaxes toward.  jp is the exact cube.
    """

    lam: float
    lam_eq: float

    def __post_init__(self):
        if not self.lam > 0 or not self.lam_eq > 0:
            raise ValueError("swelling ratios must be positive")

    @property
    def jp(self):
        return self.lam ** 3


def free_energy(jp, i1bar, mu_over_kt, params=None):
    """Free energy density W(jp, i1bar, mu/kT); dimensionless.

    Raises GelDomainError when jp is at or below the dry-state floor, where the
    mixing log argument becomes non-positive (compression past the dry network).
    """
    p = params or _DEFAULTS
    a = p.jp_floor
    if jp <= a:
        raise GelDomainError(f"jp={jp} at or below dry-state floor {a}")
    if i1bar < 3.0:
        raise ValueError(f"i1bar={i1bar} below isotropic lower bound 3")
    inv_l0 = 1.0 / p.lambda0
    elastic = 0.5 * p.nv * (
        inv_l0 * jp ** (2.0 / 3.0) * i1bar
        - 3.0 * a
        - 2.0 * inv_l0 * math.log(jp / a)
    )
    mixing = (jp - a) * math.log(jp / (jp - a))
    interaction = -p.chi / (p.lambda0 ** 6 * jp)
    exchange = -mu_over_kt * (jp - a)
    return elastic + mixing + interaction + exchange


def dW_dJp(jp, mu_over_kt, params=None):
    """d(free_energy)/d(jp) along the isotropic branch (i1bar fixed at 3)."""
    p = params or _DEFAULTS
    a = p.jp_floor
    if jp <= a:
        raise GelDomainError(f"jp={jp} at or below dry-state floor {a}")
    inv_l0 = 1.0 / p.lambda0
    return (
        p.nv * inv_l0 * (jp ** (-1.0 / 3.0) - 1.0 / jp)
        + math.log(jp / (jp - a))
        - a / jp
        + p.chi / (p.lambda0 ** 6 * jp * jp)
        - mu_over_kt
    )


def _d2W_dJp2(jp, params):
    # Curvature of the isotropic branch; used only to polish the root.
    p = params
    a = p.jp_floor
    inv_l0 = 1.0 / p.lambda0
    return (
        p.nv * inv_l0 * (-jp ** (-4.0 / 3.0) / 3.0 + 1.0 / (jp * jp))
        + 1.0 / jp
        - 1.0 / (jp - a)
        + a / (jp * jp)
        - 2.0 * p.chi / (p.lambda0 ** 6 * jp ** 3)
    )


def equilibrium_lambda(mu_over_kt, params=None):
    """Equilibrium linear swelling ratio for a given normalized chemical potential.

    Finds the swollen-branch minimum of W: the unique crossing of dW/djp from
    negative to positive inside the physical bracket.  Bracketed (bisection
    safe) root solve, then Newton polish on the analytic derivative.

    Raises NoRootError when no ascending crossing exists in the bracket.
    """
    p = params or _DEFAULTS
    lo = p.jp_floor * BRACKET_FLOOR_FACTOR
    hi = BRACKET_JP_MAX

    def f(jp):
        return dW_dJp(jp, mu_over_kt, p)

    # The derivative dives from +inf at the floor, dips negative, rises through
    # the swollen branch and decays elastically; scan for the ascending crossing.
    grid = np.geomspace(lo, hi, _SCAN_POINTS)
    prev_x = grid[0]
    prev_f = f(prev_x)
    root = None
    for x in grid[1:]:
        fx = f(float(x))
        if prev_f <= 0.0 < fx:
            root = brentq(f, prev_x, float(x), xtol=1e-14, rtol=4 * np.finfo(float).eps)
            break
        prev_x, prev_f = float(x), fx
    if root is None:
        raise NoRootError(
            f"no equilibrium for mu/kT={mu_over_kt} in jp bracket [{lo:.6g}, {hi:.6g}]"
        )
    for _ in range(3):  # Newton polish; brentq already lands near machine precision
        fx = f(root)
        fpx = _d2W_dJp2(root, p)
        if fpx == 0.0:
            break
        step = fx / fpx
        nxt = root - step
        if not lo < nxt < hi:
            break
        root = nxt
        if abs(step) < 1e-15 * root:
            break
    return root ** (1.0 / 3.0)


def env_to_mu(water_fraction, params=None):
    """Normalized chemical potential that reproduces the calibrated equilibrium.

    Inverts the energy model at the calibration interpolant: the returned value
    satisfies equilibrium_lambda(env_to_mu(phi)) == calibration.lambda_eq(phi)
    up to solver tolerance.  Continuous in phi; raises ValueError outside [0, 1].
    """
    p = params or _DEFAULTS
    phi = float(water_fraction)
    if not 0.0 <= phi <= 1.0:
        raise ValueError(f"water fraction {phi} outside [0, 1]")
    jp_target = p.calibration.lambda_eq(phi) ** 3
    # dW/djp is linear in mu with slope -1: the root sits at jp_target exactly
    # when mu equals the zero-potential derivative there.
    return dW_dJp(jp_target, 0.0, p)


_DEFAULTS = HydrogelParams()
