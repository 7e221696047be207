"""Body kinds, shapes and mating ports of the microchannel scene.

All dimensions in um, poses as (x, y, theta).  Body frames put +x along the
robot's working axis: bases carry the male pin on their +x face and approach
effectors from the effector's -x side; pushing features sit on the effector's
+x face.  A mated pair therefore spans exactly 200 um nose to tail and 120 um
across.

Shapes are unions of convex pieces so the collision code stays convex-only;
the multi-pushing pocket is three pieces, the slotted effector plate is three.
Gripper jaws are rendered and used for the aperture model but excluded from
collision (thin compliant features; capture is modeled by the lock constraint).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from . import bilayer as bilayer_mod
from . import geometry
from .gel import SwellState
from .magnetics import (
    DEFAULT_MOMENT_TYPE1_AM2,
    DEFAULT_MOMENT_TYPE2_AM2,
    MagneticBase,
)

# Core module geometry (um)
BODY_WIDTH = 120.0
PLATE_LENGTH = 100.0
PIN_DESIGNED_WIDTH = 60.0   # across the slot
PIN_DESIGNED_LENGTH = 40.0  # insertion depth
SLOT_WIDTH = 62.0
SLOT_DEPTH = 40.0
SPHERE_RADIUS_DEFAULT = 15.0
MATED_BASE_OFFSET = 100.0   # base center sits this far behind the effector center

# Base plate: wide main section plus a pin-width nose so open gripper jaws
# clear the plate during Type 2 mating.
_BASE_MAIN = ((-50.0, -60.0), (30.0, -60.0), (30.0, 60.0), (-50.0, 60.0))
_BASE_NOSE = ((30.0, -30.0), (50.0, -30.0), (50.0, 30.0), (30.0, 30.0))

# Slotted effector plate (slot opens toward -x, 62 wide x 40 deep).
_EFF_TOP_BAR = ((-50.0, 31.0), (20.0, 31.0), (20.0, 60.0), (-50.0, 60.0))
_EFF_BOTTOM_BAR = ((-50.0, -60.0), (20.0, -60.0), (20.0, -31.0), (-50.0, -31.0))
_EFF_BACK_BAR = ((-10.0, -31.0), (20.0, -31.0), (20.0, 31.0), (-10.0, 31.0))

# Single-pushing tip: two angled prongs forming a shallow centering vee.
_PRONG_TOP = ((20.0, 6.0), (50.0, 16.0), (50.0, 22.0), (20.0, 14.0))
_PRONG_BOTTOM = ((20.0, -14.0), (50.0, -22.0), (50.0, -16.0), (20.0, -6.0))

# Multi-pushing pocket: back plate plus two arms (68 um mouth).
_POCKET_BACK = ((20.0, -42.0), (26.0, -42.0), (26.0, 42.0), (20.0, 42.0))
_POCKET_TOP_ARM = ((26.0, 34.0), (50.0, 34.0), (50.0, 42.0), (26.0, 42.0))
_POCKET_BOTTOM_ARM = ((26.0, -42.0), (50.0, -42.0), (50.0, -34.0), (26.0, -34.0))

# Gripper effector plate (jaws attach at x = -10).
_GRIPPER_PLATE = ((-10.0, -60.0), (20.0, -60.0), (20.0, 60.0), (-10.0, 60.0))
_JAW_THICKNESS = 18.0  # hard 6 + soft 12


class BodyKind(enum.Enum):
    TYPE1_BASE = "Type1Base"
    TYPE2_BASE = "Type2Base"
    EFFECTOR_SINGLE = "EndEffectorSingle"
    EFFECTOR_MULTI = "EndEffectorMulti"
    EFFECTOR_GRIPPER = "EndEffectorGripper"
    SPHERE = "Sphere"
    WALL = "Wall"


BASE_KINDS = (BodyKind.TYPE1_BASE, BodyKind.TYPE2_BASE)
EFFECTOR_KINDS = (
    BodyKind.EFFECTOR_SINGLE,
    BodyKind.EFFECTOR_MULTI,
    BodyKind.EFFECTOR_GRIPPER,
)


@dataclass
class Body:
    id: str
    kind: BodyKind
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    swell: SwellState | None = None
    magnetic: MagneticBase | None = None
    gripper: bilayer_mod.GripperSpec | None = None
    lp_mw: float = 12.0
    radius_um: float = SPHERE_RADIUS_DEFAULT  # spheres only
    half_w: float = 0.0  # walls only
    half_h: float = 0.0
    movable: bool = True
    # updated by the world each tick for gripper effectors
    aperture: bilayer_mod.ApertureReport | None = None
    _pieces_cache: tuple = field(default=None, repr=False, compare=False)
    _cache_key: tuple = field(default=None, repr=False, compare=False)
    _aabb_cache: tuple = field(default=None, repr=False, compare=False)
    _aabb_cache_key: tuple = field(default=None, repr=False, compare=False)
    _piece_aabb_cache: tuple = field(default=None, repr=False, compare=False)
    _piece_aabb_key: tuple = field(default=None, repr=False, compare=False)

    @property
    def pose(self):
        return (self.x, self.y, self.theta)

    @property
    def lam(self):
        return self.swell.lam if self.swell is not None else 1.0

    def set_pose(self, x, y, theta):
        self.x, self.y, self.theta = x, y, theta
        self._cache_key = None

    def invalidate_shape(self):
        self._cache_key = None

    def local_pieces(self):
        """Body-frame convex pieces (collision set)."""
        lam = self.lam
        k = self.kind
        if k in BASE_KINDS:
            pieces = [("poly", _BASE_MAIN), ("poly", _BASE_NOSE)]
            pieces.append(("poly", _pin_polygon(lam if k is BodyKind.TYPE1_BASE else 1.0)))
            return pieces
        if k is BodyKind.EFFECTOR_SINGLE:
            return [
                ("poly", _EFF_TOP_BAR),
                ("poly", _EFF_BOTTOM_BAR),
                ("poly", _EFF_BACK_BAR),
                ("poly", _PRONG_TOP),
                ("poly", _PRONG_BOTTOM),
            ]
        if k is BodyKind.EFFECTOR_MULTI:
            return [
                ("poly", _EFF_TOP_BAR),
                ("poly", _EFF_BOTTOM_BAR),
                ("poly", _EFF_BACK_BAR),
                ("poly", _POCKET_BACK),
                ("poly", _POCKET_TOP_ARM),
                ("poly", _POCKET_BOTTOM_ARM),
            ]
        if k is BodyKind.EFFECTOR_GRIPPER:
            return [
                ("poly", _GRIPPER_PLATE),
                ("poly", _POCKET_BACK),
                ("poly", _POCKET_TOP_ARM),
                ("poly", _POCKET_BOTTOM_ARM),
            ]
        if k is BodyKind.SPHERE:
            return [("circle", (0.0, 0.0, self.radius_um))]
        # wall
        w, h = self.half_w, self.half_h
        return [("poly", ((-w, -h), (w, -h), (w, h), (-w, h)))]

    def pieces(self):
        """World-frame collision pieces, cached against pose and swelling."""
        key = (self.x, self.y, self.theta, self.lam)
        if self._cache_key == key:
            return self._pieces_cache
        cos_t, sin_t = math.cos(self.theta), math.sin(self.theta)
        out = []
        for kind, data in self.local_pieces():
            if kind == "poly":
                out.append(("poly", geometry.transform(data, self.x, self.y, cos_t, sin_t)))
            else:
                cx, cy, r = data
                wx = self.x + cx * cos_t - cy * sin_t
                wy = self.y + cx * sin_t + cy * cos_t
                out.append(("circle", (wx, wy, r)))
        self._pieces_cache = tuple(out)
        self._cache_key = key
        return self._pieces_cache

    def piece_aabbs(self):
        """Per-piece world bounding boxes, cached alongside pieces()."""
        key = (self.x, self.y, self.theta, self.lam)
        if self._piece_aabb_key != key:
            self._piece_aabb_cache = tuple(geometry.piece_aabb(p) for p in self.pieces())
            self._piece_aabb_key = key
        return self._piece_aabb_cache

    def aabb(self):
        """World bounding box; the rotation-dependent part is cached so pure
        translation (the common case on the tick loop) costs a tuple add."""
        key = (self.theta, self.lam)
        if self._aabb_cache_key != key:
            cos_t, sin_t = math.cos(self.theta), math.sin(self.theta)
            lo_x = lo_y = math.inf
            hi_x = hi_y = -math.inf
            for kind, data in self.local_pieces():
                if kind == "poly":
                    for px, py in data:
                        wx = px * cos_t - py * sin_t
                        wy = px * sin_t + py * cos_t
                        lo_x, hi_x = min(lo_x, wx), max(hi_x, wx)
                        lo_y, hi_y = min(lo_y, wy), max(hi_y, wy)
                else:
                    cx, cy, r = data
                    wx = cx * cos_t - cy * sin_t
                    wy = cx * sin_t + cy * cos_t
                    lo_x, hi_x = min(lo_x, wx - r), max(hi_x, wx + r)
                    lo_y, hi_y = min(lo_y, wy - r), max(hi_y, wy + r)
            self._aabb_cache = (lo_x, lo_y, hi_x, hi_y)
            self._aabb_cache_key = key
        lo_x, lo_y, hi_x, hi_y = self._aabb_cache
        return (lo_x + self.x, lo_y + self.y, hi_x + self.x, hi_y + self.y)

    def outline(self):
        """Render outline: collision pieces plus non-colliding jaw bars."""
        pieces = list(self.pieces())
        if self.kind is BodyKind.EFFECTOR_GRIPPER and self.gripper is not None:
            opening = self.aperture.opening_deg if self.aperture is not None else 0.0
            cos_t, sin_t = math.cos(self.theta), math.sin(self.theta)
            for jaw in _jaw_polygons(self.gripper, opening):
                pieces.append(("poly", geometry.transform(jaw, self.x, self.y, cos_t, sin_t)))
        return pieces

    def male_width_um(self):
        if self.kind is BodyKind.TYPE1_BASE:
            return PIN_DESIGNED_WIDTH * self.lam
        if self.kind is BodyKind.TYPE2_BASE:
            return PIN_DESIGNED_WIDTH
        return None

    def port(self):
        """World-frame mating port: (x, y, axis_angle).

        Bases carry it at the pin root facing +x; effectors at the slot mouth
        facing +x.  Ports coincide when the pair is fully mated.
        """
        if self.kind in BASE_KINDS:
            local = (50.0, 0.0)
        elif self.kind in EFFECTOR_KINDS:
            local = (-50.0, 0.0)
        else:
            return None
        cos_t, sin_t = math.cos(self.theta), math.sin(self.theta)
        return (
            self.x + local[0] * cos_t - local[1] * sin_t,
            self.y + local[0] * sin_t + local[1] * cos_t,
            self.theta,
        )


def _pin_polygon(lam):
    w = PIN_DESIGNED_WIDTH * lam / 2.0
    length = PIN_DESIGNED_LENGTH * lam
    return ((50.0, -w), (50.0 + length, -w), (50.0 + length, w), (50.0, w))


def _jaw_polygons(grip, opening_deg):
    """Jaw bars rotated about their roots by the (positive-out) opening angle."""
    gap = grip.jaw_gap_closed_um
    out = []
    for sign, spec in ((1.0, grip.left), (-1.0, grip.right)):
        root_y = sign * gap / 2.0
        # jaws extend toward -x; a negative local rotation swings this tip outward
        ang = -sign * math.radians(max(opening_deg, 0.0))
        c, s = math.cos(ang), math.sin(ang)
        local = (
            (0.0, 0.0),
            (-spec.length_um, 0.0),
            (-spec.length_um, sign * _JAW_THICKNESS),
            (0.0, sign * _JAW_THICKNESS),
        )
        # rotate about the root (-10, root_y); opening swings tips outward
        poly = tuple(
            (
                -10.0 + (px * c - py * s),
                root_y + (px * s + py * c),
            )
            for px, py in local
        )
        out.append(poly)
    return out


def make_type1_base(body_id, x=0.0, y=0.0, theta=0.0, lam=1.0, lam_eq=1.0, lp_mw=12.0, moment_am2=DEFAULT_MOMENT_TYPE1_AM2):
    return Body(
        id=body_id,
        kind=BodyKind.TYPE1_BASE,
        x=x,
        y=y,
        theta=theta,
        swell=SwellState(lam=lam, lam_eq=lam_eq),
        magnetic=MagneticBase(moment_am2=moment_am2),
        lp_mw=lp_mw,
    )


def make_type2_base(body_id, x=0.0, y=0.0, theta=0.0, moment_am2=DEFAULT_MOMENT_TYPE2_AM2):
    return Body(
        id=body_id,
        kind=BodyKind.TYPE2_BASE,
        x=x,
        y=y,
        theta=theta,
        magnetic=MagneticBase(moment_am2=moment_am2),
    )


def make_effector(body_id, kind, x=0.0, y=0.0, theta=0.0, gel_params=None, lam=1.0, lam_eq=1.0, lp_mw=12.0):
    kind = BodyKind(kind) if not isinstance(kind, BodyKind) else kind
    if kind not in EFFECTOR_KINDS:
        raise ValueError(f"{kind} is not an end-effector kind")
    grip = None
    swell = None
    if kind is BodyKind.EFFECTOR_GRIPPER:
        grip = bilayer_mod.GripperSpec.default(gel_params)
        swell = SwellState(lam=lam, lam_eq=lam_eq)  # jaw soft layers are responsive
    return Body(id=body_id, kind=kind, x=x, y=y, theta=theta, gripper=grip, swell=swell, lp_mw=lp_mw)


def make_sphere(body_id, x=0.0, y=0.0, radius_um=SPHERE_RADIUS_DEFAULT):
    return Body(id=body_id, kind=BodyKind.SPHERE, x=x, y=y, radius_um=radius_um)


def make_wall(body_id, cx, cy, width_um, height_um):
    return Body(
        id=body_id,
        kind=BodyKind.WALL,
        x=cx,
        y=cy,
        half_w=width_um / 2.0,
        half_h=height_um / 2.0,
        movable=False,
    )


def mated_base_pose(effector):
    """Pose that fully seats a base in the given effector."""
    cos_t, sin_t = math.cos(effector.theta), math.sin(effector.theta)
    return (
        effector.x - MATED_BASE_OFFSET * cos_t,
        effector.y - MATED_BASE_OFFSET * sin_t,
        effector.theta,
    )
