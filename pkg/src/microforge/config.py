"""Workbench configuration: built-in defaults plus JSON overrides.

A config document is a JSON object; every section and field is optional and
merges over the defaults below.  The path comes from --config or the
MICROFORGE_CONFIG environment variable.  Schema in docs/formats.md.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace

from .errors import SchemaError
from .gel import CompositionCalibration, HydrogelParams
from .kinetics import KineticsParams
from .magnetics import (
    DEFAULT_B_ALIGN_T,
    DEFAULT_COIL_LIMIT_T_PER_M,
    DEFAULT_DT_MAX_S,
    DragModel,
)

ENV_VAR = "MICROFORGE_CONFIG"
CONFIG_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class MateConfig:
    """Clearance rules for the male pin / female slot connection.

    The designed pin is 60 um across against a 62 um slot.  Insertion demands
    2.5 um of clearance (pin at or below 59.5 um), interference locking engages
    once the pin regrows to 60 um, so the gates never overlap and the lock
    fires near ratio 1 as the pin recovers in 40% water.
    """

    slot_width_um: float = 62.0
    slot_depth_um: float = 40.0
    insert_clearance_um: float = 2.5
    lock_interference_um: float = 2.0
    lateral_tol_um: float = 5.0
    angular_tol_deg: float = 5.0
    axial_window_um: tuple = (-10.0, 2.0)
    approach_radius_um: float = 250.0
    detach_lambda: float = 0.80
    detach_separation_um: float = 10.0
    lock_phi_target: float = 0.40
    detach_phi_target: float = 1.00
    phi_target_tol: float = 0.15
    wall_proximity_um: float = 2.5


@dataclass(frozen=True)
class WorldConfig:
    exchange_tau_s: float = 2.0
    dt_max_s: float = DEFAULT_DT_MAX_S
    coil_limit_t_per_m: float = DEFAULT_COIL_LIMIT_T_PER_M
    b_align_t: float = DEFAULT_B_ALIGN_T
    channel_height_um: float = 300.0  # informational; dynamics are planar
    # hydrogel-bearing bases drag against the substrate in water-rich solvent
    sticky_phi_threshold: float = 0.8
    stick_force_n: float = 5e-10


@dataclass(frozen=True)
class Config:
    gel: HydrogelParams = field(default_factory=HydrogelParams)
    kinetics: KineticsParams = field(default_factory=KineticsParams)
    drag: DragModel = field(default_factory=DragModel)
    mate: MateConfig = field(default_factory=MateConfig)
    world: WorldConfig = field(default_factory=WorldConfig)
    # optional per-laser-power calibration tables {lp_mw: anchors}
    per_lp_anchors: dict = field(default_factory=dict)

    def calibration_for_lp(self, lp_mw):
        """Swelling calibration for a part printed at the given laser power.

        Falls back to the default table when no per-LP anchors are configured;
        otherwise picks the nearest configured key.
        """
        if not self.per_lp_anchors:
            return self.gel.calibration
        key = min(self.per_lp_anchors, key=lambda k: abs(k - lp_mw))
        return self.per_lp_anchors[key]


def default_config():
    return Config()


def load_config(path=None):
    """Config from a JSON file, the MICROFORGE_CONFIG env var, or defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path is None:
        return default_config()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read config: {exc}", path=str(path))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config is not valid JSON: {exc}", path=str(path))
    return config_from_dict(doc)


def config_from_dict(doc):
    if not isinstance(doc, dict):
        raise SchemaError("config document must be a JSON object")
    version = doc.get("schema_version", CONFIG_SCHEMA_VERSION)
    if version != CONFIG_SCHEMA_VERSION:
        raise SchemaError(f"unsupported config schema_version {version}")
    cfg = default_config()
    try:
        if "gel" in doc:
            g = doc["gel"]
            calibration = (
                CompositionCalibration(g["anchors"])
                if "anchors" in g
                else cfg.gel.calibration
            )
            gel = HydrogelParams(
                nv=g.get("nv", cfg.gel.nv),
                lambda0=g.get("lambda0", cfg.gel.lambda0),
                chi=g.get("chi", cfg.gel.chi),
                calibration=calibration,
            )
            cfg = replace(cfg, gel=gel)
            if "per_lp_anchors" in g:
                tables = {
                    float(lp): CompositionCalibration(anchors)
                    for lp, anchors in g["per_lp_anchors"].items()
                }
                cfg = replace(cfg, per_lp_anchors=tables)
        if "kinetics" in doc:
            k = doc["kinetics"]
            kin = KineticsParams(
                tau_fast_s=k.get("tau_fast_s", cfg.kinetics.tau_fast_s),
                tau_slow_s=k.get("tau_slow_s", cfg.kinetics.tau_slow_s),
                lp_speedup=tuple(
                    (float(a), float(b)) for a, b in k.get("lp_speedup", cfg.kinetics.lp_speedup)
                ),
            )
            cfg = replace(cfg, kinetics=kin)
        if "drag" in doc:
            d = doc["drag"]
            cfg = replace(
                cfg,
                drag=DragModel(
                    c_translation=d.get("c_translation", cfg.drag.c_translation),
                    c_rotation=d.get("c_rotation", cfg.drag.c_rotation),
                    wall_amplification=d.get("wall_amplification", cfg.drag.wall_amplification),
                ),
            )
        if "mate" in doc:
            m = dict(doc["mate"])
            if "axial_window_um" in m:
                m["axial_window_um"] = tuple(m["axial_window_um"])
            cfg = replace(cfg, mate=replace(cfg.mate, **m))
        if "world" in doc:
            cfg = replace(cfg, world=replace(cfg.world, **doc["world"]))
    except (TypeError, ValueError, KeyError) as exc:
        raise SchemaError(f"bad config value: {exc}")
    return cfg
