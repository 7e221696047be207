"""microforge: desk-scale simulation workbench for solvent-actuated modular microrobots."""

__version__ = "0.1.0"

from .gel import HydrogelParams, CompositionCalibration, SwellState
from .kinetics import KineticsParams
from .bilayer import BilayerSpec, GripperSpec
from .magnetics import MagneticBase, FieldCommand, DragModel
from .world import World

__all__ = [
    "HydrogelParams",
    "CompositionCalibration",
    "SwellState",
    "KineticsParams",
    "BilayerSpec",
    "GripperSpec",
    "MagneticBase",
    "FieldCommand",
    "DragModel",
    "World",
]
