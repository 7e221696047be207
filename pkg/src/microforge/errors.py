"""Exception types shared across the workbench."""


class MicroforgeError(Exception):
    """Base class for all workbench errors."""


class GelDomainError(MicroforgeError, ValueError):
    """Volume ratio at or below the dry-state floor (log argument non-positive)."""


class NoRootError(MicroforgeError):
    """No equilibrium root inside the physical bracket; calibration out of range."""


class StepTooLargeError(MicroforgeError):
    """Integration step exceeds the configured maximum."""


class InvalidCommandError(MicroforgeError):
    """Field command addressed to an unknown or non-magnetic body."""


class KindMismatchError(MicroforgeError):
    """Mate geometry queried on bodies that do not form a male/female pair."""


class NotMatedError(MicroforgeError):
    """Detach feasibility queried on a pair that is not mated."""


class NoContactError(MicroforgeError):
    """Release maneuver requested without any pushing contact."""


class IllegalTransitionError(MicroforgeError):
    """Commanded mating-state transition violates the protocol graph or guards."""


class MissingConstraintWallsError(MicroforgeError):
    """Single-layer-pin detach plan requires constraint walls absent from the world."""


class SchemaError(MicroforgeError):
    """Scenario or config document does not match the documented schema."""

    def __init__(self, message, path=None):
        super().__init__(message if path is None else f"{path}: {message}")
        self.path = path


class ScenarioAssertionError(MicroforgeError):
    """A scripted scenario assertion failed."""

    def __init__(self, message, time_s=None, predicate=None):
        super().__init__(message)
        self.time_s = time_s
        self.predicate = predicate


class GridError(MicroforgeError):
    """Invalid parameter grid supplied to a sweep."""


class UnreachableWaypointError(MicroforgeError):
    """Waypoint follower stalled beyond its tick budget."""
