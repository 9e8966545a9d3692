"""Exception hierarchy shared across the package.

Every error raised by darkspace derives from DarkspaceError so callers can
catch the whole family; the CLI maps ConfigError to exit code 2 and
ComputeError to exit code 3.
"""


class DarkspaceError(Exception):
    """Base class for all darkspace errors."""


class ConfigError(DarkspaceError):
    """Invalid configuration, input file, or argument (CLI exit code 2)."""


class ComputeError(DarkspaceError):
    """A computation could not be carried out (CLI exit code 3)."""


# --- TLE parsing -----------------------------------------------------------

class TleError(ConfigError):
    """Malformed two-line element set. Carries line number and column."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class LineLength(TleError):
    pass


class ChecksumMismatch(TleError):
    pass


class FieldSyntax(TleError):
    pass


# --- Orbit propagation -----------------------------------------------------

class PropagationError(ComputeError):
    pass


class DecayedOrbit(PropagationError):
    """SGP4 reported the satellite has decayed (or elements are unusable)."""


class EpochTooFar(PropagationError):
    """Requested time is more than the accuracy guard away from the epoch."""


class DeepSpaceUnsupported(PropagationError):
    """TLE describes a deep-space orbit (period >= 225 min); only the
    near-Earth SGP4 branch is implemented."""


# --- Radiometer geometry ---------------------------------------------------

class NotPhaseLocked(ConfigError):
    """Pixel-level scan phase requested for a radiometer whose scanning
    mechanism is not predictable; fall back to scan-line geofencing."""


class NoIntersection(ComputeError):
    """Boresight ray misses the Earth ellipsoid (malformed spec)."""


# --- Geofencing ------------------------------------------------------------

class EmptyConstellation(ConfigError):
    pass


class WindowTooLarge(ConfigError):
    pass


# --- Link budget -----------------------------------------------------------

class NonPositiveInput(ConfigError):
    pass


class ElevationNonPositive(ConfigError):
    pass


class TableOutOfRange(ComputeError):
    pass


class ZeroDenominator(ConfigError):
    pass


class RatioNotAboveOne(ConfigError):
    pass


# --- Interference simulation -----------------------------------------------

class EmptyArea(ConfigError):
    pass


class NoSamples(ConfigError):
    pass


# --- Experiment planning ----------------------------------------------------

class NegativeLowEdge(ConfigError):
    pass
