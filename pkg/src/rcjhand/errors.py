"""Exception types shared across the package.

Every error raised on bad user input derives from RcjHandError so callers
(and the CLI) can map the whole family to a single exit path.
"""


class RcjHandError(Exception):
    """Base class for all rcjhand errors."""


class InvalidGeometryError(RcjHandError):
    """A geometric parameter set is physically impossible (e.g. zero-length link)."""


class RomViolationError(RcjHandError):
    """One or more joint angles fall outside their range of motion.

    Attributes:
        offenders: list of (joint_index, angle_deg, rom_min, rom_max)
    """

    def __init__(self, message, offenders=None):
        super().__init__(message)
        self.offenders = list(offenders or [])


class UnknownTendonError(RcjHandError):
    """Requested tendon name is not part of the routing plan."""


class UnknownPairError(RcjHandError):
    """Requested antagonistic pair is not in the pairing table."""


class UnknownPresetError(RcjHandError):
    """Requested pose preset does not exist in the catalog."""


class CouplingViolationError(RcjHandError):
    """Pose does not satisfy the underactuation coupling rule."""


class UnreachablePayoutError(RcjHandError):
    """Motor payout lies outside the range reachable within the ROM."""


class ConvergenceError(RcjHandError):
    """Iterative solver failed to reach its tolerance.

    Attributes:
        residual: final residual of the solve, in the solver's units
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NoMinimumError(RcjHandError):
    """Radius search is monotone to a boundary; no interior minimum exists."""


class ResolutionMismatchError(RcjHandError):
    """Voxel grids have incompatible lattices and re-rasterization is disabled."""


class ConfigError(RcjHandError):
    """Configuration document failed to parse or validate.

    Attributes:
        key: dotted path of the offending key, when known
    """

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
