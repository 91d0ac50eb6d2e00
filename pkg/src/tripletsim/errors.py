"""Exception hierarchy shared across the package.

Configuration problems raise :class:`ConfigError` (CLI exit code 1);
everything that goes wrong while simulating or fitting derives from
:class:`SimulationError` (CLI exit code 2).
"""


class ConfigError(Exception):
    """Invalid, unknown, or physically inconsistent configuration input."""


class SimulationError(Exception):
    """Base class for runtime and physics errors."""


class InvalidParameterError(SimulationError, ValueError):
    """A parameter value is outside its physical or numerical domain."""


class ProtocolViolationError(SimulationError):
    """A pulse sequence breaks the constraints of the protocol it is used in."""


class DegenerateReadoutError(SimulationError):
    """Readout normalization is impossible (zero reference emission)."""


class DegenerateFitError(SimulationError):
    """The fit cannot proceed (singular Jacobian or unsolvable step)."""


class FlatDataError(SimulationError):
    """Input data carry no usable structure (constant within tolerance)."""
