"""Exception types shared across the package.

Everything derives from SimulationError so callers can catch broadly;
most also subclass ValueError/RuntimeError to stay friendly to generic
handling.
"""


class SimulationError(Exception):
    """Base class for all mzsim errors."""


class DimensionError(SimulationError, ValueError):
    """Matrix/state shapes are inconsistent (non-square, mode mismatch)."""


class SizeLimitError(SimulationError, ValueError):
    """Photon number exceeds the supported permanent size."""


class PhotonConservationError(SimulationError, ValueError):
    """Input and output states carry different total photon numbers."""


class UnitarityError(SimulationError, ValueError):
    """A matrix expected to be unitary fails the tolerance check."""


class UnsupportedModelError(SimulationError, ValueError):
    """Requested physics lies outside the implemented model."""


class ConfigError(SimulationError, ValueError):
    """Invalid scenario configuration. `location` names the offending
    section/key (or file line) when known."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class FitError(SimulationError, RuntimeError):
    """Nonlinear fit failed. `diagnostics` holds optimizer state useful
    for debugging (iteration count, last parameters, cost)."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class DegenerateDataError(FitError):
    """Data carry no usable variation (e.g. all rates identical)."""


class CoverageError(FitError):
    """Scan does not span enough of the model (too few points or too
    small a phase range) to constrain the fit."""
