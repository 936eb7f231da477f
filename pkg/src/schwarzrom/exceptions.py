"""Error taxonomy shared across the package."""


class SchwarzRomError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SchwarzRomError):
    """Invalid user-supplied configuration (grid sizes, overlap, mode counts, ...)."""


class StateError(SchwarzRomError):
    """Non-physical state encountered (negative depth/density/pressure).

    Carries the offending cell coordinates and value when known.
    """

    def __init__(self, message, cell=None, value=None):
        if cell is not None:
            message = f"{message} at cell {cell}" + ("" if value is None else f" (value {value!r})")
        super().__init__(message)
        self.cell = cell
        self.value = value


class SolverError(SchwarzRomError):
    """Nonlinear solve failed (non-convergence, singular system, breakdown)."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class CouplingError(SchwarzRomError):
    """Schwarz iteration failed to converge within the iteration budget."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history if history is not None else []


class IngestionError(SchwarzRomError):
    """Malformed or inconsistent on-disk artifact (snapshots, bases, tables)."""


class MetricError(SchwarzRomError):
    """Mismatched trajectories or missing baselines in the reporting layer."""


class InternalError(SchwarzRomError):
    """Invariant violation that indicates a bug, not bad input."""
