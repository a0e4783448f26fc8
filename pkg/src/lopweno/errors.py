"""Exception types raised by the solvers and kernels."""


class LopWenoError(Exception):
    """Base class for all package errors."""


class MissingProvider(LopWenoError):
    """A scheme needing auxiliary indicators was requested without a provider."""


class NonFiniteState(LopWenoError):
    """A NaN or Inf appeared in a Runge-Kutta stage."""

    def __init__(self, message, time=None, cell=None):
        super().__init__(message)
        self.time = time
        self.cell = cell


class NegativeDensity(LopWenoError):
    def __init__(self, cell):
        super().__init__(f"non-positive density in cell {cell}")
        self.cell = cell


class NegativePressure(LopWenoError):
    def __init__(self, cell):
        super().__init__(f"non-positive pressure in cell {cell}")
        self.cell = cell


class NegativeSoundSpeed(LopWenoError):
    pass


class VacuumFormation(LopWenoError):
    pass


class NoConvergence(LopWenoError):
    pass


class ZeroWaveSpeed(LopWenoError):
    pass


class ZeroBaseline(LopWenoError):
    pass


class DomainMismatch(LopWenoError):
    pass


class OutOfDomain(LopWenoError):
    pass
