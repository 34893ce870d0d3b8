"""Exception hierarchy shared by all modules."""


class MemsForgeError(Exception):
    pass


class DomainError(MemsForgeError, ValueError):
    """A parameter lies outside the domain of the requested operation."""


class StateError(MemsForgeError, ValueError):
    """A matrix fails the density-matrix checks (Hermitian, unit trace, PSD)."""


class SynthesisError(MemsForgeError):
    """The reshuffled initial state cannot be inverted reliably."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class PhysicalityError(MemsForgeError):
    """The map's H matrix is not positive semidefinite.

    The offending :class:`~mems_forge.channel.PhysicalityReport` is kept on
    ``report`` so callers can print or serialize it.
    """

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class PostselectionError(MemsForgeError):
    """Every photon was absorbed; the output state has zero trace."""


class ConversionError(MemsForgeError):
    """The complex Mueller matrix does not map to a real one."""


class DegenerateDeviceError(MemsForgeError, ValueError):
    """An optical device transmits nothing."""


class ReconstructionError(MemsForgeError):
    """Tomographic data cannot support a reconstruction."""
