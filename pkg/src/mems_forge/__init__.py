"""Local-channel synthesis and simulation of maximally entangled mixed photon states."""

from . import bench, channel, qstate, tomo
from .errors import (ConversionError, DegenerateDeviceError, DomainError, MemsForgeError,
                     PhysicalityError, PostselectionError, ReconstructionError, StateError,
                     SynthesisError)

__version__ = "0.1.0"

__all__ = [
    "bench", "channel", "qstate", "tomo",
    "ConversionError", "DegenerateDeviceError", "DomainError", "MemsForgeError",
    "PhysicalityError", "PostselectionError", "ReconstructionError", "StateError",
    "SynthesisError",
]
