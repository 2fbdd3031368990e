"""Exceptions raised by the island particle filter library."""


class IslandPfError(Exception):
    """Base class for all library errors."""


class ZeroMass(IslandPfError):
    """A measure was asked to normalize by a vanishing total mass."""


class Extinction(ZeroMass):
    """Every potential in a population (or along the exact flow) is zero.

    Carries the failing step index in ``step`` when known.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class EpsilonOutOfRange(IslandPfError):
    """A realized epsilon violates eps * G(x) <= 1 on the current support."""


class IndexOrder(IslandPfError):
    """Kernel requested with from_step > to_step."""


class Unsupported(IslandPfError):
    """Operation needs exact kernel access but the model is sampler-only."""


class InvalidTables(IslandPfError):
    """Explicit finite-model tables violate the model invariants."""


class MissingCell(IslandPfError):
    """A summary table lacks a cell required for a comparison."""
