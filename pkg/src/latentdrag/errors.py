"""Exception types shared across the package."""


class LatentDragError(Exception):
    """Base class for all package-specific errors."""


class BadShape(LatentDragError):
    """Array dimensions do not agree with what the operation requires."""


class BadConfig(LatentDragError):
    """A configuration value violates its documented domain."""


class DegenerateData(LatentDragError):
    """Input data carries too little variance to be decomposed."""


class NonFiniteGradient(LatentDragError):
    """A gradient contains NaN or infinity."""


class NonFiniteLatent(LatentDragError):
    """A latent contains NaN or infinity."""


class OutOfBounds(LatentDragError):
    """A point lies outside the addressable raster."""


class EmptySeries(LatentDragError):
    """A sequence operation received no elements."""


class AllConverged(LatentDragError):
    """Every handle pair is already within the stopping distance."""


class ShapeMismatch(LatentDragError):
    """Raster shapes of two operands differ."""


class EmptyResults(LatentDragError):
    """An aggregation received no run records."""


class OutputUnwritable(LatentDragError):
    """The requested output location cannot be written."""
