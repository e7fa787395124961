"""Exception types shared across the package."""


class EgwishError(Exception):
    """Base class for all package-specific errors."""


class NotPD(EgwishError):
    """A matrix required to be symmetric positive definite is not."""


class NotDecomposable(EgwishError):
    """An operation requiring a decomposable (chordal) graph got a non-chordal one."""


class InvalidPair(EgwishError):
    """A vertex pair is out of range or names a diagonal position."""


class SupportViolation(EgwishError):
    """A matrix has a nonzero entry at a position the graph forbids."""


class DimensionMismatch(EgwishError):
    """Array shapes disagree with the graph or with each other."""


class EmptyChain(EgwishError):
    """A chain was asked for summaries but retained no samples."""


class DegenerateDraw(EgwishError):
    """Random model generation failed to produce a usable draw."""


class SeedRequired(EgwishError):
    """Deterministic mode was requested without a seed."""
