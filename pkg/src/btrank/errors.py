"""Exception types raised deliberately by this package."""

from __future__ import annotations


class BtrankError(Exception):
    """Base class for all errors raised by btrank."""


class ParseError(BtrankError):
    """Malformed input file or record; message carries the line or element index."""


class SelfPlayError(BtrankError):
    """A game record lists the same team on both sides."""


class ShapeError(BtrankError):
    """A matrix input has the wrong shape or an unusable size."""


class NegativeCountError(BtrankError):
    """A count matrix contains a negative entry."""


class EmptyInputError(BtrankError):
    """No records to aggregate."""


class VenuelessDataError(BtrankError):
    """A venue-aware operation was asked of data without home/away structure."""


class NonPositiveEpsilonError(BtrankError):
    """A perturbation magnitude must be strictly positive."""


class DimensionError(BtrankError):
    """A parameter point does not match the model's free dimension."""


class ThetaDomainError(BtrankError):
    """The tie parameter lies outside the model's admissible domain."""


class NoTiesError(BtrankError):
    """The model requires at least one observed tie and the data have none."""


class ExistenceError(BtrankError):
    """The estimate does not exist for these data; carries a witness partition.

    The ``witness`` attribute, when present, is a
    :class:`btrank.types.PartitionWitness` demonstrating the violated
    connectivity condition.
    """

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NonConvergenceError(BtrankError):
    """An iteration budget ran out before the requested tolerance was met."""


class ConfigError(BtrankError):
    """An invalid configuration value or combination."""
