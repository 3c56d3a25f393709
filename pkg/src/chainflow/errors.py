"""Exception types raised across the chainflow pipeline."""

from __future__ import annotations


class ChainflowError(Exception):
    """Base class for all chainflow-specific errors."""


class SchemaError(ChainflowError):
    """An input line violates the dataset schema (missing field, bad hash, ...)."""


class FormatVersionError(ChainflowError):
    """A persisted graph directory has a missing or incompatible format header."""


class ConfigError(ChainflowError):
    """A configuration file or flag value is invalid or unknown."""


class EmptySequence(ChainflowError):
    """Pattern matching was asked to classify an empty event multiset."""


class PatternMismatch(ChainflowError):
    """An event list does not realize the pattern it was paired with."""


class DanglingUuid(ChainflowError):
    """A step references an action uuid that is absent from the catalogue."""


class UnknownAddress(ChainflowError):
    """The requested address has no user node in the behaviour graph."""


class EmptyCluster(ChainflowError):
    """A general flow was requested for an empty set of user flows."""


class IneligibleFlow(ChainflowError):
    """A flow fails the embedding eligibility rules (extended, >= 4 distinct actions)."""


class ShapeMismatch(ChainflowError):
    """Tensor shapes are inconsistent with the model dimensions."""


class DivergenceError(ChainflowError):
    """The training loss became non-finite."""


class DegenerateInput(ChainflowError):
    """Input data is degenerate for the requested operation (e.g. all points equal)."""


class NoConvergence(ChainflowError):
    """An iterative algorithm hit its iteration cap; carries the partial result."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class SingularAffinity(ChainflowError):
    """The affinity matrix cannot be normalized (duplicate-only or isolated data)."""


class UndefinedScore(ChainflowError):
    """A validity index is undefined (k < 2, empty cluster, or n <= k)."""


class EmptyFlow(ChainflowError):
    """A metric was requested on a general flow without action nodes."""


class NoUsage(ChainflowError):
    """The NFT distribution metric is undefined because total usage is zero."""


class InvalidSpec(ChainflowError):
    """A synthetic archetype specification violates its invariants."""


class UnsupportedFormat(ChainflowError):
    """The requested export format is not supported."""
