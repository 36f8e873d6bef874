"""Exception taxonomy shared across the package."""

from __future__ import annotations


class RunLensError(Exception):
    """Base class for all errors raised by this package."""


class LoadError(RunLensError):
    """A run document or dataset file violates the interchange contract.

    ``path`` names the offending location, e.g. ``$.candidates[2].config``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


class ValidationError(RunLensError):
    """A loaded value violates a model invariant."""


class NotFoundError(RunLensError):
    """An id (run, candidate, hyperparameter, node) does not exist."""


class MergeError(RunLensError):
    """Search spaces cannot be merged (incompatible declarations)."""


class UnsupportedPrimitiveError(RunLensError):
    """A pipeline references primitives outside the built-in zoo."""

    def __init__(self, names):
        self.names = tuple(sorted(set(names)))
        super().__init__("unsupported primitives: " + ", ".join(self.names))


class UnsupportedTopologyError(RunLensError):
    """The requested operation is undefined for this pipeline shape."""


class InsufficientDataError(RunLensError):
    """Not enough scored observations to run the analysis."""


class DegenerateInputError(RunLensError):
    """Input has no usable variance (kernel collapse, flat surface, ...)."""
