"""Exception types shared across the package."""

from __future__ import annotations


class SumkitError(Exception):
    """Base class for all package-specific errors."""


class InvalidWeightError(SumkitError):
    """A weight sequence produced a zero (or otherwise unusable) term."""

    def __init__(self, which: str, index: int, reason: str = "is zero"):
        self.which = which
        self.index = index
        super().__init__(f"weight {which}[{index}] {reason}")


class SingularTriangleError(SumkitError):
    """Back-substitution hit a zero diagonal entry."""

    def __init__(self, row: int, detail: str = "zero diagonal entry"):
        self.row = row
        super().__init__(f"cannot invert triangle: {detail} at row {row}")


class UnsupportedRowError(SumkitError):
    """A row-evaluable matrix was applied without a usable row bound."""


class UnsupportedSpaceError(SumkitError):
    """The requested operation is not defined for the given space."""


class UnsupportedClassError(SumkitError):
    """No characterization recipe covers the requested (source, target) pair."""

    def __init__(self, source: str, target: str, detail: str = ""):
        self.source = source
        self.target = target
        msg = f"no recipe for the class ({source} : {target})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class ScheduleError(SumkitError):
    """A truncation schedule failed validation."""


class SpecParseError(SumkitError):
    """A command-line literal (weights, sequence, matrix, schedule) failed to parse."""
