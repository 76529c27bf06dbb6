"""Exception types and validation diagnostics shared across the toolkit."""

from __future__ import annotations

from dataclasses import dataclass


class VeintexError(Exception):
    """Base class for every error raised by this package."""


# -- markup ------------------------------------------------------------

class MalformedInput(VeintexError):
    """Input is not well-formed markup (tag soup, bad content, bad id)."""


class UnknownTag(VeintexError):
    """A tag outside the fixed element vocabulary was encountered."""


class DuplicateId(VeintexError):
    """Two elements carry the same identifier (case-insensitive)."""


# -- view graph --------------------------------------------------------

class CycleDetected(VeintexError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cycle among views: " + " -> ".join(self.cycle))


class UnknownParent(VeintexError):
    pass


class DuplicateViewId(VeintexError):
    pass


class UnifyConflict(VeintexError):
    """Parents disagree about an element with the same id."""


class DanglingPatch(VeintexError):
    """A patch or tombstone names an id absent from the effective document."""


class InvalidAnchor(VeintexError):
    pass


class CannotDeleteRoot(VeintexError):
    pass


# -- discourse tree ----------------------------------------------------

class TreeError(VeintexError):
    pass


class MultipleRoots(TreeError):
    pass


class NoRoot(TreeError):
    pass


class TargetReuse(TreeError):
    pass


class NonBinaryLink(TreeError):
    pass


class EmptyNuclei(TreeError):
    pass


class NonContiguousSpan(TreeError):
    pass


class SiteNotOpen(TreeError):
    pass


class SpanMismatch(TreeError):
    pass


class BadEdge(TreeError):
    pass


# -- analysis ----------------------------------------------------------

class UnmappedRS(VeintexError):
    """A reference string is not assigned to any discourse unit."""


class TooFewUnits(VeintexError):
    pass


# -- service -----------------------------------------------------------

class StaleVersion(VeintexError):
    def __init__(self, expected, got):
        self.expected = expected
        self.got = got
        super().__init__(f"edit built against version {got}, session is at {expected}")


class PrerequisiteMissing(VeintexError):
    """An analysis was requested before the annotation supports it."""


class BindFailure(VeintexError):
    pass


@dataclass
class Diagnostic:
    """One validation finding; never raised, always collected."""

    code: str
    message: str
    element_id: str | None = None
    attribute: str | None = None
    token: str | None = None
    line: int | None = None
    column: int | None = None

    def __str__(self):
        where = ""
        if self.line is not None:
            where = f" (line {self.line})"
        return f"{self.code}: {self.message}{where}"
