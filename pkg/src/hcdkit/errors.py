"""Exception hierarchy shared by every hcdkit module."""

from __future__ import annotations


class HcdError(Exception):
    """Base class for all domain errors raised by hcdkit."""


# --- PENMAN -----------------------------------------------------------------


class PenmanError(HcdError, ValueError):
    """A PENMAN string could not be read. ``offset`` is a UTF-8 byte offset."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class EmptyInput(PenmanError):
    pass


class UnbalancedParens(PenmanError):
    pass


class DuplicateVariableDefinition(PenmanError):
    pass


class DanglingVariableReference(PenmanError):
    pass


class DuplicateEdge(PenmanError):
    pass


class MalformedPenman(PenmanError):
    pass


class DisconnectedGraph(HcdError, ValueError):
    def __init__(self, variable: str):
        super().__init__(f"node {variable!r} is not connected to the root")
        self.variable = variable


# --- alignment --------------------------------------------------------------


class AlignmentError(HcdError, ValueError):
    def __init__(self, message: str, item: str = ""):
        super().__init__(f"{message}: {item!r}" if item else message)
        self.item = item


class SpanOutOfRange(AlignmentError):
    pass


class UnknownVariable(AlignmentError):
    pass


class MalformedItem(AlignmentError):
    pass


class IndexOutOfRange(AlignmentError, IndexError):
    pass


# --- topic linking ----------------------------------------------------------


class NoTokens(HcdError, ValueError):
    pass


class TopicUnalignable(HcdError):
    def __init__(self, message: str, side: int | None = None):
        super().__init__(message if side is None else f"advice {side}: {message}")
        self.side = side


# --- relation matrix --------------------------------------------------------


class LayoutMismatch(HcdError, ValueError):
    pass


class AlignmentOutOfRange(HcdError, ValueError):
    pass


# --- dataset ----------------------------------------------------------------


class MalformedLine(HcdError, ValueError):
    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line


class MissingField(HcdError, ValueError):
    def __init__(self, line: int, field: str):
        super().__init__(f"line {line}: missing field {field!r}")
        self.line = line
        self.field = field


# --- baseline / evaluation --------------------------------------------------


class EmptyCorpus(HcdError, ValueError):
    pass


class DegenerateLabel(HcdError, ValueError):
    def __init__(self, label: str, positives: int, total: int):
        super().__init__(f"label {label!r} has {positives}/{total} positives; need both classes")
        self.label = label


class LengthMismatch(HcdError, ValueError):
    pass


class EmptyList(HcdError, ValueError):
    pass


# --- pipeline ---------------------------------------------------------------


class ConfigError(HcdError, ValueError):
    pass


class RecordError(HcdError):
    """A record failed in fail-fast mode; ``kind`` names the original error class."""

    def __init__(self, record_id: str, kind: str, message: str):
        super().__init__(f"record {record_id!r}: {kind}: {message}")
        self.record_id = record_id
        self.kind = kind


class MissingStructure(HcdError, ValueError):
    """A record lacks the AMR or alignment fields graph processing needs."""
