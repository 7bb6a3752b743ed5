"""Exception hierarchy shared across the package.

Grouped so the CLI can map error families onto exit codes: data-condition
errors (nothing found, timeouts) differ from parse/validation/usage errors.
"""

from __future__ import annotations


class VisqueryError(Exception):
    """Base class for every error raised by this package."""


# --- snapshot loading -------------------------------------------------------

class SnapshotParseError(VisqueryError):
    """Snapshot document is not well-formed; carries the source line."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message)


class SnapshotValidationError(VisqueryError):
    """A snapshot invariant is violated; names the element and the rule."""

    def __init__(self, element_id: str | None, rule: str, message: str):
        self.element_id = element_id
        self.rule = rule
        where = f"element {element_id!r}: " if element_id is not None else ""
        super().__init__(f"{where}[{rule}] {message}")


# --- query language ---------------------------------------------------------

class QuerySyntaxError(VisqueryError):
    """Query text does not conform to the grammar; offset is in bytes."""

    def __init__(self, message: str, offset: int, expected: frozenset[str] = frozenset()):
        self.offset = offset
        self.expected = expected
        detail = f"{message} at offset {offset}"
        if expected:
            detail += " (expected " + ", ".join(sorted(expected)) + ")"
        super().__init__(detail)


class UnknownPredicateError(QuerySyntaxError):
    """An identifier in a query is not a known predicate name."""

    def __init__(self, name: str, offset: int):
        self.name = name
        super().__init__(f"unknown predicate {name!r}", offset)


class CssError(VisqueryError):
    """Base for CSS selector problems."""


class CssSyntaxError(CssError):
    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"{message} at offset {offset}")


class CssUnsupportedError(CssError):
    """Selector uses a feature outside the supported subset."""

    def __init__(self, feature: str, offset: int):
        self.feature = feature
        self.offset = offset
        super().__init__(f"unsupported selector feature {feature!r} at offset {offset}")


# --- color ------------------------------------------------------------------

class UnknownColorError(VisqueryError):
    def __init__(self, name: str, suggestions: list[str]):
        self.name = name
        self.suggestions = suggestions
        hint = f"; closest known: {', '.join(suggestions)}" if suggestions else ""
        super().__init__(f"unknown color name {name!r}{hint}")


class RasterRequiredError(VisqueryError):
    """A color predicate was evaluated against a snapshot without a screenshot raster."""


# --- lookups and data conditions --------------------------------------------

class ElementLookupError(VisqueryError):
    """An element id does not belong to the snapshot under evaluation."""

    def __init__(self, element_id: str):
        self.element_id = element_id
        super().__init__(f"element {element_id!r} not found in snapshot")


class TableNotFoundError(VisqueryError):
    pass


class HeaderNotFoundError(VisqueryError):
    def __init__(self, header: str, available: list[str]):
        self.header = header
        self.available = available
        super().__init__(f"no column matches {header!r}; available headers: {available}")


class CellRangeError(VisqueryError):
    def __init__(self, axis: str, index: int, count: int):
        self.axis = axis
        self.index = index
        super().__init__(f"{axis} index {index} out of range (0..{count - 1})")


class EmptyCellError(VisqueryError):
    """The grid slot exists only as ragged-row padding and holds no element."""


class ElementNotFoundError(VisqueryError):
    """An interaction shortcut matched no element for its query."""

    def __init__(self, query: object):
        self.query = query
        super().__init__(f"no element matches {query!r}")


class InteractionTimeoutError(VisqueryError):
    def __init__(self, predicate: object, timeout: float, polls: int):
        self.predicate = predicate
        self.timeout = timeout
        self.polls = polls
        super().__init__(f"no element matched {predicate!r} within {timeout}s ({polls} polls)")


class IncompatibleCommandError(VisqueryError):
    def __init__(self, verb: str, element_id: str, why: str):
        super().__init__(f"cannot {verb} element {element_id!r}: {why}")


# --- webdriver wire client ---------------------------------------------------

class WebDriverError(VisqueryError):
    pass


class WebDriverConnectionError(WebDriverError):
    """The driver endpoint is unreachable."""


class WebDriverProtocolError(WebDriverError):
    """The endpoint answered, but not with a conforming WebDriver response."""


class StaleElementError(WebDriverError):
    def __init__(self, element_id: str):
        self.element_id = element_id
        super().__init__(f"element id {element_id!r} is not from the most recent snapshot")


class ScriptExecutionError(WebDriverError):
    """Injected script failed inside the browser; carries the browser-side message."""
