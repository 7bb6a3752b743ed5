"""Date/time extraction from visible element text.

The pattern table is fixed and versioned: ISO 8601, day-first dotted and
dashed numeric forms, slash forms (month-first with calendar-validity
fallback to day-first), and month-name forms in English and German. Two-digit
years pivot at 70. A time of day attaches when directly adjacent.
"""

from __future__ import annotations

import datetime as dt
import re
from dataclasses import dataclass

from .snapshot import Element

MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5, "june": 6,
    "july": 7, "august": 8, "september": 9, "october": 10, "november": 11,
    "december": 12,
    "jan": 1, "feb": 2, "mar": 3, "apr": 4, "jun": 6, "jul": 7, "aug": 8,
    "sep": 9, "sept": 9, "oct": 10, "nov": 11, "dec": 12,
    # German
    "januar": 1, "februar": 2, "märz": 3, "maerz": 3, "mrz": 3, "mär": 3,
    "mai": 5, "juni": 6, "juli": 7, "oktober": 10, "dezember": 12,
    "okt": 10, "dez": 12,
}

_MONTH_ALT = "|".join(sorted(MONTHS, key=len, reverse=True))
_Y = r"(\d{4}|\d{2})"

# (format id, compiled regex, group order) — priority = listed order.
PATTERNS: tuple[tuple[str, re.Pattern[str]], ...] = (
    ("iso", re.compile(r"(?<!\d)(\d{4})-(\d{2})-(\d{2})(?!\d)")),
    ("dmy_dot", re.compile(rf"(?<!\d)(\d{{1,2}})\.(\d{{1,2}})\.{_Y}(?![\d.])")),
    ("dmy_dash", re.compile(rf"(?<!\d)(\d{{1,2}})-(\d{{1,2}})-{_Y}(?![\d-])")),
    ("mdy_slash", re.compile(rf"(?<!\d)(\d{{1,2}})/(\d{{1,2}})/{_Y}(?![\d/])")),
    ("month_name_mdy", re.compile(
        rf"\b({_MONTH_ALT})\.?\s+(\d{{1,2}})(?:st|nd|rd|th)?\s*,?\s+{_Y}(?!\d)", re.IGNORECASE)),
    ("month_name_dmy", re.compile(
        rf"(?<!\d)(\d{{1,2}})(?:st|nd|rd|th)?\.?\s+(?:of\s+)?({_MONTH_ALT})\.?,?\s+{_Y}(?!\d)", re.IGNORECASE)),
)

_TIME = re.compile(r"(?:[Tt]|[\s,]+(?:at\s+|um\s+)?)(\d{1,2}):(\d{2})(?::(\d{2}))?(?:\s*([ap])\.?m\.?)?",
                   re.IGNORECASE)


@dataclass(frozen=True)
class ExtractedDate:
    date: dt.date
    time: dt.time | None
    source_span: tuple[int, int]
    format: str

    def iso(self) -> str:
        if self.time is None:
            return self.date.isoformat()
        return f"{self.date.isoformat()}T{self.time.isoformat()}"


def _year(raw: str) -> int:
    value = int(raw)
    if len(raw) == 2:
        return 1900 + value if value >= 70 else 2000 + value
    return value


def _valid_date(year: int, month: int, day: int) -> dt.date | None:
    try:
        return dt.date(year, month, day)
    except ValueError:
        return None


def _interpret(format_id: str, m: re.Match) -> tuple[dt.date, str] | None:
    g = m.groups()
    if format_id == "iso":
        date = _valid_date(int(g[0]), int(g[1]), int(g[2]))
        return (date, format_id) if date else None
    if format_id in ("dmy_dot", "dmy_dash"):
        date = _valid_date(_year(g[2]), int(g[1]), int(g[0]))
        return (date, format_id) if date else None
    if format_id == "mdy_slash":
        # Month-first, falling back to day-first when the calendar disagrees.
        date = _valid_date(_year(g[2]), int(g[0]), int(g[1]))
        if date:
            return (date, "mdy_slash")
        date = _valid_date(_year(g[2]), int(g[1]), int(g[0]))
        return (date, "dmy_slash") if date else None
    if format_id == "month_name_mdy":
        month = MONTHS[g[0].lower()]
        date = _valid_date(_year(g[2]), month, int(g[1]))
        return (date, format_id) if date else None
    if format_id == "month_name_dmy":
        month = MONTHS[g[1].lower()]
        date = _valid_date(_year(g[2]), month, int(g[0]))
        return (date, format_id) if date else None
    return None


def _attach_time(text: str, date_end: int) -> tuple[dt.time | None, int]:
    m = _TIME.match(text, date_end)
    if m is None:
        return (None, date_end)
    hour, minute = int(m.group(1)), int(m.group(2))
    second = int(m.group(3)) if m.group(3) else 0
    meridiem = m.group(4)
    if meridiem:
        if not 1 <= hour <= 12:
            return (None, date_end)
        if meridiem.lower() == "p" and hour != 12:
            hour += 12
        elif meridiem.lower() == "a" and hour == 12:
            hour = 0
    if hour > 23 or minute > 59 or second > 59:
        return (None, date_end)
    return (dt.time(hour, minute, second), m.end())


def extract_date(text: str) -> ExtractedDate | None:
    """Leftmost calendar-valid date in the text; None when there is none."""
    candidates: list[tuple[int, int, str, re.Match]] = []
    for priority, (format_id, pattern) in enumerate(PATTERNS):
        for m in pattern.finditer(text):
            candidates.append((m.start(), priority, format_id, m))
    candidates.sort(key=lambda c: (c[0], c[1]))
    for start, _, format_id, m in candidates:
        interpreted = _interpret(format_id, m)
        if interpreted is None:
            continue
        date, resolved_format = interpreted
        time, end = _attach_time(text, m.end())
        return ExtractedDate(date, time, (start, end), resolved_format)
    return None


def extract_date_element(element: Element) -> ExtractedDate | None:
    return extract_date(element.visible_text)
