"""Shared domain types and resource normalization."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from typing import Optional, Union
from urllib.parse import unquote_to_bytes, urlsplit

UTC = timezone.utc


class AccessType(str, enum.Enum):
    PLAIN_HTML = "PlainHtml"
    SEMANTIC = "Semantic"
    SEARCH = "Search"
    SPARQL = "Sparql"


class _External:
    """Marker for resources that live outside the analysed site."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "External"

    def __reduce__(self):
        return (_External, ())


EXTERNAL = _External()

# A ResourceKey is plain text; the alias documents intent.
ResourceKey = str
Normalized = Union[ResourceKey, _External]


@dataclass(frozen=True)
class LogEntry:
    host_hash: str
    country_code: str
    timestamp: datetime  # aware, UTC
    method: str
    resource_raw: str
    protocol: str
    status: int
    bytes: Optional[int]
    referrer: Optional[str]
    user_agent: str
    line_no: int
    tz_offset: timedelta = field(default=timedelta(0))

    def __post_init__(self):
        if not 100 <= self.status <= 599:
            raise ValueError(f"status out of range: {self.status}")
        if not self.resource_raw:
            raise ValueError("resource_raw must be non-empty")
        if not self.host_hash:
            raise ValueError("host_hash must be non-empty")
        if self.timestamp.tzinfo is None:
            raise ValueError("timestamp must be timezone-aware")
        if self.timestamp.utcoffset() != timedelta(0):
            object.__setattr__(self, "timestamp", self.timestamp.astimezone(UTC))
        if self.bytes is not None and self.bytes < 0:
            raise ValueError("bytes must be non-negative")

    @property
    def local_time(self) -> datetime:
        """Timestamp expressed in the zone it was originally logged in."""
        return self.timestamp.astimezone(timezone(self.tz_offset))

    @property
    def successful(self) -> bool:
        return 200 <= self.status <= 399


@dataclass(frozen=True)
class TimeWindow:
    start: datetime
    end: datetime
    label: Optional[str] = None

    def __post_init__(self):
        for name in ("start", "end"):
            value = getattr(self, name)
            if value.tzinfo is None:
                object.__setattr__(self, name, value.replace(tzinfo=UTC))
            else:
                object.__setattr__(self, name, value.astimezone(UTC))
        if not self.start < self.end:
            raise ValueError(f"window start {self.start} is not before end {self.end}")

    def __contains__(self, instant: datetime) -> bool:
        return self.start <= instant < self.end

    @classmethod
    def all_time(cls, label: Optional[str] = None) -> "TimeWindow":
        return cls(
            datetime(1, 1, 2, tzinfo=UTC), datetime(9999, 12, 30, tzinfo=UTC), label
        )


def parse_window(text: str) -> TimeWindow:
    """Parse ``LABEL|START..END``.

    START/END are either ISO dates (calendar-day shorthand, end day
    inclusive) or ISO datetimes (end exclusive); naive values are UTC.
    """
    label, sep, span = text.partition("|")
    if not sep:
        label, span = None, text
    start_text, sep, end_text = span.partition("..")
    if not sep:
        raise ValueError(f"window needs START..END: {text!r}")

    def instant(value: str, is_end: bool) -> datetime:
        value = value.strip()
        if "T" not in value and " " not in value:
            d = date.fromisoformat(value)
            stamp = datetime(d.year, d.month, d.day, tzinfo=UTC)
            return stamp + timedelta(days=1) if is_end else stamp
        stamp = datetime.fromisoformat(value.replace("Z", "+00:00"))
        return stamp if stamp.tzinfo else stamp.replace(tzinfo=UTC)

    return TimeWindow(instant(start_text, False), instant(end_text, True), label or None)


# %25, %3F and %23 stay encoded so a second pass cannot reinterpret them.
_PROTECTED = re.compile(r"(%(?:25|3[fF]|23))")
_STRAY_PERCENT = re.compile(r"%(?![0-9A-Fa-f]{2})")


def _decode_once(path: str) -> str:
    if "%" not in path or _STRAY_PERCENT.search(path):
        return path
    pieces = _PROTECTED.split(path)
    try:
        for i in range(0, len(pieces), 2):
            pieces[i] = unquote_to_bytes(pieces[i]).decode("utf-8")
    except UnicodeDecodeError:
        return path
    return "".join(pieces)


def _canonical_path(path: str) -> ResourceKey:
    path = path.split("#", 1)[0].split("?", 1)[0]
    path = _decode_once(path)
    return ("/" + path.strip("/")) if path.strip("/") else "/"


_ABSOLUTE = re.compile(r"^([A-Za-z][A-Za-z0-9+.-]*:)?//")
# "google.com/search": a dotted first segment followed by a slash
_SCHEMELESS_HOST = re.compile(r"^[A-Za-z0-9-]+(\.[A-Za-z0-9-]+)+(:\d+)?/")


def normalize_resource(raw: str, site_host: Optional[str] = None) -> Normalized:
    """Map a request target or referrer to its canonical ResourceKey.

    Absolute URIs reduce to their path when the host matches ``site_host``
    (any host is accepted when ``site_host`` is None) and to ``EXTERNAL``
    otherwise. Query strings and fragments are dropped, percent-encoding is
    decoded once, and trailing slashes are removed except for the root.
    A schemeless target whose first segment is a dotted host name followed
    by a slash (``google.com/search``) is treated as host-qualified.
    """
    if not raw:
        raise ValueError("raw resource must be non-empty")
    if _SCHEMELESS_HOST.match(raw):
        raw = "//" + raw
    if _ABSOLUTE.match(raw):
        try:
            parts = urlsplit(raw)
            host = parts.hostname
        except ValueError:
            return EXTERNAL
        if not host:
            return EXTERNAL
        if site_host is not None and host.lower() != site_host.lower():
            return EXTERNAL
        return _canonical_path(parts.path)
    return _canonical_path(raw)


def is_internal(key: Normalized) -> bool:
    return key is not EXTERNAL


@dataclass(frozen=True)
class Hit:
    """A parsed entry plus everything curation learned about it."""

    entry: LogEntry
    access_type: Optional[AccessType] = None  # None for dropped (4xx/5xx) hits
    dropped: bool = False
    bot_reasons: tuple = ()
    pair_line: Optional[int] = None

    @property
    def is_bot(self) -> bool:
        return bool(self.bot_reasons)
