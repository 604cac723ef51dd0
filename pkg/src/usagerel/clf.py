"""Parser for the USEWOD-extended Apache Combined Log Format.

A line is a standard combined-format record followed by two extra fields,
the requester's country code and a hash of the original IP::

    0.0.0.0 - - [25/Apr/2010:10:15:32 +0000] "GET /x HTTP/1.1" 200 512 "-" "UA" "US" "a1b2c3d4"

Quoted fields are kept exactly as logged (backslash escapes are not
expanded), so serializing a parsed entry reproduces the original text.
"""

from __future__ import annotations

import enum
import gzip
import io
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Iterator, List, Tuple, Union

from .model import LogEntry

_Q = r'((?:[^"\\]|\\.)*)'
LINE_RE = re.compile(
    r"^(\S+) (\S+) (\S+) \[([^\]]*)\] "
    rf'"{_Q}" (\S+) (\S+) "{_Q}" "{_Q}" '
    rf'(?:"{_Q}"|([^\s"]+)) (?:"{_Q}"|([^\s"]+))$',
    re.DOTALL,
)
TIMESTAMP_RE = re.compile(
    r"^(\d{2})/([A-Z][a-z]{2})/(\d{4}):(\d{2}):(\d{2}):(\d{2}) ([+-])(\d{2})(\d{2})$"
)
COUNTRY_RE = re.compile(r"^(?:[A-Za-z0-9]{2}|--)$")
MONTHS = {
    name: i
    for i, name in enumerate(
        ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"],
        start=1,
    )
}
MONTH_NAMES = {i: name for name, i in MONTHS.items()}


class ParseErrorKind(str, enum.Enum):
    NOT_UTF8 = "NotUtf8"
    MALFORMED = "Malformed"
    BAD_TIMESTAMP = "BadTimestamp"
    BAD_STATUS = "BadStatus"


class ParseError(ValueError):
    def __init__(self, kind: ParseErrorKind, line_no: int, detail: str = ""):
        self.kind = kind
        self.line_no = line_no
        self.detail = detail
        super().__init__(f"line {line_no}: {kind.value}" + (f" ({detail})" if detail else ""))


@dataclass
class ParseReport:
    accepted: int = 0
    rejected: int = 0
    rejects: List[Tuple[int, ParseErrorKind]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.accepted + self.rejected

    def merge(self, other: "ParseReport") -> "ParseReport":
        return ParseReport(
            self.accepted + other.accepted,
            self.rejected + other.rejected,
            self.rejects + other.rejects,
        )


def parse_timestamp(text: str) -> Tuple[datetime, timedelta]:
    """Return the UTC instant and the original zone offset of a CLF timestamp."""
    m = TIMESTAMP_RE.match(text)
    if not m:
        raise ValueError(f"bad timestamp shape: {text!r}")
    day, mon, year, hh, mm, ss, sign, oh, om = m.groups()
    if mon not in MONTHS:
        raise ValueError(f"bad month: {mon!r}")
    offset = timedelta(hours=int(oh), minutes=int(om))
    if offset >= timedelta(hours=24):
        raise ValueError(f"bad zone offset: {text!r}")
    if sign == "-":
        offset = -offset
    local = datetime(
        int(year), MONTHS[mon], int(day), int(hh), int(mm), int(ss),
        tzinfo=timezone(offset),
    )
    return local.astimezone(timezone.utc), offset


def format_timestamp(instant: datetime, offset: timedelta) -> str:
    local = instant.astimezone(timezone(offset))
    minutes = int(offset.total_seconds()) // 60
    sign = "-" if minutes < 0 else "+"
    minutes = abs(minutes)
    return (
        f"{local.day:02d}/{MONTH_NAMES[local.month]}/{local.year:04d}:"
        f"{local.hour:02d}:{local.minute:02d}:{local.second:02d} "
        f"{sign}{minutes // 60:02d}{minutes % 60:02d}"
    )


def parse_line(raw: Union[str, bytes], line_no: int) -> LogEntry:
    """Parse one log line. Raises ParseError for any line that is not a valid record."""
    if isinstance(raw, (bytes, bytearray)):
        try:
            raw = bytes(raw).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(ParseErrorKind.NOT_UTF8, line_no, str(exc)) from None
    else:
        try:
            raw.encode("utf-8")
        except UnicodeEncodeError as exc:
            raise ParseError(ParseErrorKind.NOT_UTF8, line_no, str(exc)) from None

    m = LINE_RE.match(raw)
    if not m:
        raise ParseError(ParseErrorKind.MALFORMED, line_no, "field structure")
    (_ip, _ident, _user, ts_text, request, status_text, bytes_text,
     referrer, user_agent, cc_q, cc_bare, hash_q, hash_bare) = m.groups()
    country = cc_q if cc_q is not None else cc_bare
    host_hash = hash_q if hash_q is not None else hash_bare

    tokens = request.split(" ")
    if len(tokens) < 3:
        raise ParseError(ParseErrorKind.MALFORMED, line_no, "request has fewer than 3 tokens")
    method, target, protocol = tokens[0], " ".join(tokens[1:-1]), tokens[-1]
    if not method or not target or not protocol:
        raise ParseError(ParseErrorKind.MALFORMED, line_no, "empty request token")

    try:
        timestamp, offset = parse_timestamp(ts_text)
    except (ValueError, OverflowError) as exc:
        raise ParseError(ParseErrorKind.BAD_TIMESTAMP, line_no, str(exc)) from None

    if not (len(status_text) == 3 and status_text.isdigit()) or not 100 <= int(status_text) <= 599:
        raise ParseError(ParseErrorKind.BAD_STATUS, line_no, status_text)

    if bytes_text == "-":
        size = None
    elif bytes_text.isdigit() and bytes_text.isascii():
        size = int(bytes_text)
    else:
        raise ParseError(ParseErrorKind.MALFORMED, line_no, f"bytes field {bytes_text!r}")

    if not COUNTRY_RE.match(country or ""):
        raise ParseError(ParseErrorKind.MALFORMED, line_no, f"country code {country!r}")
    if not host_hash or host_hash == "0.0.0.0" or any(c.isspace() for c in host_hash):
        raise ParseError(ParseErrorKind.MALFORMED, line_no, f"host hash {host_hash!r}")

    return LogEntry(
        host_hash=host_hash,
        country_code=country,
        timestamp=timestamp,
        method=method,
        resource_raw=target,
        protocol=protocol,
        status=int(status_text),
        bytes=size,
        referrer=None if referrer == "-" else referrer,
        user_agent=user_agent,
        line_no=line_no,
        tz_offset=offset,
    )


def parse_stream(
    lines: Iterable[Union[str, bytes]], first_line_no: int = 1
) -> Tuple[List[LogEntry], ParseReport]:
    """Parse every line, collecting failures instead of raising.

    Accepted entries keep input order. Trailing newlines are stripped.
    """
    entries: List[LogEntry] = []
    report = ParseReport()
    for line_no, raw in enumerate(lines, start=first_line_no):
        if isinstance(raw, (bytes, bytearray)):
            raw = bytes(raw).rstrip(b"\r\n")
        else:
            raw = raw.rstrip("\r\n")
        try:
            entries.append(parse_line(raw, line_no))
        except ParseError as err:
            report.rejected += 1
            report.rejects.append((line_no, err.kind))
        else:
            report.accepted += 1
    return entries, report


def serialize_entry(entry: LogEntry) -> str:
    size = "-" if entry.bytes is None else str(entry.bytes)
    referrer = "-" if entry.referrer is None else entry.referrer
    stamp = format_timestamp(entry.timestamp, entry.tz_offset)
    return (
        f'0.0.0.0 - - [{stamp}] "{entry.method} {entry.resource_raw} {entry.protocol}" '
        f'{entry.status} {size} "{referrer}" "{entry.user_agent}" '
        f'"{entry.country_code}" "{entry.host_hash}"'
    )


def read_log_lines(path: Union[str, Path]) -> Iterator[bytes]:
    """Yield raw lines of a plain or gzip-compressed log file."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
        fh.seek(0)
        stream = gzip.GzipFile(fileobj=fh) if magic == b"\x1f\x8b" else fh
        reader = io.BufferedReader(stream) if stream is not fh else fh
        for line in reader:
            yield line.rstrip(b"\r\n")
