"""Link-format TimeMap parsing and serialization, plus archive datetime notations.

The wire format is the interoperable one deployed archives speak for
TimeMaps (application/link-format):

    link-value-list = link-value *( OWS "," OWS link-value ) OWS
    link-value      = "<" target ">" *( OWS ";" OWS link-param )
    link-param      = token [ OWS "=" OWS ( token / quoted-string ) ]

Entries whose rel contains "memento" become mementos (capture instant taken
from their `datetime` parameter, RFC 1123 GMT form), the "original" entry
supplies the URI-R, and the first "self"/"timemap" entry supplies the URI-T.
Unknown relations and parameters parse fine and are simply not carried into
the TimeMap. Parsing never crashes: any input yields either a TimeMap or a
TimeMapParseError/TimeMapSemanticError diagnostic.

Two capture-instant notations are supported: the RFC 1123 GMT form used by
the `datetime` link parameter and the 14-digit YYYYMMDDHHMMSS form embedded
in Wayback-style URI-Ms. Both are strict: GMT only, real calendar dates,
and instants within [1996-01-01, now].

The environment dimension has no representation in link-format (that is
exactly why fixed-page/fixed-time stories cannot be cut from standard
archives); serializing drops any environment tags.
"""

from __future__ import annotations

import calendar
from dataclasses import dataclass
from datetime import datetime, timezone
from urllib.parse import urlsplit

from .errors import MemstoryError, InvariantViolation
from .model import EARLIEST_MEMENTO_DATETIME, Memento, OriginalResource, TimeMap


class TimeMapParseError(MemstoryError):
    """Malformed link-format syntax, with position information."""

    def __init__(self, message: str, *, offset: int = 0, line: int = 1, column: int = 1) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.offset = offset
        self.line = line
        self.column = column


class TimeMapSemanticError(MemstoryError):
    """Grammatically fine link-format that does not describe a TimeMap."""


class DatetimeFormatError(MemstoryError):
    """A datetime string that does not match its notation; names the first bad field."""

    def __init__(self, message: str, *, bad_field: str) -> None:
        super().__init__(message)
        self.bad_field = bad_field


class DatetimeRangeError(MemstoryError):
    """A well-formed instant outside [1996-01-01, now]."""


_WEEKDAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
_MONTHS = ("Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")


def _check_range(instant: datetime, text: str) -> datetime:
    if instant < EARLIEST_MEMENTO_DATETIME:
        raise DatetimeRangeError(f"{text!r} names an instant before 1996-01-01, the dawn of web archiving")
    if instant > datetime.now(timezone.utc):
        raise DatetimeRangeError(f"{text!r} names an instant in the future")
    return instant


def parse_rfc1123(text: str) -> datetime:
    """Parse the fixed-length RFC 1123 GMT form, e.g. "Fri, 11 Feb 2011 12:00:00 GMT".

    Strict: exactly 29 characters, GMT only, valid calendar date, weekday
    consistent with the date. Raises DatetimeFormatError naming the first
    offending field, or DatetimeRangeError for instants outside
    [1996-01-01, now].
    """
    if len(text) != 29:
        raise DatetimeFormatError(
            f"expected the 29-character RFC 1123 GMT form, got {len(text)} characters in {text!r}",
            bad_field="length",
        )
    weekday = text[0:3]
    if weekday not in _WEEKDAYS:
        raise DatetimeFormatError(f"bad weekday {weekday!r} in {text!r}", bad_field="weekday")
    if text[3:5] != ", ":
        raise DatetimeFormatError(f"expected ', ' after the weekday in {text!r}", bad_field="separator")
    day_s = text[5:7]
    if not day_s.isdigit():
        raise DatetimeFormatError(f"bad day-of-month {day_s!r} in {text!r}", bad_field="day-of-month")
    if text[7] != " ":
        raise DatetimeFormatError(f"expected ' ' after the day in {text!r}", bad_field="separator")
    month_s = text[8:11]
    if month_s not in _MONTHS:
        raise DatetimeFormatError(f"bad month {month_s!r} in {text!r}", bad_field="month")
    if text[11] != " ":
        raise DatetimeFormatError(f"expected ' ' after the month in {text!r}", bad_field="separator")
    year_s = text[12:16]
    if not year_s.isdigit():
        raise DatetimeFormatError(f"bad year {year_s!r} in {text!r}", bad_field="year")
    if text[16] != " ":
        raise DatetimeFormatError(f"expected ' ' after the year in {text!r}", bad_field="separator")
    hour_s, minute_s, second_s = text[17:19], text[20:22], text[23:25]
    if not hour_s.isdigit() or int(hour_s) > 23:
        raise DatetimeFormatError(f"bad hour {hour_s!r} in {text!r}", bad_field="hour")
    if text[19] != ":" or text[22] != ":":
        raise DatetimeFormatError(f"expected ':' between time fields in {text!r}", bad_field="separator")
    if not minute_s.isdigit() or int(minute_s) > 59:
        raise DatetimeFormatError(f"bad minute {minute_s!r} in {text!r}", bad_field="minute")
    if not second_s.isdigit() or int(second_s) > 59:
        raise DatetimeFormatError(f"bad second {second_s!r} in {text!r}", bad_field="second")
    if text[25:29] != " GMT":
        raise DatetimeFormatError(f"expected the ' GMT' timezone suffix in {text!r}", bad_field="timezone")
    try:
        instant = datetime(
            int(year_s), _MONTHS.index(month_s) + 1, int(day_s),
            int(hour_s), int(minute_s), int(second_s), tzinfo=timezone.utc,
        )
    except ValueError:
        raise DatetimeFormatError(
            f"invalid day-of-month {day_s} for {month_s} {year_s} in {text!r}", bad_field="day-of-month"
        ) from None
    if _WEEKDAYS[instant.weekday()] != weekday:
        raise DatetimeFormatError(
            f"weekday {weekday} does not match {instant.date().isoformat()} "
            f"(a {_WEEKDAYS[instant.weekday()]}) in {text!r}",
            bad_field="weekday",
        )
    return _check_range(instant, text)


def format_rfc1123(instant: datetime) -> str:
    """Render an instant in the fixed RFC 1123 GMT form (locale independent)."""
    instant = instant.astimezone(timezone.utc)
    return (
        f"{_WEEKDAYS[instant.weekday()]}, {instant.day:02d} {_MONTHS[instant.month - 1]} {instant.year:04d} "
        f"{instant.hour:02d}:{instant.minute:02d}:{instant.second:02d} GMT"
    )


def parse_timestamp14(text: str) -> datetime:
    """Parse a 14-digit YYYYMMDDHHMMSS capture timestamp as UTC."""
    if len(text) != 14 or not text.isdigit():
        raise DatetimeFormatError(
            f"expected exactly 14 ASCII digits (YYYYMMDDHHMMSS), got {text!r}", bad_field="length"
        )
    year, month, day = int(text[0:4]), int(text[4:6]), int(text[6:8])
    hour, minute, second = int(text[8:10]), int(text[10:12]), int(text[12:14])
    if not 1 <= month <= 12:
        raise DatetimeFormatError(f"bad month {month:02d} in {text!r}", bad_field="month")
    if not 1 <= day <= calendar.monthrange(year, month)[1]:
        raise DatetimeFormatError(f"bad day-of-month {day:02d} in {text!r}", bad_field="day-of-month")
    if hour > 23:
        raise DatetimeFormatError(f"bad hour {hour:02d} in {text!r}", bad_field="hour")
    if minute > 59:
        raise DatetimeFormatError(f"bad minute {minute:02d} in {text!r}", bad_field="minute")
    if second > 59:
        raise DatetimeFormatError(f"bad second {second:02d} in {text!r}", bad_field="second")
    return _check_range(datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc), text)


def format_timestamp14(instant: datetime) -> str:
    instant = instant.astimezone(timezone.utc)
    return instant.strftime("%Y%m%d%H%M%S")


def extract_timestamp_from_urim(uri_m: str) -> datetime | None:
    """Instant encoded by the first 14-digit path segment of a URI-M, if any.

    Wayback-style URI-Ms embed the capture time in the path, e.g.
    http://wayback.archive-it.org/2358/20110211120000/http://a.example/.
    Absence and invalid timestamps are both answered with None.
    """
    try:
        path = urlsplit(uri_m).path
    except ValueError:
        return None
    for segment in path.split("/"):
        if len(segment) == 14 and segment.isdigit():
            try:
                return parse_timestamp14(segment)
            except MemstoryError:
                return None
    return None


@dataclass(frozen=True)
class LinkEntry:
    """One raw link-value: a target URI plus its parameters in document order.

    Parameter names are case-insensitive tokens, stored lower-case.
    """

    target_uri: str
    params: tuple[tuple[str, str], ...] = ()

    def rels(self) -> frozenset[str]:
        """Relation tokens from the first rel parameter (case-insensitive)."""
        for name, value in self.params:
            if name == "rel":
                return frozenset(tok.lower() for tok in value.split() if tok)
        return frozenset()

    def first_param(self, name: str) -> str | None:
        for pname, value in self.params:
            if pname == name:
                return value
        return None


_TOKEN_CHARS = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789!#$%&'*+-.^_`|~")
_WHITESPACE = frozenset(" \t\r\n")


class _Scanner:
    """Character scanner with line/column tracking for error reporting."""

    def __init__(self, text: str) -> None:
        self.text = text
        self.pos = 0

    def _location(self) -> tuple[int, int]:
        consumed = self.text[: self.pos]
        line = consumed.count("\n") + 1
        column = self.pos - (consumed.rfind("\n") + 1) + 1
        return line, column

    def fail(self, message: str) -> TimeMapParseError:
        line, column = self._location()
        return TimeMapParseError(message, offset=self.pos, line=line, column=column)

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def skip_ws(self) -> None:
        while not self.eof() and self.text[self.pos] in _WHITESPACE:
            self.pos += 1

    def expect(self, char: str) -> None:
        if self.peek() != char:
            got = repr(self.peek()) if not self.eof() else "end of input"
            raise self.fail(f"expected {char!r}, got {got}")
        self.pos += 1

    def read_target(self) -> str:
        self.expect("<")
        start = self.pos
        while not self.eof() and self.peek() != ">":
            if self.peek() in "\r\n":
                raise self.fail("unterminated <target>: newline before '>'")
            self.pos += 1
        if self.eof():
            raise self.fail("unterminated <target>: missing '>'")
        target = self.text[start : self.pos]
        if not target:
            raise self.fail("empty <target>")
        self.pos += 1
        return target

    def read_token(self) -> str:
        start = self.pos
        while not self.eof() and self.peek() in _TOKEN_CHARS:
            self.pos += 1
        if self.pos == start:
            got = repr(self.peek()) if not self.eof() else "end of input"
            raise self.fail(f"expected a parameter name, got {got}")
        return self.text[start : self.pos]

    def read_quoted_string(self) -> str:
        self.expect('"')
        out: list[str] = []
        while True:
            if self.eof():
                raise self.fail("unterminated quoted-string")
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                return "".join(out)
            if ch in "\r\n":
                raise self.fail("unterminated quoted-string: newline inside value")
            if ch == "\\":
                if self.pos + 1 >= len(self.text):
                    raise self.fail("dangling backslash in quoted-string")
                out.append(self.text[self.pos + 1])
                self.pos += 2
            else:
                out.append(ch)
                self.pos += 1

    def read_bare_value(self) -> str:
        start = self.pos
        while not self.eof() and self.peek() not in _WHITESPACE and self.peek() not in ';,"':
            self.pos += 1
        return self.text[start : self.pos]


def parse_link_entries(data: bytes | str) -> list[LinkEntry]:
    """Parse raw link-format into entries without interpreting relations."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise TimeMapParseError(f"input is not valid UTF-8: {exc.reason} at byte {exc.start}") from None
    else:
        text = data
    scanner = _Scanner(text)
    entries: list[LinkEntry] = []
    scanner.skip_ws()
    while not scanner.eof():
        target = scanner.read_target()
        params: list[tuple[str, str]] = []
        while True:
            scanner.skip_ws()
            if scanner.eof():
                break
            if scanner.peek() == ",":
                scanner.pos += 1
                scanner.skip_ws()
                break
            scanner.expect(";")
            scanner.skip_ws()
            name = scanner.read_token().lower()
            scanner.skip_ws()
            value = ""
            if scanner.peek() == "=":
                scanner.pos += 1
                scanner.skip_ws()
                if scanner.peek() == '"':
                    value = scanner.read_quoted_string()
                else:
                    value = scanner.read_bare_value()
            params.append((name, value))
        entries.append(LinkEntry(target, tuple(params)))
    return entries


def parse_link_format(data: bytes | str, *, diagnostics: list[str] | None = None) -> TimeMap:
    """Parse a link-format document into a TimeMap.

    The result is sorted by (Memento-Datetime, URI-M) and deduplicated by
    URI-M (first occurrence wins). Non-fatal oddities -- duplicate URI-Ms,
    conflicting extra "original" entries, follow-up (paged) timemap links --
    are appended to `diagnostics` when a list is supplied.

    Raises TimeMapParseError for bad syntax and TimeMapSemanticError when
    the document has no "original" relation, a memento entry has a missing
    or unparseable datetime, or an entry cannot form a valid memento.
    """
    notes = diagnostics if diagnostics is not None else []
    entries = parse_link_entries(data)

    uri_r: OriginalResource | None = None
    for entry in entries:
        if "original" in entry.rels():
            if uri_r is None:
                try:
                    uri_r = OriginalResource(entry.target_uri)
                except InvariantViolation as exc:
                    raise TimeMapSemanticError(f"bad original target {entry.target_uri!r}: {exc}") from None
            else:
                try:
                    extra = OriginalResource(entry.target_uri)
                except InvariantViolation:
                    extra = None
                if extra != uri_r:
                    notes.append(f"conflicting extra original relation ignored: {entry.target_uri}")
    if uri_r is None:
        raise TimeMapSemanticError("no 'original' relation present; cannot anchor mementos to a URI-R")

    uri_t: str | None = None
    mementos: list[Memento] = []
    seen_uri_m: set[str] = set()
    for entry in entries:
        rels = entry.rels()
        if "self" in rels or "timemap" in rels:
            if uri_t is None:
                uri_t = entry.target_uri
            elif entry.target_uri != uri_t:
                notes.append(f"follow-up timemap link not fetched: {entry.target_uri}")
        if "memento" not in rels:
            continue
        raw_datetime = entry.first_param("datetime")
        if raw_datetime is None:
            raise TimeMapSemanticError(f"memento entry {entry.target_uri!r} lacks a datetime parameter")
        try:
            instant = parse_rfc1123(raw_datetime)
        except (DatetimeFormatError, DatetimeRangeError) as exc:
            raise TimeMapSemanticError(f"memento entry {entry.target_uri!r}: {exc}") from None
        if entry.target_uri in seen_uri_m:
            notes.append(f"duplicate memento uri_m kept once: {entry.target_uri}")
            continue
        seen_uri_m.add(entry.target_uri)
        try:
            mementos.append(Memento(entry.target_uri, uri_r, instant))
        except InvariantViolation as exc:
            raise TimeMapSemanticError(f"memento entry {entry.target_uri!r}: {exc}") from None

    try:
        return TimeMap(uri_r, tuple(mementos), uri_t=uri_t)
    except InvariantViolation as exc:
        raise TimeMapSemanticError(str(exc)) from None


def serialize_link_format(timemap: TimeMap, *, pretty: bool = True) -> bytes:
    """Serialize a TimeMap back to link-format (UTF-8).

    Emits the original entry, a self entry when the TimeMap knows its own
    URI-T, then the mementos in TimeMap order. Pretty output puts one
    link-value per line (LF) with a trailing newline; compact output is a
    single line. Both re-parse to an equal TimeMap, minus environment tags,
    which the wire format cannot carry.
    """
    values = [f'<{timemap.uri_r.uri}>; rel="original"']
    if timemap.uri_t is not None:
        values.append(f'<{timemap.uri_t}>; rel="self"')
    for m in timemap.mementos:
        values.append(f'<{m.uri_m}>; rel="memento"; datetime="{format_rfc1123(m.memento_datetime)}"')
    if pretty:
        return (",\n".join(values) + "\n").encode("utf-8")
    return ", ".join(values).encode("utf-8")
