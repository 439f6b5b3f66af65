"""Domain model for archived web collections.

The vocabulary is the Memento protocol's: an original resource (URI-R) has
archived snapshots (mementos, URI-M) captured at instants (Memento-Datetime),
listed per resource by a TimeMap (URI-T). A collection is a named set of
TimeMaps, i.e. a two-dimensional grid whose axes are URI and time.

All values are immutable after construction and safe to share across
threads. Constructors normalize where that is safe (URI canonicalization,
memento ordering, sub-second truncation) and reject anything else that
breaks an invariant. `validate_collection` re-checks everything from
scratch for data that arrived from outside the constructors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Iterator
from urllib.parse import urlsplit, urlunsplit

from .errors import InvariantViolation, MemstoryError

#: Web archiving predates nothing earlier than this; captures claiming to be
#: older are data errors.
EARLIEST_MEMENTO_DATETIME = datetime(1996, 1, 1, tzinfo=timezone.utc)

_FORBIDDEN_URI_CHARS = re.compile(r'[<>"\s\x00-\x1f\x7f]')


def _utc_now() -> datetime:
    return datetime.now(timezone.utc)


def canonicalize_uri(uri: str) -> str:
    """Canonical form of an absolute http(s) URI.

    Lower-cases the scheme and host, drops any fragment, keeps path and
    query verbatim; an empty path becomes "/". Raises InvariantViolation
    for anything that is not an absolute http(s) URI.
    """
    if not uri or not uri.strip():
        raise InvariantViolation("URI is empty")
    if _FORBIDDEN_URI_CHARS.search(uri):
        raise InvariantViolation(f"URI contains whitespace or forbidden characters: {uri!r}")
    try:
        parts = urlsplit(uri)
    except ValueError as exc:
        raise InvariantViolation(f"unparseable URI {uri!r}: {exc}") from None
    if parts.scheme.lower() not in ("http", "https"):
        raise InvariantViolation(f"URI must be absolute http(s), got {uri!r}")
    if not parts.netloc:
        raise InvariantViolation(f"URI has no host: {uri!r}")
    host = parts.netloc
    # Case-fold the host but leave userinfo (rare, but legal) untouched.
    if "@" in host:
        userinfo, _, hostport = host.rpartition("@")
        host = userinfo + "@" + hostport.lower()
    else:
        host = host.lower()
    path = parts.path or "/"
    return urlunsplit((parts.scheme.lower(), host, path, parts.query, ""))


def _check_uri(uri: str, what: str) -> str:
    """Validate an absolute http(s) URI without canonicalizing it."""
    if not uri or not uri.strip():
        raise InvariantViolation(f"{what} is empty")
    if _FORBIDDEN_URI_CHARS.search(uri):
        raise InvariantViolation(f"{what} contains whitespace or forbidden characters: {uri!r}")
    try:
        parts = urlsplit(uri)
    except ValueError as exc:
        raise InvariantViolation(f"unparseable {what} {uri!r}: {exc}") from None
    if parts.scheme.lower() not in ("http", "https") or not parts.netloc:
        raise InvariantViolation(f"{what} must be an absolute http(s) URI, got {uri!r}")
    return uri


def as_utc_second(value: datetime) -> datetime:
    """Normalize a datetime to UTC with one-second resolution.

    Naive datetimes are taken to be UTC already; sub-second precision is
    truncated, matching both the RFC 1123 and 14-digit archive notations.
    """
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc).replace(microsecond=0)


@dataclass(frozen=True, order=True)
class OriginalResource:
    """A live-web page identifier (URI-R); the column key of the grid."""

    uri: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "uri", canonicalize_uri(self.uri))


class DeviceClass(Enum):
    DESKTOP = "desktop"
    MOBILE = "mobile"
    OTHER = "other"


_GEO_REGION = re.compile(r"^[A-Z]{2}$")


@dataclass(frozen=True)
class EnvironmentTag:
    """Capture-context metadata that differentiates representations.

    Standard archives record none of this; tags appear only on synthetic
    data built to exercise the fixed-page/fixed-time story.
    """

    device_class: DeviceClass
    geo_region: str | None = None
    user_agent_label: str | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.device_class, DeviceClass):
            raise InvariantViolation(f"device_class must be a DeviceClass, got {self.device_class!r}")
        if self.geo_region is not None and not _GEO_REGION.match(self.geo_region):
            raise InvariantViolation(f"geo_region must be an ISO-3166 alpha-2 code, got {self.geo_region!r}")

    def sort_key(self) -> tuple:
        return (
            list(DeviceClass).index(self.device_class),
            self.geo_region is not None,
            self.geo_region or "",
            self.user_agent_label is not None,
            self.user_agent_label or "",
        )


@dataclass(frozen=True)
class Memento:
    """One archived snapshot: URI-M, its URI-R, and its Memento-Datetime."""

    uri_m: str
    uri_r: OriginalResource
    memento_datetime: datetime
    environment: EnvironmentTag | None = None

    def __post_init__(self) -> None:
        _check_uri(self.uri_m, "uri_m")
        object.__setattr__(self, "memento_datetime", as_utc_second(self.memento_datetime))
        if self.uri_m == self.uri_r.uri:
            raise InvariantViolation(f"uri_m must differ from its canonical uri_r: {self.uri_m!r}")
        if self.memento_datetime < EARLIEST_MEMENTO_DATETIME:
            raise InvariantViolation(
                f"memento_datetime {self.memento_datetime.isoformat()} predates web archiving (1996-01-01)"
            )
        if self.memento_datetime > _utc_now():
            raise InvariantViolation(f"memento_datetime {self.memento_datetime.isoformat()} lies in the future")

    def sort_key(self) -> tuple[datetime, str]:
        return (self.memento_datetime, self.uri_m)


def _timemap_order(mementos: Iterable[Memento]) -> tuple[Memento, ...]:
    return tuple(sorted(mementos, key=Memento.sort_key))


@dataclass(frozen=True)
class TimeMap:
    """The time-ordered list of all known mementos for one URI-R."""

    uri_r: OriginalResource
    mementos: tuple[Memento, ...] = ()
    uri_t: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mementos", _timemap_order(self.mementos))
        if self.uri_t is not None:
            _check_uri(self.uri_t, "uri_t")
        seen: set[str] = set()
        for m in self.mementos:
            if m.uri_r != self.uri_r:
                raise InvariantViolation(
                    f"memento {m.uri_m!r} belongs to {m.uri_r.uri!r}, not to this timemap's {self.uri_r.uri!r}"
                )
            if m.uri_m in seen:
                raise InvariantViolation(f"duplicate uri_m in timemap: {m.uri_m!r}")
            seen.add(m.uri_m)

    def __len__(self) -> int:
        return len(self.mementos)

    def __iter__(self) -> Iterator[Memento]:
        return iter(self.mementos)


@dataclass(frozen=True)
class Collection:
    """A named set of TimeMaps keyed by canonical URI-R; may be empty."""

    id: str
    name: str
    timemaps: tuple[TimeMap, ...] = ()

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.timemaps, key=lambda tm: tm.uri_r.uri))
        object.__setattr__(self, "timemaps", ordered)
        seen: set[str] = set()
        for tm in ordered:
            if tm.uri_r.uri in seen:
                raise InvariantViolation(f"duplicate timemap for uri_r {tm.uri_r.uri!r}")
            seen.add(tm.uri_r.uri)

    def timemap_for(self, uri_r: str | OriginalResource) -> TimeMap | None:
        key = uri_r.uri if isinstance(uri_r, OriginalResource) else canonicalize_uri(uri_r)
        for tm in self.timemaps:
            if tm.uri_r.uri == key:
                return tm
        return None

    def mementos(self) -> Iterator[Memento]:
        for tm in self.timemaps:
            yield from tm.mementos

    def with_timemap(self, timemap: TimeMap) -> "Collection":
        """New collection with `timemap` added or replacing its URI-R's entry."""
        kept = tuple(tm for tm in self.timemaps if tm.uri_r != timemap.uri_r)
        return Collection(self.id, self.name, kept + (timemap,))


@dataclass(frozen=True)
class TimeExtent:
    earliest: datetime
    latest: datetime

    def __post_init__(self) -> None:
        object.__setattr__(self, "earliest", as_utc_second(self.earliest))
        object.__setattr__(self, "latest", as_utc_second(self.latest))
        if self.earliest > self.latest:
            raise InvariantViolation("extent earliest must not exceed latest")


class EmptyCollectionError(MemstoryError):
    """Raised by queries that need at least one memento."""


def validate_collection(collection: Collection) -> list[str]:
    """Check every model invariant from scratch; violations are data, not errors.

    Returns one human-readable description per violation, empty when the
    collection is fully consistent. Never mutates its input. Values built
    through the constructors always come back clean; this exists for data
    assembled by hand or deserialized from elsewhere.
    """
    violations: list[str] = []
    now = _utc_now()
    seen_uri_r: set[str] = set()
    for tm in collection.timemaps:
        label = tm.uri_r.uri
        if label in seen_uri_r:
            violations.append(f"duplicate timemap for uri_r {label}")
        seen_uri_r.add(label)
        try:
            if canonicalize_uri(tm.uri_r.uri) != tm.uri_r.uri:
                violations.append(f"uri_r not canonical: {label}")
        except InvariantViolation as exc:
            violations.append(f"invalid uri_r {label}: {exc}")
        seen_uri_m: set[str] = set()
        previous: Memento | None = None
        for m in tm.mementos:
            if m.uri_r != tm.uri_r:
                violations.append(f"memento {m.uri_m} anchored to {m.uri_r.uri}, found under timemap {label}")
            if m.uri_m in seen_uri_m:
                violations.append(f"duplicate memento uri_m {m.uri_m} in timemap {label}")
            seen_uri_m.add(m.uri_m)
            if not m.uri_m or m.uri_m == tm.uri_r.uri:
                violations.append(f"memento uri_m equals its uri_r in timemap {label}")
            if m.memento_datetime < EARLIEST_MEMENTO_DATETIME or m.memento_datetime > now:
                violations.append(
                    f"memento {m.uri_m} datetime {m.memento_datetime.isoformat()} outside [1996-01-01, now]"
                )
            if previous is not None and m.sort_key() < previous.sort_key():
                violations.append(f"unsorted timemap for uri_r {label}: {m.uri_m} out of order")
            previous = m
    return violations


def collection_extent(collection: Collection) -> TimeExtent:
    """Earliest and latest Memento-Datetime across the whole grid."""
    instants = [m.memento_datetime for m in collection.mementos()]
    if not instants:
        raise EmptyCollectionError(f"collection {collection.id!r} has no mementos")
    return TimeExtent(min(instants), max(instants))


def memento_count(collection: Collection) -> tuple[int, dict[str, int]]:
    """Total memento count plus a per-URI-R breakdown."""
    per_timemap = {tm.uri_r.uri: len(tm.mementos) for tm in collection.timemaps}
    return sum(per_timemap.values()), per_timemap
