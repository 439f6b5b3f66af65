"""Seed-list ingestion and collection persistence.

A collection is stored as one self-contained JSON file:

    {
      "schema_version": 1,
      "id": str, "name": str,
      "timemaps": [ { "uri_r": str, "uri_t": str|null,
        "mementos": [ { "uri_m": str, "datetime": "YYYY-MM-DDTHH:MM:SSZ",
                        "environment": {"device_class": str,
                                        "geo_region": str|null,
                                        "user_agent_label": str|null} | null } ] } ]
    }

Timemaps are ordered by URI-R, mementos in TimeMap order; keys are sorted,
datetimes rendered as ISO-8601 UTC with a trailing Z, the file is UTF-8
with LF endings and a trailing newline. Equal collections therefore save
to byte-identical files.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from datetime import datetime, timezone

from .errors import InvariantViolation, MemstoryError
from .model import (
    Collection,
    DeviceClass,
    EnvironmentTag,
    Memento,
    OriginalResource,
    TimeMap,
    TimeExtent,
    collection_extent,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class SeedListError(MemstoryError):
    """Seed input that cannot become a seed list; lists every bad line."""

    def __init__(self, message: str, bad_lines: list[tuple[int, str]] | None = None) -> None:
        super().__init__(message)
        self.bad_lines = bad_lines or []


class CollectionLoadError(MemstoryError):
    """A collection file that cannot be loaded, with the offending record named."""


class CollectionSchemaError(CollectionLoadError):
    """Unknown or missing schema_version."""


@dataclass(frozen=True)
class SeedList:
    collection_id: str
    collection_name: str
    seeds: tuple[OriginalResource, ...]

    def __post_init__(self) -> None:
        if not self.seeds:
            raise InvariantViolation("seed list must not be empty")
        if len({s.uri for s in self.seeds}) != len(self.seeds):
            raise InvariantViolation("seed list contains duplicates after canonicalization")


def ingest_seeds(raw: str, collection_id: str, collection_name: str) -> SeedList:
    """Parse a seed file: one URI per line, blank lines and '#' comments ignored.

    Seeds are canonicalized and deduplicated keeping first-seen order
    (duplicates are logged). Every line that is not an absolute http(s) URI
    is collected into a single SeedListError.
    """
    seeds: list[OriginalResource] = []
    seen: set[str] = set()
    bad: list[tuple[int, str]] = []
    duplicates = 0
    for lineno, line in enumerate(raw.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            seed = OriginalResource(stripped)
        except InvariantViolation:
            bad.append((lineno, stripped))
            continue
        if seed.uri in seen:
            duplicates += 1
            logger.warning("duplicate seed ignored (line %d): %s", lineno, stripped)
            continue
        seen.add(seed.uri)
        seeds.append(seed)
    if bad:
        listing = "; ".join(f"line {n}: {text!r}" for n, text in bad)
        raise SeedListError(f"{len(bad)} line(s) are not absolute http(s) URIs: {listing}", bad)
    if not seeds:
        raise SeedListError("no seeds found: input is empty or all comments")
    if duplicates:
        logger.warning("%d duplicate seed(s) removed", duplicates)
    return SeedList(collection_id, collection_name, tuple(seeds))


def seedlist_to_collection(seedlist: SeedList) -> Collection:
    """A freshly ingested collection: one empty TimeMap per seed."""
    return Collection(
        seedlist.collection_id,
        seedlist.collection_name,
        tuple(TimeMap(seed) for seed in seedlist.seeds),
    )


def _environment_to_json(tag: EnvironmentTag | None):
    if tag is None:
        return None
    return {
        "device_class": tag.device_class.value,
        "geo_region": tag.geo_region,
        "user_agent_label": tag.user_agent_label,
    }


def _render_datetime(instant: datetime) -> str:
    return instant.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def collection_to_json_bytes(collection: Collection) -> bytes:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "id": collection.id,
        "name": collection.name,
        "timemaps": [
            {
                "uri_r": tm.uri_r.uri,
                "uri_t": tm.uri_t,
                "mementos": [
                    {
                        "uri_m": m.uri_m,
                        "datetime": _render_datetime(m.memento_datetime),
                        "environment": _environment_to_json(m.environment),
                    }
                    for m in tm.mementos
                ],
            }
            for tm in collection.timemaps
        ],
    }
    return (json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def save_collection(collection: Collection, destination) -> int:
    """Write the collection JSON; returns the byte count written.

    `destination` is a filesystem path or a binary file object. I/O
    failures are re-raised with the path attached.
    """
    data = collection_to_json_bytes(collection)
    if hasattr(destination, "write"):
        destination.write(data)
        return len(data)
    try:
        with open(destination, "wb") as handle:
            handle.write(data)
    except OSError as exc:
        raise OSError(f"cannot write collection to {destination}: {exc}") from exc
    return len(data)


def _parse_stored_datetime(text: str, where: str) -> datetime:
    try:
        if not (isinstance(text, str) and text.endswith("Z")):
            raise ValueError("expected trailing Z")
        return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
    except (ValueError, TypeError):
        raise CollectionLoadError(f"{where}: bad datetime {text!r}, expected YYYY-MM-DDTHH:MM:SSZ") from None


def _parse_environment(value, where: str) -> EnvironmentTag | None:
    if value is None:
        return None
    if not isinstance(value, dict):
        raise CollectionLoadError(f"{where}: environment must be an object or null")
    try:
        device = DeviceClass(value.get("device_class"))
    except ValueError:
        raise CollectionLoadError(f"{where}: unknown device_class {value.get('device_class')!r}") from None
    try:
        return EnvironmentTag(device, value.get("geo_region"), value.get("user_agent_label"))
    except InvariantViolation as exc:
        raise CollectionLoadError(f"{where}: {exc}") from None


def load_collection(source) -> Collection:
    """Inverse of save_collection; validates every model invariant on load.

    Order matters in the file itself: mementos already out of
    (datetime, uri_m) order are rejected rather than silently re-sorted,
    with the offending timemap named.
    """
    if hasattr(source, "read"):
        data = source.read()
        label = getattr(source, "name", "<stream>")
    else:
        label = os.fspath(source)
        try:
            with open(source, "rb") as handle:
                data = handle.read()
        except OSError as exc:
            raise OSError(f"cannot read collection from {label}: {exc}") from exc
    try:
        document = json.loads(data)
    except json.JSONDecodeError as exc:
        raise CollectionLoadError(f"{label}: not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise CollectionLoadError(f"{label}: top level must be an object")
    version = document.get("schema_version")
    if version != SCHEMA_VERSION:
        raise CollectionSchemaError(f"{label}: schema_version {version!r} unsupported (expected {SCHEMA_VERSION})")
    if not isinstance(document.get("id"), str) or not isinstance(document.get("name"), str):
        raise CollectionLoadError(f"{label}: id and name must be strings")
    raw_timemaps = document.get("timemaps")
    if not isinstance(raw_timemaps, list):
        raise CollectionLoadError(f"{label}: timemaps must be an array")

    timemaps: list[TimeMap] = []
    for raw in raw_timemaps:
        if not isinstance(raw, dict) or not isinstance(raw.get("uri_r"), str):
            raise CollectionLoadError(f"{label}: each timemap needs a string uri_r")
        where = f"{label}: timemap {raw['uri_r']}"
        try:
            uri_r = OriginalResource(raw["uri_r"])
        except InvariantViolation as exc:
            raise CollectionLoadError(f"{where}: {exc}") from None
        uri_t = raw.get("uri_t")
        if uri_t is not None and not isinstance(uri_t, str):
            raise CollectionLoadError(f"{where}: uri_t must be a string or null")
        raw_mementos = raw.get("mementos", [])
        if not isinstance(raw_mementos, list):
            raise CollectionLoadError(f"{where}: mementos must be an array")
        mementos: list[Memento] = []
        for item in raw_mementos:
            if not isinstance(item, dict) or not isinstance(item.get("uri_m"), str):
                raise CollectionLoadError(f"{where}: each memento needs a string uri_m")
            instant = _parse_stored_datetime(item.get("datetime"), f"{where}, memento {item['uri_m']}")
            environment = _parse_environment(item.get("environment"), f"{where}, memento {item['uri_m']}")
            try:
                mementos.append(Memento(item["uri_m"], uri_r, instant, environment))
            except InvariantViolation as exc:
                raise CollectionLoadError(f"{where}, memento {item['uri_m']}: {exc}") from None
        keys = [m.sort_key() for m in mementos]
        if keys != sorted(keys):
            raise CollectionLoadError(f"{where}: mementos out of (datetime, uri_m) order")
        try:
            timemaps.append(TimeMap(uri_r, tuple(mementos), uri_t=uri_t))
        except InvariantViolation as exc:
            raise CollectionLoadError(f"{where}: {exc}") from None
    try:
        return Collection(document["id"], document["name"], tuple(timemaps))
    except InvariantViolation as exc:
        raise CollectionLoadError(f"{label}: {exc}") from None


@dataclass(frozen=True)
class CollectionStats:
    seed_count: int
    memento_total: int
    min_per_seed: int
    median_per_seed: int
    max_per_seed: int
    extent: TimeExtent | None


def collection_stats(collection: Collection) -> CollectionStats:
    """Seed and memento counts, per-seed order statistics, and the time extent.

    The median of an even count is the lower middle value, keeping it
    integer-valued. The extent is absent for collections without mementos.
    """
    sizes = sorted(len(tm.mementos) for tm in collection.timemaps)
    total = sum(sizes)
    if not sizes:
        return CollectionStats(0, 0, 0, 0, 0, None)
    median = sizes[(len(sizes) - 1) // 2]
    extent = collection_extent(collection) if total else None
    return CollectionStats(len(sizes), total, sizes[0], median, sizes[-1], extent)
