"""memstory: archived web collections as a URI x time grid, and stories cut from it.

A collection of seed pages and their archived snapshots (mementos) forms a
two-dimensional grid: which page, and when it was captured. This package
parses Memento TimeMaps, harvests them politely from archives (or from
offline fixtures), persists collections as JSON, and extracts the four
basic story types over the grid, deterministically.
"""

from .errors import InvariantViolation, MemstoryError
from .model import (
    Collection,
    DeviceClass,
    EmptyCollectionError,
    EnvironmentTag,
    Memento,
    OriginalResource,
    TimeExtent,
    TimeMap,
    canonicalize_uri,
    collection_extent,
    memento_count,
    validate_collection,
)
from .timemaps import (
    LinkEntry,
    TimeMapParseError,
    TimeMapSemanticError,
    extract_timestamp_from_urim,
    format_rfc1123,
    format_timestamp14,
    parse_link_format,
    parse_rfc1123,
    parse_timestamp14,
    serialize_link_format,
)
from .client import (
    ArchiveClient,
    ArchiveEndpoint,
    FetchReport,
    FixtureTransport,
    HarvestError,
    discover_uri_t,
)
from .store import (
    CollectionLoadError,
    CollectionSchemaError,
    SeedList,
    SeedListError,
    collection_stats,
    ingest_seeds,
    load_collection,
    save_collection,
    seedlist_to_collection,
)
from .stories import (
    CapabilityUnsupportedError,
    EmptyBucketError,
    EmptyTimeMapError,
    EmptyWindowError,
    MissingStoryArgumentError,
    Story,
    StoryError,
    StoryPolicy,
    StoryType,
    UnknownSeedError,
    bucket_of,
    generate,
    generate_fpft,
    generate_fpst,
    generate_spft,
    generate_spst,
    select_spaced,
)
from .export import STORY_EXPORT_SCHEMA, export_html, export_json, story_export_dict

__version__ = "0.1.0"

__all__ = [
    "ArchiveClient",
    "ArchiveEndpoint",
    "CapabilityUnsupportedError",
    "Collection",
    "CollectionLoadError",
    "CollectionSchemaError",
    "DeviceClass",
    "EmptyBucketError",
    "EmptyCollectionError",
    "EmptyTimeMapError",
    "EmptyWindowError",
    "EnvironmentTag",
    "FetchReport",
    "FixtureTransport",
    "HarvestError",
    "InvariantViolation",
    "LinkEntry",
    "Memento",
    "MemstoryError",
    "MissingStoryArgumentError",
    "OriginalResource",
    "STORY_EXPORT_SCHEMA",
    "SeedList",
    "SeedListError",
    "Story",
    "StoryError",
    "StoryPolicy",
    "StoryType",
    "TimeExtent",
    "TimeMap",
    "TimeMapParseError",
    "TimeMapSemanticError",
    "UnknownSeedError",
    "bucket_of",
    "canonicalize_uri",
    "collection_extent",
    "collection_stats",
    "discover_uri_t",
    "export_html",
    "export_json",
    "extract_timestamp_from_urim",
    "format_rfc1123",
    "format_timestamp14",
    "generate",
    "generate_fpft",
    "generate_fpst",
    "generate_spft",
    "generate_spst",
    "ingest_seeds",
    "load_collection",
    "memento_count",
    "parse_link_format",
    "parse_rfc1123",
    "parse_timestamp14",
    "save_collection",
    "seedlist_to_collection",
    "select_spaced",
    "serialize_link_format",
    "story_export_dict",
    "validate_collection",
]
