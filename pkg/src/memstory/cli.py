"""Command-line interface.

    memstory ingest  SEEDS --id ID [--name NAME] --out FILE
    memstory harvest COLLECTION --out FILE [--offline DIR] [endpoint flags]
    memstory story   COLLECTION --type {fpft,spst,fpst,spft} [args] [--out FILE]
    memstory stats   COLLECTION

Exit codes are stable: 0 success, 2 usage or input error, 3 harvest with
zero successful seeds, 4 story generation failure. Everything runs offline
with --offline pointing at a fixture directory (see client.FixtureTransport
for the format); pass --generated-at to make story exports byte-reproducible.
"""

from __future__ import annotations

import argparse
import logging
import sys
from datetime import datetime, timedelta, timezone

from .client import (
    ArchiveClient,
    ArchiveEndpoint,
    DEFAULT_TIMEMAP_TEMPLATE,
    FixtureTransport,
    HarvestError,
    TransportError,
)
from .errors import InvariantViolation, MemstoryError
from .export import export_html, export_json
from .model import OriginalResource, validate_collection
from .store import (
    CollectionLoadError,
    SeedListError,
    collection_stats,
    ingest_seeds,
    load_collection,
    save_collection,
    seedlist_to_collection,
)
from .stories import MissingStoryArgumentError, StoryPolicy, StoryType, generate

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_HARVEST_FAILED = 3
EXIT_STORY_FAILED = 4

_DURATION_UNITS = {"s": 1, "m": 60, "h": 3600, "d": 86400}


def parse_duration(text: str) -> timedelta:
    """Durations like 45s, 30m, 6h, 1d; a bare integer means seconds."""
    text = text.strip()
    unit = 1
    if text and text[-1] in _DURATION_UNITS:
        unit = _DURATION_UNITS[text[-1]]
        text = text[:-1]
    if not text.isdigit():
        raise argparse.ArgumentTypeError(f"bad duration {text!r}: use an integer with suffix s/m/h/d")
    return timedelta(seconds=int(text) * unit)


def parse_instant(text: str) -> datetime:
    """ISO-8601 instants, e.g. 2011-02-11T12:00:00Z; date-only means midnight UTC."""
    cleaned = text.strip()
    if cleaned.endswith("Z"):
        cleaned = cleaned[:-1] + "+00:00"
    try:
        value = datetime.fromisoformat(cleaned)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad instant {text!r}: use ISO-8601, e.g. 2011-02-11T12:00:00Z")
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    return value.astimezone(timezone.utc)


def parse_uri_r(text: str) -> OriginalResource:
    try:
        return OriginalResource(text)
    except InvariantViolation as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memstory", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="turn a seed file into an empty collection")
    p_ingest.add_argument("seeds", help="seed file: one URI per line, # comments")
    p_ingest.add_argument("--id", required=True, dest="collection_id", help="collection id")
    p_ingest.add_argument("--name", default=None, help="collection name (defaults to the id)")
    p_ingest.add_argument("--out", required=True, help="collection JSON to write")

    p_harvest = sub.add_parser("harvest", help="fetch TimeMaps for every seed of a collection")
    p_harvest.add_argument("collection", help="collection JSON (defines the seeds)")
    p_harvest.add_argument("--out", required=True, help="updated collection JSON to write")
    p_harvest.add_argument("--endpoint-name", default="aggregator")
    p_harvest.add_argument("--endpoint-template", default=DEFAULT_TIMEMAP_TEMPLATE,
                           help="URI-T template containing {uri_r}")
    p_harvest.add_argument("--politeness", type=parse_duration, default=None,
                           help="minimum spacing between requests to one host (default 1s, 0s offline)")
    p_harvest.add_argument("--max-retries", type=int, default=3)
    p_harvest.add_argument("--parallelism", type=int, default=4)
    p_harvest.add_argument("--offline", metavar="DIR", default=None,
                           help="replay responses from a fixture directory instead of the network")

    p_story = sub.add_parser("story", help="generate a story from a collection")
    p_story.add_argument("collection")
    p_story.add_argument("--type", required=True, dest="story_type",
                         choices=[t.value for t in StoryType])
    p_story.add_argument("--uri-r", type=parse_uri_r, default=None,
                         help="seed page (required for fpst and fpft)")
    p_story.add_argument("--anchor", type=parse_instant, default=None,
                         help="anchor instant (required for spft and fpft)")
    p_story.add_argument("--k", type=int, default=6, help="target story length (default 6)")
    p_story.add_argument("--bucket", type=parse_duration, default=timedelta(days=1),
                         help="time bucket granularity (default 1d)")
    p_story.add_argument("--window", type=parse_duration, default=timedelta(days=1),
                         help="fixed-time window around the anchor (default 1d)")
    p_story.add_argument("--format", choices=["json", "html"], default="json")
    p_story.add_argument("--out", default=None, help="output file (default: stdout)")
    p_story.add_argument("--generated-at", type=parse_instant, default=None,
                         help="override the export timestamp for reproducible output")

    p_stats = sub.add_parser("stats", help="print collection statistics")
    p_stats.add_argument("collection")
    return parser


def _load(path: str):
    try:
        return load_collection(path)
    except (CollectionLoadError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return None


def cmd_ingest(args: argparse.Namespace) -> int:
    try:
        with open(args.seeds, "r", encoding="utf-8") as handle:
            raw = handle.read()
    except OSError as exc:
        print(f"error: cannot read seed file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        seedlist = ingest_seeds(raw, args.collection_id, args.name or args.collection_id)
    except SeedListError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    collection = seedlist_to_collection(seedlist)
    try:
        written = save_collection(collection, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"ingested {len(seedlist.seeds)} seed(s) into {args.out} ({written} bytes)")
    return EXIT_OK


def cmd_harvest(args: argparse.Namespace) -> int:
    collection = _load(args.collection)
    if collection is None:
        return EXIT_USAGE
    politeness = args.politeness
    if politeness is None:
        politeness = timedelta(0) if args.offline else timedelta(seconds=1)
    try:
        endpoint = ArchiveEndpoint(args.endpoint_name, args.endpoint_template,
                                   politeness_delay=politeness, max_retries=args.max_retries)
        if args.offline:
            transport = FixtureTransport(args.offline, endpoint.timemap_template)
            client = ArchiveClient(transport)
        else:
            client = ArchiveClient()
    except (InvariantViolation, TransportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    seeds = [tm.uri_r for tm in collection.timemaps]
    try:
        harvested, reports = client.harvest_collection(
            endpoint, seeds, args.parallelism,
            collection_id=collection.id, collection_name=collection.name,
        )
    except HarvestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HARVEST_FAILED
    except InvariantViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for seed, report in zip(seeds, reports):
        print(f"{report.describe():<16} {seed.uri}")
    try:
        save_collection(harvested, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    ok = sum(1 for r in reports if r.ok)
    total = sum(len(tm.mementos) for tm in harvested.timemaps)
    print(f"harvested {ok}/{len(seeds)} seed(s), {total} memento(s) -> {args.out}")
    return EXIT_OK


def cmd_story(args: argparse.Namespace) -> int:
    collection = _load(args.collection)
    if collection is None:
        return EXIT_USAGE
    problems = validate_collection(collection)
    if problems:
        print(f"error: collection fails validation: {problems[0]}", file=sys.stderr)
        return EXIT_USAGE
    try:
        policy = StoryPolicy(k=args.k, bucket_granularity=args.bucket, spft_window=args.window)
    except InvariantViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        story = generate(
            collection,
            StoryType(args.story_type),
            uri_r=args.uri_r,
            anchor=args.anchor,
            policy=policy,
        )
    except MissingStoryArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MemstoryError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_STORY_FAILED
    generated_at = args.generated_at or datetime.now(timezone.utc)
    if args.format == "html":
        rendered = export_html(story, collection)
    else:
        rendered = export_json(story, generated_at)
    if args.out:
        try:
            with open(args.out, "wb") as handle:
                handle.write(rendered)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    else:
        sys.stdout.buffer.write(rendered)
        sys.stdout.flush()
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    collection = _load(args.collection)
    if collection is None:
        return EXIT_USAGE
    stats = collection_stats(collection)
    print(f"collection: {collection.id} ({collection.name})")
    print(f"seeds: {stats.seed_count}")
    print(f"mementos: {stats.memento_total}")
    print(f"mementos per seed: min {stats.min_per_seed} / median {stats.median_per_seed} / max {stats.max_per_seed}")
    if stats.extent is not None:
        earliest, latest = stats.extent.earliest, stats.extent.latest
        print(f"extent: {earliest.date().isoformat()} .. {latest.date().isoformat()}")
        print(f"earliest: {earliest.strftime('%Y-%m-%dT%H:%M:%SZ')}")
        print(f"latest: {latest.strftime('%Y-%m-%dT%H:%M:%SZ')}")
    else:
        print("extent: (no mementos)")
    return EXIT_OK


_COMMANDS = {
    "ingest": cmd_ingest,
    "harvest": cmd_harvest,
    "story": cmd_story,
    "stats": cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
