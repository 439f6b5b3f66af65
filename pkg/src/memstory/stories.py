"""Typed story extraction over a collection grid.

A story is an ordered selection of mementos cut from the URI x time grid.
Four types exist, named by which axis is held fixed and which slides:

- SPST (sliding page, sliding time): broadest coverage of the whole
  collection; events sit in pairwise-distinct time buckets, spaced as
  evenly as the material allows, preferring distinct URI-Rs.
- FPST (fixed page, sliding time): one seed followed through time.
- SPFT (sliding page, fixed time): different seeds at nearly the same
  instant, an anchor with a symmetric window around it.
- FPFT (fixed page, fixed time): one seed at one instant, differing only
  by capture environment. Standard archives record no environment
  dimension, so on ordinary data this fails with a capability error.

Everything here is deterministic: same collection, arguments, and policy
always produce the same story. Ties break by earlier datetime, then
lexicographic URI-M.

The even-spacing selector maximizes the minimum adjacent gap of the chosen
instants (exactly, via binary search on the gap plus a greedy feasibility
sweep) and always keeps the earliest and latest candidates, so a story
spans the full extent of its material.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum

from .errors import InvariantViolation, MemstoryError
from .model import (
    Collection,
    EmptyCollectionError,
    EnvironmentTag,
    Memento,
    OriginalResource,
    as_utc_second,
)

logger = logging.getLogger(__name__)

#: The one tie-break rule used everywhere (policy field kept for visibility).
TIE_BREAK_RULE = "midpoint-closeness,uri_m"

CAPABILITY_MESSAGE = "not supported by standard web archives: no environment dimension"


class StoryError(MemstoryError):
    """Base class for story-generation failures."""


class SelectionError(StoryError):
    """The spacing selector received no candidates."""


class UnknownSeedError(StoryError):
    """The collection has no TimeMap for the requested URI-R."""


class EmptyTimeMapError(StoryError):
    """The requested seed has a TimeMap but no mementos."""


class EmptyWindowError(StoryError):
    """No memento falls inside the anchor window; names the nearest one."""

    def __init__(self, message: str, nearest: datetime | None = None) -> None:
        super().__init__(message)
        self.nearest = nearest


class EmptyBucketError(StoryError):
    """The requested seed has no memento in the anchor's time bucket."""


class CapabilityUnsupportedError(StoryError):
    """The archive data carries no environment dimension to contrast."""


class MissingStoryArgumentError(StoryError):
    """The dispatcher was called without an argument the story type needs."""


class StoryType(Enum):
    FPFT = "fpft"
    SPST = "spst"
    FPST = "fpst"
    SPFT = "spft"


def _whole_seconds(value: timedelta, what: str) -> int:
    seconds = value.total_seconds()
    if seconds <= 0 or seconds != int(seconds):
        raise InvariantViolation(f"{what} must be a positive whole number of seconds, got {value!r}")
    return int(seconds)


@dataclass(frozen=True)
class StoryPolicy:
    """Knobs the story equations quantify over but leave unspecified.

    k defaults to 6 events; buckets and the fixed-time window both default
    to one day. The tie-break rule is fixed, not configurable.
    """

    k: int = 6
    bucket_granularity: timedelta = timedelta(days=1)
    spft_window: timedelta = timedelta(days=1)
    tie_break: str = TIE_BREAK_RULE

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvariantViolation(f"k must be >= 1, got {self.k}")
        _whole_seconds(self.bucket_granularity, "bucket_granularity")
        _whole_seconds(self.spft_window, "spft_window")
        if self.tie_break != TIE_BREAK_RULE:
            raise InvariantViolation(f"tie_break is fixed to {TIE_BREAK_RULE!r}")


@dataclass(frozen=True)
class Story:
    story_type: StoryType
    collection_id: str
    policy: StoryPolicy
    events: tuple[Memento, ...]
    achieved_k: int = field(default=-1)
    complete: bool = field(default=False)
    anchor: datetime | None = None
    subject: OriginalResource | None = None

    def __post_init__(self) -> None:
        if self.achieved_k == -1:
            object.__setattr__(self, "achieved_k", len(self.events))
        if self.achieved_k != len(self.events):
            raise InvariantViolation("achieved_k must equal the number of events")
        keys = [m.sort_key() for m in self.events]
        if keys != sorted(keys):
            raise InvariantViolation("story events must be chronological (ties by uri_m)")
        if self.story_type is StoryType.FPFT:
            expected = self.achieved_k >= 2
        else:
            expected = self.achieved_k == self.policy.k
        if self.complete != expected:
            raise InvariantViolation("complete flag inconsistent with achieved_k")
        if self.anchor is not None:
            object.__setattr__(self, "anchor", as_utc_second(self.anchor))


def bucket_of(instant: datetime, granularity: timedelta) -> int:
    """Index of the fixed-granularity time bucket containing `instant`.

    Floor division of seconds-since-epoch, so e.g. with one-day buckets
    23:59:59 and 00:00:00 of the same UTC day share a bucket and midnight
    starts the next one.
    """
    seconds = _whole_seconds(granularity, "granularity")
    return int(as_utc_second(instant).timestamp()) // seconds


def _candidate_key(m: Memento) -> tuple[datetime, str, str]:
    return (m.memento_datetime, m.uri_m, m.uri_r.uri)


def select_spaced(candidates: list[Memento], k: int) -> list[Memento]:
    """Pick up to k candidates spread as evenly as possible over time.

    Everything fits when there are at most k candidates. Otherwise the
    selection maximizes the minimum adjacent gap between chosen instants --
    provably, not heuristically: binary search over the gap value with a
    greedy earliest-fit feasibility check, which also pins the earliest
    candidate; the latest is swapped in afterwards (always safe), so the
    extremes of the input are always part of the answer. For k=1 the
    candidate closest to the midpoint of the time extent wins.
    """
    if k < 1:
        raise InvariantViolation(f"k must be >= 1, got {k}")
    ordered = sorted(dict.fromkeys(candidates), key=_candidate_key)
    if not ordered:
        raise SelectionError("no candidates to select from")
    n = len(ordered)
    if n <= k:
        return ordered
    if k == 1:
        lo = int(ordered[0].memento_datetime.timestamp())
        hi = int(ordered[-1].memento_datetime.timestamp())
        midpoint = (lo + hi) / 2
        return [min(ordered, key=lambda m: (abs(int(m.memento_datetime.timestamp()) - midpoint), _candidate_key(m)))]

    times = [int(m.memento_datetime.timestamp()) for m in ordered]

    def greedy(gap: int, cap: int | None = None) -> list[int]:
        chosen = [0]
        last = times[0]
        for i in range(1, n):
            if times[i] - last >= gap:
                chosen.append(i)
                last = times[i]
                if cap is not None and len(chosen) == cap:
                    break
        return chosen

    lo, hi = 0, times[-1] - times[0] + 1  # feasible .. infeasible
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if len(greedy(mid)) >= k:
            lo = mid
        else:
            hi = mid
    picked = greedy(lo, cap=k)
    picked[-1] = n - 1  # latest candidate is always reachable at the optimal gap
    return [ordered[i] for i in picked]


def _dedup_one_per_bucket(mementos, granularity: timedelta) -> list[Memento]:
    """Earliest memento (tie: uri_m) of each bucket, chronologically."""
    best: dict[int, Memento] = {}
    for m in mementos:
        b = bucket_of(m.memento_datetime, granularity)
        if b not in best or _candidate_key(m) < _candidate_key(best[b]):
            best[b] = m
    return [best[b] for b in sorted(best)]


def _assign_distinct_uri_rs(buckets: list[int], groups: dict[int, list[Memento]]) -> dict[int, Memento]:
    """Choose one memento per selected bucket, maximizing distinct URI-Rs.

    Buckets of the selection are preserved; only the representative within
    each bucket may change. A greedy pass keeps the default (earliest)
    representative whenever its URI-R is still free; augmenting paths then
    rescue any bucket left colliding, yielding a maximum matching. Buckets
    that cannot get a unique URI-R keep their earliest representative.
    """
    owner: dict[str, int] = {}
    chosen: dict[int, Memento] = {}

    for b in sorted(buckets):
        for m in groups[b]:
            key = m.uri_r.uri
            if key not in owner:
                owner[key] = b
                chosen[b] = m
                break

    def augment(b: int, visited: set[str]) -> bool:
        for m in groups[b]:
            key = m.uri_r.uri
            if key in visited:
                continue
            visited.add(key)
            if key not in owner or augment(owner[key], visited):
                owner[key] = b
                chosen[b] = m
                return True
        return False

    for b in sorted(buckets):
        if b not in chosen:
            augment(b, set())
    for b in buckets:
        if b not in chosen:
            chosen[b] = groups[b][0]
    return chosen


def generate_spst(collection: Collection, policy: StoryPolicy = StoryPolicy()) -> Story:
    """Broadest-coverage story: different pages at well-spread, distinct times.

    The pool keeps at most one memento per (URI-R, bucket); spacing runs
    over one representative per bucket, so events always occupy pairwise
    distinct buckets; a repair pass then swaps representatives within their
    buckets to maximize the number of distinct URI-Rs (a preference, not a
    guarantee -- a collection of one seed still yields a story).
    """
    pool: dict[tuple[str, int], Memento] = {}
    for m in collection.mementos():
        key = (m.uri_r.uri, bucket_of(m.memento_datetime, policy.bucket_granularity))
        if key not in pool or _candidate_key(m) < _candidate_key(pool[key]):
            pool[key] = m
    if not pool:
        raise EmptyCollectionError(f"collection {collection.id!r} has no mementos")

    groups: dict[int, list[Memento]] = {}
    for (_, bucket), m in pool.items():
        groups.setdefault(bucket, []).append(m)
    for bucket in groups:
        groups[bucket].sort(key=_candidate_key)

    representatives = [groups[bucket][0] for bucket in sorted(groups)]
    picked = select_spaced(representatives, policy.k)
    picked_buckets = [bucket_of(m.memento_datetime, policy.bucket_granularity) for m in picked]
    chosen = _assign_distinct_uri_rs(picked_buckets, groups)
    events = tuple(sorted(chosen.values(), key=Memento.sort_key))
    return Story(
        StoryType.SPST,
        collection.id,
        policy,
        events,
        complete=len(events) == policy.k,
    )


def generate_fpst(collection: Collection, uri_r: OriginalResource, policy: StoryPolicy = StoryPolicy()) -> Story:
    """Single-page story: one seed's evolution through time.

    Candidates are that seed's mementos thinned to the earliest per bucket,
    then spread with the same even-spacing selector, so datetimes strictly
    increase.
    """
    timemap = collection.timemap_for(uri_r)
    if timemap is None:
        raise UnknownSeedError(f"collection {collection.id!r} has no timemap for {uri_r.uri}")
    if not timemap.mementos:
        raise EmptyTimeMapError(f"timemap for {uri_r.uri} has no mementos")
    candidates = _dedup_one_per_bucket(timemap.mementos, policy.bucket_granularity)
    events = tuple(select_spaced(candidates, policy.k))
    return Story(
        StoryType.FPST,
        collection.id,
        policy,
        events,
        complete=len(events) == policy.k,
        subject=timemap.uri_r,
    )


def generate_spft(collection: Collection, anchor: datetime, policy: StoryPolicy = StoryPolicy()) -> Story:
    """Fixed-time story: how different pages looked at nearly one instant.

    Mementos within the symmetric window around the anchor are reduced to
    the single closest per URI-R; the k closest of those become the story,
    presented chronologically. URI-Rs are pairwise distinct by
    construction. An empty window is an error that names the nearest
    memento outside it, so the caller can re-aim.
    """
    anchor = as_utc_second(anchor)
    everything = list(collection.mementos())
    if not everything:
        raise EmptyCollectionError(f"collection {collection.id!r} has no mementos")
    window = policy.spft_window

    def distance(m: Memento) -> timedelta:
        return abs(m.memento_datetime - anchor)

    inside = [m for m in everything if distance(m) <= window]
    if not inside:
        nearest = min(everything, key=lambda m: (distance(m), _candidate_key(m)))
        raise EmptyWindowError(
            f"no memento within {window} of {anchor.isoformat()}; "
            f"nearest is {nearest.uri_m} at {nearest.memento_datetime.isoformat()}",
            nearest=nearest.memento_datetime,
        )
    closest_per_page: dict[str, Memento] = {}
    for m in inside:
        key = m.uri_r.uri
        held = closest_per_page.get(key)
        if held is None or (distance(m), _candidate_key(m)) < (distance(held), _candidate_key(held)):
            closest_per_page[key] = m
    ranked = sorted(closest_per_page.values(), key=lambda m: (distance(m), m.uri_m))
    events = tuple(sorted(ranked[: policy.k], key=Memento.sort_key))
    return Story(
        StoryType.SPFT,
        collection.id,
        policy,
        events,
        complete=len(events) == policy.k,
        anchor=anchor,
    )


def generate_fpft(
    collection: Collection,
    uri_r: OriginalResource,
    anchor: datetime,
    policy: StoryPolicy = StoryPolicy(),
) -> Story:
    """Fixed page at a fixed time: representations differing only by environment.

    Works only on data that carries environment tags (device class, region,
    user agent); one event per distinct environment found in the anchor's
    bucket, at least two required. Ordinary archive captures have no such
    dimension, so this fails with CapabilityUnsupportedError on any
    standard collection.
    """
    anchor = as_utc_second(anchor)
    timemap = collection.timemap_for(uri_r)
    if timemap is None:
        raise UnknownSeedError(f"collection {collection.id!r} has no timemap for {uri_r.uri}")
    bucket = bucket_of(anchor, policy.bucket_granularity)
    candidates = [
        m for m in timemap.mementos if bucket_of(m.memento_datetime, policy.bucket_granularity) == bucket
    ]
    if not candidates:
        raise EmptyBucketError(
            f"no memento of {uri_r.uri} in the bucket containing {anchor.isoformat()}"
        )
    by_environment: dict[EnvironmentTag, Memento] = {}
    for m in candidates:
        if m.environment is None:
            continue
        held = by_environment.get(m.environment)
        if held is None or _candidate_key(m) < _candidate_key(held):
            by_environment[m.environment] = m
    if len(by_environment) < 2:
        raise CapabilityUnsupportedError(
            f"fixed-page/fixed-time story for {uri_r.uri} is {CAPABILITY_MESSAGE} "
            f"({len(candidates)} capture(s) in the bucket, {len(by_environment)} distinct environment(s))"
        )
    picked = [by_environment[tag] for tag in sorted(by_environment, key=EnvironmentTag.sort_key)]
    events = tuple(sorted(picked, key=Memento.sort_key))
    return Story(
        StoryType.FPFT,
        collection.id,
        policy,
        events,
        complete=True,
        anchor=anchor,
        subject=timemap.uri_r,
    )


def generate(
    collection: Collection,
    story_type: StoryType,
    *,
    uri_r: OriginalResource | None = None,
    anchor: datetime | None = None,
    policy: StoryPolicy = StoryPolicy(),
) -> Story:
    """Dispatch to the matching generator, validating arguments per type.

    FPST and FPFT need a uri_r; SPFT and FPFT need an anchor. Arguments a
    type does not use are ignored with a logged warning.
    """
    needs_uri_r = story_type in (StoryType.FPST, StoryType.FPFT)
    needs_anchor = story_type in (StoryType.SPFT, StoryType.FPFT)
    if needs_uri_r and uri_r is None:
        raise MissingStoryArgumentError(f"story type {story_type.value} requires uri_r")
    if needs_anchor and anchor is None:
        raise MissingStoryArgumentError(f"story type {story_type.value} requires an anchor instant")
    if not needs_uri_r and uri_r is not None:
        logger.warning("story type %s ignores uri_r=%s", story_type.value, uri_r.uri)
    if not needs_anchor and anchor is not None:
        logger.warning("story type %s ignores anchor=%s", story_type.value, anchor.isoformat())

    if story_type is StoryType.SPST:
        return generate_spst(collection, policy)
    if story_type is StoryType.FPST:
        return generate_fpst(collection, uri_r, policy)
    if story_type is StoryType.SPFT:
        return generate_spft(collection, anchor, policy)
    return generate_fpft(collection, uri_r, anchor, policy)
