"""Cross-cutting story invariants over randomized collections."""

from __future__ import annotations

import random
from datetime import timedelta

import pytest

from memstory import (
    StoryError,
    StoryPolicy,
    StoryType,
    bucket_of,
    generate_fpst,
    generate_spft,
    generate_spst,
)
from memstory.model import EmptyCollectionError

from synthgen import random_collection

DAY = timedelta(days=1)


def assert_story_constraints(story, collection):
    """The independent per-type checks every generated story must satisfy."""
    by_identity = {(m.uri_m, m.uri_r.uri, m.memento_datetime) for m in collection.mementos()}
    keys = [m.sort_key() for m in story.events]
    assert keys == sorted(keys), "events must be chronological"
    assert story.achieved_k == len(story.events)
    for m in story.events:
        assert (m.uri_m, m.uri_r.uri, m.memento_datetime) in by_identity, "event not in source collection"

    granularity = story.policy.bucket_granularity
    if story.story_type is StoryType.SPST:
        buckets = [bucket_of(m.memento_datetime, granularity) for m in story.events]
        assert len(set(buckets)) == len(buckets), "SPST buckets must be pairwise distinct"
    elif story.story_type is StoryType.FPST:
        assert len({m.uri_r.uri for m in story.events}) <= 1, "FPST must stay on one page"
        instants = [m.memento_datetime for m in story.events]
        assert all(a < b for a, b in zip(instants, instants[1:])), "FPST datetimes strictly increase"
    elif story.story_type is StoryType.SPFT:
        pages = [m.uri_r.uri for m in story.events]
        assert len(set(pages)) == len(pages), "SPFT pages must be pairwise distinct"
        assert story.anchor is not None
        for m in story.events:
            assert abs(m.memento_datetime - story.anchor) <= story.policy.spft_window
    else:  # FPFT
        assert len({m.uri_r.uri for m in story.events}) == 1
        buckets = {bucket_of(m.memento_datetime, granularity) for m in story.events}
        assert len(buckets) == 1
        tags = [m.environment for m in story.events]
        assert None not in tags
        assert len(set(tags)) == len(tags), "FPFT environments must be pairwise distinct"


def test_generated_stories_respect_their_type_constraints():
    rng = random.Random(0xE617)
    checked = 0
    for _ in range(60):
        collection = random_collection(rng, max_seeds=12, max_mementos=15)
        mementos = list(collection.mementos())
        policy = StoryPolicy(k=rng.randint(1, 8))
        if not mementos:
            with pytest.raises(EmptyCollectionError):
                generate_spst(collection, policy)
            continue
        story = generate_spst(collection, policy)
        assert_story_constraints(story, collection)
        checked += 1

        target = rng.choice(mementos)
        try:
            fpst = generate_fpst(collection, target.uri_r, policy)
            assert_story_constraints(fpst, collection)
            checked += 1
        except StoryError:
            pass
        try:
            spft = generate_spft(collection, target.memento_datetime, policy)
            assert_story_constraints(spft, collection)
            checked += 1
        except StoryError:
            pass
    assert checked > 100


def test_increasing_k_never_shrinks_a_story():
    rng = random.Random(31337)
    for _ in range(25):
        collection = random_collection(rng, max_seeds=8, max_mementos=20)
        if not list(collection.mementos()):
            continue
        achieved = []
        for k in (1, 2, 4, 8, 16):
            achieved.append(generate_spst(collection, StoryPolicy(k=k)).achieved_k)
        assert achieved == sorted(achieved)


def test_spst_is_deterministic_across_repeats():
    rng = random.Random(4242)
    for _ in range(10):
        collection = random_collection(rng, max_seeds=10, max_mementos=10)
        if not list(collection.mementos()):
            continue
        first = generate_spst(collection)
        assert all(generate_spst(collection) == first for _ in range(3))


def _decision_margin_seconds(collection, anchor, window):
    """Conservative bound: the anchor can move this far (one-sided) without
    any window-membership or distance-comparison decision flipping."""
    distances = sorted(
        abs(int((m.memento_datetime - anchor).total_seconds())) for m in collection.mementos()
    )
    window_s = int(window.total_seconds())
    margins = [abs(d - window_s) for d in distances]
    margins += [b - a for a, b in zip(distances, distances[1:])]
    positive = [m for m in margins if m > 0]
    if not positive or 0 in margins or any(b == a for a, b in zip(distances, distances[1:])):
        return 0
    return min(min(positive) // 2, min(abs(d - window_s) for d in distances))


def test_spft_events_stable_under_small_anchor_shifts():
    rng = random.Random(90210)
    exercised = 0
    for _ in range(80):
        collection = random_collection(rng, max_seeds=8, max_mementos=8)
        mementos = list(collection.mementos())
        if not mementos:
            continue
        anchor = rng.choice(mementos).memento_datetime + timedelta(seconds=rng.randint(-7200, 7200))
        policy = StoryPolicy(k=rng.randint(1, 5))
        margin = _decision_margin_seconds(collection, anchor, policy.spft_window)
        if margin < 2:
            continue
        try:
            baseline = generate_spft(collection, anchor, policy)
        except StoryError:
            continue
        shift = timedelta(seconds=margin - 1)
        for moved in (anchor + shift, anchor - shift):
            shifted = generate_spft(collection, moved, policy)
            assert shifted.events == baseline.events
        exercised += 1
    assert exercised >= 10
