"""Domain model: canonicalization, invariants, extent and count queries."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, strategies as st

from memstory import (
    Collection,
    DeviceClass,
    EmptyCollectionError,
    EnvironmentTag,
    InvariantViolation,
    Memento,
    OriginalResource,
    TimeExtent,
    TimeMap,
    canonicalize_uri,
    collection_extent,
    memento_count,
    validate_collection,
)

from synthgen import random_collection

UTC = timezone.utc


def mem(seed: str, instant: datetime, suffix: str = "") -> Memento:
    stamp = instant.strftime("%Y%m%d%H%M%S")
    return Memento(f"http://arc.example/{stamp}{suffix}/{seed}", OriginalResource(seed), instant)


class TestCanonicalization:
    def test_scheme_and_host_lowercased(self):
        assert canonicalize_uri("HTTP://Example.COM/Path?Q=1") == "http://example.com/Path?Q=1"

    def test_fragment_stripped_query_kept(self):
        assert canonicalize_uri("http://a.example/p?x=1#frag") == "http://a.example/p?x=1"

    def test_empty_path_becomes_slash(self):
        assert canonicalize_uri("http://a.example") == "http://a.example/"

    @pytest.mark.parametrize("bad", ["", "   ", "ftp://a.example/", "nota uri", "http://", "//host/x", "http://a.example/<x>"])
    def test_rejects_non_http_uris(self, bad):
        with pytest.raises(InvariantViolation):
            canonicalize_uri(bad)

    def test_idempotent(self):
        once = canonicalize_uri("HTTPS://WWW.Site.example:8080/a/b?q#f")
        assert canonicalize_uri(once) == once


class TestMemento:
    def test_truncates_subseconds(self):
        m = mem("http://a.example/", datetime(2011, 2, 11, 12, 0, 0, 999999, tzinfo=UTC))
        assert m.memento_datetime.microsecond == 0

    def test_rejects_pre_1996(self):
        with pytest.raises(InvariantViolation):
            mem("http://a.example/", datetime(1995, 12, 31, 23, 59, 59, tzinfo=UTC))

    def test_rejects_future(self):
        with pytest.raises(InvariantViolation):
            mem("http://a.example/", datetime.now(UTC) + timedelta(days=2))

    def test_rejects_uri_m_equal_to_uri_r(self):
        with pytest.raises(InvariantViolation):
            Memento("http://a.example/", OriginalResource("http://A.example/"), datetime(2011, 1, 1, tzinfo=UTC))


class TestEnvironmentTag:
    def test_geo_region_shape(self):
        with pytest.raises(InvariantViolation):
            EnvironmentTag(DeviceClass.DESKTOP, geo_region="Egypt")
        assert EnvironmentTag(DeviceClass.DESKTOP, geo_region="EG").geo_region == "EG"


class TestTimeMap:
    def test_sorts_on_construction(self):
        a = mem("http://a.example/", datetime(2011, 2, 2, tzinfo=UTC))
        b = mem("http://a.example/", datetime(2011, 2, 1, tzinfo=UTC))
        tm = TimeMap(OriginalResource("http://a.example/"), (a, b))
        assert [m.memento_datetime.day for m in tm.mementos] == [1, 2]

    def test_equal_datetimes_tie_break_by_uri_m(self):
        t = datetime(2011, 2, 11, tzinfo=UTC)
        a = mem("http://a.example/", t, suffix="zz")
        b = mem("http://a.example/", t, suffix="aa")
        tm = TimeMap(OriginalResource("http://a.example/"), (a, b))
        assert [m.uri_m for m in tm.mementos] == sorted([a.uri_m, b.uri_m])

    def test_rejects_duplicate_uri_m(self):
        a = mem("http://a.example/", datetime(2011, 2, 1, tzinfo=UTC))
        with pytest.raises(InvariantViolation):
            TimeMap(OriginalResource("http://a.example/"), (a, a))

    def test_rejects_foreign_memento(self):
        a = mem("http://other.example/", datetime(2011, 2, 1, tzinfo=UTC))
        with pytest.raises(InvariantViolation):
            TimeMap(OriginalResource("http://a.example/"), (a,))


class TestCollection:
    def test_rejects_duplicate_uri_r(self):
        tm = TimeMap(OriginalResource("http://a.example/"))
        with pytest.raises(InvariantViolation):
            Collection("c", "c", (tm, tm))

    def test_timemaps_sorted_by_uri_r(self):
        tms = (TimeMap(OriginalResource("http://b.example/")), TimeMap(OriginalResource("http://a.example/")))
        c = Collection("c", "c", tms)
        assert [tm.uri_r.uri for tm in c.timemaps] == ["http://a.example/", "http://b.example/"]

    def test_timemap_for_accepts_uncanonical_key(self):
        c = Collection("c", "c", (TimeMap(OriginalResource("http://a.example/")),))
        assert c.timemap_for("HTTP://A.EXAMPLE/") is not None


class TestValidateCollection:
    def test_empty_collection_is_valid(self):
        assert validate_collection(Collection("empty", "nothing yet")) == []

    def test_unsorted_timemap_reported_once(self):
        a = mem("http://a.example/", datetime(2011, 2, 1, tzinfo=UTC))
        b = mem("http://a.example/", datetime(2011, 2, 2, tzinfo=UTC))
        tm = TimeMap(OriginalResource("http://a.example/"), (a, b))
        object.__setattr__(tm, "mementos", (b, a))  # corrupt past the constructor
        broken = Collection("c", "c", (tm,))
        violations = validate_collection(broken)
        assert len(violations) == 1
        assert "unsorted timemap" in violations[0]

    def test_resignation_day_fixture_is_valid(self, resignation_day_collection):
        assert len(list(resignation_day_collection.mementos())) == 6
        assert len(resignation_day_collection.timemaps) == 6
        assert validate_collection(resignation_day_collection) == []

    def test_constructed_values_always_validate(self):
        rng = random.Random(20110125)
        for _ in range(25):
            assert validate_collection(random_collection(rng, max_seeds=8, max_mementos=10)) == []


class TestCollectionExtent:
    def test_egypt_extent(self, egypt_collection):
        extent = collection_extent(egypt_collection)
        assert extent.earliest.date().isoformat() == "2011-01-25"
        assert extent.latest.date().isoformat() == "2011-02-11"

    def test_single_memento_degenerate(self):
        t = datetime(2011, 2, 11, 12, 0, tzinfo=UTC)
        c = Collection("c", "c", (TimeMap(OriginalResource("http://a.example/"), (mem("http://a.example/", t),)),))
        extent = collection_extent(c)
        assert extent.earliest == extent.latest == t

    def test_empty_collection_raises(self):
        with pytest.raises(EmptyCollectionError):
            collection_extent(Collection("c", "c"))

    def test_matches_brute_force_scan_on_random_collections(self):
        rng = random.Random(42)
        for _ in range(30):
            c = random_collection(rng, max_seeds=10, max_mementos=10)
            instants = [m.memento_datetime for m in c.mementos()]
            if not instants:
                with pytest.raises(EmptyCollectionError):
                    collection_extent(c)
                continue
            extent = collection_extent(c)
            assert extent.earliest == min(instants)
            assert extent.latest == max(instants)

    def test_extent_is_monotone_under_addition(self):
        rng = random.Random(7)
        c = random_collection(rng, max_seeds=5, max_mementos=5)
        extra = mem("http://newseed.example/", datetime(2011, 6, 1, tzinfo=UTC))
        grown = c.with_timemap(TimeMap(extra.uri_r, (extra,)))
        if list(c.mementos()):
            before = collection_extent(c)
            after = collection_extent(grown)
            assert after.earliest <= before.earliest
            assert after.latest >= before.latest


class TestMementoCount:
    def test_empty(self):
        assert memento_count(Collection("c", "c")) == (0, {})

    def test_sum_of_sizes(self):
        days = [datetime(2011, 2, d, tzinfo=UTC) for d in range(1, 9)]
        tms = (
            TimeMap(OriginalResource("http://a.example/"), tuple(mem("http://a.example/", t) for t in days[:2])),
            TimeMap(OriginalResource("http://b.example/"), tuple(mem("http://b.example/", t) for t in days[:5])),
            TimeMap(OriginalResource("http://c.example/"), (mem("http://c.example/", days[0]),)),
        )
        total, per = memento_count(Collection("c", "c", tms))
        assert total == 8
        assert sorted(per.values()) == [1, 2, 5]

    def test_matches_flat_enumeration(self):
        rng = random.Random(99)
        for _ in range(20):
            c = random_collection(rng, max_seeds=12, max_mementos=12)
            total, per = memento_count(c)
            assert total == len(list(c.mementos()))
            assert total == sum(per.values())


@given(st.integers(min_value=0, max_value=10**9), st.integers(min_value=0, max_value=10**9))
def test_time_extent_orders_its_bounds(a, b):
    base = datetime(1996, 1, 1, tzinfo=UTC)
    lo, hi = sorted((a, b))
    extent = TimeExtent(base + timedelta(seconds=lo), base + timedelta(seconds=hi))
    assert extent.earliest <= extent.latest
    with pytest.raises(InvariantViolation):
        TimeExtent(base + timedelta(seconds=hi + 1), base + timedelta(seconds=lo))


def test_egypt_fixture_shape(egypt_collection, overview_collection):
    total, _ = memento_count(egypt_collection)
    assert total == 20
    assert len(egypt_collection.timemaps) == 10
    over_total, per = memento_count(overview_collection)
    assert over_total == 12
    assert len(per) == 10
    assert validate_collection(egypt_collection) == []
