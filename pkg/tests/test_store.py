"""Seed ingestion, JSON persistence, and collection statistics."""

from __future__ import annotations

import json
import random
from datetime import datetime, timezone

import pytest

from memstory import (
    Collection,
    CollectionLoadError,
    CollectionSchemaError,
    DeviceClass,
    EnvironmentTag,
    Memento,
    OriginalResource,
    SeedListError,
    TimeMap,
    collection_stats,
    ingest_seeds,
    load_collection,
    save_collection,
    seedlist_to_collection,
)

from synthgen import random_collection

UTC = timezone.utc


class TestIngestSeeds:
    def test_canonical_dedup_keeps_first(self):
        seedlist = ingest_seeds("http://A.example/\n# comment\nhttp://a.example/\n", "c1", "one")
        assert [s.uri for s in seedlist.seeds] == ["http://a.example/"]

    def test_empty_input_rejected(self):
        with pytest.raises(SeedListError, match="no seeds"):
            ingest_seeds("", "c1", "one")
        with pytest.raises(SeedListError):
            ingest_seeds("# only a comment\n\n", "c1", "one")

    def test_seven_distinct_seeds_keep_input_order(self):
        lines = [f"http://s{i}.example/" for i in (3, 1, 4, 0, 5, 9, 2)]
        seedlist = ingest_seeds("\n".join(lines), "c1", "one")
        assert [s.uri for s in seedlist.seeds] == lines

    def test_every_bad_line_listed(self):
        raw = "http://ok.example/\nnot a uri\nftp://also.bad/\n"
        with pytest.raises(SeedListError) as info:
            ingest_seeds(raw, "c1", "one")
        assert len(info.value.bad_lines) == 2
        assert "line 2" in str(info.value) and "line 3" in str(info.value)

    def test_duplicate_seeds_logged(self, caplog):
        import logging

        with caplog.at_level(logging.WARNING, logger="memstory.store"):
            ingest_seeds("http://a.example/\nhttp://a.example/\n", "c1", "one")
        assert any("duplicate seed" in rec.getMessage() for rec in caplog.records)

    def test_seedlist_to_collection_has_empty_timemaps(self):
        seedlist = ingest_seeds("http://a.example/\nhttp://b.example/\n", "c1", "one")
        collection = seedlist_to_collection(seedlist)
        assert len(collection.timemaps) == 2
        assert all(len(tm.mementos) == 0 for tm in collection.timemaps)


class TestSaveLoad:
    def test_empty_collection_round_trip(self, tmp_path):
        path = tmp_path / "c.json"
        written = save_collection(Collection("c", "empty"), path)
        assert written > 0
        assert json.loads(path.read_text())["timemaps"] == []
        assert load_collection(path) == Collection("c", "empty")

    def test_egypt_round_trip(self, tmp_path, egypt_collection):
        path = tmp_path / "egypt.json"
        save_collection(egypt_collection, path)
        assert load_collection(path) == egypt_collection

    def test_environment_tags_survive_the_round_trip(self, tmp_path):
        seed = OriginalResource("http://a.example/")
        m = Memento(
            "http://arc.example/1/x", seed, datetime(2011, 2, 11, tzinfo=UTC),
            EnvironmentTag(DeviceClass.MOBILE, "EG", "iphone"),
        )
        c = Collection("c", "tagged", (TimeMap(seed, (m,)),))
        path = tmp_path / "c.json"
        save_collection(c, path)
        assert load_collection(path) == c

    def test_saving_twice_is_byte_identical(self, tmp_path, egypt_collection):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        save_collection(egypt_collection, a)
        save_collection(egypt_collection, b)
        assert a.read_bytes() == b.read_bytes()
        assert a.read_bytes().endswith(b"\n")

    def test_unknown_schema_version(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"schema_version": 99, "id": "c", "name": "c", "timemaps": []}))
        with pytest.raises(CollectionSchemaError, match="99"):
            load_collection(path)

    def test_out_of_order_mementos_name_the_timemap(self, tmp_path, egypt_collection):
        path = tmp_path / "c.json"
        save_collection(egypt_collection, path)
        doc = json.loads(path.read_text())
        for tm in doc["timemaps"]:
            if len(tm["mementos"]) >= 2:
                tm["mementos"].reverse()
                broken_uri = tm["uri_r"]
                break
        path.write_text(json.dumps(doc))
        with pytest.raises(CollectionLoadError) as info:
            load_collection(path)
        assert broken_uri in str(info.value)
        assert "order" in str(info.value)

    def test_corrupt_json_reported(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{nope")
        with pytest.raises(CollectionLoadError, match="JSON"):
            load_collection(path)

    def test_bad_datetime_reported_with_memento(self, tmp_path):
        doc = {
            "schema_version": 1, "id": "c", "name": "c",
            "timemaps": [{"uri_r": "http://a.example/", "uri_t": None,
                          "mementos": [{"uri_m": "http://arc.example/1/x",
                                        "datetime": "2011-02-11 12:00:00", "environment": None}]}],
        }
        path = tmp_path / "c.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(CollectionLoadError, match="http://arc.example/1/x"):
            load_collection(path)

    def test_random_collections_round_trip(self, tmp_path):
        rng = random.Random(808)
        for i in range(20):
            c = random_collection(rng, max_seeds=6, max_mementos=8, environment_rate=0.3)
            path = tmp_path / f"c{i}.json"
            save_collection(c, path)
            assert load_collection(path) == c

    def test_file_objects_accepted(self, tmp_path, egypt_collection):
        path = tmp_path / "c.json"
        with open(path, "wb") as handle:
            save_collection(egypt_collection, handle)
        with open(path, "rb") as handle:
            assert load_collection(handle) == egypt_collection


class TestCollectionStats:
    def test_empty(self):
        stats = collection_stats(Collection("c", "c"))
        assert (stats.seed_count, stats.memento_total) == (0, 0)
        assert stats.extent is None

    def test_order_statistics(self):
        def tm(i, count):
            seed = OriginalResource(f"http://s{i}.example/")
            return TimeMap(seed, tuple(
                Memento(f"http://arc.example/{i}-{j}/x", seed, datetime(2011, 2, 1 + j % 27, tzinfo=UTC))
                for j in range(count)
            ))

        stats = collection_stats(Collection("c", "c", (tm(0, 1), tm(1, 2), tm(2, 60))))
        assert stats.min_per_seed == 1
        assert stats.median_per_seed == 2
        assert stats.max_per_seed == 60
        assert stats.memento_total == 63

    def test_median_of_even_count_is_lower_middle(self):
        def tm(i, count):
            seed = OriginalResource(f"http://s{i}.example/")
            return TimeMap(seed, tuple(
                Memento(f"http://arc.example/{i}-{j}/x", seed, datetime(2011, 2, 1 + j, tzinfo=UTC))
                for j in range(count)
            ))

        stats = collection_stats(Collection("c", "c", (tm(0, 1), tm(1, 2), tm(2, 3), tm(3, 4))))
        assert stats.median_per_seed == 2

    def test_matches_brute_force_recount(self):
        rng = random.Random(7001)
        for _ in range(20):
            c = random_collection(rng, max_seeds=9, max_mementos=9)
            stats = collection_stats(c)
            sizes = sorted(len(tm.mementos) for tm in c.timemaps)
            assert stats.seed_count == len(sizes)
            assert stats.memento_total == sum(sizes)
            assert stats.min_per_seed == sizes[0]
            assert stats.max_per_seed == sizes[-1]
            assert stats.median_per_seed == sizes[(len(sizes) - 1) // 2]

    def test_egypt_stats(self, egypt_collection):
        stats = collection_stats(egypt_collection)
        assert stats.seed_count == 10
        assert stats.memento_total == 20
        assert stats.extent.earliest.date().isoformat() == "2011-01-25"
        assert stats.extent.latest.date().isoformat() == "2011-02-11"
