"""The checked-in fixture files must stay in sync with tests/egyptdata.py."""

from __future__ import annotations

from urllib.parse import quote

from memstory import ingest_seeds, parse_link_format

import egyptdata as eg


def test_response_files_match_the_capture_table(egypt_fixture_dir):
    files = sorted(p.name for p in egypt_fixture_dir.iterdir())
    assert files == sorted(quote(seed, safe="") for seed in eg.CAPTURES)
    for seed, instants in eg.CAPTURES.items():
        raw = (egypt_fixture_dir / quote(seed, safe="")).read_bytes()
        status_line, _, body = raw.partition(b"\n")
        assert status_line == b"200"
        assert parse_link_format(body) == eg.timemap_for(seed, instants)


def test_seed_file_lists_every_seed(egypt_seed_file):
    seedlist = ingest_seeds(egypt_seed_file.read_text(), "egypt-2011", "Egypt")
    assert {s.uri for s in seedlist.seeds} == set(eg.CAPTURES)
