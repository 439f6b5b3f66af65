from __future__ import annotations

from pathlib import Path

import pytest

import egyptdata

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def egypt_fixture_dir() -> Path:
    return FIXTURES / "egypt" / "responses"


@pytest.fixture(scope="session")
def egypt_seed_file() -> Path:
    return FIXTURES / "egypt" / "seeds.txt"


@pytest.fixture()
def egypt_collection():
    return egyptdata.egypt_collection()


@pytest.fixture()
def overview_collection():
    return egyptdata.overview_collection()


@pytest.fixture()
def resignation_day_collection():
    return egyptdata.resignation_day_collection()
