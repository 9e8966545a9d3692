from pathlib import Path

import pytest

from darkspace.orbit import load_tle_file
from darkspace.radiometer import load_preset

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def verification_tle():
    return load_tle_file(FIXTURES / "sgp4_00005.tle")


@pytest.fixture(scope="session")
def leo_tle():
    return load_tle_file(FIXTURES / "noaa21_like.tle")


@pytest.fixture(scope="session")
def atms():
    return load_preset("atms")


@pytest.fixture(scope="session")
def amsua():
    return load_preset("amsua")
