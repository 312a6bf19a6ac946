import os
import pathlib

import pytest


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("RSTODA_CLI")
    if not path:
        pytest.skip("RSTODA_CLI not set")
    return path


@pytest.fixture(scope="session")
def source_dir():
    return pathlib.Path(os.environ.get("RSTODA_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))
