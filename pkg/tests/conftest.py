"""Shared fixtures: bundled designs and a cross-criterion solve cache."""

from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent.parent / "src" / "cablemf" / "data"
CABLE1_PATH = DATA_DIR / "cable1.json"
CABLE2_PATH = DATA_DIR / "cable2.json"


@pytest.fixture(scope="session")
def solve_cache():
    """Session-wide store so acceptance criteria can share field solutions."""
    return {}
