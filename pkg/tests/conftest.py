from __future__ import annotations

from pathlib import Path

import pytest

from cmx import ingest

DATA = Path(__file__).parent / "data"

F1_SCHEMA = DATA / "f1_schema.json"
F1_RECORDS = DATA / "f1_records.ndjson"
F2_SCHEMA = DATA / "f2_schema.json"
F2_RECORDS = DATA / "f2_records.ndjson"


def load_fixture(schema_path: Path, records_path: Path):
    with open(schema_path, "rb") as schema, open(records_path, "rb") as records:
        return ingest(schema, records)


@pytest.fixture(scope="session")
def f1():
    """10 fruit records with hierarchy Food -> {apple, Citrus -> {orange, lemon}}."""
    return load_fixture(F1_SCHEMA, F1_RECORDS)


@pytest.fixture(scope="session")
def f2():
    """4 records over two flat dimensions (Fruit, Taste)."""
    return load_fixture(F2_SCHEMA, F2_RECORDS)
