"""Dataset directory persistence shared by the CLI and the service.

One dataset lives in one directory:
    schema.json     canonical schema document
    records.ndjson  canonical record lines
    meta.json       {"id", "name", "n", "schema_digest"}
Datasets are immutable once written; re-ingesting the directory always
reproduces the identical Dataset.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Sequence

from .dataset import (
    Dataset,
    LabelDimension,
    canonical_schema_text,
    ingest,
    serialize_records,
)
from .errors import IngestError

SCHEMA_FILE = "schema.json"
RECORDS_FILE = "records.ndjson"
META_FILE = "meta.json"


def schema_digest(schema: Sequence[LabelDimension]) -> str:
    """Content hash of the canonical schema document."""
    text = canonical_schema_text(schema)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def dataset_meta(ds: Dataset, dataset_id: str, name: str) -> dict:
    return {
        "id": dataset_id,
        "name": name,
        "n": ds.n,
        "schema_digest": schema_digest(ds.schema),
    }


def save_dataset(ds: Dataset, directory: str | Path, dataset_id: str, name: str) -> dict:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    (directory / SCHEMA_FILE).write_text(
        canonical_schema_text(ds.schema), encoding="utf-8"
    )
    with open(directory / RECORDS_FILE, "w", encoding="utf-8") as fh:
        for line in serialize_records(ds):
            fh.write(line)
    meta = dataset_meta(ds, dataset_id, name)
    _write_atomic(directory / META_FILE, json.dumps(meta, separators=(",", ":")))
    return meta


def load_dataset(directory: str | Path) -> tuple[dict, Dataset]:
    directory = Path(directory)
    schema_path = directory / SCHEMA_FILE
    records_path = directory / RECORDS_FILE
    if not schema_path.is_file() or not records_path.is_file():
        raise IngestError(
            f"{directory} is not a dataset directory "
            f"(expected {SCHEMA_FILE} and {RECORDS_FILE})"
        )
    with open(schema_path, "rb") as schema, open(records_path, "rb") as records:
        ds = ingest(schema, records)
    meta_path = directory / META_FILE
    if meta_path.is_file():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    else:
        meta = dataset_meta(ds, directory.name, directory.name)
    return meta, ds


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)
