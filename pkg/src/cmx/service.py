"""HTTP service: dataset upload, schema echo, spec storage, query evaluation.

Datasets are immutable after ingest and shared across concurrent queries;
spec storage is an append-only directory of canonical spec files keyed by id
(last writer wins), so shared specs survive process restarts.

Configuration (flags take precedence over the environment):
    CMX_PORT               default 8789
    CMX_DATA_DIR           datasets/ and specs/ live underneath
    CMX_MAX_UPLOAD_BYTES   default 2 GiB
"""

from __future__ import annotations

import os
import re
import threading
import uuid
from dataclasses import asdict, dataclass
from pathlib import Path

from fastapi import FastAPI, File, Form, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .dataset import Dataset, canonical_schema_text
from .engine import query_response_text
from .errors import (
    IngestError,
    SpecParseError,
    SpecValidationError,
    ZeroMassError,
)
from .spec import parse_spec, serialize_spec
from .storage import dataset_meta, load_dataset, save_dataset
from . import dataset as dataset_mod

DEFAULT_PORT = 8789
DEFAULT_MAX_UPLOAD_BYTES = 2 * 1024**3

_ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


@dataclass(frozen=True)
class DatasetHandle:
    id: str
    name: str
    n: int
    schema_digest: str


def _error(status: int, code: str, message: str, violations=()) -> JSONResponse:
    return JSONResponse(
        {"code": code, "message": message, "violations": list(violations)},
        status_code=status,
    )


def create_app(
    data_dir: str | Path | None = None,
    max_upload_bytes: int | None = None,
) -> FastAPI:
    if data_dir is None:
        data_dir = os.environ.get("CMX_DATA_DIR", "cmx-data")
    data_dir = Path(data_dir)
    if max_upload_bytes is None:
        max_upload_bytes = int(
            os.environ.get("CMX_MAX_UPLOAD_BYTES", DEFAULT_MAX_UPLOAD_BYTES)
        )
    datasets_dir = data_dir / "datasets"
    specs_dir = data_dir / "specs"
    datasets_dir.mkdir(parents=True, exist_ok=True)
    specs_dir.mkdir(parents=True, exist_ok=True)

    registry: dict[str, tuple[DatasetHandle, Dataset]] = {}
    ingest_lock = threading.Lock()

    for child in sorted(datasets_dir.iterdir()):
        if not child.is_dir():
            continue
        try:
            meta, ds = load_dataset(child)
        except IngestError:
            continue
        handle = DatasetHandle(
            meta.get("id", child.name), meta.get("name", child.name), ds.n,
            meta["schema_digest"],
        )
        registry[handle.id] = (handle, ds)

    app = FastAPI(title="cmx", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.registry = registry

    @app.post("/datasets", status_code=201)
    async def upload_dataset(
        schema_file: UploadFile = File(..., alias="schema"),
        records: UploadFile = File(...),
        name: str | None = Form(None),
    ):
        schema_bytes = await schema_file.read()
        records_bytes = await records.read()
        if len(schema_bytes) + len(records_bytes) > max_upload_bytes:
            return _error(
                413,
                "too_large",
                f"upload exceeds the {max_upload_bytes} byte limit",
            )
        try:
            ds = dataset_mod.ingest(schema_bytes, records_bytes)
        except IngestError as exc:
            return _error(400, "ingest_error", "ingest failed", exc.violations)
        dataset_id = uuid.uuid4().hex[:12]
        display = name or (records.filename or dataset_id).rsplit(".", 1)[0]
        with ingest_lock:
            meta = save_dataset(ds, datasets_dir / dataset_id, dataset_id, display)
            handle = DatasetHandle(
                dataset_id, display, ds.n, meta["schema_digest"]
            )
            registry[dataset_id] = (handle, ds)
        return JSONResponse(asdict(handle), status_code=201)

    @app.get("/datasets")
    async def list_datasets():
        return [asdict(handle) for handle, _ in registry.values()]

    @app.get("/datasets/{dataset_id}/schema")
    async def get_schema(dataset_id: str):
        entry = registry.get(dataset_id)
        if entry is None:
            return _error(404, "not_found", f"unknown dataset {dataset_id!r}")
        _, ds = entry
        return Response(
            canonical_schema_text(ds.schema), media_type="application/json"
        )

    @app.post("/datasets/{dataset_id}/query")
    async def query_dataset(dataset_id: str, request: Request):
        entry = registry.get(dataset_id)
        if entry is None:
            return _error(404, "not_found", f"unknown dataset {dataset_id!r}")
        _, ds = entry
        body = await request.body()
        try:
            spec = parse_spec(body)
        except SpecParseError as exc:
            return _error(400, "spec_parse_error", str(exc))
        try:
            text = query_response_text(ds, spec)
        except SpecValidationError as exc:
            return _error(400, "spec_invalid", "spec validation failed", exc.violations)
        except ZeroMassError as exc:
            return _error(422, "zero_mass_condition", str(exc))
        return Response(text, media_type="application/json")

    @app.put("/specs/{spec_id}")
    async def put_spec(spec_id: str, request: Request):
        if not _ID_PATTERN.match(spec_id):
            return _error(400, "invalid_id", f"invalid spec id {spec_id!r}")
        body = await request.body()
        try:
            spec = parse_spec(body)
        except SpecParseError as exc:
            return _error(400, "spec_parse_error", str(exc))
        text = serialize_spec(spec)
        tmp = specs_dir / f"{spec_id}.json.tmp"
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, specs_dir / f"{spec_id}.json")
        return {"id": spec_id}

    @app.get("/specs/{spec_id}")
    async def get_spec(spec_id: str):
        if not _ID_PATTERN.match(spec_id):
            return _error(400, "invalid_id", f"invalid spec id {spec_id!r}")
        path = specs_dir / f"{spec_id}.json"
        if not path.is_file():
            return _error(404, "not_found", f"unknown spec {spec_id!r}")
        return Response(
            path.read_text(encoding="utf-8"), media_type="application/json"
        )

    return app


def register_dataset(app: FastAPI, ds: Dataset, dataset_id: str, name: str) -> DatasetHandle:
    """Expose an already-ingested dataset without persisting it (tests, serve)."""
    meta = dataset_meta(ds, dataset_id, name)
    handle = DatasetHandle(dataset_id, name, ds.n, meta["schema_digest"])
    app.state.registry[dataset_id] = (handle, ds)
    return handle
