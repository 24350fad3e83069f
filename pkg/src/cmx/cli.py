"""Headless ingest, query, and export — the scripting and CI path.

Exit codes: 0 success, 1 validation or usage failure, 2 a condition matched
nothing.  Results go to stdout, diagnostics to stderr.

`cmx query --format json` writes exactly the byte sequence the service
returns from POST /datasets/{id}/query, so piped output and service
responses can be diffed directly.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import socket
import sys
from pathlib import Path

from .engine import MatrixView, evaluate, query_response_text
from .errors import (
    CmxError,
    IngestError,
    SpecParseError,
    SpecValidationError,
    ZeroMassError,
)
from .spec import parse_spec
from .storage import load_dataset, save_dataset
from . import dataset as dataset_mod

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_ZERO_MASS = 2

_LABEL_WIDTH_CAP = 20
_CELL_WIDTH_CAP = 14


def _fail(message: str, code: int = EXIT_VALIDATION) -> int:
    print(f"cmx: {message}", file=sys.stderr)
    return code


def cmd_ingest(args: argparse.Namespace) -> int:
    for path in (args.schema, args.records):
        if not Path(path).is_file():
            return _fail(f"no such file: {path}")
    try:
        with open(args.schema, "rb") as schema, open(args.records, "rb") as records:
            ds = dataset_mod.ingest(schema, records)
    except IngestError as exc:
        for violation in exc.violations:
            print(f"cmx: {violation}", file=sys.stderr)
        return EXIT_VALIDATION
    out = Path(args.out)
    save_dataset(ds, out, out.name, out.name)
    dims = ", ".join(f"{d.name}: {len(d.classes)} classes" for d in ds.schema)
    plural = "dimension" if len(ds.schema) == 1 else "dimensions"
    print(f"{ds.n} records, {len(ds.schema)} {plural} ({dims})")
    return EXIT_OK


def _truncate(label: str, width: int) -> str:
    return label if len(label) <= width else label[: width - 1] + "…"


def format_csv(view: MatrixView) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["row_key", "col_key", "count", "value"])
    for cell in view.cells:
        writer.writerow(
            [
                str(view.row_keys[cell.row]),
                str(view.col_keys[cell.col]),
                cell.count,
                repr(cell.value),
            ]
        )
    return buffer.getvalue()


def format_table(view: MatrixView) -> str:
    """Aligned text matrix with metric columns appended on the right."""
    labels = [_truncate(str(k), _LABEL_WIDTH_CAP) for k in view.row_keys]
    label_width = max([len("actual\\predicted")] + [len(s) for s in labels])
    col_widths = [max(6, min(_CELL_WIDTH_CAP, len(s))) for s in labels]

    def fmt_value(v: float | None) -> str:
        return "-" if v is None else f"{v:.4f}"

    k = len(view.row_keys)
    grid = [["-"] * k for _ in range(k)]
    for cell in view.cells:
        grid[cell.row][cell.col] = f"{cell.value:.4f}"

    metric_names = [col.kind.value for col in view.metric_columns]
    metric_widths = [max(6, len(name)) for name in metric_names]

    lines = []
    header = "actual\\predicted".ljust(label_width)
    header += " | " + "  ".join(
        _truncate(s, w).rjust(w) for s, w in zip(labels, col_widths)
    )
    if metric_names:
        header += " | " + "  ".join(
            name.rjust(w) for name, w in zip(metric_names, metric_widths)
        )
    lines.append(header)

    if metric_names:
        agg = "aggregate".ljust(label_width)
        agg += " | " + "  ".join(" " * w for w in col_widths)
        agg += " | " + "  ".join(
            fmt_value(col.aggregate).rjust(w)
            for col, w in zip(view.metric_columns, metric_widths)
        )
        lines.append(agg)

    for i, key in enumerate(view.row_keys):
        row = labels[i].ljust(label_width)
        row += " | " + "  ".join(
            grid[i][j].rjust(w) for j, w in enumerate(col_widths)
        )
        if metric_names:
            row += " | " + "  ".join(
                fmt_value(col.per_class[key]).rjust(w)
                for col, w in zip(view.metric_columns, metric_widths)
            )
        lines.append(row)
    return "\n".join(lines) + "\n"


def cmd_query(args: argparse.Namespace) -> int:
    spec_path = Path(args.spec)
    if not spec_path.is_file():
        return _fail(f"no such file: {args.spec}")
    try:
        _, ds = load_dataset(args.data)
    except IngestError as exc:
        return _fail(str(exc))
    try:
        spec = parse_spec(spec_path.read_bytes())
    except SpecParseError as exc:
        return _fail(f"spec: {exc}")
    try:
        if args.format == "json":
            sys.stdout.write(query_response_text(ds, spec))
            sys.stdout.flush()
            return EXIT_OK
        view = evaluate(ds, spec)
    except SpecValidationError as exc:
        for violation in exc.violations:
            print(f"cmx: {violation}", file=sys.stderr)
        return EXIT_VALIDATION
    except ZeroMassError as exc:
        return _fail(str(exc), EXIT_ZERO_MASS)
    if args.format == "csv":
        sys.stdout.write(format_csv(view))
    else:
        sys.stdout.write(format_table(view))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    data_dir = Path(args.data_dir)
    if not data_dir.is_dir():
        return _fail(f"no such directory: {args.data_dir}")
    port = args.port
    if port is None:
        port = int(os.environ.get("CMX_PORT", "8789"))
    sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    try:
        sock.bind((args.host, port))
    except OSError as exc:
        sock.close()
        return _fail(f"cannot bind port {port}: {exc}")
    sock.listen(128)
    bound_port = sock.getsockname()[1]
    print(f"listening on http://{args.host}:{bound_port}", flush=True)
    app = create_app(data_dir)
    config = uvicorn.Config(app, log_level="warning")
    server = uvicorn.Server(config)
    server.run(sockets=[sock])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmx", description="Generalized confusion matrix toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="validate and index a prediction log")
    p_ingest.add_argument("--schema", required=True, help="schema JSON file")
    p_ingest.add_argument("--records", required=True, help="newline-delimited records")
    p_ingest.add_argument("--out", required=True, help="output dataset directory")
    p_ingest.set_defaults(func=cmd_ingest)

    p_query = sub.add_parser("query", help="evaluate a spec against a dataset")
    p_query.add_argument("--data", required=True, help="dataset directory from ingest")
    p_query.add_argument("--spec", required=True, help="matrix spec JSON file")
    p_query.add_argument(
        "--format", choices=("json", "csv", "table"), default="table"
    )
    p_query.set_defaults(func=cmd_query)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--data-dir", required=True, help="service data directory")
    p_serve.add_argument("--port", type=int, default=None)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CmxError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
