"""Prediction-log ingest: label schema, hierarchies, and columnar record storage.

A dataset is a set of label dimensions (each an ordered class set, optionally
arranged as a rooted category tree) plus one record per evaluated instance
carrying an actual and a predicted class for every dimension.  Records are
stored columnarly as integer class codes so that building a joint distribution
over any subset of (dimension, role) variables is a single O(n) pass.
"""

from __future__ import annotations

import json
from array import array
from dataclasses import dataclass, field
from functools import cached_property
from typing import IO, Iterator, Mapping, Sequence

import numpy as np

from .errors import IngestError, UnknownNodeError

ACTUAL = "actual"
PREDICTED = "predicted"
ROLES = (ACTUAL, PREDICTED)

_PATH_SEP = "/"


def _check_identifier(name: object, what: str) -> str:
    if not isinstance(name, str):
        raise IngestError(f"{what} must be a string, got {type(name).__name__}")
    trimmed = name.strip()
    if not trimmed:
        raise IngestError(f"{what} must be non-empty")
    if _PATH_SEP in trimmed:
        raise IngestError(f"{what} {trimmed!r} must not contain {_PATH_SEP!r}")
    return trimmed


@dataclass(frozen=True)
class HierarchyNode:
    """One node of a dimension's category tree.  Leaves carry class ids."""

    name: str
    children: tuple[HierarchyNode, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self) -> Iterator[HierarchyNode]:
        """Yield this node and all descendants, depth-first, children in order."""
        yield self
        for child in self.children:
            yield from child.walk()

    def leaves(self) -> list[str]:
        """Leaf names under this node, in depth-first order."""
        if self.is_leaf:
            return [self.name]
        out: list[str] = []
        for child in self.children:
            out.extend(child.leaves())
        return out


@dataclass(frozen=True)
class LabelDimension:
    """A label variable: its ordered class set and optional category tree."""

    name: str
    classes: tuple[str, ...]
    hierarchy: HierarchyNode | None = None

    @cached_property
    def class_index(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.classes)}

    @cached_property
    def nodes_by_name(self) -> dict[str, HierarchyNode]:
        if self.hierarchy is None:
            return {}
        return {node.name: node for node in self.hierarchy.walk()}

    @cached_property
    def path_by_name(self) -> dict[str, tuple[str, ...]]:
        """Root-to-node path for every hierarchy node, keyed by node name."""
        paths: dict[str, tuple[str, ...]] = {}
        if self.hierarchy is None:
            return paths

        def visit(node: HierarchyNode, prefix: tuple[str, ...]) -> None:
            path = prefix + (node.name,)
            paths.setdefault(node.name, path)
            for child in node.children:
                visit(child, path)

        visit(self.hierarchy, ())
        return paths

    def node(self, name: str) -> HierarchyNode:
        if self.hierarchy is None:
            raise UnknownNodeError(f"dimension {self.name!r} has no hierarchy")
        try:
            return self.nodes_by_name[name]
        except KeyError:
            raise UnknownNodeError(
                f"unknown node {name!r} in dimension {self.name!r}"
            ) from None

    def resolve_path(self, path: Sequence[str]) -> HierarchyNode:
        """Resolve a root-to-node path ('Food', 'Citrus') to its node."""
        if self.hierarchy is None:
            raise UnknownNodeError(f"dimension {self.name!r} has no hierarchy")
        node = self.hierarchy
        if not path or path[0] != node.name:
            raise UnknownNodeError(
                f"path {_PATH_SEP.join(path)!r} does not start at the root "
                f"{node.name!r} of dimension {self.name!r}"
            )
        for segment in path[1:]:
            for child in node.children:
                if child.name == segment:
                    node = child
                    break
            else:
                raise UnknownNodeError(
                    f"path {_PATH_SEP.join(path)!r} does not resolve in "
                    f"dimension {self.name!r} (no child {segment!r} under {node.name!r})"
                )
        return node


@dataclass(frozen=True)
class InstanceRecord:
    """One evaluated instance: per-dimension (actual, predicted) assignments."""

    id: str
    assignments: Mapping[str, tuple[str, str]] = field(hash=False)


def validate_hierarchy(dim: LabelDimension) -> list[str]:
    """Check all category-tree invariants; returns violations, empty if valid.

    Checks: node names unique within the dimension, every class appears as
    exactly one leaf, no leaf outside the class set.
    """
    if dim.hierarchy is None:
        return []
    violations: list[str] = []
    seen: dict[str, int] = {}
    for node in dim.hierarchy.walk():
        seen[node.name] = seen.get(node.name, 0) + 1
    for name, count in seen.items():
        if count > 1:
            violations.append(
                f"dimension {dim.name!r}: node name {name!r} appears {count} times"
            )
    leaf_names = dim.hierarchy.leaves()
    leaf_set = set(leaf_names)
    class_set = set(dim.classes)
    for cls in dim.classes:
        if cls not in leaf_set:
            violations.append(
                f"dimension {dim.name!r}: class {cls!r} is not a leaf of the hierarchy"
            )
    for leaf in leaf_names:
        if leaf not in class_set:
            violations.append(
                f"dimension {dim.name!r}: leaf {leaf!r} is not a declared class"
            )
    return violations


def subtree_leaves(dim: LabelDimension, node_name: str) -> set[str]:
    """All leaf class ids under a node; for a leaf, the singleton set."""
    return set(dim.node(node_name).leaves())


def _build_hierarchy(dim_name: str, paths: Sequence[str]) -> HierarchyNode:
    """Build a tree from root-to-leaf path strings, preserving declaration order."""
    parsed: list[list[str]] = []
    for raw in paths:
        if not isinstance(raw, str):
            raise IngestError(
                f"dimension {dim_name!r}: hierarchy entries must be path strings"
            )
        segments = [seg.strip() for seg in raw.split(_PATH_SEP)]
        if len(segments) < 2 or any(not seg for seg in segments):
            raise IngestError(
                f"dimension {dim_name!r}: malformed hierarchy path {raw!r}"
            )
        parsed.append(segments)
    roots = {p[0] for p in parsed}
    if len(roots) != 1:
        raise IngestError(
            f"dimension {dim_name!r}: hierarchy paths must share a single root, "
            f"got {sorted(roots)!r}"
        )

    # Nested dict preserving insertion order; leaves map to None.
    tree: dict = {}
    for segments in parsed:
        cursor = tree
        for seg in segments[1:-1]:
            nxt = cursor.setdefault(seg, {})
            if nxt is None:
                raise IngestError(
                    f"dimension {dim_name!r}: node {seg!r} is used both as a "
                    f"leaf and as an internal node"
                )
            cursor = nxt
        leaf = segments[-1]
        if leaf in cursor and cursor[leaf] is not None:
            raise IngestError(
                f"dimension {dim_name!r}: node {leaf!r} is used both as a "
                f"leaf and as an internal node"
            )
        cursor[leaf] = None

    def build(name: str, children: dict | None) -> HierarchyNode:
        if children is None:
            return HierarchyNode(name)
        return HierarchyNode(
            name, tuple(build(n, c) for n, c in children.items())
        )

    return build(parsed[0][0], tree)


def parse_schema(source: IO[bytes] | bytes | str) -> tuple[LabelDimension, ...]:
    """Parse and validate a schema document into label dimensions."""
    if hasattr(source, "read"):
        data = source.read()  # type: ignore[union-attr]
    else:
        data = source
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise IngestError(f"schema: invalid JSON at position {exc.pos}") from exc
    if not isinstance(doc, dict) or "dimensions" not in doc:
        raise IngestError("schema: document must contain a 'dimensions' list")
    raw_dims = doc["dimensions"]
    if not isinstance(raw_dims, list) or not raw_dims:
        raise IngestError("schema: 'dimensions' must be a non-empty list")

    dims: list[LabelDimension] = []
    seen_names: set[str] = set()
    for entry in raw_dims:
        if not isinstance(entry, dict):
            raise IngestError("schema: each dimension must be an object")
        unknown = set(entry) - {"name", "classes", "hierarchy"}
        if unknown:
            raise IngestError(
                f"schema: unknown dimension fields {sorted(unknown)!r}"
            )
        name = _check_identifier(entry.get("name"), "dimension name")
        if name in seen_names:
            raise IngestError(f"schema: duplicate dimension {name!r}")
        seen_names.add(name)
        raw_classes = entry.get("classes")
        if not isinstance(raw_classes, list) or not raw_classes:
            raise IngestError(
                f"dimension {name!r}: 'classes' must be a non-empty list"
            )
        classes = tuple(
            _check_identifier(c, f"class in dimension {name!r}") for c in raw_classes
        )
        if len(set(classes)) != len(classes):
            raise IngestError(f"dimension {name!r}: duplicate class identifiers")
        hierarchy = None
        if entry.get("hierarchy") is not None:
            raw_paths = entry["hierarchy"]
            if not isinstance(raw_paths, list) or not raw_paths:
                raise IngestError(
                    f"dimension {name!r}: 'hierarchy' must be a non-empty list of paths"
                )
            hierarchy = _build_hierarchy(name, raw_paths)
        dim = LabelDimension(name, classes, hierarchy)
        hierarchy_violations = validate_hierarchy(dim)
        if hierarchy_violations:
            raise IngestError(hierarchy_violations)
        dims.append(dim)
    return tuple(dims)


class Dataset:
    """An immutable, columnar-indexed prediction log.

    Class assignments are stored as one int32 code array per
    (dimension, role) column; the arrays are write-protected so a single
    Dataset can back many concurrent queries.
    """

    def __init__(
        self,
        schema: Sequence[LabelDimension],
        ids: Sequence[str],
        codes: Mapping[tuple[str, str], np.ndarray],
    ):
        if not ids:
            raise IngestError("no records")
        self.schema = tuple(schema)
        self.by_name = {d.name: d for d in self.schema}
        self.ids = tuple(ids)
        self.n = len(self.ids)
        self._codes: dict[tuple[str, str], np.ndarray] = {}
        for dim in self.schema:
            for role in ROLES:
                arr = np.asarray(codes[(dim.name, role)], dtype=np.int32)
                if arr.shape != (self.n,):
                    raise IngestError(
                        f"column ({dim.name}, {role}) has {arr.shape[0]} entries, "
                        f"expected {self.n}"
                    )
                arr = arr.copy()
                arr.setflags(write=False)
                self._codes[(dim.name, role)] = arr

    def dimension(self, name: str) -> LabelDimension:
        try:
            return self.by_name[name]
        except KeyError:
            raise IngestError(f"unknown dimension {name!r}") from None

    def codes(self, dimension: str, role: str) -> np.ndarray:
        return self._codes[(dimension, str(role))]

    def record(self, i: int) -> InstanceRecord:
        assignments = {
            d.name: (
                d.classes[self._codes[(d.name, ACTUAL)][i]],
                d.classes[self._codes[(d.name, PREDICTED)][i]],
            )
            for d in self.schema
        }
        return InstanceRecord(self.ids[i], assignments)

    @property
    def records(self) -> _RecordView:
        return _RecordView(self)

    def take(self, k: int) -> Dataset:
        """A new dataset over the first k records (schema shared)."""
        k = min(k, self.n)
        return Dataset(
            self.schema,
            self.ids[:k],
            {key: arr[:k] for key, arr in self._codes.items()},
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.ids == other.ids
            and all(
                np.array_equal(self._codes[k], other._codes[k]) for k in self._codes
            )
        )

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, dimensions={[d.name for d in self.schema]})"


class _RecordView(Sequence[InstanceRecord]):
    """Lazy sequence materializing InstanceRecords on demand."""

    def __init__(self, ds: Dataset):
        self._ds = ds

    def __len__(self) -> int:
        return self._ds.n

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self._ds.record(j) for j in range(*i.indices(self._ds.n))]
        return self._ds.record(i)


def _iter_lines(source: IO[bytes] | bytes | str) -> Iterator[str]:
    if hasattr(source, "read"):
        for raw in source:  # type: ignore[union-attr]
            yield raw.decode("utf-8") if isinstance(raw, bytes) else raw
        return
    data = source
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    yield from data.splitlines(keepends=True)


def parse_records(
    schema: Sequence[LabelDimension], source: IO[bytes] | bytes | str
) -> Dataset:
    """Parse newline-delimited records against a schema into a Dataset.

    Each line is one JSON object with an ``id`` field plus flat
    ``<dim>.actual`` / ``<dim>.predicted`` class fields for every dimension.
    Unknown fields, missing roles, unknown classes, and duplicate ids are
    all hard errors naming the offending line or record.
    """
    columns = [(d, f"{d.name}.actual", f"{d.name}.predicted") for d in schema]
    expected_keys = frozenset(
        ["id"] + [k for _, a, p in columns for k in (a, p)]
    )
    indexes = [d.class_index for d, _, _ in columns]
    actual_cols = [array("i") for _ in columns]
    predicted_cols = [array("i") for _ in columns]
    ids: list[str] = []
    seen_ids: set[str] = set()
    loads = json.loads

    for lineno, line in enumerate(_iter_lines(source), 1):
        stripped = line.strip()
        if not stripped:
            raise IngestError(f"line {lineno}: malformed record (blank line)")
        try:
            obj = loads(stripped)
        except json.JSONDecodeError:
            raise IngestError(f"line {lineno}: malformed record") from None
        if not isinstance(obj, dict):
            raise IngestError(f"line {lineno}: record must be an object")
        if obj.keys() != expected_keys:
            _explain_record_fields(obj, expected_keys, lineno)
        rec_id = obj["id"]
        if not isinstance(rec_id, str) or not rec_id:
            raise IngestError(f"line {lineno}: 'id' must be a non-empty string")
        if rec_id in seen_ids:
            raise IngestError(f"line {lineno}: duplicate record id {rec_id!r}")
        seen_ids.add(rec_id)
        for i, (dim, a_key, p_key) in enumerate(columns):
            index = indexes[i]
            try:
                actual_cols[i].append(index[obj[a_key]])
            except (KeyError, TypeError):
                raise IngestError(
                    f"record {rec_id!r}: unknown class {obj[a_key]!r} "
                    f"for dimension {dim.name!r}"
                ) from None
            try:
                predicted_cols[i].append(index[obj[p_key]])
            except (KeyError, TypeError):
                raise IngestError(
                    f"record {rec_id!r}: unknown class {obj[p_key]!r} "
                    f"for dimension {dim.name!r}"
                ) from None
        ids.append(rec_id)

    if not ids:
        raise IngestError("no records")
    codes = {}
    for i, (dim, _, _) in enumerate(columns):
        codes[(dim.name, ACTUAL)] = np.frombuffer(actual_cols[i], dtype=np.int32)
        codes[(dim.name, PREDICTED)] = np.frombuffer(predicted_cols[i], dtype=np.int32)
    return Dataset(schema, ids, codes)


def _explain_record_fields(
    obj: dict, expected: frozenset[str], lineno: int
) -> None:
    rec_id = obj.get("id", "<missing id>")
    extra = sorted(set(obj) - expected)
    missing = sorted(expected - set(obj))
    parts = []
    if extra:
        parts.append(f"unknown fields {extra!r}")
    if missing:
        parts.append(f"missing fields {missing!r}")
    raise IngestError(f"line {lineno}, record {rec_id!r}: " + ", ".join(parts))


def ingest(
    schema_source: IO[bytes] | bytes | str,
    records_source: IO[bytes] | bytes | str,
) -> Dataset:
    """Load, validate, and index a prediction log. See parse_schema/parse_records."""
    schema = parse_schema(schema_source)
    return parse_records(schema, records_source)


def _hierarchy_paths(node: HierarchyNode) -> list[str]:
    out: list[str] = []

    def visit(n: HierarchyNode, prefix: str) -> None:
        path = f"{prefix}{_PATH_SEP}{n.name}" if prefix else n.name
        if n.is_leaf:
            out.append(path)
        else:
            for child in n.children:
                visit(child, path)

    visit(node, "")
    return out


def schema_document(schema: Sequence[LabelDimension]) -> dict:
    """The canonical schema document (dimension order and key order fixed)."""
    dims = []
    for d in schema:
        entry: dict = {"name": d.name, "classes": list(d.classes)}
        if d.hierarchy is not None:
            entry["hierarchy"] = _hierarchy_paths(d.hierarchy)
        dims.append(entry)
    return {"dimensions": dims}


def canonical_schema_text(schema: Sequence[LabelDimension]) -> str:
    return json.dumps(schema_document(schema), separators=(",", ":"), ensure_ascii=False)


def serialize_records(ds: Dataset) -> Iterator[str]:
    """Records in canonical newline-delimited form (round-trips via ingest)."""
    cols = [
        (d, ds.codes(d.name, ACTUAL), ds.codes(d.name, PREDICTED))
        for d in ds.schema
    ]
    for i, rec_id in enumerate(ds.ids):
        obj = {"id": rec_id}
        for d, actual, predicted in cols:
            obj[f"{d.name}.actual"] = d.classes[actual[i]]
            obj[f"{d.name}.predicted"] = d.classes[predicted[i]]
        yield json.dumps(obj, separators=(",", ":"), ensure_ascii=False) + "\n"
