"""The declarative matrix specification: the shareable artifact.

A spec fully determines a matrix view: which label dimensions are activated
and in what nesting order, the normalization scheme and visual encoding,
requested measures, the hierarchy state (collapsed subtrees, drill-down
filter), and conditioning clauses.  Parsing is strict — unknown fields are
rejected so a shared spec fails loudly instead of silently rendering a
different view — and serialization is canonical: fixed key order, defaults
omitted, stable whitespace, so equal specs are equal bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .dataset import Dataset
from .errors import SpecParseError, UnknownNodeError
from .metrics import METRIC_NAMES

CANONICAL_KEY_ORDER = (
    "classes",
    "normalization",
    "encoding",
    "scale_exclude_diagonal",
    "measures",
    "collapsed",
    "filter",
    "where",
    "prune_empty",
)


class Normalization(str, Enum):
    TOTAL = "total"
    ROWS = "rows"
    COLUMNS = "columns"


class Encoding(str, Enum):
    COLOR = "color"
    SIZE = "size"


class ConditionRole(str, Enum):
    ACTUAL = "actual"
    PREDICTED = "predicted"
    BOTH = "both"


@dataclass(frozen=True)
class Condition:
    """Condition the matrix on an actual and/or predicted class of a dimension."""

    dimension: str
    role: ConditionRole
    class_id: str

    def document(self) -> dict:
        return {
            "dimension": self.dimension,
            "role": self.role.value,
            "class": self.class_id,
        }


@dataclass(frozen=True)
class NodePath:
    """A hierarchy node addressed as 'Dim:Root/.../Node'."""

    dimension: str
    path: tuple[str, ...]

    @classmethod
    def parse(cls, text: str) -> NodePath:
        if not isinstance(text, str) or ":" not in text:
            raise SpecParseError(
                f"node reference {text!r} must have the form 'Dim:Root/Node'"
            )
        dimension, _, raw_path = text.partition(":")
        segments = tuple(raw_path.split("/"))
        if not dimension or not raw_path or any(not s for s in segments):
            raise SpecParseError(f"malformed node reference {text!r}")
        return cls(dimension, segments)

    def __str__(self) -> str:
        return f"{self.dimension}:{'/'.join(self.path)}"

    @property
    def node_name(self) -> str:
        return self.path[-1]


@dataclass(frozen=True)
class MatrixSpec:
    """Declarative configuration of one confusion matrix view."""

    classes: tuple[str, ...]
    normalization: Normalization = Normalization.TOTAL
    encoding: Encoding = Encoding.COLOR
    scale_exclude_diagonal: bool = False
    measures: tuple[str, ...] = ()
    collapsed: tuple[NodePath, ...] = ()
    filter: NodePath | None = None
    where: tuple[Condition, ...] = ()
    prune_empty: bool = False

    def evolve(self, **changes) -> MatrixSpec:
        from dataclasses import replace

        return replace(self, **changes)


def structural_violations(spec: MatrixSpec) -> list[str]:
    """Dataset-independent invariant checks, shared by parse and validate."""
    violations: list[str] = []
    if not spec.classes:
        violations.append("classes must be non-empty")
    if len(set(spec.classes)) != len(spec.classes):
        violations.append("duplicate dimension in classes")
    conditioned: set[tuple[str, str]] = set()
    for cond in spec.where:
        roles = (
            ("actual", "predicted")
            if cond.role is ConditionRole.BOTH
            else (cond.role.value,)
        )
        for role in roles:
            key = (cond.dimension, role)
            if key in conditioned:
                violations.append(
                    f"conflicting where conditions on {cond.dimension}.{role}"
                )
            conditioned.add(key)
        if cond.dimension in spec.classes:
            violations.append(
                f"dimension {cond.dimension!r} cannot be both nested (classes) "
                f"and conditioned (where)"
            )
    for name in spec.measures:
        if name not in METRIC_NAMES:
            violations.append(f"unknown metric {name!r}")
    return violations


def _parse_enum(enum_cls, value, field_name: str):
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise SpecParseError(
            f"unknown {field_name} {value!r} (expected one of: {allowed})"
        ) from None


def _require_bool(value, field_name: str) -> bool:
    if not isinstance(value, bool):
        raise SpecParseError(f"{field_name} must be a boolean")
    return value


def _parse_condition(entry) -> Condition:
    if not isinstance(entry, dict):
        raise SpecParseError("where entries must be objects")
    unknown = set(entry) - {"dimension", "role", "class"}
    if unknown:
        raise SpecParseError(
            f"unknown field {sorted(unknown)[0]!r} in where condition"
        )
    missing = {"dimension", "role", "class"} - set(entry)
    if missing:
        raise SpecParseError(
            f"where condition is missing {sorted(missing)[0]!r}"
        )
    dimension, cls = entry["dimension"], entry["class"]
    if not isinstance(dimension, str) or not isinstance(cls, str):
        raise SpecParseError("where dimension and class must be strings")
    role = _parse_enum(ConditionRole, entry["role"], "where role")
    return Condition(dimension, role, cls)


def parse_spec(text: bytes | str) -> MatrixSpec:
    """Parse UTF-8 JSON spec text; strict about fields, enums, and invariants."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(
            f"syntax error at line {exc.lineno} column {exc.colno}", exc.pos
        ) from exc
    if not isinstance(doc, dict):
        raise SpecParseError("spec must be a JSON object")
    unknown = set(doc) - set(CANONICAL_KEY_ORDER)
    if unknown:
        raise SpecParseError(f"unknown field {sorted(unknown)[0]!r}")

    raw_classes = doc.get("classes")
    if not isinstance(raw_classes, list) or not all(
        isinstance(c, str) for c in raw_classes
    ):
        raise SpecParseError("classes must be a list of dimension names")
    classes = tuple(raw_classes)

    normalization = _parse_enum(
        Normalization, doc.get("normalization", "total"), "normalization"
    )
    encoding = _parse_enum(Encoding, doc.get("encoding", "color"), "encoding")
    scale_exclude_diagonal = _require_bool(
        doc.get("scale_exclude_diagonal", False), "scale_exclude_diagonal"
    )
    prune_empty = _require_bool(doc.get("prune_empty", False), "prune_empty")

    raw_measures = doc.get("measures", [])
    if not isinstance(raw_measures, list) or not all(
        isinstance(m, str) for m in raw_measures
    ):
        raise SpecParseError("measures must be a list of metric names")
    measures = tuple(raw_measures)

    raw_collapsed = doc.get("collapsed", [])
    if not isinstance(raw_collapsed, list):
        raise SpecParseError("collapsed must be a list of node references")
    collapsed = tuple(NodePath.parse(entry) for entry in raw_collapsed)

    filter_path = None
    if doc.get("filter") is not None:
        filter_path = NodePath.parse(doc["filter"])

    raw_where = doc.get("where", [])
    if not isinstance(raw_where, list):
        raise SpecParseError("where must be a list of conditions")
    where = tuple(_parse_condition(entry) for entry in raw_where)

    spec = MatrixSpec(
        classes=classes,
        normalization=normalization,
        encoding=encoding,
        scale_exclude_diagonal=scale_exclude_diagonal,
        measures=measures,
        collapsed=collapsed,
        filter=filter_path,
        where=where,
        prune_empty=prune_empty,
    )
    violations = structural_violations(spec)
    if violations:
        raise SpecParseError(violations[0])
    return spec


def spec_document(spec: MatrixSpec) -> dict:
    """Canonical JSON value: fixed key order, defaults omitted."""
    doc: dict = {"classes": list(spec.classes)}
    if spec.normalization is not Normalization.TOTAL:
        doc["normalization"] = spec.normalization.value
    if spec.encoding is not Encoding.COLOR:
        doc["encoding"] = spec.encoding.value
    if spec.scale_exclude_diagonal:
        doc["scale_exclude_diagonal"] = True
    if spec.measures:
        doc["measures"] = list(spec.measures)
    if spec.collapsed:
        doc["collapsed"] = [str(p) for p in spec.collapsed]
    if spec.filter is not None:
        doc["filter"] = str(spec.filter)
    if spec.where:
        doc["where"] = [c.document() for c in spec.where]
    if spec.prune_empty:
        doc["prune_empty"] = True
    return doc


def serialize_spec(spec: MatrixSpec) -> str:
    """Canonical text form; parse(serialize(s)) == s and re-serialization
    of parsed canonical text is byte-identical."""
    return json.dumps(spec_document(spec), separators=(",", ":"), ensure_ascii=False)


def _check_node_path(ref: NodePath, ds: Dataset, context: str) -> list[str]:
    if ref.dimension not in ds.by_name:
        return [f"{context}: unknown dimension {ref.dimension!r}"]
    dim = ds.by_name[ref.dimension]
    if dim.hierarchy is None:
        return [f"{context}: dimension {ref.dimension!r} has no hierarchy"]
    try:
        dim.resolve_path(ref.path)
    except UnknownNodeError:
        return [f"{context}: unresolved node path {str(ref)!r}"]
    return []


def validate_spec(spec: MatrixSpec, ds: Dataset) -> list[str]:
    """Check every dimension/class/node reference against a dataset.

    Returns violations instead of raising so callers can report all of
    them; includes the structural invariants so hand-built specs get the
    same scrutiny as parsed ones.
    """
    violations = structural_violations(spec)
    for name in spec.classes:
        if name not in ds.by_name:
            violations.append(f"unknown dimension {name!r} in classes")
    for ref in spec.collapsed:
        violations.extend(_check_node_path(ref, ds, "collapsed"))
    if spec.filter is not None:
        violations.extend(_check_node_path(spec.filter, ds, "filter"))
        if (
            spec.filter.dimension in ds.by_name
            and spec.filter.dimension not in spec.classes
        ):
            violations.append(
                f"filter: dimension {spec.filter.dimension!r} is not activated"
            )
    for cond in spec.where:
        if cond.dimension not in ds.by_name:
            violations.append(f"where: unknown dimension {cond.dimension!r}")
            continue
        dim = ds.by_name[cond.dimension]
        if cond.class_id not in dim.class_index:
            violations.append(
                f"where: unknown class {cond.class_id!r} "
                f"for dimension {cond.dimension!r}"
            )
    return violations
