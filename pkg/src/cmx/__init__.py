"""Generalized confusion matrices as probability distributions.

Evaluation logs with hierarchical and multi-output labels are modeled as
sparse joint distributions; declarative matrix specs compile into
render-ready views through conditioning, marginalization, collapse, and
nesting.
"""

from .dataset import (
    Dataset,
    HierarchyNode,
    InstanceRecord,
    LabelDimension,
    ingest,
    subtree_leaves,
    validate_hierarchy,
)
from .distribution import (
    JointDistribution,
    Role,
    VariableRef,
    actual,
    cell_count,
    collapse,
    condition,
    from_dataset,
    marginalize,
    predicted,
)
from .engine import (
    Cell,
    MatrixView,
    RowKey,
    evaluate,
    nested_key_count,
    query_response_text,
    view_document,
    visible_classes,
)
from .errors import (
    CmxError,
    DistributionError,
    IngestError,
    SpecParseError,
    SpecValidationError,
    UnknownNodeError,
    ZeroMassError,
)
from .metrics import (
    ConfusionCounts,
    CountMatrix,
    MetricColumn,
    MetricKind,
    aggregate_metric,
    confusion_counts,
    metric_column,
    metric_value,
)
from .spec import (
    Condition,
    ConditionRole,
    Encoding,
    MatrixSpec,
    NodePath,
    Normalization,
    parse_spec,
    serialize_spec,
    validate_spec,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "HierarchyNode",
    "InstanceRecord",
    "LabelDimension",
    "ingest",
    "subtree_leaves",
    "validate_hierarchy",
    "JointDistribution",
    "Role",
    "VariableRef",
    "actual",
    "predicted",
    "from_dataset",
    "condition",
    "marginalize",
    "collapse",
    "cell_count",
    "MetricKind",
    "MetricColumn",
    "ConfusionCounts",
    "CountMatrix",
    "confusion_counts",
    "metric_value",
    "aggregate_metric",
    "metric_column",
    "MatrixSpec",
    "Condition",
    "ConditionRole",
    "NodePath",
    "Normalization",
    "Encoding",
    "parse_spec",
    "serialize_spec",
    "validate_spec",
    "MatrixView",
    "RowKey",
    "Cell",
    "evaluate",
    "visible_classes",
    "nested_key_count",
    "view_document",
    "query_response_text",
    "CmxError",
    "IngestError",
    "DistributionError",
    "ZeroMassError",
    "SpecParseError",
    "SpecValidationError",
    "UnknownNodeError",
]
