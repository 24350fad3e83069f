"""Per-class and aggregate performance measures over a visible count matrix.

All metrics are computed from exact integer counts (never from normalized
masses) via the one-vs-rest decomposition of the square matrix currently on
screen, so they stay correct after collapse, drill-down, and conditioning:
a compound node is simply treated as a single class.

Ratio metrics with a zero denominator return ``None`` (serialized as JSON
null) — an empty row does not mean worst-case performance.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Mapping, NamedTuple, Sequence

from .errors import DistributionError


class MetricKind(str, Enum):
    """The closed set of supported measures; unknown names in specs are rejected."""

    ACCURACY = "accuracy"
    PRECISION = "precision"
    RECALL = "recall"
    COUNT_ACTUAL = "count_actual"
    COUNT_PREDICTED = "count_predicted"
    TRUE_POSITIVES = "true_positives"
    FALSE_POSITIVES = "false_positives"
    TRUE_NEGATIVES = "true_negatives"
    FALSE_NEGATIVES = "false_negatives"


METRIC_NAMES = frozenset(kind.value for kind in MetricKind)

_RATIO_KINDS = {MetricKind.ACCURACY, MetricKind.PRECISION, MetricKind.RECALL}


class ConfusionCounts(NamedTuple):
    tp: int
    fp: int
    fn: int
    tn: int


@dataclass(frozen=True)
class MetricColumn:
    """One metric rendered as a column: aggregate on top, one value per row."""

    kind: MetricKind
    aggregate: float | None
    per_class: Mapping[Hashable, float | None]


class CountMatrix:
    """A square count matrix with shared row/column key order, stored sparsely."""

    def __init__(
        self,
        keys: Sequence[Hashable],
        cells: Mapping[tuple[int, int], int],
    ):
        self.keys = tuple(keys)
        k = len(self.keys)
        self._index = {key: i for i, key in enumerate(self.keys)}
        if len(self._index) != k:
            raise DistributionError("matrix keys must be unique")
        self._cells: dict[tuple[int, int], int] = {}
        self.row_sums = [0] * k
        self.col_sums = [0] * k
        for (i, j), c in cells.items():
            if not (0 <= i < k and 0 <= j < k):
                raise DistributionError(f"cell ({i}, {j}) outside {k}x{k} matrix")
            if c == 0:
                continue
            self._cells[(i, j)] = c
            self.row_sums[i] += c
            self.col_sums[j] += c
        self.total = sum(self.row_sums)

    @classmethod
    def from_dense(
        cls, rows: Sequence[Sequence[int]], keys: Sequence[Hashable] | None = None
    ) -> CountMatrix:
        k = len(rows)
        for row in rows:
            if len(row) != k:
                raise DistributionError("count matrix must be square")
        if keys is None:
            keys = tuple(range(k))
        cells = {
            (i, j): int(c)
            for i, row in enumerate(rows)
            for j, c in enumerate(row)
            if c
        }
        return cls(keys, cells)

    def __len__(self) -> int:
        return len(self.keys)

    def count(self, i: int, j: int) -> int:
        return self._cells.get((i, j), 0)

    def index(self, key: Hashable) -> int:
        try:
            return self._index[key]
        except KeyError:
            raise DistributionError(f"unknown class {key!r}") from None

    def trace(self) -> int:
        return sum(self._cells.get((i, i), 0) for i in range(len(self.keys)))

    def cells(self) -> dict[tuple[int, int], int]:
        return dict(self._cells)


def confusion_counts(matrix: CountMatrix, key: Hashable) -> ConfusionCounts:
    """One-vs-rest decomposition of the visible matrix for one class."""
    k = matrix.index(key)
    tp = matrix.count(k, k)
    fn = matrix.row_sums[k] - tp
    fp = matrix.col_sums[k] - tp
    tn = matrix.total - tp - fn - fp
    return ConfusionCounts(tp, fp, fn, tn)


def metric_value(
    kind: MetricKind, tp: int, fp: int, fn: int, tn: int
) -> float | None:
    """Per-class metric from one-vs-rest counts; None when the ratio is 0/0."""
    kind = MetricKind(kind)
    if kind is MetricKind.RECALL:
        return tp / (tp + fn) if tp + fn else None
    if kind is MetricKind.PRECISION:
        return tp / (tp + fp) if tp + fp else None
    if kind is MetricKind.ACCURACY:
        total = tp + fp + fn + tn
        return (tp + tn) / total if total else None
    if kind is MetricKind.COUNT_ACTUAL:
        return tp + fn
    if kind is MetricKind.COUNT_PREDICTED:
        return tp + fp
    if kind is MetricKind.TRUE_POSITIVES:
        return tp
    if kind is MetricKind.FALSE_POSITIVES:
        return fp
    if kind is MetricKind.TRUE_NEGATIVES:
        return tn
    return fn


def aggregate_metric(kind: MetricKind, matrix: CountMatrix) -> float | None:
    """Matrix-level metric: trace accuracy, totals for counts, macro mean
    over defined classes for precision/recall."""
    kind = MetricKind(kind)
    if len(matrix) == 0:
        raise DistributionError("empty matrix")
    if kind is MetricKind.ACCURACY:
        return matrix.trace() / matrix.total if matrix.total else None
    if kind in (MetricKind.COUNT_ACTUAL, MetricKind.COUNT_PREDICTED):
        return matrix.total
    if kind in (MetricKind.PRECISION, MetricKind.RECALL):
        values = [
            v
            for key in matrix.keys
            if (v := metric_value(kind, *confusion_counts(matrix, key))) is not None
        ]
        return sum(values) / len(values) if values else None
    # tp/fp/fn/tn aggregate as sums over the one-vs-rest decompositions
    per_class = [
        metric_value(kind, *confusion_counts(matrix, key)) for key in matrix.keys
    ]
    return sum(per_class)


def metric_column(kind: MetricKind, matrix: CountMatrix) -> MetricColumn:
    """Aggregate plus per-row values for one metric over the visible matrix."""
    kind = MetricKind(kind)
    per_class = {
        key: metric_value(kind, *confusion_counts(matrix, key))
        for key in matrix.keys
    }
    return MetricColumn(kind, aggregate_metric(kind, matrix), per_class)
