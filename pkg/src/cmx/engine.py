"""Compile a matrix spec against a dataset into a render-ready view.

The pipeline is fixed: build the joint over every dimension the spec touches,
apply conditioning clauses, marginalize away non-activated dimensions, apply
the drill-down filter symmetrically, collapse visible subtrees, realize the
nested key product, normalize, and compute metric columns.  Everything is a
pure function of (dataset, spec), so identical inputs always produce
byte-identical view documents.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .dataset import Dataset, HierarchyNode, LabelDimension
from .distribution import (
    JointDistribution,
    VariableRef,
    actual,
    collapse_mapped,
    condition,
    from_dataset,
    marginalize,
    predicted,
)
from .errors import DistributionError, SpecValidationError
from .metrics import CountMatrix, MetricColumn, MetricKind, metric_column
from .spec import (
    MatrixSpec,
    NodePath,
    Normalization,
    ConditionRole,
    spec_document,
    validate_spec,
)


@dataclass(frozen=True)
class RowKey:
    """One nested axis key: (dimension, class-or-node id) per activated dimension."""

    parts: tuple[tuple[str, str], ...]

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(cls for _, cls in self.parts)

    def __str__(self) -> str:
        # class ids cannot contain "/", so this join is unambiguous
        return "/".join(self.labels)


@dataclass(frozen=True)
class Cell:
    row: int
    col: int
    count: int
    value: float


@dataclass(frozen=True)
class MatrixView:
    """Render-ready result: square over the visible label tuples.

    ``cells`` holds only nonzero-count entries; zero cells are implicit
    (clients render them as the light-gray dash).  Counts are exact
    integers summing to ``total_count``.
    """

    row_keys: tuple[RowKey, ...]
    cells: tuple[Cell, ...]
    normalization: Normalization
    encoding: str
    axis_tree: tuple[dict, ...]
    metric_columns: tuple[MetricColumn, ...]
    total_count: int
    counts: CountMatrix = field(repr=False, compare=False)

    @property
    def col_keys(self) -> tuple[RowKey, ...]:
        return self.row_keys

    def value_at(self, row: int, col: int) -> float | None:
        """Normalized value of any position, including implicit zero cells.

        Rows/columns with no mass have no defined normalized value and
        return None rather than 0.
        """
        c = self.counts.count(row, col)
        if self.normalization is Normalization.ROWS:
            denom = self.counts.row_sums[row]
        elif self.normalization is Normalization.COLUMNS:
            denom = self.counts.col_sums[col]
        else:
            denom = self.counts.total
        if denom == 0:
            return None
        return c / denom


def nested_key_count(sizes: Sequence[int]) -> int:
    """Number of nested row keys for the given per-dimension class counts."""
    for k in sizes:
        if k <= 0:
            raise DistributionError(f"dimension sizes must be positive, got {k}")
    return math.prod(sizes)


def visible_classes(
    ds: Dataset,
    dimension: str,
    collapsed: Iterable[NodePath] = (),
    filter: NodePath | None = None,
) -> list[str]:
    """The ordered class-or-node ids currently shown for one dimension.

    Hierarchical dimensions walk the tree depth-first with collapsed
    subtrees replaced by their node; a filter restricts the walk to its
    subtree.  Flat dimensions keep their declared class order.
    """
    dim = ds.dimension(dimension)
    my_collapsed = [ref for ref in collapsed if ref.dimension == dimension]
    my_filter = filter if filter is not None and filter.dimension == dimension else None
    if dim.hierarchy is None:
        if my_collapsed or my_filter:
            raise SpecValidationError(
                [f"dimension {dimension!r} has no hierarchy to collapse or filter"]
            )
        return list(dim.classes)

    collapsed_nodes = {dim.resolve_path(ref.path).name for ref in my_collapsed}
    root = dim.hierarchy
    if my_filter is not None:
        node = dim.resolve_path(my_filter.path)
        for ancestor in my_filter.path[:-1]:
            if ancestor in collapsed_nodes:
                raise SpecValidationError(
                    [
                        f"filter node {my_filter.node_name!r} is inside the "
                        f"collapsed subtree {ancestor!r}"
                    ]
                )
        root = node

    out: list[str] = []

    def visit(node: HierarchyNode) -> None:
        if node.name in collapsed_nodes or node.is_leaf:
            out.append(node.name)
            return
        for child in node.children:
            visit(child)

    visit(root)
    return out


def _attach_constant(
    d: JointDistribution, var: VariableRef, position: int, value: str
) -> JointDistribution:
    """Re-insert a variable that conditioning dropped, at a fixed value."""
    new_vars = d.variables[:position] + (var,) + d.variables[position:]
    mass = {
        t[:position] + (value,) + t[position:]: m for t, m in d.mass.items()
    }
    return JointDistribution(new_vars, mass, d.support_count)


def _collapse_map_for(
    dim: LabelDimension, visible: Sequence[str]
) -> dict[str, str]:
    """leaf -> visible-node rename map covering every collapsed subtree."""
    mapping: dict[str, str] = {}
    for item in visible:
        node = dim.nodes_by_name.get(item)
        if node is not None and not node.is_leaf:
            for leaf in node.leaves():
                mapping[leaf] = item
    return mapping


def _axis_tree(ds: Dataset, spec: MatrixSpec) -> tuple[dict, ...]:
    out = []
    for dname in spec.classes:
        dim = ds.dimension(dname)
        if dim.hierarchy is None:
            out.append({"dimension": dname, "tree": None})
            continue
        collapsed_nodes = {
            dim.resolve_path(ref.path).name
            for ref in spec.collapsed
            if ref.dimension == dname
        }
        root = dim.hierarchy
        if spec.filter is not None and spec.filter.dimension == dname:
            root = dim.resolve_path(spec.filter.path)

        def node_doc(node: HierarchyNode) -> dict:
            return {
                "name": node.name,
                "leaf": node.is_leaf,
                "collapsed": node.name in collapsed_nodes,
                "children": [node_doc(c) for c in node.children],
            }

        out.append({"dimension": dname, "tree": node_doc(root)})
    return tuple(out)


def evaluate(ds: Dataset, spec: MatrixSpec) -> MatrixView:
    """Run the full pipeline for one spec against one dataset."""
    violations = validate_spec(spec, ds)
    if violations:
        raise SpecValidationError(violations)

    where_dims: list[str] = []
    for cond in spec.where:
        if cond.dimension not in where_dims:
            where_dims.append(cond.dimension)

    variables: list[VariableRef] = []
    for dname in (*spec.classes, *where_dims):
        variables.append(actual(dname))
        variables.append(predicted(dname))
    joint = from_dataset(ds, variables)

    for cond in spec.where:
        assignment: dict[VariableRef, set[str]] = {}
        if cond.role in (ConditionRole.ACTUAL, ConditionRole.BOTH):
            assignment[actual(cond.dimension)] = {cond.class_id}
        if cond.role in (ConditionRole.PREDICTED, ConditionRole.BOTH):
            assignment[predicted(cond.dimension)] = {cond.class_id}
        joint = condition(joint, assignment)

    keep = tuple(
        v for dname in spec.classes for v in (actual(dname), predicted(dname))
    )
    if keep != joint.variables:
        joint = marginalize(joint, keep)

    if spec.filter is not None:
        fdim = ds.dimension(spec.filter.dimension)
        node = fdim.resolve_path(spec.filter.path)
        leaves = set(node.leaves())
        var_a, var_p = actual(fdim.name), predicted(fdim.name)
        position = joint.index_of(var_a)
        joint = condition(joint, {var_a: leaves, var_p: leaves})
        if len(leaves) == 1:
            (leaf,) = leaves
            joint = _attach_constant(joint, var_a, position, leaf)
            joint = _attach_constant(joint, var_p, position + 1, leaf)

    key_lists: list[list[str]] = []
    for dname in spec.classes:
        visible = visible_classes(ds, dname, spec.collapsed, spec.filter)
        key_lists.append(visible)
        dim = ds.dimension(dname)
        if dim.hierarchy is not None:
            mapping = _collapse_map_for(dim, visible)
            if any(leaf != node for leaf, node in mapping.items()):
                joint = collapse_mapped(joint, dname, mapping)

    sizes = [len(lst) for lst in key_lists]
    index_maps = [{cls: i for i, cls in enumerate(lst)} for lst in key_lists]
    ndims = len(spec.classes)

    cell_counts: dict[tuple[int, int], int] = {}
    for t, c in joint.counts().items():
        row_idx = 0
        col_idx = 0
        for k in range(ndims):
            row_idx = row_idx * sizes[k] + index_maps[k][t[2 * k]]
            col_idx = col_idx * sizes[k] + index_maps[k][t[2 * k + 1]]
        cell_counts[(row_idx, col_idx)] = cell_counts.get((row_idx, col_idx), 0) + c

    row_keys = [
        RowKey(tuple(zip(spec.classes, combo)))
        for combo in itertools.product(*key_lists)
    ]

    if spec.prune_empty:
        occupied = [False] * len(row_keys)
        for (i, j), c in cell_counts.items():
            occupied[i] = True
            occupied[j] = True
        remap = {}
        kept_keys = []
        for old, keep_it in enumerate(occupied):
            if keep_it:
                remap[old] = len(kept_keys)
                kept_keys.append(row_keys[old])
        row_keys = kept_keys
        cell_counts = {
            (remap[i], remap[j]): c for (i, j), c in cell_counts.items()
        }

    matrix = CountMatrix(row_keys, cell_counts)
    total = matrix.total

    def cell_value(i: int, j: int, c: int) -> float:
        if spec.normalization is Normalization.ROWS:
            return c / matrix.row_sums[i]
        if spec.normalization is Normalization.COLUMNS:
            return c / matrix.col_sums[j]
        return c / total

    cells = tuple(
        Cell(i, j, c, cell_value(i, j, c))
        for (i, j), c in sorted(cell_counts.items())
    )

    columns = tuple(
        metric_column(MetricKind(name), matrix) for name in spec.measures
    )

    return MatrixView(
        row_keys=tuple(row_keys),
        cells=cells,
        normalization=spec.normalization,
        encoding=spec.encoding.value,
        axis_tree=_axis_tree(ds, spec),
        metric_columns=columns,
        total_count=joint.support_count,
        counts=matrix,
    )


def view_document(view: MatrixView) -> dict:
    """The stable wire form of a view (consumed by the UI and the CLI)."""
    return {
        "row_keys": [[list(part) for part in key.parts] for key in view.row_keys],
        "cells": [
            {"row": c.row, "col": c.col, "count": c.count, "value": c.value}
            for c in view.cells
        ],
        "metric_columns": [
            {
                "kind": col.kind.value,
                "aggregate": col.aggregate,
                "per_class": [col.per_class[key] for key in view.row_keys],
            }
            for col in view.metric_columns
        ],
        "axis_tree": [dict(entry) for entry in view.axis_tree],
        "normalization": view.normalization.value,
        "encoding": view.encoding,
        "total_count": view.total_count,
    }


def dumps_canonical(obj) -> str:
    """Single JSON writer shared by every byte-stable surface."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def query_response_document(ds: Dataset, spec: MatrixSpec) -> dict:
    """Evaluate and package a view with the canonicalized spec echoed back."""
    view = evaluate(ds, spec)
    return {"spec": spec_document(spec), "view": view_document(view)}


def query_response_text(ds: Dataset, spec: MatrixSpec) -> str:
    return dumps_canonical(query_response_document(ds, spec))
