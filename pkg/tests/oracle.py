"""Independent brute-force counting oracle.

Everything here recounts plain record dicts from scratch with ordinary
Python loops — no shared code with the package under test, no numpy, no
sparse tricks.  Expected values in the test suite are frozen from these
functions, and the property/acceptance suites compare the engine against
them directly.

A record is the flat dict form of one log line:
    {"id": "r01", "Fruit.actual": "apple", "Fruit.predicted": "orange"}
"""

from __future__ import annotations

import json
from collections import Counter
from fractions import Fraction


def load_records(path) -> list[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def field(dim: str, role: str) -> str:
    return f"{dim}.{role}"


def joint_counts(records, variables) -> dict[tuple, int]:
    """Count tuples over (dim, role) variables by scanning every record."""
    counts: Counter = Counter()
    for rec in records:
        key = tuple(rec[field(dim, role)] for dim, role in variables)
        counts[key] += 1
    return dict(counts)


def joint_mass(records, variables) -> dict[tuple, float]:
    n = len(records)
    return {t: c / n for t, c in joint_counts(records, variables).items()}


class OracleTable:
    """A reference evaluator: rows of labels plus the variable list.

    Each operation filters, projects, or relabels the surviving rows and
    recounts; probabilities are exact Fractions converted to float only
    at the comparison boundary.
    """

    def __init__(self, rows: list[tuple], variables: list[tuple]):
        self.rows = rows
        self.variables = list(variables)

    @classmethod
    def from_records(cls, records, variables) -> "OracleTable":
        variables = list(variables)
        rows = [
            tuple(rec[field(dim, role)] for dim, role in variables)
            for rec in records
        ]
        return cls(rows, variables)

    def condition(self, assignments: dict) -> "OracleTable":
        """assignments: {(dim, role): set of allowed labels}"""
        positions = {self.variables.index(v): set(vals) for v, vals in assignments.items()}
        rows = [
            row
            for row in self.rows
            if all(row[i] in vals for i, vals in positions.items())
        ]
        dropped = {i for i, vals in positions.items() if len(vals) == 1}
        keep = [i for i in range(len(self.variables)) if i not in dropped]
        return OracleTable(
            [tuple(row[i] for i in keep) for row in rows],
            [self.variables[i] for i in keep],
        )

    def marginalize(self, keep: list[tuple]) -> "OracleTable":
        idx = [self.variables.index(v) for v in keep]
        return OracleTable(
            [tuple(row[i] for i in idx) for row in self.rows], list(keep)
        )

    def collapse(self, dimension: str, mapping: dict) -> "OracleTable":
        positions = [i for i, (dim, _) in enumerate(self.variables) if dim == dimension]
        rows = []
        for row in self.rows:
            cells = list(row)
            for i in positions:
                cells[i] = mapping.get(cells[i], cells[i])
            rows.append(tuple(cells))
        return OracleTable(rows, self.variables)

    def counts(self) -> dict[tuple, int]:
        return dict(Counter(self.rows))

    def support(self) -> int:
        return len(self.rows)

    def mass(self) -> dict[tuple, float]:
        n = len(self.rows)
        return {t: float(Fraction(c, n)) for t, c in self.counts().items()}


def evaluate_counts(
    records,
    classes: list[str],
    where=(),
    filter_dim: str | None = None,
    filter_leaves: set | None = None,
    collapse_maps: dict | None = None,
) -> dict[tuple, int]:
    """Recount a full matrix query from raw records.

    where entries are (dimension, role, class) with role in
    {actual, predicted, both}.  Returns counts keyed by
    (actual label tuple, predicted label tuple) over the activated
    dimensions in order.
    """
    collapse_maps = collapse_maps or {}
    kept = []
    for rec in records:
        ok = True
        for dim, role, cls in where:
            roles = ("actual", "predicted") if role == "both" else (role,)
            for r in roles:
                if rec[field(dim, r)] != cls:
                    ok = False
        if not ok:
            continue
        if filter_dim is not None:
            if rec[field(filter_dim, "actual")] not in filter_leaves:
                continue
            if rec[field(filter_dim, "predicted")] not in filter_leaves:
                continue
        kept.append(rec)

    counts: Counter = Counter()
    for rec in kept:
        actual_key = []
        predicted_key = []
        for dim in classes:
            mapping = collapse_maps.get(dim, {})
            a = rec[field(dim, "actual")]
            p = rec[field(dim, "predicted")]
            actual_key.append(mapping.get(a, a))
            predicted_key.append(mapping.get(p, p))
        counts[(tuple(actual_key), tuple(predicted_key))] += 1
    return dict(counts)


def one_vs_rest(counts: dict[tuple, int], keys: list, k) -> tuple[int, int, int, int]:
    """(tp, fp, fn, tn) for one key from a counts dict keyed by (row, col)."""
    tp = counts.get((k, k), 0)
    row = sum(c for (a, _), c in counts.items() if a == k)
    col = sum(c for (_, p), c in counts.items() if p == k)
    total = sum(counts.values())
    fn = row - tp
    fp = col - tp
    tn = total - tp - fn - fp
    return tp, fp, fn, tn


def recall_of(counts, k):
    tp, fp, fn, tn = one_vs_rest(counts, None, k)
    return None if tp + fn == 0 else Fraction(tp, tp + fn)


def precision_of(counts, k):
    tp, fp, fn, tn = one_vs_rest(counts, None, k)
    return None if tp + fp == 0 else Fraction(tp, tp + fp)
