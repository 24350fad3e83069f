"""Seeded random dataset and spec generators for property and acceptance tests.

Specs are generated around an anchor record whose labels every conditioning
clause is drawn from, so a generated (dataset, spec) pair never conditions
itself down to zero mass.
"""

from __future__ import annotations

import json
import random

from cmx import (
    Condition,
    ConditionRole,
    Encoding,
    MatrixSpec,
    NodePath,
    Normalization,
    ingest,
)
from cmx.metrics import METRIC_NAMES


def random_tree_paths(rng: random.Random, root: str, classes: list[str], tag: str):
    """Random rooted tree over the classes, as root-to-leaf path strings."""
    counter = [0]

    def build(group: list[str]) -> list[list[str]]:
        if len(group) == 1:
            return [[c] for c in group]
        suffixes: list[list[str]] = []
        cut = rng.randint(1, len(group) - 1)
        for part in (group[:cut], group[cut:]):
            if len(part) == 1 or rng.random() < 0.5:
                suffixes.extend([c] for c in part)
            else:
                counter[0] += 1
                name = f"g{tag}_{counter[0]}"
                suffixes.extend([name] + s for s in build(part))
        return suffixes

    if rng.random() < 0.4:
        suffixes = [[c] for c in classes]
    else:
        suffixes = build(classes)
    return ["/".join([root] + s) for s in suffixes]


def random_dataset(
    rng: random.Random,
    max_dims: int = 5,
    max_classes: int = 4,
    max_records: int = 200,
    hierarchy_prob: float = 0.5,
):
    """Returns (dataset, records, schema_entries)."""
    ndims = rng.randint(1, max_dims)
    entries = []
    for i in range(ndims):
        k = rng.randint(2, max_classes)
        classes = [f"c{i}{j}" for j in range(k)]
        entry: dict = {"name": f"D{i}", "classes": classes}
        if rng.random() < hierarchy_prob:
            entry["hierarchy"] = random_tree_paths(rng, f"R{i}", classes, str(i))
        entries.append(entry)

    n = rng.randint(1, max_records)
    records = []
    for r in range(n):
        rec = {"id": f"r{r}"}
        for entry in entries:
            a = rng.choice(entry["classes"])
            p = a if rng.random() < 0.65 else rng.choice(entry["classes"])
            rec[f"{entry['name']}.actual"] = a
            rec[f"{entry['name']}.predicted"] = p
        records.append(rec)

    schema_text = json.dumps({"dimensions": entries})
    records_text = "\n".join(json.dumps(r) for r in records) + "\n"
    ds = ingest(schema_text, records_text)
    return ds, records, entries


def leaf_paths(entry: dict) -> dict[str, list[str]]:
    """leaf -> full path segments, straight from the schema path strings."""
    if "hierarchy" not in entry:
        return {}
    return {p.split("/")[-1]: p.split("/") for p in entry["hierarchy"]}


def internal_nodes(entry: dict) -> list[str]:
    nodes: list[str] = []
    seen = set()
    for path in entry.get("hierarchy", []):
        for seg in path.split("/")[:-1]:
            if seg not in seen:
                seen.add(seg)
                nodes.append(seg)
    return nodes


def oracle_visible_map(
    entry: dict, collapsed_names: set[str], filter_node: str | None
) -> tuple[dict[str, str], set[str] | None]:
    """Independent leaf -> visible-node map plus the filter leaf set.

    For every leaf, walk its path from the filter node (or root) downward
    and map the leaf to the first collapsed node encountered.
    """
    paths = leaf_paths(entry)
    mapping: dict[str, str] = {}
    allowed: set[str] | None = None
    if filter_node is not None:
        allowed = set()
    for leaf, path in paths.items():
        if filter_node is not None:
            if filter_node not in path:
                continue
            path = path[path.index(filter_node):]
            allowed.add(leaf)
        for seg in path:
            if seg in collapsed_names:
                mapping[leaf] = seg
                break
    return mapping, allowed


def random_valid_spec(
    rng: random.Random, ds, records: list[dict], entries: list[dict], max_active: int = 3
) -> MatrixSpec:
    dims = [e["name"] for e in entries]
    by_name = {e["name"]: e for e in entries}
    k = rng.randint(1, min(max_active, len(dims)))
    classes = rng.sample(dims, k)
    anchor = rng.choice(records)

    where: list[Condition] = []
    for dname in dims:
        if dname in classes or rng.random() > 0.35:
            continue
        role = rng.choice(["actual", "predicted", "both"])
        if role == "both":
            if anchor[f"{dname}.actual"] != anchor[f"{dname}.predicted"]:
                role = "actual"
        cls = anchor[f"{dname}.{'predicted' if role == 'predicted' else 'actual'}"]
        where.append(Condition(dname, ConditionRole(role), cls))

    filter_ref = None
    hierarchical_active = [d for d in classes if "hierarchy" in by_name[d]]
    if hierarchical_active and rng.random() < 0.4:
        fdim = rng.choice(hierarchical_active)
        paths = leaf_paths(by_name[fdim])
        a_path = paths[anchor[f"{fdim}.actual"]]
        p_path = paths[anchor[f"{fdim}.predicted"]]
        # common prefix: ancestors containing both anchor coordinates (the
        # leaf itself is included only when actual == predicted)
        candidates = [x for x, y in zip(a_path, p_path) if x == y]
        if candidates:
            node = rng.choice(candidates)
            full = a_path[: a_path.index(node) + 1]
            filter_ref = NodePath(fdim, tuple(full))

    collapsed: list[NodePath] = []
    for dname in dims:
        entry = by_name[dname]
        if "hierarchy" not in entry:
            continue
        paths = leaf_paths(entry)
        filter_ancestors: set[str] = set()
        if filter_ref is not None and filter_ref.dimension == dname:
            filter_ancestors = set(filter_ref.path[:-1])
        for node in internal_nodes(entry):
            if node in filter_ancestors:
                continue
            if rng.random() < 0.3:
                for path in paths.values():
                    if node in path:
                        collapsed.append(
                            NodePath(dname, tuple(path[: path.index(node) + 1]))
                        )
                        break

    measures = tuple(
        rng.sample(sorted(METRIC_NAMES), rng.randint(0, 3))
    )
    return MatrixSpec(
        classes=tuple(classes),
        normalization=Normalization(rng.choice(["total", "rows", "columns"])),
        encoding=Encoding(rng.choice(["color", "size"])),
        scale_exclude_diagonal=rng.random() < 0.2,
        measures=measures,
        collapsed=tuple(collapsed),
        filter=filter_ref,
        where=tuple(where),
        prune_empty=rng.random() < 0.25,
    )


def oracle_query_counts(records, entries, spec: MatrixSpec):
    """Brute-force expected counts for evaluate(), via tests.oracle."""
    from . import oracle

    by_name = {e["name"]: e for e in entries}
    filter_dim = None
    filter_leaves = None
    filter_node = {}
    if spec.filter is not None:
        filter_dim = spec.filter.dimension
        filter_node[filter_dim] = spec.filter.node_name

    collapse_maps = {}
    for dname in spec.classes:
        entry = by_name[dname]
        collapsed_names = {
            ref.node_name for ref in spec.collapsed if ref.dimension == dname
        }
        mapping, allowed = oracle_visible_map(
            entry, collapsed_names, filter_node.get(dname)
        )
        if dname == filter_dim:
            filter_leaves = allowed
        if mapping:
            collapse_maps[dname] = mapping

    where = [(c.dimension, c.role.value, c.class_id) for c in spec.where]
    return oracle.evaluate_counts(
        records,
        list(spec.classes),
        where=where,
        filter_dim=filter_dim,
        filter_leaves=filter_leaves,
        collapse_maps=collapse_maps,
    )


def random_spec_value(rng: random.Random) -> MatrixSpec:
    """A structurally valid random spec (no dataset), for round-trip tests."""
    ndims = rng.randint(1, 4)
    all_dims = [f"Dim{i}" for i in range(6)]
    classes = tuple(rng.sample(all_dims, ndims))
    rest = [d for d in all_dims if d not in classes]
    where = []
    used_roles: set[tuple[str, str]] = set()
    for dname in rng.sample(rest, rng.randint(0, 2)):
        role = rng.choice(list(ConditionRole))
        expanded = (
            ("actual", "predicted") if role is ConditionRole.BOTH else (role.value,)
        )
        if any((dname, r) in used_roles for r in expanded):
            continue
        used_roles.update((dname, r) for r in expanded)
        where.append(Condition(dname, role, f"cls{rng.randint(0, 9)}"))
    collapsed = tuple(
        NodePath(rng.choice(classes), ("Root", f"node{rng.randint(0, 9)}"))
        for _ in range(rng.randint(0, 2))
    )
    filter_ref = None
    if rng.random() < 0.3:
        filter_ref = NodePath(rng.choice(classes), ("Root", f"node{rng.randint(0, 9)}"))
    return MatrixSpec(
        classes=classes,
        normalization=Normalization(rng.choice(["total", "rows", "columns"])),
        encoding=Encoding(rng.choice(["color", "size"])),
        scale_exclude_diagonal=rng.random() < 0.3,
        measures=tuple(rng.sample(sorted(METRIC_NAMES), rng.randint(0, 4))),
        collapsed=collapsed,
        filter=filter_ref,
        where=tuple(where),
        prune_empty=rng.random() < 0.3,
    )
