"""Property tests: closedness, commutation, additivity, and round trips.

Smaller sibling of the acceptance suite — these run on every test
invocation with modest case counts; the acceptance module runs the full
counted versions with the budgets pinned by the criteria.
"""

from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from cmx import (
    JointDistribution,
    MatrixSpec,
    actual,
    collapse,
    condition,
    evaluate,
    from_dataset,
    marginalize,
    parse_spec,
    predicted,
    serialize_spec,
    subtree_leaves,
    validate_hierarchy,
)
from cmx.dataset import canonical_schema_text, ingest, serialize_records
from cmx.engine import view_document

from . import generators, oracle


def check_invariants(d: JointDistribution) -> None:
    assert all(m > 0 for m in d.mass.values())
    if d.support_count > 0:
        assert math.isclose(sum(d.mass.values()), 1.0, abs_tol=1e-9)
    for t, m in d.mass.items():
        assert len(t) == len(d.variables)
        c = m * d.support_count
        assert abs(c - round(c)) < 1e-6


def random_chain_step(rng: random.Random, d: JointDistribution, table, entries):
    """Pick one applicable operation at random; returns (d', table')."""
    by_name = {e["name"]: e for e in entries}
    ops = ["marginalize", "collapse", "condition", "filter"]
    rng.shuffle(ops)
    for op in ops:
        if op == "marginalize" and len(d.variables) > 1:
            k = rng.randint(1, len(d.variables) - 1)
            keep = rng.sample(list(d.variables), k)
            return (
                marginalize(d, keep),
                table.marginalize([(v.dimension, v.role.value) for v in keep]),
            )
        if op == "collapse":
            dims_present = {v.dimension for v in d.variables}
            candidates = [
                (dname, node)
                for dname in dims_present
                for node in generators.internal_nodes(by_name[dname])
            ]
            if not candidates:
                continue
            dname, node = rng.choice(candidates)
            paths = generators.leaf_paths(by_name[dname])
            leaves = {leaf for leaf, p in paths.items() if node in p}
            return (
                collapse(d, dname, node, leaves),
                table.collapse(dname, {leaf: node for leaf in leaves}),
            )
        if op in ("condition", "filter") and d.mass:
            anchor = rng.choice(list(d.mass.keys()))
            k = rng.randint(1, min(2, len(d.variables)))
            positions = rng.sample(range(len(d.variables)), k)
            assignments = {}
            o_assignments = {}
            vocab_by_pos = [
                sorted({t[i] for t in d.mass}) for i in range(len(d.variables))
            ]
            for i in positions:
                # anchored so the condition always matches something
                values = {anchor[i]}
                extra = rng.randint(0, 1)
                values |= set(rng.sample(vocab_by_pos[i], min(extra, len(vocab_by_pos[i]))))
                var = d.variables[i]
                assignments[var] = values
                o_assignments[(var.dimension, var.role.value)] = values
            return condition(d, assignments), table.condition(o_assignments)
    return d, table


class TestClosednessChains:
    def test_random_chains_preserve_invariants(self):
        rng = random.Random(7)
        for _ in range(60):
            ds, records, entries = generators.random_dataset(
                rng, max_dims=5, max_classes=4, max_records=200
            )
            variables = tuple(
                v for e in entries for v in (actual(e["name"]), predicted(e["name"]))
            )
            d = from_dataset(ds, variables)
            table = oracle.OracleTable.from_records(
                records, [(v.dimension, v.role.value) for v in variables]
            )
            check_invariants(d)
            for _ in range(rng.randint(1, 5)):
                if not d.variables:
                    break
                d, table = random_chain_step(rng, d, table, entries)
                check_invariants(d)
                assert d.support_count == table.support()
                assert d.counts() == table.counts()


class TestCommutation:
    def test_condition_marginalize_commute(self):
        rng = random.Random(11)
        for _ in range(50):
            ds, records, entries = generators.random_dataset(
                rng, max_dims=4, max_classes=4, max_records=150
            )
            if len(entries) < 2:
                continue
            variables = tuple(
                v for e in entries for v in (actual(e["name"]), predicted(e["name"]))
            )
            d = from_dataset(ds, variables)
            split = rng.randint(1, len(entries) - 1)
            cond_dims = entries[:split]
            keep = tuple(
                v
                for e in entries[split:]
                for v in (actual(e["name"]), predicted(e["name"]))
            )
            anchor = rng.choice(records)
            assignments = {}
            for e in cond_dims:
                var = actual(e["name"]) if rng.random() < 0.5 else predicted(e["name"])
                values = {anchor[f"{var.dimension}.{var.role.value}"]}
                if rng.random() < 0.4:
                    values.add(rng.choice(e["classes"]))
                assignments[var] = values

            a = marginalize(condition(d, assignments), keep)
            pre = tuple(assignments) + keep
            b = condition(marginalize(d, pre), assignments)
            if b.variables != keep:
                b = marginalize(b, keep)
            assert a.variables == b.variables
            assert set(a.mass) == set(b.mass)
            assert a.support_count == b.support_count
            for t in a.mass:
                assert math.isclose(a.mass[t], b.mass[t], abs_tol=1e-12)


class TestMarginalizationOrder:
    def test_permutation_invariance(self):
        rng = random.Random(13)
        for _ in range(30):
            ds, records, entries = generators.random_dataset(
                rng, max_dims=4, max_classes=3, max_records=100
            )
            if len(entries) < 2:
                continue
            variables = tuple(
                v for e in entries for v in (actual(e["name"]), predicted(e["name"]))
            )
            d = from_dataset(ds, variables)
            keep = tuple(rng.sample(variables, rng.randint(1, len(variables) - 1)))
            drop = [v for v in variables if v not in keep]
            rng.shuffle(drop)
            stepwise = d
            remaining = list(variables)
            for v in drop:
                remaining.remove(v)
                order = [u for u in stepwise.variables if u in remaining]
                stepwise = marginalize(stepwise, order)
            direct = marginalize(d, tuple(u for u in stepwise.variables))
            assert stepwise.mass == direct.mass
            assert stepwise.support_count == direct.support_count


class TestCollapseAdditivity:
    def test_compound_counts_are_sums(self):
        rng = random.Random(17)
        for _ in range(40):
            ds, records, entries = generators.random_dataset(
                rng, max_dims=2, max_classes=4, max_records=120, hierarchy_prob=1.0
            )
            entry = rng.choice(entries)
            nodes = generators.internal_nodes(entry)
            if not nodes:
                continue
            node = rng.choice(nodes)
            paths = generators.leaf_paths(entry)
            leaves = {leaf for leaf, p in paths.items() if node in p}
            dname = entry["name"]
            d = from_dataset(ds, (actual(dname), predicted(dname)))
            collapsed = collapse(d, dname, node, leaves)
            before = d.counts()
            for t, c in collapsed.counts().items():
                preimage = [
                    bt
                    for bt in before
                    if all(
                        (bt[i] in leaves and t[i] == node) or bt[i] == t[i]
                        for i in range(2)
                    )
                ]
                assert c == sum(before[bt] for bt in preimage)
                assert math.isclose(
                    collapsed.mass[t],
                    math.fsum(d.mass[bt] for bt in preimage),
                    abs_tol=1e-12,
                )


class TestSpecRoundTrip:
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    @settings(max_examples=200, deadline=None)
    def test_parse_serialize_identity(self, seed):
        spec = generators.random_spec_value(random.Random(seed))
        text = serialize_spec(spec)
        assert parse_spec(text) == spec
        assert serialize_spec(parse_spec(text)) == text


class TestPipelineOrderRobustness:
    def test_where_before_or_after_marginalize(self):
        rng = random.Random(23)
        checked = 0
        while checked < 25:
            ds, records, entries = generators.random_dataset(
                rng, max_dims=4, max_classes=4, max_records=150
            )
            spec = generators.random_valid_spec(rng, ds, records, entries)
            if not spec.where:
                continue
            checked += 1
            view = evaluate(ds, spec)
            swapped = _evaluate_where_after_marginalize(ds, spec)
            assert swapped == {
                (view.row_keys[c.row].labels, view.col_keys[c.col].labels): c.count
                for c in view.cells
            }

    def test_repeated_evaluation_is_bit_identical(self):
        rng = random.Random(29)
        for _ in range(10):
            ds, records, entries = generators.random_dataset(rng, max_dims=3)
            spec = generators.random_valid_spec(rng, ds, records, entries)
            import json

            a = json.dumps(view_document(evaluate(ds, spec)))
            b = json.dumps(view_document(evaluate(ds, spec)))
            assert a == b


def _evaluate_where_after_marginalize(ds, spec: MatrixSpec):
    """Alternative pipeline: marginalize to activated+conditioned vars first."""
    from cmx.spec import ConditionRole

    where_vars = []
    for cond in spec.where:
        if cond.role in (ConditionRole.ACTUAL, ConditionRole.BOTH):
            where_vars.append(actual(cond.dimension))
        if cond.role in (ConditionRole.PREDICTED, ConditionRole.BOTH):
            where_vars.append(predicted(cond.dimension))
    where_dims = []
    for cond in spec.where:
        if cond.dimension not in where_dims:
            where_dims.append(cond.dimension)
    variables = []
    for dname in (*spec.classes, *where_dims):
        variables += [actual(dname), predicted(dname)]
    joint = from_dataset(ds, variables)
    activated = tuple(
        v for dname in spec.classes for v in (actual(dname), predicted(dname))
    )
    joint = marginalize(joint, activated + tuple(dict.fromkeys(where_vars)))
    for cond in spec.where:
        assignment = {}
        if cond.role in (ConditionRole.ACTUAL, ConditionRole.BOTH):
            assignment[actual(cond.dimension)] = {cond.class_id}
        if cond.role in (ConditionRole.PREDICTED, ConditionRole.BOTH):
            assignment[predicted(cond.dimension)] = {cond.class_id}
        joint = condition(joint, assignment)
    if joint.variables != activated:
        joint = marginalize(joint, activated)
    # replicate the filter/collapse/nest tail of the pipeline
    if spec.filter is not None:
        dim = ds.dimension(spec.filter.dimension)
        node = dim.resolve_path(spec.filter.path)
        leaves = set(node.leaves())
        va, vp = actual(dim.name), predicted(dim.name)
        pos = joint.index_of(va)
        joint = condition(joint, {va: leaves, vp: leaves})
        if len(leaves) == 1:
            from cmx.engine import _attach_constant

            (leaf,) = leaves
            joint = _attach_constant(joint, va, pos, leaf)
            joint = _attach_constant(joint, vp, pos + 1, leaf)
    from cmx.engine import _collapse_map_for, visible_classes
    from cmx.distribution import collapse_mapped

    for dname in spec.classes:
        dim = ds.dimension(dname)
        if dim.hierarchy is None:
            continue
        visible = visible_classes(ds, dname, spec.collapsed, spec.filter)
        mapping = _collapse_map_for(dim, visible)
        if mapping:
            joint = collapse_mapped(joint, dname, mapping)
    out = {}
    ndims = len(spec.classes)
    for t, c in joint.counts().items():
        a_key = tuple(t[2 * k] for k in range(ndims))
        p_key = tuple(t[2 * k + 1] for k in range(ndims))
        out[(a_key, p_key)] = c
    return out


class TestDatasetRoundTrip:
    def test_random_datasets_round_trip(self):
        rng = random.Random(31)
        for _ in range(20):
            ds, _, _ = generators.random_dataset(rng, max_dims=4, max_records=100)
            again = ingest(
                canonical_schema_text(ds.schema), "".join(serialize_records(ds))
            )
            assert again == ds

    def test_random_hierarchy_invariants(self):
        rng = random.Random(37)
        for _ in range(30):
            ds, _, _ = generators.random_dataset(rng, hierarchy_prob=1.0)
            for dim in ds.schema:
                assert validate_hierarchy(dim) == []
                assert subtree_leaves(dim, dim.hierarchy.name) == set(dim.classes)
                for node in dim.hierarchy.walk():
                    seen: set[str] = set()
                    for child in node.children:
                        leaves = subtree_leaves(dim, child.name)
                        assert not (leaves & seen)
                        seen |= leaves
                    if node.children:
                        assert seen == subtree_leaves(dim, node.name)
