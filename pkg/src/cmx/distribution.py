"""Sparse joint distributions over (dimension, role) variables.

Confusions are modeled as a probability mass function over tuples of class
assignments; conditioning, marginalization, and collapse are all closed over
this representation, so arbitrary chains of operations stay valid
distributions.  Masses are stored as doubles, but every operation works in
exact integer-count space (count = mass * support_count) and divides once at
the end, so counts survive operation chains without rounding drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

import numpy as np

from .dataset import Dataset
from .errors import DistributionError, ZeroMassError

MASS_TOLERANCE = 1e-9

# Above this joint-space size the packed-integer encoding could overflow
# int64 and we fall back to tuple hashing.
_MAX_PACKED_SPACE = 2**62


class Role(str, Enum):
    ACTUAL = "actual"
    PREDICTED = "predicted"


@dataclass(frozen=True)
class VariableRef:
    """One axis variable: a dimension in either its actual or predicted role."""

    dimension: str
    role: Role

    def __str__(self) -> str:
        return f"{self.dimension}.{self.role.value}"


def actual(dimension: str) -> VariableRef:
    return VariableRef(dimension, Role.ACTUAL)


def predicted(dimension: str) -> VariableRef:
    return VariableRef(dimension, Role.PREDICTED)


@dataclass(frozen=True)
class JointDistribution:
    """Sparse probability mass over class-id tuples, plus the record count.

    ``mass`` maps tuples (aligned with ``variables``) to probabilities;
    zero-mass tuples are never stored.  ``support_count`` is the number of
    underlying records after all conditioning, so exact counts are always
    recoverable as ``round(mass * support_count)``.
    """

    variables: tuple[VariableRef, ...]
    mass: Mapping[tuple[str, ...], float]
    support_count: int

    def __post_init__(self):
        seen = set(self.variables)
        if len(seen) != len(self.variables):
            raise DistributionError("duplicate (dimension, role) variable")
        if self.support_count < 0:
            raise DistributionError("support_count must be non-negative")
        arity = len(self.variables)
        total = 0.0
        for t, m in self.mass.items():
            if len(t) != arity:
                raise DistributionError(
                    f"tuple {t!r} has arity {len(t)}, expected {arity}"
                )
            if m <= 0.0:
                raise DistributionError(f"non-positive mass {m!r} for {t!r}")
            total += m
        if self.support_count > 0 and abs(total - 1.0) > MASS_TOLERANCE:
            raise DistributionError(f"total mass {total!r} is not 1")

    def counts(self) -> dict[tuple[str, ...], int]:
        """Exact per-tuple record counts."""
        s = self.support_count
        return {t: round(m * s) for t, m in self.mass.items()}

    def index_of(self, var: VariableRef) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise DistributionError(
                f"variable {var} is not in the distribution"
            ) from None


def from_dataset(ds: Dataset, variables: Iterable[VariableRef]) -> JointDistribution:
    """Count the dataset into a joint distribution over the given variables.

    mass(t) = (records matching t) / n.  One vectorized pass over the
    columnar codes, O(n) regardless of how many variables are requested.
    """
    variables = tuple(variables)
    if not variables:
        raise DistributionError("at least one variable is required")
    if len(set(variables)) != len(variables):
        raise DistributionError("duplicate (dimension, role) variable")
    if ds.n == 0:
        raise DistributionError("empty dataset")
    dims = [ds.dimension(v.dimension) for v in variables]
    code_arrays = [ds.codes(v.dimension, v.role.value) for v in variables]
    sizes = [len(d.classes) for d in dims]

    if math.prod(sizes) <= _MAX_PACKED_SPACE:
        packed = code_arrays[0].astype(np.int64)
        for arr, k in zip(code_arrays[1:], sizes[1:]):
            packed = packed * k + arr
        space = math.prod(sizes)
        if space <= 1 << 22:
            # counting sort beats np.unique's O(n log n) sort for small spaces
            tally = np.bincount(packed, minlength=space)
            uniq = np.nonzero(tally)[0]
            counts = tally[uniq]
        else:
            uniq, counts = np.unique(packed, return_counts=True)
        coords = []
        rem = uniq
        for k in reversed(sizes):
            coords.append(rem % k)
            rem = rem // k
        coords.reverse()
        name_arrays = [
            np.array(d.classes, dtype=object)[c] for d, c in zip(dims, coords)
        ]
        n = ds.n
        mass = {
            t: int(c) / n
            for t, c in zip(zip(*name_arrays), counts)
        }
    else:
        tallies: dict[tuple[str, ...], int] = {}
        lookup = [tuple(d.classes) for d in dims]
        for row in zip(*code_arrays):
            key = tuple(lookup[i][code] for i, code in enumerate(row))
            tallies[key] = tallies.get(key, 0) + 1
        mass = {t: c / ds.n for t, c in sorted(tallies.items())}
    return JointDistribution(variables, mass, ds.n)


def condition(
    d: JointDistribution,
    assignments: Mapping[VariableRef, Iterable[str]],
) -> JointDistribution:
    """Restrict to tuples matching the assignments and renormalize (Bayes).

    Variables assigned a singleton set are dropped from the variable list;
    set-valued assignments keep theirs.  A condition matching no mass is an
    error, not an empty distribution.
    """
    if not assignments:
        return d
    wanted: dict[int, frozenset[str]] = {}
    for var, values in assignments.items():
        values = frozenset(values)
        if not values:
            raise DistributionError(f"empty class set for {var}")
        wanted[d.index_of(var)] = values

    kept: dict[tuple[str, ...], int] = {}
    for t, c in d.counts().items():
        if all(t[i] in values for i, values in wanted.items()):
            kept[t] = c
    kept_count = sum(kept.values())
    if kept_count == 0:
        described = ", ".join(
            f"{d.variables[i]} in {sorted(v)}" for i, v in sorted(wanted.items())
        )
        raise ZeroMassError(f"condition matches nothing: {described}")

    dropped = {i for i, values in wanted.items() if len(values) == 1}
    new_vars = tuple(v for i, v in enumerate(d.variables) if i not in dropped)
    keep_idx = [i for i in range(len(d.variables)) if i not in dropped]
    mass: dict[tuple[str, ...], float] = {}
    for t, c in kept.items():
        mass[tuple(t[i] for i in keep_idx)] = c / kept_count
    return JointDistribution(new_vars, mass, kept_count)


def marginalize(
    d: JointDistribution, keep: Iterable[VariableRef]
) -> JointDistribution:
    """Sum out every variable not in ``keep``; support count is unchanged."""
    keep = tuple(keep)
    if not keep:
        raise DistributionError("keep must be non-empty")
    if len(set(keep)) != len(keep):
        raise DistributionError("duplicate variable in keep")
    idx = [d.index_of(v) for v in keep]
    summed: dict[tuple[str, ...], int] = {}
    for t, c in d.counts().items():
        key = tuple(t[i] for i in idx)
        summed[key] = summed.get(key, 0) + c
    s = d.support_count
    mass = {t: c / s for t, c in summed.items()}
    return JointDistribution(keep, mass, s)


def collapse(
    d: JointDistribution,
    dimension: str,
    node: str,
    leaves: Iterable[str],
) -> JointDistribution:
    """Rewrite every leaf coordinate to the compound node, in both roles.

    Collapse is symmetric: the actual and the predicted variable of the
    dimension are rewritten together, and masses of now-identical tuples
    are summed, so the compound's mass is the sum of its constituents.
    """
    leaves = set(leaves)
    if not leaves:
        raise DistributionError("empty leaf set")
    return collapse_mapped(d, dimension, {leaf: node for leaf in leaves})


def collapse_mapped(
    d: JointDistribution, dimension: str, mapping: Mapping[str, str]
) -> JointDistribution:
    """Apply a leaf -> node rename map in one pass (both roles).

    Equivalent to calling :func:`collapse` once per target node when the
    renamed leaf sets are disjoint, which the query engine relies on to
    collapse many subtrees without rescanning the distribution.
    """
    positions = [
        i for i, v in enumerate(d.variables) if v.dimension == dimension
    ]
    if not positions:
        raise DistributionError(
            f"dimension {dimension!r} is not in the distribution"
        )
    if not mapping:
        return d
    summed: dict[tuple[str, ...], int] = {}
    for t, c in d.counts().items():
        coords = list(t)
        for i in positions:
            coords[i] = mapping.get(coords[i], coords[i])
        key = tuple(coords)
        summed[key] = summed.get(key, 0) + c
    s = d.support_count
    mass = {t: c / s for t, c in summed.items()}
    return JointDistribution(d.variables, mass, s)


def cell_count(d: JointDistribution, t: tuple[str, ...]) -> int:
    """Exact record count behind one tuple; 0 for absent tuples."""
    t = tuple(t)
    if len(t) != len(d.variables):
        raise DistributionError(
            f"tuple {t!r} has arity {len(t)}, expected {len(d.variables)}"
        )
    m = d.mass.get(t)
    if m is None:
        return 0
    return round(m * d.support_count)
