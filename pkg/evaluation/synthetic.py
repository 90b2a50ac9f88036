"""
Synthetic hierarchical dimensions for the evaluation harness.

A single dimension is generated bottom-up: each level's value is a
function of the level below it (strict), optionally with a fraction of
lower values split between two parents (non-strict).
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from core.errors import SyntheticSpecError
from core.schema_model import Dimension, FactDescriptor, Hierarchy, WarehouseModel
from core.table_store import InstanceTable

logger = logging.getLogger(__name__)

GEO_NAMES = ("GeoKey", "City", "Department", "Region", "Country", "Continent")


@dataclass(frozen=True)
class SyntheticSpec:
    """
    levels: parameters in the hierarchy, identifier included
    fanout: per level k >= 1, distinct level-(k-1) values under one level-k value
    rows: instances in the dimension
    weak: weak attribute count per level (identifier included)
    strict: False to make some lower values roll up to two parents
    non_strict_fraction: share of lower values given a second parent
    """
    levels: int = 4
    fanout: tuple = (10, 5, 4)
    rows: int = 1000
    weak: tuple = (0, 1, 1, 0)
    strict: bool = True
    non_strict_fraction: float = 0.1
    seed: int = 0
    dimension: str = "Geo"
    hierarchy: str = "Geography"
    warehouse: str = "Synthetic"
    names: tuple = ()

    def parameter_names(self):
        if self.names:
            return tuple(self.names)
        if self.levels <= len(GEO_NAMES):
            return GEO_NAMES[: self.levels]
        return ("Id",) + tuple(f"Level{k}" for k in range(1, self.levels))

    def check(self):
        if self.levels < 2:
            raise SyntheticSpecError("a hierarchy needs at least 2 levels")
        if len(self.fanout) != self.levels - 1:
            raise SyntheticSpecError(
                f"fanout needs {self.levels - 1} value(s), got {len(self.fanout)}"
            )
        if any(f < 1 for f in self.fanout):
            raise SyntheticSpecError("fanout must be >= 1 at every level")
        if self.weak and len(self.weak) != self.levels:
            raise SyntheticSpecError(f"weak needs {self.levels} count(s), got {len(self.weak)}")
        if any(w < 0 for w in self.weak):
            raise SyntheticSpecError("weak counts must be >= 0")
        if self.rows < 1:
            raise SyntheticSpecError("rows must be >= 1")
        if not 0.0 <= self.non_strict_fraction <= 1.0:
            raise SyntheticSpecError("non_strict_fraction must lie in [0, 1]")
        if len(self.parameter_names()) != self.levels:
            raise SyntheticSpecError("names must give one name per level")


def _level_indices(spec, rng):
    idx = [np.arange(spec.rows)]
    for k in range(1, spec.levels):
        lower = idx[k - 1]
        n_lower = int(lower.max()) + 1
        n_upper = math.ceil(n_lower / spec.fanout[k - 1])
        parent = lower // spec.fanout[k - 1]

        if not spec.strict and k >= 2 and n_upper >= 2:
            count = int(round(spec.non_strict_fraction * n_lower))
            for v in rng.choice(n_lower, size=count, replace=False):
                members = np.flatnonzero(lower == v)
                if len(members) < 2:
                    continue
                second = members[len(members) // 2:]
                parent[second] = (parent[second] + 1) % n_upper
        idx.append(parent)
    return idx


def generate_synthetic(spec=None):
    """
    Build a one-dimension warehouse from a SyntheticSpec.

    Returns:
        WarehouseModel whose dimension carries its instance table
    """
    spec = spec or SyntheticSpec()
    spec.check()
    rng = np.random.default_rng(spec.seed)
    names = spec.parameter_names()
    weak_counts = spec.weak or (0,) * spec.levels

    weak = {}
    for k, p in enumerate(names):
        count = weak_counts[k]
        if count:
            weak[p] = tuple(f"{p}Name" if j == 0 else f"{p}Label{j}" for j in range(count))

    attributes = list(names)
    for p in names:
        attributes.extend(weak.get(p, ()))

    idx = _level_indices(spec, rng)
    rows = []
    for i in range(spec.rows):
        values = {names[0]: str(i + 1)}
        for k in range(1, spec.levels):
            values[names[k]] = f"{names[k]}-{int(idx[k][i])}"
        for p, ws in weak.items():
            for j, w in enumerate(ws):
                values[w] = f"{values[p]} label {j}"
        rows.append([values[a] for a in attributes])

    table = InstanceTable(attributes, rows, name=spec.dimension)
    dim = Dimension(
        name=spec.dimension,
        attributes=attributes,
        id_attribute=names[0],
        hierarchies=[Hierarchy(spec.hierarchy, names, weak)],
        table=table,
    )
    logger.info("generated %s: %d row(s), %d level(s), strict=%s",
                spec.dimension, spec.rows, spec.levels, spec.strict)
    return WarehouseModel(spec.warehouse, [dim], [FactDescriptor("Facts")],
                          {"Facts": [spec.dimension]})


def _with_prefix(dim, name, prefix, table):
    """Copy of a dimension whose attribute names all carry a prefix."""
    renamed = {a: prefix + a for a in dim.attributes}
    hierarchies = [
        Hierarchy(
            h.name,
            [renamed[p] for p in h.parameters],
            {renamed[p]: [renamed[w] for w in ws] for p, ws in h.weak.items()},
        )
        for h in dim.hierarchies
    ]
    return Dimension(
        name=name,
        attributes=[renamed[a] for a in dim.attributes],
        id_attribute=renamed[dim.id_attribute],
        hierarchies=hierarchies,
        table=InstanceTable([renamed[c] for c in table.columns], table.rows, name=name),
    )


def split_dimension(model, dimension, seed=0, names=None, prefixes=None):
    """
    Randomly partition one dimension's rows into two dimensions of equal
    size (the second gets the odd row), same schema, original row order
    kept within each half.

    prefixes: optional pair such as ("c_", "s_") put in front of every
    attribute name of the first and second half
    """
    if prefixes is not None and len(prefixes) != 2:
        raise SyntheticSpecError(f"prefixes needs 2 values, got {len(prefixes)}")
    source = model.dimension(dimension)
    left, right = names or (f"{dimension}A", f"{dimension}B")
    n = len(source.table)
    order = np.random.default_rng(seed).permutation(n)
    half = n // 2
    halves = (sorted(int(i) for i in order[:half]), sorted(int(i) for i in order[half:]))

    dims = []
    for k, (new_name, members) in enumerate(zip((left, right), halves)):
        table = InstanceTable(source.table.columns,
                              [list(source.table.rows[i]) for i in members],
                              name=new_name)
        if prefixes:
            dims.append(_with_prefix(source, new_name, prefixes[k], table))
        else:
            dims.append(replace(source, name=new_name, table=table))

    others = [d for d in model.dimensions if d.name != dimension]
    star = {
        fact: [x for d in dims_of for x in ((left, right) if d == dimension else (d,))]
        for fact, dims_of in model.star.items()
    }
    return WarehouseModel(model.name, [*others, *dims], model.facts, star)


def non_strict_values(table, lower, upper):
    """Values of `lower` that roll up to more than one non-null `upper` value."""
    parents = {}
    lo, up = table.column_index(lower), table.column_index(upper)
    for row in table.rows:
        if row[lo] is not None and row[up] is not None:
            parents.setdefault(row[lo], set()).add(row[up])
    return {v for v, ps in parents.items() if len(ps) > 1}
