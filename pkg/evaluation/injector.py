"""
Seeded missing-data injection.

Rows are shuffled with a seeded generator and the target attribute is
removed from the first rows of the shuffled order. Only the selection
uses the permutation: the table keeps its physical row order.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from core.errors import IneligibleAttributeError, InjectionError, UnknownAttributeError
from core.schema_model import level_of
from core.table_store import CellAddress

logger = logging.getLogger(__name__)

# 0-based: identifier values never repeat, so parameters need level >= 2
# and weak attributes level >= 1 to have any possible donor.
MIN_PARAMETER_LEVEL = 2
MIN_WEAK_LEVEL = 1

ELIGIBILITY_RULE = (
    "identifier values are unique, so a parameter directly above the identifier "
    "and weak attributes of the identifier can never be completed; eligible targets "
    f"are parameters at level >= {MIN_PARAMETER_LEVEL} and weak attributes of "
    f"parameters at level >= {MIN_WEAK_LEVEL} (identifier = level 0)"
)


@dataclass(frozen=True)
class InjectionPlan:
    targets: tuple
    rate: float
    seed: int = 0
    count_preexisting: bool = False

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(tuple(t) for t in self.targets))

    def with_rate(self, rate, seed=None):
        return InjectionPlan(self.targets, rate, self.seed if seed is None else seed,
                             self.count_preexisting)


@dataclass
class GroundTruth:
    """
    Original values of the cells removed by injection.

    entries maps CellAddress -> original text. With count_preexisting, cells
    already null before injection are also listed, with value None.
    """
    entries: dict = field(default_factory=dict)
    requested: int = 0

    def __len__(self):
        return len(self.entries)

    def __contains__(self, address):
        return address in self.entries

    def merge(self, other):
        self.entries.update(other.entries)
        self.requested += other.requested
        return self

    def restrict(self, predicate):
        """Subset whose addresses satisfy predicate(address, original)."""
        kept = {a: v for a, v in self.entries.items() if predicate(a, v)}
        return GroundTruth(kept, len(kept))

    def write(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["dimension", "row", "attribute", "value"])
            for addr in sorted(self.entries):
                value = self.entries[addr]
                writer.writerow([addr.dimension, addr.row_index, addr.attribute,
                                 "" if value is None else value])


# -----------------------------------------------------
# Eligibility
# -----------------------------------------------------
def attribute_level(dimension, attribute):
    """
    Highest usable level of an attribute over the dimension's hierarchies.

    Returns:
        (kind, level) with kind "parameter" or "weak", or None
    """
    best = None
    for h in dimension.hierarchies:
        try:
            level = level_of(h, attribute).index
        except UnknownAttributeError:
            continue
        kind = "parameter" if attribute in h.parameters else "weak"
        threshold = MIN_PARAMETER_LEVEL if kind == "parameter" else MIN_WEAK_LEVEL
        candidate = (level >= threshold, kind, level)
        if best is None or candidate > best:
            best = candidate
    return None if best is None else (best[1], best[2])


def is_eligible(dimension, attribute):
    found = attribute_level(dimension, attribute)
    if found is None:
        return False
    kind, level = found
    return level >= (MIN_PARAMETER_LEVEL if kind == "parameter" else MIN_WEAK_LEVEL)


def check_eligible(dimension, attribute):
    if not is_eligible(dimension, attribute):
        found = attribute_level(dimension, attribute)
        where = "is in no hierarchy" if found is None else f"is a {found[0]} at level {found[1]}"
        raise IneligibleAttributeError(
            f"{dimension.name}.{attribute} {where}: {ELIGIBILITY_RULE}"
        )


def eligible_targets(model):
    """Every eligible (dimension, attribute), in schema order."""
    targets = []
    for d in model.dimensions:
        for a in d.attributes:
            if is_eligible(d, a):
                targets.append((d.name, a))
    return targets


# -----------------------------------------------------
# Injection
# -----------------------------------------------------
def injection_count(rate, available):
    # tolerance keeps e.g. 0.29 * 100 from flooring to 28
    return min(available, math.floor(rate * available + 1e-9))


def inject(dimension, attribute, rate, seed, count_preexisting=False):
    """
    Null a seeded random fraction of an attribute's non-null cells.

    Args:
        dimension: Dimension whose table is modified in place
        attribute: Eligible target attribute
        rate: Fraction in (0, 1) of the non-null cells to remove
        seed: Integer seed or sequence of integers for numpy's generator
        count_preexisting: Also list cells that were already null

    Returns:
        (table, GroundTruth)
    """
    if not 0.0 < rate < 1.0:
        raise InjectionError(f"missing rate must lie in (0, 1), got {rate}")
    check_eligible(dimension, attribute)

    table = dimension.table
    col = table.column_index(attribute)
    non_null = sum(1 for row in table.rows if row[col] is not None)
    wanted = injection_count(rate, non_null)

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(table.rows))

    truth = GroundTruth(requested=wanted)
    taken = 0
    for i in order:
        if taken >= wanted:
            break
        i = int(i)
        value = table.rows[i][col]
        if value is None:
            continue
        truth.entries[CellAddress(dimension.name, i, attribute)] = value
        table.rows[i][col] = None
        taken += 1

    if count_preexisting:
        for i, row in enumerate(table.rows):
            addr = CellAddress(dimension.name, i, attribute)
            if row[col] is None and addr not in truth.entries:
                truth.entries[addr] = None

    logger.debug("injected %d null(s) into %s.%s (rate %.2f, seed %s)",
                 taken, dimension.name, attribute, rate, seed)
    return table, truth


def inject_plan(model, plan):
    """
    Inject every target of a plan; target k uses the stream (seed, k).

    Returns:
        Merged GroundTruth
    """
    for dim_name, attribute in plan.targets:
        check_eligible(model.dimension(dim_name), attribute)

    truth = GroundTruth()
    for k, (dim_name, attribute) in enumerate(plan.targets):
        _, part = inject(model.dimension(dim_name), attribute, plan.rate,
                         [plan.seed, k], plan.count_preexisting)
        truth.merge(part)
    return truth
