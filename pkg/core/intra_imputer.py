"""
Intra-dimension imputation.

A null parameter is filled from another row of the same dimension that
shares a value at a lower parameter; a null weak attribute from a row
sharing its parameter or a lower one. Parameters are processed finest to
coarsest so a fill at one level can serve the next.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

from core.errors import ImputationError, SchemaValidationError, UnknownAttributeError
from core.schema_model import lower_parameters, validate_schema
from core.table_store import CellAddress, missing_cells

logger = logging.getLogger(__name__)


class FillSource(str, Enum):
    INTRA = "intra"
    INTER = "inter"


class DonorMode(str, Enum):
    FIRST = "first"        # lowest row index at the matching level
    MAJORITY = "majority"  # modal donor value, ties -> smallest value


@dataclass(frozen=True)
class DonorPolicy:
    mode: DonorMode = DonorMode.FIRST
    case_insensitive: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", DonorMode(self.mode))

    def key(self, value):
        return value.casefold() if self.case_insensitive else value


DEFAULT_POLICY = DonorPolicy()


@dataclass(frozen=True)
class FillRecord:
    """One repaired cell and where its value came from."""
    target: CellAddress
    value: str
    donor_row: int
    donor_match_attribute: str
    source: FillSource
    hierarchy: str = ""
    donor_dimension: str = ""
    level: int = 0


class DonorIndex:
    """
    Donor lookup for one matching column: key -> best donor under a policy.

    Rows are added as (key, row, value); value is what the donor would
    contribute to the target column.
    """

    def __init__(self, policy):
        self.policy = policy
        self._first = {}
        self._tally = {}

    @classmethod
    def build(cls, table, match_attribute, value_attribute, policy):
        index = cls(policy)
        m_col = table.column_index(match_attribute)
        v_col = table.column_index(value_attribute)
        for i, row in enumerate(table.rows):
            key, value = row[m_col], row[v_col]
            if key is not None and value is not None:
                index.add(policy.key(key), i, value)
        return index

    def add(self, key, row, value):
        if self.policy.mode is DonorMode.FIRST:
            current = self._first.get(key)
            if current is None or row < current[0]:
                self._first[key] = (row, value)
            return
        slot = self._tally.setdefault(key, {})
        entry = slot.get(value)
        if entry is None:
            slot[value] = [1, row]
        else:
            entry[0] += 1
            entry[1] = min(entry[1], row)

    def pick(self, key):
        """(donor_row, value) or None."""
        if self.policy.mode is DonorMode.FIRST:
            return self._first.get(key)
        slot = self._tally.get(key)
        if not slot:
            return None
        value = min(slot, key=lambda v: (-slot[v][0], v))
        return slot[value][1], value


# -----------------------------------------------------
# Single-attribute passes
# -----------------------------------------------------
def impute_parameter_intra(d, h, p, policy=DEFAULT_POLICY):
    """
    Fill null values of parameter p from rows sharing a lower parameter value.

    Args:
        d: Dimension (its table is modified in place)
        h: Hierarchy of d containing p
        p: Parameter to repair (not the identifier)
        policy: DonorPolicy

    Returns:
        List of FillRecord, one per filled cell
    """
    level = h.index(p)
    if level == 0:
        raise ImputationError(
            f"{d.name}.{p} is the identifier of hierarchy {h.name}; it cannot be imputed"
        )
    return _fill_from_levels(d, h, p, lower_parameters(h, p), level, policy)


def impute_weak_intra(d, h, p, w, policy=DEFAULT_POLICY):
    """
    Fill null values of weak attribute w of parameter p, matching on p
    itself first and then on each lower parameter.
    """
    if w not in h.weak_of(p):
        raise UnknownAttributeError(
            f"{w!r} is not a weak attribute of {p!r} in hierarchy {h.name!r}"
        )
    level = h.index(p)
    return _fill_from_levels(d, h, w, [p, *lower_parameters(h, p)], level, policy)


def _fill_from_levels(d, h, target, levels, level, policy):
    table = d.table
    pending = [addr.row_index for addr in missing_cells(table, target)]
    if not pending:
        return []

    level_cols = [(attr, table.column_index(attr)) for attr in levels]
    indexes = {}
    fills = []

    for r in pending:
        row = table.rows[r]
        for attr, col in level_cols:
            own = row[col]
            if own is None:
                continue
            index = indexes.get(attr)
            if index is None:
                index = indexes[attr] = DonorIndex.build(table, attr, target, policy)
            hit = index.pick(policy.key(own))
            if hit is None:
                continue

            donor_row, value = hit
            table.set(r, target, value)
            fills.append(FillRecord(
                target=CellAddress(d.name, r, target),
                value=value,
                donor_row=donor_row,
                donor_match_attribute=attr,
                source=FillSource.INTRA,
                hierarchy=h.name,
                donor_dimension=d.name,
                level=level,
            ))
            # the repaired row donates to the rows after it
            for other, other_col in level_cols:
                if other in indexes and row[other_col] is not None:
                    indexes[other].add(policy.key(row[other_col]), r, value)
            break

    if fills:
        logger.debug("%s.%s: %d/%d filled (intra, %s)",
                     d.name, target, len(fills), len(pending), h.name)
    return fills


# -----------------------------------------------------
# Whole-warehouse pass
# -----------------------------------------------------
def run_dimension_intra(d, policy=DEFAULT_POLICY):
    """All hierarchies of one dimension, coarser levels after finer ones."""
    if d.table is None:
        logger.warning("dimension %s has no instance table, skipped", d.name)
        return []
    fills = []
    for h in d.hierarchies:
        for level, p in enumerate(h.parameters):
            if level > 0:
                fills.extend(impute_parameter_intra(d, h, p, policy))
            for w in h.weak_of(p):
                fills.extend(impute_weak_intra(d, h, p, w, policy))
    return fills


def run_intra(model, policy=DEFAULT_POLICY, jobs=1, validate=True):
    """
    Intra-dimension imputation over every dimension of the warehouse.

    Args:
        model: WarehouseModel; tables are modified in place
        policy: DonorPolicy
        jobs: Dimensions processed concurrently (log order is unaffected)
        validate: Check the schema first and abort before any change

    Returns:
        Concatenated fill log, in dimension order
    """
    if validate:
        report = validate_schema(model)
        if not report.ok:
            raise SchemaValidationError(report)

    if jobs > 1 and len(model.dimensions) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_dimension = list(pool.map(lambda d: run_dimension_intra(d, policy), model.dimensions))
    else:
        per_dimension = [run_dimension_intra(d, policy) for d in model.dimensions]

    fills = [f for log in per_dimension for f in log]
    logger.info("intra pass filled %d cell(s)", len(fills))
    return fills
