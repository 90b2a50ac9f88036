import csv
import logging
from dataclasses import dataclass
from pathlib import Path

from core.errors import (
    DuplicateColumnError,
    ImputationError,
    RaggedRowError,
    TableFormatError,
    UnknownColumnError,
)

logger = logging.getLogger(__name__)

DEFAULT_NULL_TOKENS = frozenset({""})


@dataclass(frozen=True, order=True)
class CellAddress:
    """Coordinates of one cell: dimension, row, attribute."""
    dimension: str
    row_index: int
    attribute: str


class InstanceTable:
    """
    Row store for the instances of one dimension.

    Cells hold text or None. Row order never changes once loaded, so the
    row index doubles as a stable donor ranking.
    """

    def __init__(self, columns, rows=None, name=""):
        """
        Args:
            columns: Ordered attribute names
            rows: List of rows, each a list of str/None aligned to columns
            name: Owning dimension name (used in cell addresses)
        """
        self.columns = tuple(columns)
        self.name = name
        self._index = {}
        for pos, col in enumerate(self.columns):
            if col in self._index:
                raise DuplicateColumnError(f"duplicate column {col!r}")
            self._index[col] = pos

        self.rows = []
        for i, row in enumerate(rows or []):
            if len(row) != len(self.columns):
                raise TableFormatError(
                    f"row {i} has {len(row)} cell(s), expected {len(self.columns)}"
                )
            self.rows.append(list(row))

    def __len__(self):
        return len(self.rows)

    def __eq__(self, other):
        if not isinstance(other, InstanceTable):
            return NotImplemented
        return self.columns == other.columns and self.rows == other.rows

    def __repr__(self):
        return f"InstanceTable(name={self.name!r}, columns={list(self.columns)}, rows={len(self.rows)})"

    # -----------------------------------------------------
    # Cell access
    # -----------------------------------------------------
    def column_index(self, attribute):
        try:
            return self._index[attribute]
        except KeyError:
            raise UnknownColumnError(
                f"table {self.name or '<unnamed>'} has no column {attribute!r}"
            ) from None

    def has_column(self, attribute):
        return attribute in self._index

    def get(self, row_index, attribute):
        return self.rows[row_index][self.column_index(attribute)]

    def set(self, row_index, attribute, value):
        """Fill a null cell. Overwriting a non-null cell is refused."""
        col = self.column_index(attribute)
        current = self.rows[row_index][col]
        if current is not None:
            raise ImputationError(
                f"refusing to overwrite {self.name}.{attribute} row {row_index} "
                f"(holds {current!r})"
            )
        self.rows[row_index][col] = value

    def column(self, attribute):
        col = self.column_index(attribute)
        return [row[col] for row in self.rows]

    def non_null_count(self, attribute):
        return sum(1 for v in self.column(attribute) if v is not None)

    def address(self, row_index, attribute):
        return CellAddress(self.name, row_index, attribute)

    def copy(self):
        return InstanceTable(self.columns, [list(r) for r in self.rows], name=self.name)


# -----------------------------------------------------
# CSV I/O
# -----------------------------------------------------
def load_table(path, null_tokens=DEFAULT_NULL_TOKENS, name=""):
    """
    Load an RFC-4180 CSV file with a mandatory header row.

    Args:
        path: CSV file path
        null_tokens: Trimmed field values that become null cells
        name: Dimension name recorded on the table

    Returns:
        InstanceTable in file order
    """
    path = Path(path)
    # The empty field is always null; other tokens add to it
    tokens = frozenset(t.strip() for t in null_tokens) | {""}

    with open(path, "r", newline="", encoding="utf-8-sig") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise TableFormatError(f"{path}: missing header row") from None

        columns = [h.strip() for h in header]
        seen = set()
        for col in columns:
            if col in seen:
                raise DuplicateColumnError(f"{path}: duplicate column {col!r}")
            seen.add(col)

        rows = []
        for fields in reader:
            if len(fields) != len(columns):
                # A trailing blank line parses as an empty record
                if not fields:
                    continue
                raise RaggedRowError(path, reader.line_num, len(columns), len(fields))
            row = []
            for raw in fields:
                value = raw.strip()
                row.append(None if value in tokens else value)
            rows.append(row)

    logger.debug("loaded %s: %d column(s), %d row(s)", path, len(columns), len(rows))
    return InstanceTable(columns, rows, name=name)


def write_table(table, path):
    """Write a table as CSV; null cells become empty fields."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow(["" if v is None else v for v in row])


def missing_cells(table, attribute):
    """Addresses of the null cells of one column, in row order."""
    col = table.column_index(attribute)
    return [
        CellAddress(table.name, i, attribute)
        for i, row in enumerate(table.rows)
        if row[col] is None
    ]
