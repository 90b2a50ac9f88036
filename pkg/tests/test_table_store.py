import pytest

from core.errors import (
    DuplicateColumnError,
    ImputationError,
    RaggedRowError,
    TableFormatError,
    UnknownColumnError,
)
from core.table_store import CellAddress, InstanceTable, load_table, missing_cells, write_table


def _write(tmp_path, text, name="t.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_trims_and_reads_nulls(tmp_path):
    path = _write(tmp_path, "Id, City ,State\n1, Paris ,\n2,Lyon,  \n")
    table = load_table(path)
    assert table.columns == ("Id", "City", "State")
    assert table.rows == [["1", "Paris", None], ["2", "Lyon", None]]


def test_custom_null_tokens_add_to_empty_field(tmp_path):
    path = _write(tmp_path, "Id,City\n1,NULL\n2,\n3,NA\n")
    table = load_table(path, null_tokens={"NULL"})
    assert table.rows == [["1", None], ["2", None], ["3", "NA"]]


def test_quoted_fields_and_bom(tmp_path):
    path = tmp_path / "t.csv"
    path.write_bytes("\ufeffId,Name\n1,\"Smith, John\"\n".encode("utf-8"))
    table = load_table(path)
    assert table.columns == ("Id", "Name")
    assert table.get(0, "Name") == "Smith, John"


def test_ragged_row_reports_line(tmp_path):
    path = _write(tmp_path, "Id,City\n1,Paris\n2,Lyon,extra\n")
    with pytest.raises(RaggedRowError) as info:
        load_table(path)
    assert info.value.line == 3


def test_duplicate_header(tmp_path):
    with pytest.raises(DuplicateColumnError):
        load_table(_write(tmp_path, "Id,City,City\n1,a,b\n"))


def test_empty_file(tmp_path):
    with pytest.raises(TableFormatError):
        load_table(_write(tmp_path, ""))


def test_unknown_column():
    table = InstanceTable(["Id"], [["1"]])
    with pytest.raises(UnknownColumnError):
        table.column_index("City")


def test_set_refuses_overwrite():
    table = InstanceTable(["Id", "City"], [["1", None], ["2", "Lyon"]], name="Geo")
    table.set(0, "City", "Paris")
    assert table.get(0, "City") == "Paris"
    with pytest.raises(ImputationError):
        table.set(1, "City", "Nice")


def test_write_then_load_round_trip(tmp_path):
    table = InstanceTable(["Id", "City"], [["1", None], ["2", "Saint-Denis, Réunion"]])
    path = tmp_path / "out" / "geo.csv"
    write_table(table, path)
    assert path.read_text(encoding="utf-8").splitlines()[1] == "1,"
    assert load_table(path) == table


def test_missing_cells_and_counts():
    table = InstanceTable(["Id", "City"], [["1", None], ["2", "Lyon"], ["3", None]], name="Geo")
    assert missing_cells(table, "City") == [CellAddress("Geo", 0, "City"), CellAddress("Geo", 2, "City")]
    assert table.non_null_count("City") == 1


def test_copy_is_independent():
    table = InstanceTable(["Id", "City"], [["1", None]])
    copy = table.copy()
    copy.set(0, "City", "Paris")
    assert table.get(0, "City") is None
