import json

import pytest

from core.intra_imputer import FillRecord, FillSource
from core.logger import FILL_LOG_COLUMNS, FillLogger, read_fill_log, summarize
from core.table_store import CellAddress


def _fills():
    return [
        FillRecord(CellAddress("Customer", 1, "State"), "IDF", 0, "City", FillSource.INTRA, "Geo", "Customer", 2),
        FillRecord(CellAddress("Customer", 3, "Region"), "Rhone", 5, "S_City", FillSource.INTER, "Geo", "Supplier", 3),
    ]


def test_csv_log_has_fixed_columns(tmp_path):
    path = tmp_path / "logs" / "fill_log.csv"
    logger = FillLogger(path)
    logger.log(_fills())
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join(FILL_LOG_COLUMNS)
    assert lines[1] == "Customer,1,State,IDF,0,City,intra"
    assert logger.count == 2


def test_json_log_keeps_provenance(tmp_path):
    path = tmp_path / "fill_log.json"
    FillLogger(path, "json").log(_fills())
    entries = json.loads(path.read_text(encoding="utf-8"))
    assert entries[1]["donor_dimension"] == "Supplier"
    assert entries[1]["level"] == 3


def test_new_logger_starts_a_fresh_file(tmp_path):
    path = tmp_path / "fill_log.csv"
    FillLogger(path).log(_fills())
    FillLogger(path)
    assert read_fill_log(path) == []


def test_summary_partitions_by_source(tmp_path):
    path = tmp_path / "fill_log.csv"
    logger = FillLogger(path)
    logger.log(_fills())
    summary = logger.get_summary()
    assert summary["total_fills"] == 2
    assert summary["by_source"] == {"inter": 1, "intra": 1}
    assert summary["by_attribute"]["Customer.Region"] == {"inter": 1}
    assert summarize([]) == {"total_fills": 0, "by_source": {}, "by_attribute": {}}


def test_events_file(tmp_path):
    logger = FillLogger(tmp_path / "fill_log.csv")
    logger.log_event("imputation", {"fills": 2})
    logger.log_event("imputation", {"fills": 0})
    events = json.loads((tmp_path / "fill_log_events.json").read_text(encoding="utf-8"))
    assert [e["details"]["fills"] for e in events] == [2, 0]


def test_unknown_format(tmp_path):
    with pytest.raises(ValueError):
        FillLogger(tmp_path / "log.xml", "xml")
