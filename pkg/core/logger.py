import csv
import json
import os
from collections import Counter
from datetime import datetime
from pathlib import Path

FILL_LOG_COLUMNS = ["dimension", "row", "attribute", "value", "donor_row", "matched_on", "source"]


def fill_to_entry(fill):
    """Flatten a FillRecord into a log entry (CSV columns + provenance)."""
    return {
        "dimension": fill.target.dimension,
        "row": fill.target.row_index,
        "attribute": fill.target.attribute,
        "value": fill.value,
        "donor_row": fill.donor_row,
        "matched_on": fill.donor_match_attribute,
        "source": getattr(fill.source, "value", fill.source),
        "hierarchy": fill.hierarchy,
        "donor_dimension": fill.donor_dimension,
        "level": fill.level,
    }


def summarize(entries):
    """
    Counts per source and per attribute.

    Args:
        entries: Iterable of log entries (dicts from fill_to_entry or read back)
    """
    by_source = Counter()
    by_attribute = {}
    total = 0
    for e in entries:
        total += 1
        by_source[e["source"]] += 1
        key = f"{e['dimension']}.{e['attribute']}"
        by_attribute.setdefault(key, Counter())[e["source"]] += 1
    return {
        "total_fills": total,
        "by_source": dict(sorted(by_source.items())),
        "by_attribute": {k: dict(sorted(v.items())) for k, v in sorted(by_attribute.items())},
    }


class FillLogger:
    """
    CSV/JSON writer for the fill log of an imputation run.
    """

    def __init__(self, log_file="out/fill_log.csv", log_format="csv"):
        """
        Args:
            log_file: Path to log file
            log_format: "csv" or "json"
        """
        if log_format not in ("csv", "json"):
            raise ValueError(f"unknown fill log format: {log_format!r}")
        self.log_file = str(log_file)
        self.log_format = log_format
        self.count = 0

        log_dir = os.path.dirname(self.log_file)
        if log_dir:
            Path(log_dir).mkdir(parents=True, exist_ok=True)

        # Start fresh: one log per run
        if log_format == "csv":
            with open(self.log_file, "w", newline="", encoding="utf-8") as f:
                csv.writer(f, lineterminator="\n").writerow(FILL_LOG_COLUMNS)
        else:
            with open(self.log_file, "w", encoding="utf-8") as f:
                json.dump([], f)

    @property
    def events_file(self):
        stem, _ = os.path.splitext(self.log_file)
        return f"{stem}_events.json"

    def log(self, fills):
        """
        Append fill records.

        Args:
            fills: Iterable of FillRecord
        """
        entries = [fill_to_entry(f) for f in fills]
        self.count += len(entries)
        if self.log_format == "csv":
            self._log_csv(entries)
        else:
            self._log_json(entries)

    def _log_csv(self, entries):
        with open(self.log_file, "a", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            for e in entries:
                writer.writerow([e[c] for c in FILL_LOG_COLUMNS])

    def _log_json(self, entries):
        with open(self.log_file, "r", encoding="utf-8") as f:
            data = json.load(f)
        data.extend(entries)
        with open(self.log_file, "w", encoding="utf-8") as f:
            json.dump(data, f, indent=2)

    def log_event(self, event_type, details):
        """
        Record a run-level event (start, pass finished, ...).

        Args:
            event_type: Short event name
            details: JSON-serializable dictionary
        """
        events = []
        if os.path.exists(self.events_file):
            try:
                with open(self.events_file, "r", encoding="utf-8") as f:
                    events = json.load(f)
            except json.JSONDecodeError:
                events = []

        events.append({
            "timestamp": datetime.now().isoformat(),
            "event_type": event_type,
            "details": details,
        })
        with open(self.events_file, "w", encoding="utf-8") as f:
            json.dump(events, f, indent=2)

    def get_summary(self):
        """Summary statistics read back from the log file."""
        return summarize(read_fill_log(self.log_file))


def read_fill_log(path):
    """Load a CSV or JSON fill log as a list of entries."""
    path = str(path)
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    with open(path, "r", newline="", encoding="utf-8") as f:
        return [
            {**row, "row": int(row["row"]), "donor_row": int(row["donor_row"])}
            for row in csv.DictReader(f)
        ]
