"""Metrics stream: JSON-lines primary record plus a flat CSV mirror for curves."""

import csv
import json

from ..errors import DataError

CSV_COLUMNS = [
    "kind", "agent", "phase", "split", "iteration", "global_iteration",
    "gain", "correct", "loss_q", "loss_obv", "objective",
    "games", "accuracy", "validity", "mean_gain",
    "acc_level_0", "acc_level_1", "acc_level_2", "acc_level_inf",
    "steps", "holdout_l1",
]


def _flatten(record):
    row = {}
    for col in CSV_COLUMNS:
        if col.startswith("acc_level_"):
            level = col[len("acc_level_"):]
            row[col] = record.get("level_accuracy", {}).get(level, "")
        else:
            value = record.get(col, "")
            row[col] = value
    return row


class MetricsWriter:
    """Append-only writer; every record is flushed as soon as it is written."""

    def __init__(self, jsonl_path, csv_path=None):
        self.jsonl_path = jsonl_path
        self.csv_path = csv_path
        self._jsonl = open(jsonl_path, "w", encoding="utf-8")
        self._csv_file = None
        self._csv = None
        if csv_path is not None:
            self._csv_file = open(csv_path, "w", encoding="utf-8", newline="")
            self._csv = csv.DictWriter(self._csv_file, fieldnames=CSV_COLUMNS)
            self._csv.writeheader()
            self._csv_file.flush()

    def write(self, record):
        self._jsonl.write(json.dumps(record, sort_keys=True))
        self._jsonl.write("\n")
        self._jsonl.flush()
        if self._csv is not None:
            self._csv.writerow(_flatten(record))
            self._csv_file.flush()

    def close(self):
        self._jsonl.close()
        if self._csv_file is not None:
            self._csv_file.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_metrics(path):
    records = []
    try:
        fh = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read metrics {path}: {exc}") from exc
    with fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{line_no}: malformed metrics record") from exc
    return records


def write_matrix_csv(path, matrix, row_label="message", col_label="attribute"):
    """Dump a matrix as a labeled CSV grid (used for covariance output)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"{row_label}\\{col_label}"] +
                        [str(j) for j in range(matrix.shape[1])])
        for i, row in enumerate(matrix):
            writer.writerow([str(i)] + [repr(float(v)) for v in row])
