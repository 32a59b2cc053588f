"""CSV ingestion for the sweep and tail outputs."""

from __future__ import annotations

import csv


class SchemaError(ValueError):
    """Input CSV does not carry the columns a figure kind needs."""


RESULTS_COLUMNS = ("snr_db", "decoder", "trials", "avg_C", "err_rate",
                   "outage_rate", "timeout_rate")
TAIL_COLUMNS = ("snr_db", "L", "prob")


def read_rows(path: str, required: tuple[str, ...]) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty CSV, no header row")
        for col in required:
            if col not in reader.fieldnames:
                raise SchemaError(f"{path}: missing column {col!r}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def column(rows: list[dict], name: str) -> list[float]:
    return [float(r[name]) for r in rows]
