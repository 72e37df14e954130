"""Shared tabular result schema for experiments and diagnostics.

Every long-form result is a list of rows with the fixed header
``experiment,setting,method,replicate,metric,value``; emission is
deterministic (sorted) so identical configs produce identical bytes.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

CSV_HEADER = ("experiment", "setting", "method", "replicate", "metric", "value")


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    setting: str
    method: str
    replicate: int
    metric: str
    value: float

    def key(self) -> tuple:
        return (self.experiment, self.setting, self.method, self.replicate, self.metric)


@dataclass
class ExperimentResult:
    rows: list[ResultRow] = field(default_factory=list)

    def add(self, experiment: str, setting: str, method: str, replicate: int, metric: str, value: float) -> None:
        self.rows.append(ResultRow(experiment, setting, method, replicate, metric, float(value)))

    def extend(self, other: "ExperimentResult") -> None:
        self.rows.extend(other.rows)

    def sorted_rows(self) -> list[ResultRow]:
        return sorted(self.rows, key=ResultRow.key)

    def values(self, metric: str, *, setting: str | None = None, method: str | None = None) -> list[float]:
        return [
            r.value
            for r in self.rows
            if r.metric == metric
            and (setting is None or r.setting == setting)
            and (method is None or r.method == method)
        ]

    def settings(self) -> list[str]:
        return sorted({r.setting for r in self.rows})


def emit(result: ExperimentResult, fmt: str, path: str | Path) -> None:
    """Write rows as CSV (fixed header) or JSON (array of row objects)."""
    path = Path(path)
    rows = result.sorted_rows()
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_HEADER)
            for r in rows:
                writer.writerow([r.experiment, r.setting, r.method, r.replicate, r.metric, repr(r.value)])
    elif fmt == "json":
        payload = [
            {
                "experiment": r.experiment,
                "setting": r.setting,
                "method": r.method,
                "replicate": r.replicate,
                "metric": r.metric,
                "value": r.value,
            }
            for r in rows
        ]
        path.write_text(json.dumps(payload, indent=2, sort_keys=True))
    else:
        raise ValueError(f"unknown format {fmt!r}; use 'csv' or 'json'")


def read_csv(path: str | Path) -> ExperimentResult:
    result = ExperimentResult()
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        for row in reader:
            result.add(row[0], row[1], row[2], int(row[3]), row[4], float(row[5]))
    return result
