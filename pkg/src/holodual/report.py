"""Self-contained verification reports with JSON, JSON-lines and CSV output."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

STATUSES = ("pass", "fail", "inconclusive")


def _clean(x):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats as strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return {"re": _clean(x.real), "im": _clean(x.imag)}
    return x


@dataclass
class VerificationReport:
    test_id: str
    status: str
    metrics: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}, got {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        out = {
            "test_id": self.test_id,
            "status": self.status,
            "metrics": _clean(self.metrics),
            "tolerances": _clean(self.tolerances),
            "config": _clean(self.config),
        }
        if self.notes:
            out["notes"] = list(self.notes)
        if self.details:
            out["details"] = _clean(self.details)
        return out

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def csv_rows(self) -> list[list]:
        rows = []
        for k in sorted(self.metrics):
            tol = self.tolerances.get(k, "")
            rows.append([self.test_id, self.status, k, _clean(self.metrics[k]), _clean(tol)])
        return rows


CSV_HEADER = ["test_id", "status", "metric", "value", "tolerance"]


def reports_to_jsonl(reports) -> str:
    reports = sorted(reports, key=lambda r: r.test_id)
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in reports)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in sorted(reports, key=lambda r: r.test_id):
        w.writerows(r.csv_rows())
    return buf.getvalue()


def rel_err(a, b) -> float:
    a, b = complex(a), complex(b)
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)
