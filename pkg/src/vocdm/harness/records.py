"""Result records and their CSV/JSON serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields

from scipy.stats import norm

CSV_COLUMNS = (
    "experiment",
    "scheme",
    "M",
    "N",
    "kind",
    "constellation",
    "x_name",
    "x_value",
    "y_name",
    "y_value",
    "trials",
    "errors",
    "ci_halfwidth",
    "seed",
)


@dataclass(frozen=True)
class ResultRecord:
    experiment: str
    scheme: str
    M: int
    N: int
    kind: str
    constellation: str
    x_name: str
    x_value: float
    y_name: str
    y_value: float
    trials: int
    errors: int
    ci_halfwidth: float
    seed: int


assert tuple(f.name for f in fields(ResultRecord)) == CSV_COLUMNS


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    z = float(norm.ppf(0.5 + confidence / 2))
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def wilson_halfwidth(successes: int, n: int, confidence: float = 0.95) -> float:
    lo, hi = wilson_interval(successes, n, confidence)
    return (hi - lo) / 2


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return v


def to_json(records) -> str:
    rows = [{k: _json_value(v) for k, v in asdict(r).items()} for r in records]
    return json.dumps(rows, indent=2) + "\n"


def from_csv(text: str) -> list[ResultRecord]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(
            ResultRecord(
                **{
                    **row,
                    "M": int(row["M"]),
                    "N": int(row["N"]),
                    "x_value": float(row["x_value"]),
                    "y_value": float(row["y_value"]),
                    "trials": int(row["trials"]),
                    "errors": int(row["errors"]),
                    "ci_halfwidth": float(row["ci_halfwidth"]),
                    "seed": int(row["seed"]),
                }
            )
        )
    return out


def render(records, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(records)
    if fmt == "json":
        return to_json(records)
    raise ValueError(f"unknown output format {fmt!r}")
