"""Error metrics and the ranked method comparison."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import InputError


def _pair(actual, predicted, min_len: int = 1):
    a = np.asarray(actual, dtype=float).ravel()
    p = np.asarray(predicted, dtype=float).ravel()
    if a.shape != p.shape:
        raise InputError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size < min_len:
        raise InputError(f"need at least {min_len} value(s), got {a.size}")
    return a, p


def mse(actual, predicted) -> float:
    """Mean squared error ``(1/Q) Σ (Y_q − Ŷ_q)²``."""
    a, p = _pair(actual, predicted)
    return float(np.mean((a - p) ** 2))


def r_squared(actual, predicted) -> float:
    """Coefficient of determination against the mean of ``actual``."""
    a, p = _pair(actual, predicted, min_len=2)
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0:
        raise InputError("R² is undefined: actual values have zero variance")
    return 1.0 - float(np.sum((a - p) ** 2)) / ss_tot


@dataclass(frozen=True)
class EvalReport:
    """Test-split scores of one trained estimator.

    ``train_time`` is wall-clock training duration in seconds.
    ``test_split`` fingerprints the test rows so reports from different
    splits cannot be ranked together.
    """

    method: str
    mse: float
    r_squared: float
    train_time: float = 0.0
    config: dict = field(default_factory=dict)
    rank: int | None = None
    test_split: str = ""

    def __post_init__(self):
        if self.mse < 0:
            raise InputError("mse must be >= 0")
        if self.r_squared > 1:
            raise InputError("r_squared cannot exceed 1")


def evaluate(method: str, actual, predicted, train_time: float = 0.0, config=None, test_split: str = "") -> EvalReport:
    return EvalReport(method, mse(actual, predicted), r_squared(actual, predicted), train_time, dict(config or {}),
                      None, test_split)


def compare(reports) -> list[EvalReport]:
    """Rank by MSE ascending, then R² descending, then training time ascending."""
    reports = list(reports)
    if len(reports) < 2:
        raise InputError("comparison needs at least two reports")
    splits = {r.test_split for r in reports}
    if len(splits) > 1:
        raise InputError(f"reports come from different test splits: {sorted(splits)}")
    ordered = sorted(reports, key=lambda r: (r.mse, -r.r_squared, r.train_time))
    return [replace(r, rank=i) for i, r in enumerate(ordered, start=1)]


def _config_text(config: dict) -> str:
    return ";".join(f"{k}={config[k]}" for k in sorted(config))


def write_comparison_csv(path, ranked, include_time: bool = False) -> None:
    header = ["method", "mse", "r_squared"] + (["train_time_s"] if include_time else []) + ["rank", "config"]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in ranked:
            row = [r.method, repr(r.mse), repr(r.r_squared)]
            if include_time:
                row.append(f"{r.train_time:.3f}")
            row += [r.rank, _config_text(r.config)]
            writer.writerow(row)


def format_table(ranked, include_time: bool = False) -> str:
    """Aligned plain-text table with the method, MSE, R², time and rank columns."""
    header = ["Method", "MSE", "R^2"] + (["Time (s)"] if include_time else []) + ["Rank"]
    rows = []
    for r in ranked:
        row = [r.method.upper(), f"{r.mse:.4e}", f"{r.r_squared:.4f}"]
        if include_time:
            row.append(f"{r.train_time:.2f}")
        row.append(str(r.rank))
        rows.append(row)
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"
