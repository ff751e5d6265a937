"""
PNG figures rendered next to the CSV outputs.

matplotlib is imported on first use with the non-interactive Agg backend,
so the numerical modules never depend on it. PNG metadata is stripped to
keep reruns byte-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

_PNG_METADATA = {"Software": None}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=110, metadata=_PNG_METADATA)
    _pyplot().close(fig)
    return path


def _hours(timestamps) -> np.ndarray:
    ts = np.asarray(timestamps, dtype="datetime64[s]")
    return (ts - ts[0]).astype(float) / 3600.0


def inputs_figure(series, path) -> Path:
    """Ambient temperature and load ratio over the horizon."""
    plt = _pyplot()
    h = _hours(series.timestamps)
    fig, (ax_t, ax_k) = plt.subplots(2, 1, figsize=(9, 5), sharex=True)
    ax_t.plot(h, series.ambient_temp, lw=0.4, color="tab:red")
    ax_t.set_ylabel("ambient (°C)")
    ax_k.plot(h, series.load_ratio, lw=0.4, color="tab:blue")
    ax_k.set_ylabel("load ratio K")
    ax_k.set_xlabel("hour")
    fig.tight_layout()
    return _save(fig, path)


def lol_figure(timestamps, lol_percent, path) -> Path:
    """Hourly loss of life."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(9, 3.2))
    ax.plot(_hours(timestamps), lol_percent, lw=0.4, color="tab:purple")
    ax.set_xlabel("hour")
    ax.set_ylabel("LOL per hour (%)")
    fig.tight_layout()
    return _save(fig, path)


def sweep_figure(rows, recommended: int, path) -> Path:
    """Train and test MSE against the number of clusters."""
    plt = _pyplot()
    c = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(6.5, 3.8))
    ax.semilogy(c, [r[1] for r in rows], "o-", label="train")
    ax.semilogy(c, [r[2] for r in rows], "s-", label="test")
    ax.axvline(recommended, color="grey", ls="--", lw=0.8, label=f"recommended c={recommended}")
    ax.set_xlabel("clusters")
    ax.set_ylabel("MSE")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def estimate_figure(actual, predicted, path, n: int = 100, title: str = "") -> Path:
    """First ``n`` test samples: estimate against actual, with the error below."""
    plt = _pyplot()
    a = np.asarray(actual, dtype=float)[:n]
    p = np.asarray(predicted, dtype=float)[:n]
    idx = np.arange(1, a.size + 1)
    fig, (ax, ax_e) = plt.subplots(2, 1, figsize=(8, 5), sharex=True, gridspec_kw={"height_ratios": [2, 1]})
    ax.plot(idx, a, "o-", ms=3, lw=0.8, label="actual")
    ax.plot(idx, p, "x--", ms=3, lw=0.8, label="estimated")
    ax.set_ylabel("LOL (%)")
    ax.legend()
    if title:
        ax.set_title(title)
    ax_e.bar(idx, a - p, color="tab:grey")
    ax_e.set_ylabel("error")
    ax_e.set_xlabel("test sample")
    fig.tight_layout()
    return _save(fig, path)


def trace_figure(trace_rows, path, xlabel: str = "epoch") -> Path:
    """Training (and test, when present) MSE per step."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.5, 3.8))
    steps = [r[0] for r in trace_rows]
    ax.semilogy(steps, [r[1] for r in trace_rows], label="train")
    if trace_rows and len(trace_rows[0]) > 2:
        ax.semilogy(steps, [r[2] for r in trace_rows], label="test")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("MSE")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def comparison_figure(ranked, path) -> Path:
    """Test MSE per method on a log axis, annotated with R²."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 3.8))
    names = [r.method.upper() for r in ranked]
    values = [r.mse for r in ranked]
    bars = ax.bar(names, values, color=["tab:green", "tab:orange", "tab:red", "tab:blue"][: len(names)])
    ax.set_yscale("log")
    ax.set_ylabel("test MSE")
    for bar, r in zip(bars, ranked):
        ax.annotate(f"R²={r.r_squared:.3f}", (bar.get_x() + bar.get_width() / 2, bar.get_height()),
                    ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)
