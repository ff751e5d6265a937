"""
Batch commands: each takes a :class:`RunConfig`, writes its artifacts into
``config.out_dir`` and returns a small summary dict.

Every emitted CSV, JSON and text file depends only on the configuration,
so reruns are byte-identical. Wall-clock training times vary between runs
and are therefore written only when ``config.timing`` is set.
"""

from __future__ import annotations

import csv
import logging
import time
from pathlib import Path

import numpy as np

from . import anfis, baselines, dataset, fcm, metrics, thermal
from .config import RunConfig
from .errors import InputError

log = logging.getLogger(__name__)

METHODS = ("anfis", "mlp", "rbf")


def _write_rows(path: Path, header, rows) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _num(x) -> str:
    return repr(float(x))


def _out_dir(config: RunConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --------------------------------------------------------------------------- #
# Data

def load_series(config: RunConfig) -> tuple[dataset.HourlySeries, list[dataset.Repair]]:
    """Ingest or synthesise the hourly inputs, then repair bad readings."""
    if config.input_csv is not None:
        raw = dataset.ingest_csv(config.input_csv, check_bounds=False)
    else:
        raw = dataset.synthesize(config.synthetic, hours=config.hours, seed=config.seed)
    return dataset.preprocess(raw, config.policy)


def labeled_data(config: RunConfig) -> dataset.LabeledDataset:
    series, repairs = load_series(config)
    if repairs:
        log.info("repaired %d reading(s)", len(repairs))
    return dataset.label(series, config.params, mode=config.mode, start=config.start)


def _write_repairs(out: Path, repairs) -> Path:
    return _write_rows(
        out / "repairs.csv",
        ["position", "column", "original", "replacement", "reason"],
        [[r.position, r.column, _num(r.original), _num(r.replacement), r.reason] for r in repairs],
    )


# --------------------------------------------------------------------------- #
# compute-lol

def compute_lol(config: RunConfig) -> dict:
    """Hourly thermal model and loss of life over the whole series."""
    out = _out_dir(config)
    series, repairs = load_series(config)
    records = thermal.run_profile(series, config.params, start=config.start, mode=config.mode)
    cols = thermal.records_as_arrays(records)

    _write_rows(
        out / "lol_records.csv",
        ["interval_index", "timestamp", "ambient_temp_c", "load_ratio", "hotspot_temp_c", "aging_factor", "lol_percent"],
        [
            [r.interval_index, dataset.format_timestamp(series.timestamps[r.interval_index]), _num(r.ambient_temp),
             _num(r.load_ratio), _num(r.hotspot_temp), _num(r.aging_factor), _num(r.lol_percent)]
            for r in records
        ],
    )
    dataset.write_series_csv(out / "labeled_dataset.csv", series, cols["lol_percent"])
    _write_repairs(out, repairs)

    feqa = thermal.equivalent_aging(records)
    summary = {
        "hours": len(records),
        "total_lol_percent": float(np.sum(cols["lol_percent"])),
        "equivalent_aging_factor": feqa,
        "lol_percent_from_feqa": thermal.loss_of_life_percent(feqa, len(records), config.params),
        "peak_hotspot_temp_c": float(np.max(cols["hotspot_temp"])),
        "repairs": len(repairs),
    }
    _write_rows(out / "summary.csv", ["key", "value"], [[k, v if isinstance(v, int) else _num(v)]
                                                        for k, v in summary.items()])
    if config.figures:
        from . import plotting

        plotting.inputs_figure(series, out / "inputs.png")
        plotting.lol_figure(series.timestamps, cols["lol_percent"], out / "lol.png")
    return summary


# --------------------------------------------------------------------------- #
# cluster-sweep

def cluster_sweep(config: RunConfig) -> dict:
    out = _out_dir(config)
    data = labeled_data(config)
    train, test = dataset.split(data, config.split)
    s = config.sweep
    result = fcm.cluster_sweep(
        train, test, (s.c_min, s.c_max), seed=config.seed, threshold=s.threshold,
        fuzzifier=config.anfis.fuzzifier, learning_rate=config.anfis.learning_rate,
        standardize=config.anfis.standardize,
    )
    result.to_csv(out / "cluster_sweep.csv")
    _write_rows(out / "sweep_summary.csv", ["key", "value"],
                [["recommended_clusters", result.recommended], ["threshold", _num(s.threshold)],
                 ["test_split", test.fingerprint()]])
    if config.figures:
        from . import plotting

        plotting.sweep_figure(result.rows, result.recommended, out / "cluster_sweep.png")
    return {"recommended": result.recommended, "rows": result.rows}


# --------------------------------------------------------------------------- #
# Training

def _fit_anfis(config: RunConfig, train, test):
    a = config.anfis
    model = anfis.build(train, a.clusters, seed=config.seed, fuzzifier=a.fuzzifier, standardize=a.standardize)
    model, trace = anfis.train(model, train, anfis.TrainConfig(a.epochs, a.learning_rate, config.seed), test)
    rows = [[e, tr, te] for e, (tr, te) in enumerate(zip(trace.train_mse, trace.validation_mse), start=1)]
    return model, rows, {"clusters": a.clusters, "epochs": a.epochs, "learning_rate": a.learning_rate}


def _fit_mlp(config: RunConfig, train, test):
    m = config.mlp
    model = baselines.train_mlp(train, m.epochs, m.learning_rate, config.seed, m.hidden)
    rows = [[e, tr] for e, tr in enumerate(model.trace, start=1)]
    return model, rows, {"layers": "-".join(map(str, model.layer_sizes)), "epochs": m.epochs,
                         "learning_rate": m.learning_rate}


def _fit_rbf(config: RunConfig, train, test, goal: float):
    r = config.rbf
    model = baselines.train_rbf(train, goal, r.max_neurons, config.seed)
    rows = [[k, tr] for k, tr in enumerate(model.trace, start=1)]
    return model, rows, {"neurons": model.n_neurons, "mse_goal": goal, "goal_met": model.goal_met}


_SAVERS = {"anfis": anfis.save, "mlp": baselines.save_mlp, "rbf": baselines.save_rbf}
_TRACE_HEADERS = {
    "anfis": ["epoch", "train_mse", "test_mse"],
    "mlp": ["epoch", "train_mse"],
    "rbf": ["neurons", "train_mse"],
}


def _rbf_goal(config: RunConfig, anfis_test_mse: float | None) -> float:
    if config.rbf.mse_goal is not None:
        return float(config.rbf.mse_goal)
    if anfis_test_mse is None:
        raise InputError("RBF goal needs either rbf.mse_goal or an ANFIS reference run")
    return config.rbf.goal_factor * anfis_test_mse


def _timed(fit, *args):
    t0 = time.perf_counter()
    result = fit(*args)
    return result, time.perf_counter() - t0


def fit_method(config: RunConfig, method: str, train, test, anfis_test_mse: float | None = None):
    """Train one method and score it on ``test``; returns ``(model, trace_rows, report)``."""
    if method == "anfis":
        (model, rows, cfg), seconds = _timed(_fit_anfis, config, train, test)
    elif method == "mlp":
        (model, rows, cfg), seconds = _timed(_fit_mlp, config, train, test)
    elif method == "rbf":
        goal = _rbf_goal(config, anfis_test_mse)
        (model, rows, cfg), seconds = _timed(_fit_rbf, config, train, test, goal)
    else:
        raise InputError(f"unknown method {method!r}; choose one of {', '.join(METHODS)}")
    report = metrics.evaluate(method, test.targets, model.predict(test.inputs), seconds, cfg, test.fingerprint())
    return model, rows, report


def _write_trace(out: Path, method: str, rows) -> Path:
    return _write_rows(out / f"{method}_trace.csv", _TRACE_HEADERS[method],
                       [[r[0], *map(_num, r[1:])] for r in rows])


def _cross_validate(config: RunConfig, method: str, train, anfis_test_mse) -> list[list]:
    rows = []
    for i, (fold_train, fold_val) in enumerate(dataset.kfold(train, config.split.k, config.seed), start=1):
        _, _, report = fit_method(config, method, fold_train, fold_val, anfis_test_mse)
        rows.append([i, len(fold_train), len(fold_val), report.mse, report.r_squared])
    return rows


def train(config: RunConfig, method: str, cross_validate: bool = False) -> dict:
    """Train one method on the training split and evaluate it on the test split.

    An RBF run without an explicit ``rbf.mse_goal`` first trains the ANFIS
    with the same settings and uses ``goal_factor`` times its test MSE.
    """
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}; choose one of {', '.join(METHODS)}")
    out = _out_dir(config)
    data = labeled_data(config)
    train_set, test = dataset.split(data, config.split)

    reference = None
    if method == "rbf" and config.rbf.mse_goal is None:
        _, _, ref = fit_method(config, "anfis", train_set, test)
        reference = ref.mse
    model, rows, report = fit_method(config, method, train_set, test, reference)

    _SAVERS[method](model, out / f"{method}_model.json")
    _write_trace(out, method, rows)
    metrics.write_comparison_csv(out / f"{method}_report.csv", [report], include_time=config.timing)
    if cross_validate:
        cv = _cross_validate(config, method, train_set, reference)
        mean = ["mean", "", "", float(np.mean([r[3] for r in cv])), float(np.mean([r[4] for r in cv]))]
        _write_rows(out / f"{method}_cv.csv", ["fold", "n_train", "n_validation", "mse", "r_squared"],
                    [[*r[:3], _num(r[3]), _num(r[4])] for r in cv] + [[*mean[:3], _num(mean[3]), _num(mean[4])]])
    if config.figures:
        from . import plotting

        xlabel = "neurons" if method == "rbf" else "epoch"
        plotting.trace_figure(rows, out / f"{method}_trace.png", xlabel)
        plotting.estimate_figure(test.targets, model.predict(test.inputs), out / f"{method}_estimates.png",
                                 title=method.upper())
    return {"report": report, "model": model}


# --------------------------------------------------------------------------- #
# compare

def compare(config: RunConfig) -> dict:
    """Train all three methods on one split and rank them by test MSE."""
    out = _out_dir(config)
    data = labeled_data(config)
    train_set, test = dataset.split(data, config.split)

    models, reports = {}, []
    anfis_mse = None
    for method in METHODS:
        model, rows, report = fit_method(config, method, train_set, test, anfis_mse)
        if method == "anfis":
            anfis_mse = report.mse
        models[method] = model
        reports.append(report)
        _SAVERS[method](model, out / f"{method}_model.json")
        _write_trace(out, method, rows)
        log.info("%s: test MSE %.4e, R² %.4f", method, report.mse, report.r_squared)

    ranked = metrics.compare(reports)
    metrics.write_comparison_csv(out / "comparison.csv", ranked, include_time=config.timing)
    (out / "comparison.txt").write_text(metrics.format_table(ranked, include_time=config.timing), encoding="utf-8")
    _write_rows(out / "predictions.csv", ["timestamp", "ambient_temp_c", "load_ratio", "actual", *METHODS],
                [[dataset.format_timestamp(test.timestamps[i]), _num(test.inputs[i, 0]), _num(test.inputs[i, 1]),
                  _num(test.targets[i]), *(_num(v) for v in preds)]
                 for i, preds in enumerate(zip(*(models[m].predict(test.inputs) for m in METHODS)))])
    if config.figures:
        from . import plotting

        plotting.comparison_figure(ranked, out / "comparison.png")
        plotting.estimate_figure(test.targets, models["anfis"].predict(test.inputs), out / "anfis_estimates.png",
                                 title="ANFIS")
    return {"ranked": ranked, "models": models, "test_split": test.fingerprint()}
