"""
``xfmr-aging`` command-line entry point.

Exit status is 0 on success, 2 for user or configuration errors (bad
flags, missing or malformed input, invalid parameters) and 1 for anything
unexpected.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__, pipeline
from .config import load_config
from .errors import TrainingError, XfmrAgingError

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2


def _common(parser: argparse.ArgumentParser) -> None:
    src = parser.add_mutually_exclusive_group()
    src.add_argument("--input", metavar="CSV", help="hourly CSV with timestamp, ambient_temp_c, load_ratio")
    src.add_argument("--synthetic", metavar="PROFILE", nargs="?", const="default",
                     help="synthesise a year instead: 'default' or a YAML file of profile fields")
    parser.add_argument("--hours", type=int, help="length of a synthetic series (default 8760)")
    parser.add_argument("--params", metavar="FILE", help="YAML file of transformer parameters")
    parser.add_argument("--config", metavar="FILE", help="YAML run configuration")
    parser.add_argument("--out", metavar="DIR", help="output directory (default ./out)")
    parser.add_argument("--seed", type=int, help="global seed (overrides XFMR_SEED and the config file)")
    parser.add_argument("--mode", choices=("literal", "carry"), help="initial-rise routing between intervals")
    parser.add_argument("--start", choices=("warm", "cold"), help="thermal state before the first hour")
    parser.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    parser.add_argument("--timing", action="store_true",
                        help="add wall-clock training times to reports (makes them run-dependent)")
    parser.add_argument("-v", "--verbose", action="store_true")


def _estimators(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--clusters", type=int, help="ANFIS rules (FCM clusters), default 20")
    parser.add_argument("--epochs", type=int, help="ANFIS hybrid-learning epochs, default 25")
    parser.add_argument("--learning-rate", type=float, help="ANFIS premise step length, default 0.01")
    parser.add_argument("--mlp-epochs", type=int, help="MLP gradient-descent epochs, default 500")
    parser.add_argument("--max-neurons", type=int, help="RBF neuron cap, default 2000")
    parser.add_argument("--mse-goal", type=float, help="RBF training MSE goal (default 1.4 x ANFIS test MSE)")
    parser.add_argument("--test-fraction", type=float, help="held-out share of rows, default 0.30")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xfmr-aging", description="Transformer loss-of-life estimation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("compute-lol", help="run the thermal model and write hourly loss of life")
    _common(p)

    p = sub.add_parser("cluster-sweep", help="ANFIS test MSE against the number of clusters")
    _common(p)
    _estimators(p)
    p.add_argument("--c-min", type=int, help="smallest cluster count, default 2")
    p.add_argument("--c-max", type=int, help="largest cluster count, default 30")
    p.add_argument("--threshold", type=float, help="relative improvement below which c is recommended")

    p = sub.add_parser("train", help="train one estimator and evaluate it on the test split")
    _common(p)
    _estimators(p)
    p.add_argument("--method", required=True, choices=pipeline.METHODS)
    p.add_argument("--cv", action="store_true", help="also run k-fold cross-validation on the training split")
    p.add_argument("--k", type=int, help="folds for --cv, default 5")

    p = sub.add_parser("compare", help="train ANFIS, MLP and RBF on one split and rank them")
    _common(p)
    _estimators(p)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    get = lambda name: getattr(args, name, None)  # noqa: E731
    return {
        "seed": get("seed"),
        "data.input": get("input"),
        "data.synthetic": get("synthetic"),
        "data.hours": get("hours"),
        "transformer.file": get("params"),
        "thermal.mode": get("mode"),
        "thermal.start": get("start"),
        "output.dir": get("out"),
        "output.figures": False if get("no_figures") else None,
        "output.timing": True if get("timing") else None,
        "anfis.clusters": get("clusters"),
        "anfis.epochs": get("epochs"),
        "anfis.learning_rate": get("learning_rate"),
        "mlp.epochs": get("mlp_epochs"),
        "rbf.max_neurons": get("max_neurons"),
        "rbf.mse_goal": get("mse_goal"),
        "split.test_fraction": get("test_fraction"),
        "split.k": get("k"),
        "sweep.c_min": get("c_min"),
        "sweep.c_max": get("c_max"),
        "sweep.threshold": get("threshold"),
    }


def _report(command: str, result: dict, out) -> None:
    if command == "compute-lol":
        print(f"hours: {result['hours']}")
        print(f"total LOL: {result['total_lol_percent']:.6g} %")
        print(f"equivalent aging factor: {result['equivalent_aging_factor']:.6g}")
        print(f"peak hot-spot: {result['peak_hotspot_temp_c']:.2f} °C")
        if result["repairs"]:
            print(f"repaired readings: {result['repairs']}")
    elif command == "cluster-sweep":
        print(f"recommended clusters: {result['recommended']}")
    elif command == "train":
        r = result["report"]
        print(f"{r.method}: test MSE {r.mse:.4e}, R^2 {r.r_squared:.4f}, {r.train_time:.2f} s")
    elif command == "compare":
        from .metrics import format_table

        print(format_table(result["ranked"], include_time=True), end="")
    print(f"outputs written to {out}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = load_config(args.config, _overrides(args))
        if args.command == "compute-lol":
            result = pipeline.compute_lol(config)
        elif args.command == "cluster-sweep":
            result = pipeline.cluster_sweep(config)
        elif args.command == "train":
            result = pipeline.train(config, args.method, cross_validate=args.cv)
        else:
            result = pipeline.compare(config)
    except FileNotFoundError as exc:
        msg = f"file not found: {exc.filename}" if exc.filename else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingError as exc:
        print(f"error: training failed: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except XfmrAgingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        logging.getLogger(__name__).debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    _report(args.command, result, config.out_dir)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
