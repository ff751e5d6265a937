"""
Baseline regressors: a 2-2-1 tanh MLP and an incrementally grown RBF network.

Both standardise inputs and targets with statistics from their training
set and report predictions back in the original units.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import modelfile
from .errors import InputError, ModelFileError, TrainingError


@dataclass(frozen=True)
class Scaler:
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: float
    y_std: float

    @classmethod
    def fit(cls, x, y) -> "Scaler":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x_std = x.std(axis=0)
        x_std[x_std == 0] = 1.0
        y_std = float(y.std()) or 1.0
        return cls(x.mean(axis=0), x_std, float(y.mean()), y_std)

    @classmethod
    def identity(cls, dim: int = 2) -> "Scaler":
        return cls(np.zeros(dim), np.ones(dim), 0.0, 1.0)

    def x(self, x):
        return (np.asarray(x, dtype=float) - self.x_mean) / self.x_std

    def y(self, y):
        return (np.asarray(y, dtype=float) - self.y_mean) / self.y_std

    def y_inverse(self, ys):
        return np.asarray(ys) * self.y_std + self.y_mean

    def to_fields(self) -> dict:
        return {"x_mean": self.x_mean, "x_std": self.x_std, "y_mean": self.y_mean, "y_std": self.y_std}

    @classmethod
    def from_fields(cls, f) -> "Scaler":
        return cls(np.asarray(f["x_mean"], dtype=float), np.asarray(f["x_std"], dtype=float),
                   float(f["y_mean"]), float(f["y_std"]))


def _as_batch(x, dim: int = 2):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != dim:
        raise InputError(f"expected inputs with {dim} columns, got shape {x.shape}")
    return x, single


# --------------------------------------------------------------------------- #
# MLP

@dataclass
class MlpModel:
    """Inputs → tanh hidden layer → linear output, on standardised data.

    ``hidden_weights`` has shape ``(hidden, inputs)``.
    """

    hidden_weights: np.ndarray
    hidden_bias: np.ndarray
    output_weights: np.ndarray
    output_bias: float
    scaler: Scaler
    trace: list[float] = field(default_factory=list)

    def __post_init__(self):
        self.hidden_weights = np.array(self.hidden_weights, dtype=float, ndmin=2)
        self.hidden_bias = np.array(self.hidden_bias, dtype=float)
        self.output_weights = np.array(self.output_weights, dtype=float)
        self.output_bias = float(self.output_bias)
        h = self.hidden_weights.shape[0]
        if self.hidden_bias.shape != (h,) or self.output_weights.shape != (h,):
            raise InputError("inconsistent MLP layer shapes")

    @property
    def layer_sizes(self) -> tuple[int, int, int]:
        return (self.hidden_weights.shape[1], self.hidden_weights.shape[0], 1)

    def params(self) -> dict:
        return {"W1": self.hidden_weights, "b1": self.hidden_bias, "w2": self.output_weights,
                "b2": np.array(self.output_bias)}

    def predict(self, x):
        x, single = _as_batch(x, self.layer_sizes[0])
        out = mlp_forward(self.params(), self.scaler.x(x))
        y = self.scaler.y_inverse(out)
        return float(y[0]) if single else y


def mlp_forward(p: dict, xs: np.ndarray) -> np.ndarray:
    return np.tanh(xs @ p["W1"].T + p["b1"]) @ p["w2"] + p["b2"]


def mlp_loss_and_grad(p: dict, xs: np.ndarray, ys: np.ndarray) -> tuple[float, dict]:
    """MSE on standardised data and its gradient w.r.t. every weight."""
    hidden = np.tanh(xs @ p["W1"].T + p["b1"])
    out = hidden @ p["w2"] + p["b2"]
    err = out - ys
    n = len(ys)
    d_out = 2.0 * err / n
    d_hidden = np.outer(d_out, p["w2"]) * (1.0 - hidden**2)
    grads = {
        "W1": d_hidden.T @ xs,
        "b1": d_hidden.sum(axis=0),
        "w2": hidden.T @ d_out,
        "b2": np.array(d_out.sum()),
    }
    return float(np.mean(err**2)), grads


def init_mlp(scaler: Scaler, hidden: int = 2, seed: int = 0, n_inputs: int = 2) -> MlpModel:
    rng = np.random.default_rng(seed)
    return MlpModel(
        rng.uniform(-0.5, 0.5, (hidden, n_inputs)),
        rng.uniform(-0.5, 0.5, hidden),
        rng.uniform(-0.5, 0.5, hidden),
        rng.uniform(-0.5, 0.5),
        scaler,
    )


def train_mlp(train, epochs: int = 500, learning_rate: float = 1e-2, seed: int = 0, hidden: int = 2) -> MlpModel:
    """Full-batch backpropagation; the trace holds the training MSE in target units."""
    if len(train) == 0:
        raise InputError("training set is empty")
    if epochs < 0:
        raise InputError(f"epochs must be >= 0, got {epochs}")
    scaler = Scaler.fit(train.inputs, train.targets)
    model = init_mlp(scaler, hidden, seed, train.inputs.shape[1])
    xs, ys = scaler.x(train.inputs), scaler.y(train.targets)
    p = model.params()
    trace = []
    for epoch in range(1, epochs + 1):
        loss, grads = mlp_loss_and_grad(p, xs, ys)
        if not np.isfinite(loss):
            raise TrainingError(f"MLP training diverged at epoch {epoch}")
        for name in p:
            p[name] = p[name] - learning_rate * grads[name]
        trace.append(loss * scaler.y_std**2)
    return MlpModel(p["W1"], p["b1"], p["w2"], float(p["b2"]), scaler, trace)


def save_mlp(model: MlpModel, path):
    return modelfile.write(path, "mlp", {
        "layer_sizes": list(model.layer_sizes),
        "hidden_activation": "tanh",
        "output_activation": "linear",
        "hidden_weights": model.hidden_weights,
        "hidden_bias": model.hidden_bias,
        "output_weights": model.output_weights,
        "output_bias": model.output_bias,
        "scaler": model.scaler.to_fields(),
    })


def load_mlp(path) -> MlpModel:
    f = modelfile.read(path, "mlp", required=("hidden_weights", "hidden_bias", "output_weights", "output_bias", "scaler"))
    try:
        return MlpModel(f["hidden_weights"], f["hidden_bias"], f["output_weights"], f["output_bias"],
                        Scaler.from_fields(f["scaler"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"{path}: malformed MLP record ({exc})") from exc


# --------------------------------------------------------------------------- #
# RBF

@dataclass
class RbfModel:
    """Gaussian RBF network on standardised inputs.

    ``centers`` (k, d) and ``widths`` (k,) live in standardised input units;
    the output is ``bias + Σ weights_k exp(−‖x − c_k‖² / (2 widths_k²))`` in
    standardised target units.
    """

    centers: np.ndarray
    widths: np.ndarray
    weights: np.ndarray
    bias: float
    scaler: Scaler
    goal_met: bool = False
    trace: list[float] = field(default_factory=list)
    skipped: list[tuple[int, str]] = field(default_factory=list)

    def __post_init__(self):
        self.centers = np.array(self.centers, dtype=float, ndmin=2)
        self.widths = np.array(self.widths, dtype=float, ndmin=1)
        self.weights = np.array(self.weights, dtype=float, ndmin=1)
        self.bias = float(self.bias)
        k = self.centers.shape[0]
        if k < 1 or self.widths.shape != (k,) or self.weights.shape != (k,):
            raise InputError("an RBF network needs >= 1 neuron with one width and weight each")
        if np.any(self.widths <= 0):
            raise InputError("RBF widths must be > 0")

    @property
    def n_neurons(self) -> int:
        return self.centers.shape[0]

    def activations(self, xs: np.ndarray) -> np.ndarray:
        d2 = np.sum((xs[:, None, :] - self.centers[None, :, :]) ** 2, axis=2)
        return np.exp(-d2 / (2.0 * self.widths**2))

    def predict(self, x):
        x, single = _as_batch(x, self.centers.shape[1])
        out = self.bias + self.activations(self.scaler.x(x)) @ self.weights
        y = self.scaler.y_inverse(out)
        return float(y[0]) if single else y


def train_rbf(train, mse_goal: float, max_neurons: int = 2000, seed: int = 0, *, dependence_tol: float = 1e-8) -> RbfModel:
    """Grow an RBF network one neuron at a time until the training MSE meets the goal.

    Each new neuron is centred on the training point with the largest
    absolute residual (skipping points already used as centers and points
    whose basis column is numerically dependent on the existing ones). Its
    width is the mean nearest-neighbour distance among the centers at the
    moment of insertion (1.0 for the first neuron) and stays fixed, so every
    insertion enlarges the basis and the least-squares optimum cannot get
    worse. Output weights are re-solved exactly after every insertion via
    an incrementally updated orthogonal factorisation of the basis.

    ``mse_goal`` is in target units. ``seed`` is accepted for interface
    symmetry; the construction itself is deterministic.
    """
    del seed
    if len(train) == 0:
        raise InputError("training set is empty")
    if not mse_goal > 0:
        raise InputError(f"mse_goal must be > 0, got {mse_goal}")
    if max_neurons < 1:
        raise InputError(f"max_neurons must be >= 1, got {max_neurons}")
    scaler = Scaler.fit(train.inputs, train.targets)
    xs, ys = scaler.x(train.inputs), scaler.y(train.targets)
    n = len(ys)
    cap = min(max_neurons, n)

    q = np.empty((n, cap + 1))
    r = np.zeros((cap + 1, cap + 1))
    q[:, 0] = 1.0 / np.sqrt(n)
    r[0, 0] = np.sqrt(n)
    qty = [float(q[:, 0] @ ys)]
    resid = ys - q[:, 0] * qty[0]

    centers, widths, used, skipped, trace = [], [], set(), [], []
    seen = set()
    center_arr = np.empty((cap, xs.shape[1]))
    nn = np.empty(cap)  # nearest-neighbour distance of each center
    k = 0
    while k < cap:
        order = np.argsort(-np.abs(resid), kind="stable")
        added = False
        for i in order:
            i = int(i)
            if i in used:
                continue
            used.add(i)
            key = tuple(xs[i])
            if key in seen:
                skipped.append((i, "duplicate center"))
                continue
            if k:
                dist = np.sqrt(np.sum((center_arr[:k] - xs[i]) ** 2, axis=1))
                trial_nn = np.append(np.minimum(nn[:k], dist), dist.min())
                width = float(np.mean(trial_nn))
            else:
                width = 1.0
            phi = np.exp(-np.sum((xs - xs[i]) ** 2, axis=1) / (2.0 * width**2))
            v = phi.copy()
            coef = np.zeros(k + 1)
            for _ in range(2):  # classical Gram-Schmidt, reorthogonalised
                c = q[:, : k + 1].T @ v
                v -= q[:, : k + 1] @ c
                coef += c
            norm = float(np.linalg.norm(v))
            if norm <= dependence_tol * float(np.linalg.norm(phi)):
                skipped.append((i, "numerically dependent basis column"))
                continue
            if k:
                nn[: k + 1] = trial_nn
            center_arr[k] = xs[i]
            k += 1
            q[:, k] = v / norm
            r[: k, k] = coef
            r[k, k] = norm
            qty.append(float(q[:, k] @ ys))
            resid -= q[:, k] * float(q[:, k] @ resid)
            centers.append(xs[i])
            widths.append(width)
            seen.add(key)
            added = True
            break
        if not added:
            break
        trace.append(float(resid @ resid) / n * scaler.y_std**2)
        if trace[-1] <= mse_goal:
            break
    if not centers:
        raise TrainingError("no usable RBF center could be placed")

    coef = solve_triangular(r[: k + 1, : k + 1], np.asarray(qty), lower=False)
    if not np.all(np.isfinite(coef)):
        raise TrainingError("RBF output weights are not finite")
    return RbfModel(np.array(centers), np.array(widths), coef[1:], coef[0], scaler,
                    goal_met=trace[-1] <= mse_goal, trace=trace, skipped=skipped)


def save_rbf(model: RbfModel, path):
    return modelfile.write(path, "rbf", {
        "n_neurons": model.n_neurons,
        "centers": model.centers,
        "widths": model.widths,
        "weights": model.weights,
        "bias": model.bias,
        "goal_met": model.goal_met,
        "scaler": model.scaler.to_fields(),
    })


def load_rbf(path) -> RbfModel:
    f = modelfile.read(path, "rbf", required=("centers", "widths", "weights", "bias", "scaler"))
    try:
        model = RbfModel(f["centers"], f["widths"], f["weights"], f["bias"], Scaler.from_fields(f["scaler"]),
                         goal_met=bool(f.get("goal_met", False)))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"{path}: malformed RBF record ({exc})") from exc
    return model
