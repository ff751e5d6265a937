"""
First-order Takagi-Sugeno ANFIS with Gaussian memberships.

Forward pass for an input x ∈ R^d and rules j = 1..R::

    μ_jk(x_k) = exp(−(x_k − c_jk)² / (2 σ_jk²))          membership
    w_j(x)    = Π_k μ_jk(x_k)                              firing strength
    w̄_j(x)    = w_j / Σ_l w_l                              normalisation
    f_j(x)    = Σ_k a_jk x_k + b_j                         rule consequent
    y(x)      = Σ_j w̄_j f_j(x)

Training alternates two steps per epoch: a global linear least-squares
solve for every (a, b) with the premises fixed, then one full-batch
gradient step on the centers c and widths σ with the consequents fixed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fcm as fcm_module
from . import modelfile
from .errors import InputError, ModelFileError, TrainingError

WIDTH_FLOOR = 1e-6
MODEL_KIND = "anfis"


@dataclass(frozen=True)
class Rule:
    centers: tuple
    widths: tuple
    consequent: tuple  # per-input slopes, then the constant term


@dataclass
class AnfisModel:
    """Rule base as three arrays.

    ``centers`` and ``widths`` have shape ``(R, d)``; ``consequents`` has
    shape ``(R, d + 1)`` holding the slopes followed by the constant term.
    """

    centers: np.ndarray
    widths: np.ndarray
    consequents: np.ndarray

    def __post_init__(self):
        self.centers = np.array(self.centers, dtype=float, ndmin=2)
        self.widths = np.array(self.widths, dtype=float, ndmin=2)
        self.consequents = np.array(self.consequents, dtype=float, ndmin=2)
        r, d = self.centers.shape
        if r < 1:
            raise InputError("an ANFIS needs at least one rule")
        if self.widths.shape != (r, d) or self.consequents.shape != (r, d + 1):
            raise InputError(
                f"inconsistent shapes: centers {self.centers.shape}, widths {self.widths.shape}, "
                f"consequents {self.consequents.shape}"
            )
        if np.any(self.widths <= 0):
            raise InputError("membership widths must be > 0")

    @property
    def n_rules(self) -> int:
        return self.centers.shape[0]

    @property
    def input_dim(self) -> int:
        return self.centers.shape[1]

    @property
    def rules(self) -> list[Rule]:
        return [
            Rule(tuple(c), tuple(s), tuple(q))
            for c, s, q in zip(self.centers.tolist(), self.widths.tolist(), self.consequents.tolist())
        ]

    def copy(self) -> "AnfisModel":
        return AnfisModel(self.centers.copy(), self.widths.copy(), self.consequents.copy())

    def _as_inputs(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise InputError(f"expected inputs with {self.input_dim} columns, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InputError("inputs must be finite")
        return x

    def log_strengths(self, x) -> np.ndarray:
        x = self._as_inputs(x)
        z = (x[:, None, :] - self.centers[None, :, :]) / self.widths[None, :, :]
        return -0.5 * np.einsum("nrd,nrd->nr", z, z)

    def normalized_strengths(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Normalised firing strengths ``(n, R)`` and the underflow mask ``(n,)``.

        Where every rule's strength underflows to zero the whole weight goes
        to the rule with the smallest width-normalised distance.
        """
        logw = self.log_strengths(x)
        w = np.exp(logw)
        total = w.sum(axis=1)
        fallback = total < np.finfo(float).tiny
        wbar = np.zeros_like(w)
        ok = ~fallback
        wbar[ok] = w[ok] / total[ok, None]
        if fallback.any():
            nearest = np.argmax(logw[fallback], axis=1)
            wbar[np.flatnonzero(fallback), nearest] = 1.0
        return wbar, fallback

    def rule_outputs(self, x) -> np.ndarray:
        x = self._as_inputs(x)
        return x @ self.consequents[:, :-1].T + self.consequents[:, -1]

    def predict_with_diagnostics(self, x) -> tuple[np.ndarray, np.ndarray]:
        x = self._as_inputs(x)
        wbar, fallback = self.normalized_strengths(x)
        return np.sum(wbar * self.rule_outputs(x), axis=1), fallback

    def predict(self, x):
        """Model output for one input vector (returns a float) or an ``(n, d)`` batch."""
        single = np.ndim(x) == 1
        y, _ = self.predict_with_diagnostics(x)
        return float(y[0]) if single else y


# --------------------------------------------------------------------------- #
# Construction

def init_from_fcm(result: fcm_module.FcmResult, data, width_floor: float = WIDTH_FLOOR) -> AnfisModel:
    """One rule per FCM cluster.

    Centers are the cluster centers; each width is the membership-weighted
    standard deviation of that coordinate about its center, floored at
    ``width_floor``. Consequents start at zero.
    """
    x = np.asarray(getattr(data, "inputs", data), dtype=float)
    u = np.asarray(result.membership, dtype=float)
    centers = np.asarray(result.centers, dtype=float)
    if u.shape != (centers.shape[0], x.shape[0]):
        raise InputError(f"membership shape {u.shape} does not match {centers.shape[0]} clusters x {x.shape[0]} points")
    sq = (x[None, :, :] - centers[:, None, :]) ** 2
    mass = u.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        var = np.einsum("cn,cnd->cd", u, sq) / mass[:, None]
    widths = np.sqrt(np.nan_to_num(var, nan=0.0))
    floored = widths < width_floor
    widths[floored] = width_floor
    collapsed = np.flatnonzero(floored.all(axis=1))
    if collapsed.size:
        warnings.warn(
            f"membership widths of rule(s) {collapsed.tolist()} were all clamped to {width_floor:g}",
            RuntimeWarning,
            stacklevel=2,
        )
    consequents = np.zeros((centers.shape[0], centers.shape[1] + 1))
    return AnfisModel(centers.copy(), widths, consequents)


def build(
    data,
    n_clusters: int,
    seed: int = 0,
    *,
    fuzzifier: float = 2.0,
    standardize: bool = True,
    tol: float = 1e-6,
    max_iter: int = 300,
) -> AnfisModel:
    """Cluster the training inputs with FCM and seed a rule base from the result."""
    result = fcm_module.cluster(
        data.inputs, n_clusters, fuzzifier, tol, max_iter, seed, standardize=standardize
    )
    return init_from_fcm(result, data)


# --------------------------------------------------------------------------- #
# Hybrid learning

@dataclass(frozen=True)
class TrainConfig:
    """``learning_rate`` is the length of each premise step in parameter space
    when ``normalize_step`` is set, otherwise a plain gradient multiplier."""

    epochs: int = 25
    learning_rate: float = 1e-2
    seed: int = 0
    normalize_step: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise InputError(f"epochs must be >= 1, got {self.epochs}")
        if not self.learning_rate > 0:
            raise InputError(f"learning_rate must be > 0, got {self.learning_rate}")


@dataclass
class TrainTrace:
    train_mse: list[float] = field(default_factory=list)
    validation_mse: list[float] = field(default_factory=list)
    rank_deficient_epochs: list[int] = field(default_factory=list)


def design_matrix(model: AnfisModel, x) -> np.ndarray:
    """Regressors in which the model output is linear: for each rule the
    columns ``w̄_j x_1 … w̄_j x_d, w̄_j`` in rule order."""
    x = model._as_inputs(x)
    wbar, _ = model.normalized_strengths(x)
    xe = np.hstack([x, np.ones((x.shape[0], 1))])
    return (wbar[:, :, None] * xe[:, None, :]).reshape(x.shape[0], -1)


def fit_consequents(model: AnfisModel, data) -> tuple[AnfisModel, bool]:
    """Least-squares consequents for the current premises.

    Returns the updated copy and whether the system was rank deficient (in
    which case the minimum-norm solution is used).
    """
    a = design_matrix(model, data.inputs)
    theta, _, rank, _ = np.linalg.lstsq(a, data.targets, rcond=None)
    out = model.copy()
    out.consequents = theta.reshape(model.n_rules, model.input_dim + 1)
    return out, bool(rank < a.shape[1])


def mse(model: AnfisModel, data) -> float:
    return float(np.mean((model.predict(data.inputs) - data.targets) ** 2))


def premise_gradient(model: AnfisModel, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of the mean squared error w.r.t. centers and widths."""
    x = model._as_inputs(x)
    y = np.asarray(y, dtype=float)
    wbar, _ = model.normalized_strengths(x)
    f = model.rule_outputs(x)
    pred = np.sum(wbar * f, axis=1)
    # dE/dy_i · ∂y_i/∂w_j · w_j
    g = (2.0 / len(y)) * (pred - y)[:, None] * wbar * (f - pred[:, None])
    dx = x[:, None, :] - model.centers[None, :, :]
    s2 = model.widths**2
    grad_c = np.einsum("nr,nrd->rd", g, dx) / s2
    grad_s = np.einsum("nr,nrd->rd", g, dx * dx) / (s2 * model.widths)
    return grad_c, grad_s


def premise_step(model: AnfisModel, data, config: TrainConfig) -> AnfisModel:
    grad_c, grad_s = premise_gradient(model, data.inputs, data.targets)
    scale = config.learning_rate
    if config.normalize_step:
        norm = np.sqrt(np.sum(grad_c**2) + np.sum(grad_s**2))
        if norm == 0 or not np.isfinite(norm):
            return model.copy()
        scale /= norm
    out = model.copy()
    out.centers = model.centers - scale * grad_c
    out.widths = np.maximum(model.widths - scale * grad_s, WIDTH_FLOOR)
    return out


def train(model: AnfisModel, train_data, config: TrainConfig = TrainConfig(), validation=None):
    """Hybrid training; returns ``(trained copy, TrainTrace)``.

    Epoch e solves the consequents by least squares for the current
    premises, then takes one gradient step on the premises. The model
    recorded for an epoch pairs the stepped premises with their own
    least-squares consequents; that solve doubles as step 1 of the next
    epoch, so the consequents of the returned model are always optimal for
    its premises. The trace holds the training MSE of each recorded model
    and, when ``validation`` is given, the matching validation MSE.
    """
    if len(train_data) == 0:
        raise InputError("training set is empty")
    trace = TrainTrace()
    current, deficient = fit_consequents(model, train_data)
    for epoch in range(1, config.epochs + 1):
        if deficient:
            trace.rank_deficient_epochs.append(epoch)
        stepped = premise_step(current, train_data, config)
        current, deficient = fit_consequents(stepped, train_data)
        loss = mse(current, train_data)
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite training MSE at epoch {epoch}")
        trace.train_mse.append(loss)
        if validation is not None:
            trace.validation_mse.append(mse(current, validation))
    return current, trace


# --------------------------------------------------------------------------- #
# Persistence

def to_fields(model: AnfisModel) -> dict:
    return {
        "input_dim": model.input_dim,
        "rules": [
            {"centers": r.centers, "widths": r.widths, "consequent": r.consequent}
            for r in model.rules
        ],
    }


def save(model: AnfisModel, path):
    return modelfile.write(path, MODEL_KIND, to_fields(model))


def load(path) -> AnfisModel:
    record = modelfile.read(path, MODEL_KIND, required=("input_dim", "rules"))
    try:
        rules = record["rules"]
        model = AnfisModel(
            [r["centers"] for r in rules],
            [r["widths"] for r in rules],
            [r["consequent"] for r in rules],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"{path}: malformed rule array ({exc})") from exc
    if model.input_dim != record["input_dim"]:
        raise ModelFileError(f"{path}: input_dim {record['input_dim']} does not match the rules")
    return model
