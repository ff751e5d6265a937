"""
Fuzzy c-means clustering and the cluster-count sweep.

Standard alternating optimisation of the objective

    J(U, V) = Σ_j Σ_i u_ji^m ‖x_i − v_j‖²,   Σ_j u_ji = 1

with the membership update u_ji = 1 / Σ_k (d_ji / d_ki)^(2/(m−1)) and the
center update v_j = Σ_i u_ji^m x_i / Σ_i u_ji^m. A point that coincides
with one or more centers gets its whole membership split evenly among them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DegenerateDataError, DomainError, InputError


@dataclass
class FcmResult:
    """Outcome of one FCM run.

    ``centers`` has shape ``(c, d)`` in the units of the input points,
    ``membership`` shape ``(c, n)``. When the run used ``standardize=True``
    the objective refers to the z-scored coordinates while the centers have
    been mapped back to input units.
    """

    centers: np.ndarray
    membership: np.ndarray
    fuzzifier: float
    objective: float
    objective_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    standardized: bool = False


def _memberships(d2: np.ndarray, fuzzifier: float) -> np.ndarray:
    zero = d2 <= 0.0
    hit = zero.any(axis=0)
    with np.errstate(divide="ignore"):
        inv = np.where(zero, 0.0, d2) ** (-1.0 / (fuzzifier - 1.0))
    inv[zero] = 0.0
    # scale by the column max before normalising so tiny distances cannot overflow
    inv[:, ~hit] /= inv[:, ~hit].max(axis=0)
    u = np.empty_like(d2)
    u[:, ~hit] = inv[:, ~hit] / inv[:, ~hit].sum(axis=0)
    if hit.any():
        u[:, hit] = zero[:, hit] / zero[:, hit].sum(axis=0)
    return u


def _sq_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = points[None, :, :] - centers[:, None, :]
    return np.einsum("cnd,cnd->cn", diff, diff)


def _update_centers(points: np.ndarray, u: np.ndarray, fuzzifier: float) -> np.ndarray:
    um = u**fuzzifier
    return (um @ points) / um.sum(axis=1, keepdims=True)


def _objective(points, centers, u, fuzzifier) -> float:
    return float(np.sum(u**fuzzifier * _sq_distances(points, centers)))


def cluster(
    points,
    c: int,
    fuzzifier: float = 2.0,
    tol: float = 1e-6,
    max_iter: int = 300,
    seed: int = 0,
    *,
    standardize: bool = False,
) -> FcmResult:
    """Fuzzy c-means on an ``(n, d)`` point array.

    Centers start at ``c`` distinct data points drawn with the seeded
    generator. Iteration stops when the relative objective change drops
    below ``tol`` or after ``max_iter`` center updates. The memberships
    returned correspond to the returned centers.

    With ``standardize=True`` clustering runs on per-dimension z-scores so
    that no input dominates the distance through its units alone.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or not np.all(np.isfinite(x)):
        raise InputError("points must be a finite (n, d) array")
    n = x.shape[0]
    if c < 2:
        raise DomainError(f"cluster count must be >= 2, got {c}")
    if fuzzifier <= 1:
        raise DomainError(f"fuzzifier must be > 1, got {fuzzifier}")
    if c > n:
        raise InputError(f"cluster count {c} exceeds the {n} points")
    distinct = np.unique(x, axis=0)
    if len(distinct) == 1:
        raise DegenerateDataError("all points are identical; nothing to cluster")
    if c > len(distinct):
        raise InputError(f"cluster count {c} exceeds the {len(distinct)} distinct points")

    if standardize:
        mean = x.mean(axis=0)
        scale = x.std(axis=0)
        scale[scale == 0] = 1.0
        work = (x - mean) / scale
    else:
        work = x

    # seeded choice of c distinct rows; ties in np.unique order are resolved by first occurrence
    _, first = np.unique(work, axis=0, return_index=True)
    first = np.sort(first)
    rng = np.random.default_rng(seed)
    centers = work[rng.choice(first, size=c, replace=False)].copy()

    trace = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        u = _memberships(_sq_distances(work, centers), fuzzifier)
        centers = _update_centers(work, u, fuzzifier)
        trace.append(_objective(work, centers, u, fuzzifier))
        if len(trace) > 1 and abs(trace[-2] - trace[-1]) <= tol * abs(trace[-2]):
            converged = True
            break
    u = _memberships(_sq_distances(work, centers), fuzzifier)
    trace.append(_objective(work, centers, u, fuzzifier))

    if standardize:
        centers = centers * scale + mean
    return FcmResult(centers, u, float(fuzzifier), trace[-1], trace, it, converged, standardize)


# --------------------------------------------------------------------------- #
# Cluster-count sweep

@dataclass
class SweepResult:
    rows: list[tuple[int, float, float]]
    recommended: int
    threshold: float

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["c", "train_mse", "test_mse"])
            for c, tr, te in self.rows:
                writer.writerow([c, repr(tr), repr(te)])


def recommend_clusters(rows, threshold: float = 0.02, floor: float = 0.0) -> int:
    """Smallest c after which one more cluster improves test MSE by < ``threshold``.

    Improvements are relative to the current test MSE; once the MSE is at or
    below ``floor`` any further change counts as no improvement.
    """
    if not rows:
        raise InputError("empty sweep table")
    for (c, _, mse), (_, _, mse_next) in zip(rows, rows[1:]):
        if mse <= floor or (mse - mse_next) < threshold * mse:
            return int(c)
    return int(rows[-1][0])


def cluster_sweep(
    train,
    test,
    c_range,
    seed: int = 0,
    *,
    threshold: float = 0.02,
    fuzzifier: float = 2.0,
    learning_rate: float = 1e-2,
    standardize: bool = True,
) -> SweepResult:
    """Train a one-epoch ANFIS for each cluster count and tabulate the MSEs.

    ``c_range`` is an inclusive ``(c_min, c_max)`` pair.
    """
    from . import anfis

    c_min, c_max = (int(v) for v in c_range)
    if c_min < 2 or c_max < c_min or c_max > len(train):
        raise DomainError(f"cluster range [{c_min}, {c_max}] must lie within [2, {len(train)}]")
    config = anfis.TrainConfig(epochs=1, learning_rate=learning_rate, seed=seed)
    rows = []
    for c in range(c_min, c_max + 1):
        model = anfis.build(train, c, seed=seed, fuzzifier=fuzzifier, standardize=standardize)
        model, trace = anfis.train(model, train, config)
        test_mse = float(np.mean((model.predict(test.inputs) - test.targets) ** 2))
        rows.append((c, trace.train_mse[-1], test_mse))
    floor = 1e-12 * float(np.var(test.targets)) if len(test) > 1 else 0.0
    return SweepResult(rows, recommend_clusters(rows, threshold, floor), threshold)
