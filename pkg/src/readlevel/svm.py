"""Linear SVM with one-vs-one multiclass voting.

The binary trainer solves the soft-margin primal

    min_w,b  0.5*||w||^2 + C * sum_i max(0, 1 - y_i (w.x_i + b))

through its dual with an SMO-style solver: each outer iteration picks the
maximal violating pair of dual coordinates and solves the two-variable
subproblem exactly, which keeps the equality constraint from the
unregularized bias satisfied and makes the dual objective non-increasing.
Selection is deterministic, so training is reproducible by construction.

Multiclass models train one binary per ordered label pair (low label is the
negative class) on standardized features and predict by majority vote with
ties broken toward the smallest label.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .data import DataError, Dataset
from .features import FeatureVector

UNCERTAINTY_METHODS = ("min", "mean", "vote_margin")
UNAVAILABLE_POLICIES = ("error", "zero")


class TrainingError(ValueError):
    """Raised for invalid training inputs or configurations."""


@dataclass(frozen=True)
class TrainConfig:
    C: float = 1.0
    tolerance: float = 1e-4
    max_iterations: int = 10000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.C <= 0:
            raise TrainingError("C must be positive")
        if self.tolerance <= 0:
            raise TrainingError("tolerance must be positive")
        if self.max_iterations < 1:
            raise TrainingError("max_iterations must be at least 1")


@dataclass(frozen=True)
class ScalingParams:
    means: np.ndarray
    stds: np.ndarray
    constant_mask: np.ndarray

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        return standardize_apply(matrix, self)


@dataclass(frozen=True)
class TrainState:
    alphas: np.ndarray
    objective_trace: tuple[float, ...]
    converged: bool
    iterations: int


@dataclass(frozen=True)
class BinaryModel:
    weights: np.ndarray
    bias: float
    label_pair: tuple[int, int]

    @property
    def weight_norm(self) -> float:
        return float(np.linalg.norm(self.weights))


@dataclass(frozen=True)
class MulticlassModel:
    binaries: tuple[BinaryModel, ...]
    labels: tuple[int, ...]
    scaling: ScalingParams
    feature_names: tuple[str, ...]
    config: TrainConfig = field(default_factory=TrainConfig)

    @property
    def pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(b.label_pair for b in self.binaries)


def standardize_fit(matrix: np.ndarray) -> ScalingParams:
    """Column means and population stds; constant columns are flagged.

    Constancy uses a relative threshold because float accumulation can leave
    a vanishing but nonzero std on repeated identical values.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise TrainingError("expected a 2-D matrix")
    if matrix.shape[0] < 2:
        raise TrainingError("standardization needs at least 2 instances")
    if not np.isfinite(matrix).all():
        raise TrainingError("matrix contains non-finite values")
    means = matrix.mean(axis=0)
    stds = matrix.std(axis=0)
    constant = stds <= 1e-12 * np.maximum(1.0, np.abs(means))
    return ScalingParams(means=means, stds=stds, constant_mask=constant)


def standardize_apply(matrix: np.ndarray, params: ScalingParams) -> np.ndarray:
    """(x - mean) / std per column; constant columns map to 0."""
    matrix = np.asarray(matrix, dtype=float)
    one_row = matrix.ndim == 1
    if one_row:
        matrix = matrix[None, :]
    if matrix.shape[1] != params.means.shape[0]:
        raise TrainingError(
            f"matrix has {matrix.shape[1]} columns, scaling expects "
            f"{params.means.shape[0]}"
        )
    safe = np.where(params.constant_mask, 1.0, params.stds)
    out = (matrix - params.means) / safe
    out[:, params.constant_mask] = 0.0
    return out[0] if one_row else out


def _solve_dual(
    X: np.ndarray, y: np.ndarray, cfg: TrainConfig
) -> tuple[np.ndarray, tuple[float, ...], bool, int]:
    """SMO on the dual; returns (alphas, objective trace, converged, iters)."""
    n = X.shape[0]
    C = cfg.C
    K = X @ X.T
    Q = (y[:, None] * y[None, :]) * K
    alpha = np.zeros(n)
    grad = -np.ones(n)  # Q @ alpha - 1 at alpha = 0
    trace: list[float] = []
    snap = 1e-12 * max(C, 1.0)
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        violations = -(y * grad)  # equals y_i - w.x_i at the current iterate
        up = ((alpha < C) & (y > 0)) | ((alpha > 0) & (y < 0))
        low = ((alpha < C) & (y < 0)) | ((alpha > 0) & (y > 0))
        trace.append(0.5 * float(alpha @ grad - alpha.sum()))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.argmax(np.where(up, violations, -np.inf)))
        j = int(np.argmin(np.where(low, violations, np.inf)))
        gap = violations[i] - violations[j]
        if gap < cfg.tolerance:
            converged = True
            break
        curvature = max(K[i, i] + K[j, j] - 2.0 * K[i, j], 1e-12)
        step = gap / curvature
        # Clip to the box along alpha_i += y_i*t, alpha_j -= y_j*t.
        hi_i = C - alpha[i] if y[i] > 0 else alpha[i]
        hi_j = alpha[j] if y[j] > 0 else C - alpha[j]
        step = max(min(step, hi_i, hi_j), 0.0)
        delta_i = y[i] * step
        delta_j = -y[j] * step
        alpha[i] += delta_i
        alpha[j] += delta_j
        for k in (i, j):
            if alpha[k] < snap:
                alpha[k] = 0.0
            elif alpha[k] > C - snap:
                alpha[k] = C
        grad += Q[:, i] * delta_i + Q[:, j] * delta_j
    trace.append(0.5 * float(alpha @ grad - alpha.sum()))
    return alpha, tuple(trace), converged, iterations


def _bias_from_solution(
    X: np.ndarray, y: np.ndarray, alpha: np.ndarray, w: np.ndarray, C: float
) -> float:
    """Mean of y_i - w.x_i over free support vectors, else KKT midpoint."""
    eps = 1e-8 * max(C, 1.0)
    residual = y - X @ w
    free = (alpha > eps) & (alpha < C - eps)
    if free.any():
        return float(residual[free].mean())
    up = ((alpha < C) & (y > 0)) | ((alpha > 0) & (y < 0))
    low = ((alpha < C) & (y < 0)) | ((alpha > 0) & (y > 0))
    bounds = []
    if up.any():
        bounds.append(float(residual[up].max()))
    if low.any():
        bounds.append(float(residual[low].min()))
    if not bounds:
        return 0.0
    return sum(bounds) / len(bounds)


def train_binary_with_state(
    X: np.ndarray,
    y: Sequence[int] | np.ndarray,
    config: TrainConfig | None = None,
    label_pair: tuple[int, int] = (-1, 1),
) -> tuple[BinaryModel, TrainState]:
    """Train on a standardized matrix with labels in {-1, +1}."""
    cfg = config or TrainConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise TrainingError("expected a 2-D matrix")
    if y.shape != (X.shape[0],):
        raise TrainingError("labels must match matrix rows")
    if not np.isfinite(X).all():
        raise TrainingError("matrix contains non-finite values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise TrainingError("binary labels must be -1 or +1")
    if len(np.unique(y)) < 2:
        raise TrainingError("both classes must be present")
    alpha, trace, converged, iterations = _solve_dual(X, y, cfg)
    w = X.T @ (alpha * y)
    bias = _bias_from_solution(X, y, alpha, w, cfg.C)
    model = BinaryModel(weights=w, bias=bias, label_pair=label_pair)
    state = TrainState(
        alphas=alpha,
        objective_trace=trace,
        converged=converged,
        iterations=iterations,
    )
    return model, state


def train_binary(
    X: np.ndarray,
    y: Sequence[int] | np.ndarray,
    config: TrainConfig | None = None,
    label_pair: tuple[int, int] = (-1, 1),
) -> BinaryModel:
    model, _ = train_binary_with_state(X, y, config, label_pair)
    return model


def primal_objective(
    model: BinaryModel, X: np.ndarray, y: np.ndarray, C: float
) -> float:
    """0.5*||w||^2 + C * sum of hinge losses on standardized inputs."""
    margins = y * (X @ model.weights + model.bias)
    hinge = np.maximum(0.0, 1.0 - margins).sum()
    return float(0.5 * model.weights @ model.weights + C * hinge)


def _check_availability(dataset: Dataset, on_unavailable: str) -> None:
    if on_unavailable not in UNAVAILABLE_POLICIES:
        raise TrainingError(f"unknown unavailable policy: {on_unavailable}")
    if on_unavailable == "error" and dataset.mixed_availability():
        raise TrainingError(
            "mixed availability masks; re-extract with a zero fill policy "
            "or pass on_unavailable='zero'"
        )


def train_multiclass(
    dataset: Dataset,
    config: TrainConfig | None = None,
    on_unavailable: str = "error",
) -> MulticlassModel:
    """One binary per label pair on standardized features."""
    cfg = config or TrainConfig()
    _check_availability(dataset, on_unavailable)
    levels = dataset.level_array()
    labels = tuple(sorted(set(int(v) for v in levels)))
    if len(labels) < 2:
        raise TrainingError("training needs at least 2 distinct labels")
    matrix = dataset.matrix()
    scaling = standardize_fit(matrix)
    X = standardize_apply(matrix, scaling)
    binaries = []
    for idx, la in enumerate(labels):
        for lb in labels[idx + 1 :]:
            mask = (levels == la) | (levels == lb)
            sub_y = np.where(levels[mask] == la, -1.0, 1.0)
            model, _ = train_binary_with_state(
                X[mask], sub_y, cfg, label_pair=(la, lb)
            )
            binaries.append(model)
    return MulticlassModel(
        binaries=tuple(binaries),
        labels=labels,
        scaling=scaling,
        feature_names=dataset.feature_names,
        config=cfg,
    )


def _vector_to_row(
    model: MulticlassModel, x: FeatureVector, on_unavailable: str
) -> np.ndarray:
    if on_unavailable not in UNAVAILABLE_POLICIES:
        raise TrainingError(f"unknown unavailable policy: {on_unavailable}")
    row = np.empty(len(model.feature_names))
    for col, name in enumerate(model.feature_names):
        if name not in x.values:
            raise TrainingError(f"vector is missing feature: {name}")
        if not x.available[name]:
            if on_unavailable == "error":
                raise TrainingError(f"feature unavailable: {name}")
            row[col] = 0.0
        else:
            row[col] = x.values[name]
    return row


def decision_matrix(model: MulticlassModel, X: np.ndarray) -> np.ndarray:
    """Per-pair decision values for raw (unstandardized) rows."""
    Z = standardize_apply(np.asarray(X, dtype=float), model.scaling)
    if Z.ndim == 1:
        Z = Z[None, :]
    W = np.stack([b.weights for b in model.binaries], axis=1)
    biases = np.array([b.bias for b in model.binaries])
    return Z @ W + biases


def decision_values(
    model: MulticlassModel, x: FeatureVector, on_unavailable: str = "zero"
) -> dict[tuple[int, int], float]:
    row = _vector_to_row(model, x, on_unavailable)
    values = decision_matrix(model, row[None, :])[0]
    return {b.label_pair: float(v) for b, v in zip(model.binaries, values)}


def _votes_from_decisions(model: MulticlassModel, decisions: np.ndarray) -> np.ndarray:
    """Vote counts per label; decisions is (n, n_pairs)."""
    n = decisions.shape[0]
    index = {label: i for i, label in enumerate(model.labels)}
    votes = np.zeros((n, len(model.labels)), dtype=int)
    for col, (la, lb) in enumerate(model.pairs):
        positive = decisions[:, col] > 0
        votes[positive, index[lb]] += 1
        votes[~positive, index[la]] += 1
    return votes


def predict_batch(model: MulticlassModel, X: np.ndarray) -> np.ndarray:
    """Majority vote over pairs; ties go to the smallest label."""
    decisions = decision_matrix(model, X)
    votes = _votes_from_decisions(model, decisions)
    # argmax returns the first maximum and labels are sorted ascending.
    winners = np.argmax(votes, axis=1)
    return np.array([model.labels[i] for i in winners], dtype=int)


def predict(
    model: MulticlassModel, x: FeatureVector, on_unavailable: str = "zero"
) -> int:
    row = _vector_to_row(model, x, on_unavailable)
    return int(predict_batch(model, row[None, :])[0])


def uncertainty_batch(
    model: MulticlassModel, X: np.ndarray, method: str = "min"
) -> np.ndarray:
    """Smaller scores mean less certain predictions.

    min and mean aggregate geometric distances |f| / ||w|| across the pair
    hyperplanes; a zero-norm hyperplane contributes distance 0.  vote_margin
    is the winner's vote lead, a coarse integer-valued alternative.
    """
    if method not in UNCERTAINTY_METHODS:
        raise TrainingError(f"unknown uncertainty method: {method}")
    decisions = decision_matrix(model, X)
    if method == "vote_margin":
        votes = _votes_from_decisions(model, decisions)
        ordered = np.sort(votes, axis=1)
        if ordered.shape[1] < 2:
            return np.zeros(decisions.shape[0])
        return (ordered[:, -1] - ordered[:, -2]).astype(float)
    norms = np.array([b.weight_norm for b in model.binaries])
    safe = np.where(norms == 0.0, 1.0, norms)
    distances = np.abs(decisions) / safe
    distances[:, norms == 0.0] = 0.0
    if method == "min":
        return distances.min(axis=1)
    return distances.mean(axis=1)


def uncertainty(
    model: MulticlassModel,
    x: FeatureVector,
    method: str = "min",
    on_unavailable: str = "zero",
) -> float:
    row = _vector_to_row(model, x, on_unavailable)
    return float(uncertainty_batch(model, row[None, :], method)[0])
