"""Cross-validation, confusion matrices, and annotator agreement.

Fold scaling is refit inside each training split so no statistics leak from
held-out instances.  Confusion matrices aggregate over folds, which makes
their row sums equal the gold class counts of the whole dataset.  Reports
carry both the mean of per-fold accuracies and the pooled accuracy from the
aggregated confusion because the two differ when folds are uneven.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Hashable, Sequence

import numpy as np

from .data import DataError, Dataset
from .svm import (
    MulticlassModel,
    TrainConfig,
    TrainingError,
    predict_batch,
    train_multiclass,
)

LANDIS_KOCH_BANDS = (
    "poor",
    "slight",
    "fair",
    "moderate",
    "substantial",
    "almost perfect",
)


class EvaluationError(ValueError):
    """Raised for invalid evaluation inputs or failing folds."""


@dataclass(frozen=True)
class EvalConfig:
    k: int = 10
    seed: int = 0
    stratified: bool = True

    def __post_init__(self) -> None:
        if self.k < 2:
            raise EvaluationError("k must be at least 2")


@dataclass(frozen=True)
class EvaluationReport:
    per_fold_accuracy: tuple[float, ...]
    mean_accuracy: float
    spread: float
    std: float
    pooled_accuracy: float
    confusion: np.ndarray
    label_set: tuple[int, ...]
    config_echo: dict
    predictions: dict[str, int]
    fold_ids: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class AgreementReport:
    kappa: float
    observed_agreement: float
    expected_agreement: float
    band: str
    degenerate: bool = False


def make_folds(dataset: Dataset, cfg: EvalConfig) -> list[list[int]]:
    """Partition instance indices into k folds with a seeded shuffle.

    Stratified mode shuffles within each class and deals across folds with a
    cursor that runs on between classes, keeping every class within one
    instance of even and the fold sizes balanced overall.
    """
    n = len(dataset)
    if cfg.k > n:
        raise EvaluationError(f"k={cfg.k} exceeds instance count {n}")
    rng = np.random.default_rng(cfg.seed)
    folds: list[list[int]] = [[] for _ in range(cfg.k)]
    if cfg.stratified:
        levels = dataset.levels
        if any(level is None for level in levels):
            raise EvaluationError("stratification requires labeled instances")
        by_class: dict[int, list[int]] = {}
        for idx, level in enumerate(levels):
            by_class.setdefault(int(level), []).append(idx)
        cursor = 0
        for level in sorted(by_class):
            members = by_class[level]
            if len(members) < cfg.k:
                raise EvaluationError(
                    f"class {level} has {len(members)} instances, fewer than "
                    f"k={cfg.k}"
                )
            for idx in rng.permutation(members):
                folds[cursor % cfg.k].append(int(idx))
                cursor += 1
    else:
        for pos, idx in enumerate(rng.permutation(n)):
            folds[pos % cfg.k].append(int(idx))
    return [sorted(fold) for fold in folds]


def _evaluate_fold(
    dataset: Dataset,
    fold: list[int],
    train_cfg: TrainConfig,
    on_unavailable: str,
) -> tuple[MulticlassModel, np.ndarray]:
    held = set(fold)
    train_idx = [i for i in range(len(dataset)) if i not in held]
    model = train_multiclass(dataset.subset(train_idx), train_cfg, on_unavailable)
    return model, predict_batch(model, dataset.matrix()[fold])


def cross_validate(
    dataset: Dataset,
    train_cfg: TrainConfig | None = None,
    eval_cfg: EvalConfig | None = None,
    on_unavailable: str = "error",
    jobs: int = 1,
) -> EvaluationReport:
    train_cfg = train_cfg or TrainConfig()
    eval_cfg = eval_cfg or EvalConfig()
    levels = dataset.level_array()
    folds = make_folds(dataset, eval_cfg)
    label_set = tuple(sorted(set(int(v) for v in levels)))
    index = {label: i for i, label in enumerate(label_set)}

    def run(args: tuple[int, list[int]]):
        fold_no, fold = args
        try:
            return _evaluate_fold(dataset, fold, train_cfg, on_unavailable)
        except (TrainingError, DataError) as exc:
            raise EvaluationError(f"fold {fold_no} training failed: {exc}") from exc

    numbered = list(enumerate(folds))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run, numbered))
    else:
        outcomes = [run(item) for item in numbered]

    confusion = np.zeros((len(label_set), len(label_set)), dtype=int)
    per_fold = []
    predictions: dict[str, int] = {}
    for (fold_no, fold), (_, predicted) in zip(numbered, outcomes):
        gold = levels[fold]
        per_fold.append(float(np.mean(predicted == gold)))
        for g, p in zip(gold, predicted):
            confusion[index[int(g)], index[int(p)]] += 1
        for idx, p in zip(fold, predicted):
            predictions[dataset.instances[idx].id] = int(p)

    accuracies = np.array(per_fold)
    return EvaluationReport(
        per_fold_accuracy=tuple(per_fold),
        mean_accuracy=float(accuracies.mean()),
        spread=float(2.0 * accuracies.std()),
        std=float(accuracies.std()),
        pooled_accuracy=accuracy_from_confusion(confusion),
        confusion=confusion,
        label_set=label_set,
        config_echo={"eval": asdict(eval_cfg), "train": asdict(train_cfg)},
        predictions=predictions,
        fold_ids=tuple(
            tuple(dataset.instances[i].id for i in fold) for fold in folds
        ),
    )


def accuracy_from_confusion(confusion) -> float:
    matrix = np.asarray(confusion, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.size == 0:
        raise EvaluationError("confusion matrix must be square and non-empty")
    total = matrix.sum()
    if total == 0:
        raise EvaluationError("confusion matrix has no observations")
    return float(np.trace(matrix) / total)


def cohen_kappa(
    labels_a: Sequence[Hashable], labels_b: Sequence[Hashable]
) -> AgreementReport:
    if len(labels_a) != len(labels_b):
        raise EvaluationError("label sequences differ in length")
    n = len(labels_a)
    if n == 0:
        raise EvaluationError("label sequences are empty")
    observed = sum(a == b for a, b in zip(labels_a, labels_b)) / n
    values = set(labels_a) | set(labels_b)
    expected = 0.0
    for value in values:
        pa = sum(a == value for a in labels_a) / n
        pb = sum(b == value for b in labels_b) / n
        expected += pa * pb
    degenerate = expected >= 1.0 - 1e-12
    if degenerate:
        kappa = 1.0 if observed >= 1.0 - 1e-12 else 0.0
    else:
        kappa = (observed - expected) / (1.0 - expected)
        kappa = min(1.0, max(-1.0, kappa))
    return AgreementReport(
        kappa=kappa,
        observed_agreement=observed,
        expected_agreement=expected,
        band=landis_koch(kappa),
        degenerate=degenerate,
    )


def landis_koch(kappa: float) -> str:
    """Agreement band; boundaries are closed on the upper end."""
    if not -1.0 - 1e-9 <= kappa <= 1.0 + 1e-9:
        raise EvaluationError(f"kappa out of range: {kappa}")
    if kappa < 0.0:
        return "poor"
    if kappa <= 0.20:
        return "slight"
    if kappa <= 0.40:
        return "fair"
    if kappa <= 0.60:
        return "moderate"
    if kappa <= 0.80:
        return "substantial"
    return "almost perfect"
