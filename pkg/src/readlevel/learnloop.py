"""Methodology loops: feature elimination, batch selection, level merging.

merge_levels is guarded by bookkeeping on the dataset: a merge records its
mapping, re-applying the same mapping is a no-op, and applying a different
one is an error.  Without the guard a mapping like 3 -> 2 would cascade on
its own output and silently collapse levels further on repeat application.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .data import Dataset, LabeledInstance
from .evaluation import EvalConfig, cross_validate
from .svm import (
    MulticlassModel,
    TrainConfig,
    train_multiclass,
    uncertainty_batch,
)

STRATEGIES = ("most_uncertain", "most_confident")
MERGE_DOMAIN = (1, 2, 3, 4, 5)


class LearnloopError(ValueError):
    """Raised for invalid loop inputs or inconsistent merge requests."""


@dataclass(frozen=True)
class FeatureRanking:
    elimination_order: tuple[str, ...]
    survivor_set: frozenset[str]

    def __post_init__(self) -> None:
        eliminated = set(self.elimination_order)
        if len(eliminated) != len(self.elimination_order):
            raise LearnloopError("feature eliminated twice")
        if eliminated & self.survivor_set:
            raise LearnloopError("eliminated feature listed as survivor")


@dataclass(frozen=True)
class LevelMapping:
    mapping: Mapping[int, int]

    def __post_init__(self) -> None:
        mapping = dict(self.mapping)
        object.__setattr__(self, "mapping", mapping)
        if set(mapping) != set(MERGE_DOMAIN):
            raise LearnloopError(
                f"mapping must be total on levels {list(MERGE_DOMAIN)}"
            )
        values = [mapping[level] for level in MERGE_DOMAIN]
        if sorted(set(values)) != list(range(1, max(values) + 1)):
            raise LearnloopError("merged labels must be contiguous from 1")
        if any(a > b for a, b in zip(values, values[1:])):
            raise LearnloopError("mapping must preserve level order")

    @property
    def is_identity(self) -> bool:
        return all(self.mapping[level] == level for level in MERGE_DOMAIN)


@dataclass(frozen=True)
class SelectionBatch:
    document_ids: tuple[str, ...]
    scores: tuple[float, ...]
    strategy: str
    truncated: bool = False

    def __post_init__(self) -> None:
        if len(self.document_ids) != len(set(self.document_ids)):
            raise LearnloopError("batch ids must be unique")
        if len(self.document_ids) != len(self.scores):
            raise LearnloopError("ids and scores must align")


@dataclass(frozen=True)
class ALStepRecord:
    step: int
    labeled_size: int
    mean_accuracy: float
    spread: float
    selected_ids: tuple[str, ...] = ()
    dropped: int = 0


@dataclass(frozen=True)
class ALRunReport:
    records: tuple[ALStepRecord, ...]
    aborted: str | None = None


def rfe(
    dataset: Dataset,
    train_cfg: TrainConfig | None = None,
    target_count: int = 1,
    step: int = 1,
    on_unavailable: str = "error",
) -> FeatureRanking:
    """Recursive feature elimination down to target_count survivors.

    Each round retrains the multiclass model (scaling included) on the
    surviving features and scores every feature by the sum over binary
    models of its squared standardized weight.  The `step` lowest-scored
    features are dropped, clamped so the final round lands exactly on
    target_count.  Score ties break toward the earlier column, which makes
    the whole procedure deterministic.
    """
    train_cfg = train_cfg or TrainConfig()
    n = len(dataset.feature_names)
    if not 1 <= target_count <= n:
        raise LearnloopError(
            f"target_count must be between 1 and {n}, got {target_count}"
        )
    if step < 1:
        raise LearnloopError("step must be a positive integer")
    eliminated: list[str] = []
    current = dataset
    while len(current.feature_names) > target_count:
        model = train_multiclass(current, train_cfg, on_unavailable)
        weights = np.stack([b.weights for b in model.binaries])
        scores = (weights**2).sum(axis=0)
        n_out = min(step, len(current.feature_names) - target_count)
        order = np.argsort(scores, kind="stable")
        dropping = [current.feature_names[int(i)] for i in order[:n_out]]
        eliminated.extend(dropping)
        gone = set(dropping)
        current = current.restrict(
            [name for name in current.feature_names if name not in gone]
        )
    return FeatureRanking(
        elimination_order=tuple(eliminated),
        survivor_set=frozenset(current.feature_names),
    )


def select_batch(
    model: MulticlassModel,
    pool: Dataset,
    k: int,
    strategy: str,
    method: str = "min",
) -> SelectionBatch:
    """Rank the pool by uncertainty and take the top k for the strategy.

    most_uncertain takes the k smallest scores, most_confident the k
    largest; equal scores break toward the smaller document id.  Asking for
    more than the pool holds returns the whole pool with truncated set.
    """
    if strategy not in STRATEGIES:
        raise LearnloopError(f"unknown strategy: {strategy}")
    if len(pool) == 0:
        raise LearnloopError("pool is empty")
    if k < 1:
        raise LearnloopError("k must be a positive integer")
    scores = uncertainty_batch(model, pool.matrix(), method)
    items = list(zip(pool.ids, (float(s) for s in scores)))
    if strategy == "most_uncertain":
        items.sort(key=lambda item: (item[1], item[0]))
    else:
        items.sort(key=lambda item: (-item[1], item[0]))
    truncated = k > len(items)
    chosen = items[: min(k, len(items))]
    return SelectionBatch(
        document_ids=tuple(doc_id for doc_id, _ in chosen),
        scores=tuple(score for _, score in chosen),
        strategy=strategy,
        truncated=truncated,
    )


def merge_levels(dataset: Dataset, mapping: LevelMapping) -> Dataset:
    """Relabel instances through the mapping; features stay untouched.

    Unlabeled instances pass through.  A dataset remembers the mapping that
    produced it: re-merging with the same mapping returns it unchanged and
    merging with a different one is an error.
    """
    if not isinstance(mapping, LevelMapping):
        mapping = LevelMapping(mapping)
    if mapping.is_identity:
        return dataset
    target = dict(mapping.mapping)
    if dataset.level_mapping is not None:
        if dict(dataset.level_mapping) == target:
            return dataset
        raise LearnloopError(
            "dataset was already merged with a different mapping"
        )
    merged = []
    for inst in dataset.instances:
        if inst.level is None:
            merged.append(inst)
            continue
        if inst.level not in target:
            raise LearnloopError(
                f"instance {inst.id}: level {inst.level} outside mapping domain"
            )
        merged.append(
            LabeledInstance(
                id=inst.id,
                vector=inst.vector,
                level=target[inst.level],
                source=inst.source,
            )
        )
    return Dataset(
        instances=tuple(merged),
        feature_names=dataset.feature_names,
        level_mapping=target,
    )


def active_learning_run(
    labeled: Dataset,
    pool: Dataset,
    oracle: Callable[[str], int | None],
    steps: int,
    k: int,
    eval_cfg: EvalConfig | None = None,
    train_cfg: TrainConfig | None = None,
    method: str = "min",
    on_unavailable: str = "error",
    jobs: int = 1,
) -> ALRunReport:
    """Uncertainty-sampling loop with a labeling callback.

    Per step: train on the current labeled set, pick the k most uncertain
    pool documents, ask the oracle for their levels, fold them in, and
    cross-validate.  An oracle answer of None drops the document (counted
    in the step record); an oracle exception aborts the run but preserves
    the records gathered so far.  Step 0 always evaluates the initial set.
    """
    eval_cfg = eval_cfg or EvalConfig()
    train_cfg = train_cfg or TrainConfig()
    if steps < 0:
        raise LearnloopError("steps must be non-negative")
    if pool.feature_names != labeled.feature_names:
        raise LearnloopError("pool and labeled set use different features")
    overlap = set(labeled.ids) & set(pool.ids)
    if overlap:
        raise LearnloopError(f"pool overlaps labeled set: {sorted(overlap)[:5]}")

    def evaluate(ds: Dataset, step: int, selected=(), dropped=0) -> ALStepRecord:
        report = cross_validate(ds, train_cfg, eval_cfg, on_unavailable, jobs)
        return ALStepRecord(
            step=step,
            labeled_size=len(ds),
            mean_accuracy=report.mean_accuracy,
            spread=report.spread,
            selected_ids=tuple(selected),
            dropped=dropped,
        )

    records = [evaluate(labeled, 0)]
    aborted = None
    for step in range(1, steps + 1):
        if len(pool) == 0:
            break
        model = train_multiclass(labeled, train_cfg, on_unavailable)
        batch = select_batch(model, pool, k, "most_uncertain", method)
        labels: dict[str, int | None] = {}
        try:
            for doc_id in batch.document_ids:
                answer = oracle(doc_id)
                if answer is not None and (
                    not isinstance(answer, int) or answer < 1
                ):
                    raise LearnloopError(
                        f"oracle returned invalid level {answer!r} for {doc_id}"
                    )
                labels[doc_id] = answer
        except Exception as exc:
            aborted = f"step {step}: {exc}"
            break
        by_id = {inst.id: inst for inst in pool.instances}
        incoming = [
            LabeledInstance(
                id=doc_id,
                vector=by_id[doc_id].vector,
                level=labels[doc_id],
                source=by_id[doc_id].source,
            )
            for doc_id in batch.document_ids
            if labels[doc_id] is not None
        ]
        dropped = sum(1 for v in labels.values() if v is None)
        labeled = labeled.with_instances(incoming)
        selected = set(batch.document_ids)
        pool = pool.subset(
            [i for i, inst in enumerate(pool.instances) if inst.id not in selected]
        )
        records.append(
            evaluate(labeled, step, batch.document_ids, dropped)
        )
    return ALRunReport(records=tuple(records), aborted=aborted)
