"""Labeled/unlabeled instance collections behind training and evaluation.

A Dataset is an immutable bag of (id, feature vector, optional level,
source) rows sharing one feature-name tuple.  Datasets remember the level
mapping applied to them so a merge is traceable and repeat merges are safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .features import FeatureVector


class DataError(ValueError):
    """Raised for malformed or inconsistent instance collections."""


@dataclass(frozen=True)
class LabeledInstance:
    id: str
    vector: FeatureVector
    level: int | None = None
    source: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise DataError("instance id must be non-empty")
        if self.level is not None and (
            not isinstance(self.level, int) or self.level < 1
        ):
            raise DataError(f"instance {self.id}: level must be a positive integer")


@dataclass(frozen=True)
class Dataset:
    instances: tuple[LabeledInstance, ...]
    feature_names: tuple[str, ...]
    level_mapping: Mapping[int, int] | None = None

    def __post_init__(self) -> None:
        if not self.feature_names:
            raise DataError("feature_names must be non-empty")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DataError("duplicate feature names")
        seen: set[str] = set()
        for inst in self.instances:
            if inst.id in seen:
                raise DataError(f"duplicate instance id: {inst.id}")
            seen.add(inst.id)
            if inst.vector.names != self.feature_names:
                raise DataError(
                    f"instance {inst.id}: features disagree with dataset"
                )
        if self.level_mapping is not None:
            object.__setattr__(
                self, "level_mapping", dict(self.level_mapping)
            )

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(inst.id for inst in self.instances)

    @property
    def levels(self) -> tuple[int | None, ...]:
        return tuple(inst.level for inst in self.instances)

    def matrix(self) -> np.ndarray:
        """Instance-by-feature value matrix in feature_names order."""
        return np.array(
            [
                [inst.vector.values[name] for name in self.feature_names]
                for inst in self.instances
            ],
            dtype=float,
        )

    def level_array(self) -> np.ndarray:
        missing = [inst.id for inst in self.instances if inst.level is None]
        if missing:
            raise DataError(f"unlabeled instances: {missing[:5]}")
        return np.array([inst.level for inst in self.instances], dtype=int)

    def level_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for inst in self.instances:
            if inst.level is not None:
                counts[inst.level] = counts.get(inst.level, 0) + 1
        return dict(sorted(counts.items()))

    def mixed_availability(self) -> bool:
        """True when availability masks differ across instances."""
        masks = {
            tuple(inst.vector.available[n] for n in self.feature_names)
            for inst in self.instances
        }
        return len(masks) > 1

    def restrict(self, names: Iterable[str]) -> "Dataset":
        names = tuple(names)
        return Dataset(
            instances=tuple(
                LabeledInstance(
                    id=inst.id,
                    vector=inst.vector.restrict(names),
                    level=inst.level,
                    source=inst.source,
                )
                for inst in self.instances
            ),
            feature_names=names,
            level_mapping=self.level_mapping,
        )

    def subset(self, indices: Iterable[int]) -> "Dataset":
        picked = tuple(self.instances[i] for i in indices)
        return Dataset(
            instances=picked,
            feature_names=self.feature_names,
            level_mapping=self.level_mapping,
        )

    def with_instances(self, extra: Iterable[LabeledInstance]) -> "Dataset":
        return Dataset(
            instances=self.instances + tuple(extra),
            feature_names=self.feature_names,
            level_mapping=self.level_mapping,
        )


def dataset_from_rows(
    rows: Iterable[tuple[str, dict[str, float], int | None, str]],
    feature_names: Iterable[str],
    available: dict[str, dict[str, bool]] | None = None,
) -> Dataset:
    """Convenience builder from plain dict rows (used by IO and tests)."""
    names = tuple(feature_names)
    instances = []
    for doc_id, values, level, source in rows:
        mask = (available or {}).get(doc_id)
        vector = FeatureVector(
            values={n: float(values[n]) for n in names},
            available={n: (mask[n] if mask else True) for n in names},
        )
        instances.append(
            LabeledInstance(id=doc_id, vector=vector, level=level, source=source)
        )
    return Dataset(instances=tuple(instances), feature_names=names)
