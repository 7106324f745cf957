"""Feature extraction: readability formulas, the feature registry, and the
per-document extractors with availability masking."""

from .extract import (
    DocumentProfile,
    FeatureConfig,
    FeatureError,
    FeatureVector,
    extract_all,
    extract_category,
    extract_simple_statistics,
)
from .metrics import (
    brunet_index,
    flesch_kincaid_grade,
    flesch_reading_ease,
    honore_statistic,
    incidence,
)
from .registry import (
    CATEGORIES,
    REGISTRY_VERSION,
    SIMPLE_STATISTICS,
    FeatureSpec,
    feature_names,
    feature_registry,
    registry_by_name,
)

__all__ = [
    "CATEGORIES",
    "DocumentProfile",
    "FeatureConfig",
    "FeatureError",
    "FeatureSpec",
    "FeatureVector",
    "REGISTRY_VERSION",
    "SIMPLE_STATISTICS",
    "brunet_index",
    "extract_all",
    "extract_category",
    "extract_simple_statistics",
    "feature_names",
    "feature_registry",
    "flesch_kincaid_grade",
    "flesch_reading_ease",
    "honore_statistic",
    "incidence",
    "registry_by_name",
]
