"""Corpus ingestion, matrix export, and model/report persistence.

Formats (all documented in FORMATS.md):
- corpus: UTF-8 JSON lines, one record per line, text or token annotations;
- feature matrix: CSV with header id,level,source,<features>,unavailable,
  floats serialized with repr so round-trips are exact; a merged dataset
  writes its level mapping to a ``<path>.meta.json`` sidecar;
- models and reports: versioned JSON documents (sorted keys, 2-space
  indent), so saving a loaded file reproduces it byte for byte.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .data import Dataset, LabeledInstance
from .evaluation import AgreementReport, EvaluationReport, landis_koch
from .features import FeatureVector, feature_names as registry_feature_names
from .learnloop import ALRunReport, ALStepRecord, FeatureRanking, SelectionBatch
from .svm import BinaryModel, MulticlassModel, ScalingParams, TrainConfig
from .textmodel import AnnotatedDocument, DocumentError, build_document_from_records
from .textmodel import build_document_from_text

MODEL_FORMAT = "readlevel-model/1"
REPORT_FORMAT = "readlevel-report/1"
ALRUN_FORMAT = "readlevel-alrun/1"
RANKING_FORMAT = "readlevel-ranking/1"
BATCH_FORMAT = "readlevel-batch/1"
AGREEMENT_FORMAT = "readlevel-agreement/1"
MATRIX_META_FORMAT = "readlevel-matrix-meta/1"

LEVEL_RANGE = (1, 2, 3, 4, 5)


class CorpusIOError(ValueError):
    """Raised for malformed files and failed round-trips."""


# --------------------------------------------------------------------------
# Corpus records
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    source: str = ""
    level: int | None = None
    text: str | None = None
    tokens: tuple[Mapping, ...] | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusIOError("record id must be non-empty")
        if (self.text is None) == (self.tokens is None):
            raise CorpusIOError("ambiguous record: exactly one of text/tokens")
        if self.level is not None and self.level not in LEVEL_RANGE:
            raise CorpusIOError(
                f"level must be in {list(LEVEL_RANGE)}, got {self.level}"
            )


@dataclass(frozen=True)
class CorpusReadResult:
    records: tuple[CorpusRecord, ...]
    skipped: tuple[tuple[int, str], ...] = ()


def _record_from_obj(obj, line_no: int) -> CorpusRecord:
    if not isinstance(obj, dict):
        raise CorpusIOError(f"line {line_no}: record must be an object")
    known = {"id", "source", "level", "text", "tokens"}
    unknown = set(obj) - known
    if unknown:
        raise CorpusIOError(
            f"line {line_no}: unknown record fields {sorted(unknown)}"
        )
    level = obj.get("level")
    if level is not None and not isinstance(level, int):
        raise CorpusIOError(f"line {line_no}: level must be an integer")
    tokens = obj.get("tokens")
    if tokens is not None:
        if not isinstance(tokens, list) or not all(
            isinstance(t, dict) for t in tokens
        ):
            raise CorpusIOError(f"line {line_no}: tokens must be objects")
        tokens = tuple(tokens)
    try:
        return CorpusRecord(
            id=str(obj.get("id", "")),
            source=str(obj.get("source", "") or ""),
            level=level,
            text=obj.get("text"),
            tokens=tokens,
        )
    except CorpusIOError as exc:
        raise CorpusIOError(f"line {line_no}: {exc}") from None


def read_corpus(path, strict: bool = True) -> CorpusReadResult:
    """One JSON record per line; blank lines are ignored.

    Strict mode aborts on the first malformed line; lenient mode skips and
    returns (line number, reason) pairs alongside the good records.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusIOError(f"corpus file not found: {path}")
    records: list[CorpusRecord] = []
    skipped: list[tuple[int, str]] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                problem = f"line {line_no}: invalid JSON ({exc.msg})"
                if strict:
                    raise CorpusIOError(problem) from None
                skipped.append((line_no, problem))
                continue
            try:
                record = _record_from_obj(obj, line_no)
                if record.id in seen_ids:
                    raise CorpusIOError(
                        f"line {line_no}: duplicate id {record.id!r}"
                    )
            except CorpusIOError as exc:
                if strict:
                    raise
                skipped.append((line_no, str(exc)))
                continue
            seen_ids.add(record.id)
            records.append(record)
    if not records:
        raise CorpusIOError(f"no valid records in {path}")
    return CorpusReadResult(records=tuple(records), skipped=tuple(skipped))


def document_from_record(record: CorpusRecord) -> AnnotatedDocument:
    if record.text is not None:
        return build_document_from_text(record.text, record.id, record.source)
    return build_document_from_records(record.tokens, record.id, record.source)


# --------------------------------------------------------------------------
# Feature matrices
# --------------------------------------------------------------------------


def _meta_path(path) -> Path:
    return Path(str(path) + ".meta.json")


def write_feature_matrix(dataset: Dataset, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "level", "source", *dataset.feature_names, "unavailable"])
        for inst in dataset.instances:
            unavailable = ";".join(
                n for n in dataset.feature_names if not inst.vector.available[n]
            )
            writer.writerow(
                [
                    inst.id,
                    "" if inst.level is None else inst.level,
                    inst.source,
                    *(repr(inst.vector.values[n]) for n in dataset.feature_names),
                    unavailable,
                ]
            )
    meta = _meta_path(path)
    if dataset.level_mapping is not None:
        meta.write_text(
            json.dumps(
                {
                    "format": MATRIX_META_FORMAT,
                    "level_mapping": {
                        str(k): v for k, v in dataset.level_mapping.items()
                    },
                },
                indent=2,
                sort_keys=True,
            )
            + "\n",
            encoding="utf-8",
        )
    elif meta.exists():
        meta.unlink()


def _load_matrix_meta(path) -> dict[int, int] | None:
    meta = _meta_path(path)
    if not meta.exists():
        return None
    try:
        obj = json.loads(meta.read_text(encoding="utf-8"))
        if obj.get("format") != MATRIX_META_FORMAT:
            raise CorpusIOError(
                f"unsupported matrix metadata format in {meta}"
            )
        return {int(k): int(v) for k, v in obj["level_mapping"].items()}
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, CorpusIOError):
            raise
        raise CorpusIOError(f"corrupt matrix metadata: {meta}") from exc


def read_feature_matrix(path, allow_subset: bool = False) -> Dataset:
    """Read a matrix back; column names must come from the feature registry.

    The full registry in registry order is expected; pass allow_subset for
    matrices restricted by feature elimination.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusIOError(f"matrix file not found: {path}")
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusIOError(f"empty matrix file: {path}") from None
        if (
            len(header) < 4
            or header[:3] != ["id", "level", "source"]
            or header[-1] != "unavailable"
        ):
            raise CorpusIOError(
                "matrix header must be id,level,source,<features>,unavailable"
            )
        names = tuple(header[3:-1])
        if not names:
            raise CorpusIOError("matrix has no feature columns")
        registry = registry_feature_names()
        unknown = [n for n in names if n not in set(registry)]
        if unknown:
            raise CorpusIOError(f"unknown feature columns: {unknown}")
        if len(set(names)) != len(names):
            raise CorpusIOError("duplicate feature columns")
        if names != registry and not allow_subset:
            raise CorpusIOError(
                "matrix features do not match the full registry; "
                "pass allow_subset for restricted matrices"
            )
        instances = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CorpusIOError(
                    f"line {line_no}: expected {len(header)} fields, got {len(row)}"
                )
            doc_id, level_text, source = row[0], row[1], row[2]
            try:
                level = int(level_text) if level_text else None
            except ValueError:
                raise CorpusIOError(
                    f"line {line_no}: bad level {level_text!r}"
                ) from None
            try:
                values = {n: float(v) for n, v in zip(names, row[3:-1])}
            except ValueError:
                raise CorpusIOError(f"line {line_no}: non-numeric value") from None
            off = {n for n in row[-1].split(";") if n}
            bad = off - set(names)
            if bad:
                raise CorpusIOError(
                    f"line {line_no}: unavailable lists unknown features {sorted(bad)}"
                )
            vector = FeatureVector(
                values=values,
                available={n: n not in off for n in names},
            )
            instances.append(
                LabeledInstance(id=doc_id, vector=vector, level=level, source=source)
            )
    if not instances:
        raise CorpusIOError(f"matrix has no data rows: {path}")
    return Dataset(
        instances=tuple(instances),
        feature_names=names,
        level_mapping=_load_matrix_meta(path),
    )


# --------------------------------------------------------------------------
# Models
# --------------------------------------------------------------------------


def _dump_json(obj, path) -> None:
    Path(path).write_text(
        json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _read_json(path, what: str) -> dict:
    path = Path(path)
    if not path.exists():
        raise CorpusIOError(f"{what} file not found: {path}")
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorpusIOError(f"corrupt {what} file: {path} ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise CorpusIOError(f"corrupt {what} file: {path} (not an object)")
    return obj


def save_model(model: MulticlassModel, path) -> None:
    _dump_json(
        {
            "format": MODEL_FORMAT,
            "labels": list(model.labels),
            "feature_names": list(model.feature_names),
            "scaling": {
                "means": [float(v) for v in model.scaling.means],
                "stds": [float(v) for v in model.scaling.stds],
                "constant_mask": [bool(v) for v in model.scaling.constant_mask],
            },
            "binaries": [
                {
                    "label_pair": list(b.label_pair),
                    "weights": [float(v) for v in b.weights],
                    "bias": float(b.bias),
                }
                for b in model.binaries
            ],
            "train_config": {
                "C": model.config.C,
                "tolerance": model.config.tolerance,
                "max_iterations": model.config.max_iterations,
                "seed": model.config.seed,
            },
        },
        path,
    )


def load_model(path) -> MulticlassModel:
    obj = _read_json(path, "model")
    if obj.get("format") != MODEL_FORMAT:
        raise CorpusIOError(
            f"unsupported model format: {obj.get('format')!r}, "
            f"expected {MODEL_FORMAT!r}"
        )
    try:
        labels = tuple(int(v) for v in obj["labels"])
        names = tuple(str(n) for n in obj["feature_names"])
        scaling = ScalingParams(
            means=np.array(obj["scaling"]["means"], dtype=float),
            stds=np.array(obj["scaling"]["stds"], dtype=float),
            constant_mask=np.array(obj["scaling"]["constant_mask"], dtype=bool),
        )
        binaries = tuple(
            BinaryModel(
                weights=np.array(b["weights"], dtype=float),
                bias=float(b["bias"]),
                label_pair=(int(b["label_pair"][0]), int(b["label_pair"][1])),
            )
            for b in obj["binaries"]
        )
        cfg = TrainConfig(**obj["train_config"])
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorpusIOError(f"corrupt model file: {path} ({exc})") from None
    d = len(names)
    if any(arr.shape != (d,) for arr in (scaling.means, scaling.stds, scaling.constant_mask)):
        raise CorpusIOError("model dimension mismatch: scaling vs feature names")
    if any(b.weights.shape != (d,) for b in binaries):
        raise CorpusIOError("model dimension mismatch: weights vs feature names")
    if list(labels) != sorted(set(labels)) or len(labels) < 2:
        raise CorpusIOError("model labels must be distinct and ascending")
    expected_pairs = [
        (la, lb) for i, la in enumerate(labels) for lb in labels[i + 1 :]
    ]
    if [b.label_pair for b in binaries] != expected_pairs:
        raise CorpusIOError("model binaries do not cover the label pairs")
    return MulticlassModel(
        binaries=binaries,
        labels=labels,
        scaling=scaling,
        feature_names=names,
        config=cfg,
    )


# --------------------------------------------------------------------------
# Reports
# --------------------------------------------------------------------------


def save_report(report, path) -> None:
    if isinstance(report, EvaluationReport):
        obj = {
            "format": REPORT_FORMAT,
            "per_fold_accuracy": list(report.per_fold_accuracy),
            "mean_accuracy": report.mean_accuracy,
            "spread": report.spread,
            "std": report.std,
            "pooled_accuracy": report.pooled_accuracy,
            "confusion": [[int(v) for v in row] for row in report.confusion],
            "label_set": list(report.label_set),
            "config_echo": report.config_echo,
            "predictions": report.predictions,
            "fold_ids": [list(ids) for ids in report.fold_ids],
        }
    elif isinstance(report, ALRunReport):
        obj = {
            "format": ALRUN_FORMAT,
            "records": [
                {
                    "step": r.step,
                    "labeled_size": r.labeled_size,
                    "mean_accuracy": r.mean_accuracy,
                    "spread": r.spread,
                    "selected_ids": list(r.selected_ids),
                    "dropped": r.dropped,
                }
                for r in report.records
            ],
            "aborted": report.aborted,
        }
    elif isinstance(report, FeatureRanking):
        obj = {
            "format": RANKING_FORMAT,
            "elimination_order": list(report.elimination_order),
            "survivors": sorted(report.survivor_set),
        }
    elif isinstance(report, SelectionBatch):
        obj = {
            "format": BATCH_FORMAT,
            "document_ids": list(report.document_ids),
            "scores": list(report.scores),
            "strategy": report.strategy,
            "truncated": report.truncated,
        }
    elif isinstance(report, AgreementReport):
        obj = {
            "format": AGREEMENT_FORMAT,
            "kappa": report.kappa,
            "observed_agreement": report.observed_agreement,
            "expected_agreement": report.expected_agreement,
            "band": report.band,
            "degenerate": report.degenerate,
        }
    else:
        raise CorpusIOError(f"no serializer for {type(report).__name__}")
    _dump_json(obj, path)


def load_report(path):
    obj = _read_json(path, "report")
    fmt = obj.get("format")
    try:
        if fmt == REPORT_FORMAT:
            return EvaluationReport(
                per_fold_accuracy=tuple(obj["per_fold_accuracy"]),
                mean_accuracy=float(obj["mean_accuracy"]),
                spread=float(obj["spread"]),
                std=float(obj["std"]),
                pooled_accuracy=float(obj["pooled_accuracy"]),
                confusion=np.array(obj["confusion"], dtype=int),
                label_set=tuple(int(v) for v in obj["label_set"]),
                config_echo=obj["config_echo"],
                predictions={k: int(v) for k, v in obj["predictions"].items()},
                fold_ids=tuple(tuple(ids) for ids in obj["fold_ids"]),
            )
        if fmt == ALRUN_FORMAT:
            return ALRunReport(
                records=tuple(
                    ALStepRecord(
                        step=int(r["step"]),
                        labeled_size=int(r["labeled_size"]),
                        mean_accuracy=float(r["mean_accuracy"]),
                        spread=float(r["spread"]),
                        selected_ids=tuple(r["selected_ids"]),
                        dropped=int(r["dropped"]),
                    )
                    for r in obj["records"]
                ),
                aborted=obj.get("aborted"),
            )
        if fmt == RANKING_FORMAT:
            return FeatureRanking(
                elimination_order=tuple(obj["elimination_order"]),
                survivor_set=frozenset(obj["survivors"]),
            )
        if fmt == BATCH_FORMAT:
            return SelectionBatch(
                document_ids=tuple(obj["document_ids"]),
                scores=tuple(float(v) for v in obj["scores"]),
                strategy=str(obj["strategy"]),
                truncated=bool(obj["truncated"]),
            )
        if fmt == AGREEMENT_FORMAT:
            return AgreementReport(
                kappa=float(obj["kappa"]),
                observed_agreement=float(obj["observed_agreement"]),
                expected_agreement=float(obj["expected_agreement"]),
                band=str(obj["band"]),
                degenerate=bool(obj["degenerate"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusIOError(f"corrupt report file: {path} ({exc})") from None
    raise CorpusIOError(f"unsupported report format: {fmt!r}")


# --------------------------------------------------------------------------
# Terminal rendering
# --------------------------------------------------------------------------


def render_confusion(report: EvaluationReport) -> str:
    labels = report.label_set
    width = max(
        5, max(len(str(int(v))) for v in report.confusion.flatten()) + 2
    )
    head = "gold\\pred".rjust(10) + "".join(str(l).rjust(width) for l in labels)
    lines = [head]
    for i, label in enumerate(labels):
        row = str(label).rjust(10) + "".join(
            str(int(v)).rjust(width) for v in report.confusion[i]
        )
        lines.append(row)
    return "\n".join(lines)


def render_evaluation(report: EvaluationReport) -> str:
    lines = [
        f"folds: {len(report.per_fold_accuracy)}",
        f"mean accuracy: {report.mean_accuracy:.4f} "
        f"(spread {report.spread:.4f}, std {report.std:.4f})",
        f"pooled accuracy: {report.pooled_accuracy:.4f}",
        "",
        render_confusion(report),
    ]
    return "\n".join(lines)


def render_alrun(report: ALRunReport) -> str:
    header = f"{'step':>4}  {'size':>6}  {'accuracy':>9}  {'spread':>7}  {'dropped':>7}"
    lines = [header]
    for r in report.records:
        lines.append(
            f"{r.step:>4}  {r.labeled_size:>6}  {r.mean_accuracy:>9.4f}  "
            f"{r.spread:>7.4f}  {r.dropped:>7}"
        )
    if report.aborted:
        lines.append(f"aborted: {report.aborted}")
    return "\n".join(lines)
