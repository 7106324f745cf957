"""Command-line pipeline: extract, train, evaluate, select, merge, serve.

Conventions shared by every command: artifacts go to --out paths, a final
single-line JSON summary (seeds included) goes to stdout, and failures exit
with code 1 after printing one machine-parseable JSON line plus a human
sentence to stderr.  Flag misuse exits 2 via the usual usage error path.
"""

from __future__ import annotations

import csv
import functools
import json
import sys
from pathlib import Path

import click

from .corpusio import (
    CorpusIOError,
    document_from_record,
    load_model,
    read_corpus,
    read_feature_matrix,
    render_alrun,
    render_evaluation,
    save_model,
    save_report,
    write_feature_matrix,
)
from .data import Dataset, LabeledInstance
from .evaluation import EvalConfig, cohen_kappa, cross_validate
from .features import (
    CATEGORIES,
    FeatureConfig,
    FeatureError,
    extract_all,
    extract_category,
)
from .learnloop import (
    LevelMapping,
    active_learning_run,
    merge_levels,
    rfe as run_rfe,
    select_batch,
)
from .lexicons import Resources, default_resources, load_resources
from .svm import (
    TrainConfig,
    predict_batch,
    train_multiclass,
    uncertainty_batch,
)
from .textmodel import DocumentError


def pipeline_errors(fn):
    """Exit 1 with a JSON error line on any pipeline failure."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, OSError) as exc:
            click.echo(
                json.dumps({"error": type(exc).__name__, "message": str(exc)}),
                err=True,
            )
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def _echo_json(payload: dict) -> None:
    click.echo(json.dumps(payload, sort_keys=True))


def _gather_resources(directory, overrides) -> Resources:
    named = {}
    for item in overrides:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise click.BadParameter(
                f"--resource expects NAME=PATH, got {item!r}"
            )
        named[name] = path
    if directory is None and not named:
        return default_resources()
    return load_resources(directory or ".", named)


def _train_config(c, tolerance, max_iterations, seed) -> TrainConfig:
    return TrainConfig(
        C=c, tolerance=tolerance, max_iterations=max_iterations, seed=seed
    )


def _labeled_only(dataset: Dataset) -> tuple[Dataset, int]:
    keep = [i for i, inst in enumerate(dataset.instances) if inst.level is not None]
    dropped = len(dataset) - len(keep)
    return (dataset if not dropped else dataset.subset(keep)), dropped


def _restrict_to_model(dataset: Dataset, model) -> Dataset:
    missing = [n for n in model.feature_names if n not in set(dataset.feature_names)]
    if missing:
        raise CorpusIOError(f"matrix lacks model features: {missing[:5]}")
    if dataset.feature_names == model.feature_names:
        return dataset
    return dataset.restrict(model.feature_names)


def train_options(fn):
    fn = click.option("--c", "--C", "c", type=float, default=1.0,
                      show_default=True, help="Soft-margin penalty.")(fn)
    fn = click.option("--tolerance", type=float, default=1e-4,
                      show_default=True, help="Dual convergence tolerance.")(fn)
    fn = click.option("--max-iterations", type=int, default=10000,
                      show_default=True, help="Solver iteration cap.")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True,
                      help="Training seed (echoed in outputs).")(fn)
    return fn


@click.group()
def cli() -> None:
    """Readability-level pipeline for Portuguese text."""


@cli.command()
@click.option("--corpus", required=True, type=click.Path(), help="JSONL corpus.")
@click.option("--out", required=True, type=click.Path(), help="Matrix CSV to write.")
@click.option("--resources", "resources_dir", type=click.Path(),
              help="Directory of lexicon files with conventional names.")
@click.option("--resource", "resource_overrides", multiple=True,
              metavar="NAME=PATH", help="Override one resource file.")
@click.option("--category", type=click.Choice(("all",) + CATEGORIES),
              default="all", show_default=True)
@click.option("--fill-policy", type=click.Choice(("zero", "error")),
              default="zero", show_default=True,
              help="Value written for unavailable features.")
@click.option("--incidence-base", type=int, default=1000, show_default=True,
              help="Word base for incidence features.")
@click.option("--strict/--lenient", default=True, show_default=True,
              help="Abort on malformed or unprocessable documents, or skip them.")
@pipeline_errors
def extract(corpus, out, resources_dir, resource_overrides, category,
            fill_policy, incidence_base, strict):
    """Extract feature vectors from a corpus into a matrix CSV."""
    resources = _gather_resources(resources_dir, resource_overrides)
    cfg = FeatureConfig(fill_policy=fill_policy, incidence_base=incidence_base)
    result = read_corpus(corpus, strict=strict)
    instances = []
    dropped = list(result.skipped)
    for record in result.records:
        try:
            doc = document_from_record(record)
            if category == "all":
                vector = extract_all(doc, resources, cfg)
            else:
                vector = extract_category(doc, category, resources, cfg)
        except (DocumentError, FeatureError) as exc:
            if strict:
                raise
            dropped.append((record.id, str(exc)))
            continue
        instances.append(
            LabeledInstance(record.id, vector, record.level, record.source)
        )
    if not instances:
        raise CorpusIOError("no documents survived extraction")
    dataset = Dataset(
        instances=tuple(instances),
        feature_names=instances[0].vector.names,
    )
    write_feature_matrix(dataset, out)
    _echo_json(
        {
            "command": "extract",
            "documents": len(dataset),
            "skipped": len(dropped),
            "features": len(dataset.feature_names),
            "category": category,
            "out": str(out),
        }
    )


@cli.command()
@click.option("--matrix", required=True, type=click.Path(), help="Training matrix CSV.")
@click.option("--out", required=True, type=click.Path(), help="Model JSON to write.")
@train_options
@click.option("--on-unavailable", type=click.Choice(("error", "zero")),
              default="error", show_default=True)
@click.option("--allow-subset", is_flag=True,
              help="Accept matrices restricted to a registry subset.")
@pipeline_errors
def train(matrix, out, c, tolerance, max_iterations, seed, on_unavailable,
          allow_subset):
    """Train a one-vs-one SVM on a labeled feature matrix."""
    dataset = read_feature_matrix(matrix, allow_subset=allow_subset)
    dataset, unlabeled = _labeled_only(dataset)
    cfg = _train_config(c, tolerance, max_iterations, seed)
    model = train_multiclass(dataset, cfg, on_unavailable)
    save_model(model, out)
    _echo_json(
        {
            "command": "train",
            "instances": len(dataset),
            "unlabeled_dropped": unlabeled,
            "labels": list(model.labels),
            "features": len(model.feature_names),
            "seed": seed,
            "out": str(out),
        }
    )


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--matrix", required=True, type=click.Path(), help="Instances to label.")
@click.option("--out", type=click.Path(), help="Predictions CSV (stdout if omitted).")
@click.option("--uncertainty", "uncertainty_method",
              type=click.Choice(("none", "min", "mean", "vote_margin")),
              default="none", show_default=True)
@click.option("--on-unavailable", type=click.Choice(("zero", "error")),
              default="zero", show_default=True)
@click.option("--allow-subset", is_flag=True)
@pipeline_errors
def predict(model_path, matrix, out, uncertainty_method, on_unavailable,
            allow_subset):
    """Predict levels for every row of a matrix."""
    model = load_model(model_path)
    dataset = read_feature_matrix(matrix, allow_subset=allow_subset)
    dataset = _restrict_to_model(dataset, model)
    X = dataset.matrix()
    predicted = predict_batch(model, X)
    header = ["id", "predicted"]
    rows = [[inst.id, int(p)] for inst, p in zip(dataset.instances, predicted)]
    if uncertainty_method != "none":
        scores = uncertainty_batch(model, X, uncertainty_method)
        header.append("uncertainty")
        for row, score in zip(rows, scores):
            row.append(repr(float(score)))
    if out:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(rows)
        _echo_json(
            {"command": "predict", "instances": len(rows), "out": str(out)}
        )
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)


@cli.command()
@click.option("--matrix", required=True, type=click.Path())
@click.option("--k", type=int, default=10, show_default=True, help="Fold count.")
@click.option("--stratified/--no-stratified", default=True, show_default=True)
@train_options
@click.option("--eval-seed", type=int, default=0, show_default=True,
              help="Fold assignment seed.")
@click.option("--on-unavailable", type=click.Choice(("error", "zero")),
              default="error", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--allow-subset", is_flag=True)
@click.option("--out", type=click.Path(), help="Report JSON to write.")
@pipeline_errors
def cv(matrix, k, stratified, c, tolerance, max_iterations, seed, eval_seed,
       on_unavailable, jobs, allow_subset, out):
    """Cross-validate an SVM on a labeled matrix."""
    dataset = read_feature_matrix(matrix, allow_subset=allow_subset)
    dataset, unlabeled = _labeled_only(dataset)
    report = cross_validate(
        dataset,
        _train_config(c, tolerance, max_iterations, seed),
        EvalConfig(k=k, seed=eval_seed, stratified=stratified),
        on_unavailable,
        jobs,
    )
    if out:
        save_report(report, out)
    click.echo(render_evaluation(report))
    _echo_json(
        {
            "command": "cv",
            "mean_accuracy": report.mean_accuracy,
            "spread": report.spread,
            "std": report.std,
            "pooled_accuracy": report.pooled_accuracy,
            "k": k,
            "eval_seed": eval_seed,
            "train_seed": seed,
            "unlabeled_dropped": unlabeled,
            "out": str(out) if out else None,
        }
    )


@cli.command()
@click.option("--matrix", required=True, type=click.Path())
@click.option("--target", required=True, type=int,
              help="Number of surviving features.")
@click.option("--step", type=int, default=1, show_default=True,
              help="Features eliminated per round.")
@train_options
@click.option("--on-unavailable", type=click.Choice(("error", "zero")),
              default="error", show_default=True)
@click.option("--allow-subset", is_flag=True)
@click.option("--out", type=click.Path(), help="Ranking JSON to write.")
@pipeline_errors
def rfe(matrix, target, step, c, tolerance, max_iterations, seed,
        on_unavailable, allow_subset, out):
    """Recursive feature elimination down to --target features."""
    dataset = read_feature_matrix(matrix, allow_subset=allow_subset)
    dataset, unlabeled = _labeled_only(dataset)
    ranking = run_rfe(
        dataset,
        _train_config(c, tolerance, max_iterations, seed),
        target_count=target,
        step=step,
        on_unavailable=on_unavailable,
    )
    if out:
        save_report(ranking, out)
    _echo_json(
        {
            "command": "rfe",
            "survivors": sorted(ranking.survivor_set),
            "eliminated": len(ranking.elimination_order),
            "seed": seed,
            "unlabeled_dropped": unlabeled,
            "out": str(out) if out else None,
        }
    )


@cli.command()
@click.option("--model", "model_path", required=True, type=click.Path())
@click.option("--pool", required=True, type=click.Path(),
              help="Matrix of candidate documents.")
@click.option("--k", required=True, type=int, help="Batch size.")
@click.option("--strategy", type=click.Choice(("most_uncertain", "most_confident")),
              default="most_uncertain", show_default=True)
@click.option("--method", type=click.Choice(("min", "mean", "vote_margin")),
              default="min", show_default=True)
@click.option("--allow-subset", is_flag=True)
@click.option("--out", type=click.Path(), help="Batch JSON to write.")
@pipeline_errors
def select(model_path, pool, k, strategy, method, allow_subset, out):
    """Pick an annotation batch from a pool by hyperplane distance."""
    model = load_model(model_path)
    dataset = _restrict_to_model(
        read_feature_matrix(pool, allow_subset=allow_subset), model
    )
    batch = select_batch(model, dataset, k, strategy, method)
    if out:
        save_report(batch, out)
    _echo_json(
        {
            "command": "select",
            "strategy": strategy,
            "document_ids": list(batch.document_ids),
            "scores": list(batch.scores),
            "truncated": batch.truncated,
            "out": str(out) if out else None,
        }
    )


def _parse_mapping(text: str) -> dict[int, int]:
    mapping = {}
    for part in text.split(","):
        left, sep, right = part.partition(":")
        try:
            mapping[int(left)] = int(right)
        except ValueError:
            raise click.BadParameter(
                f"--map expects level:merged pairs, got {part!r}"
            ) from None
    return mapping


@cli.command()
@click.option("--matrix", required=True, type=click.Path())
@click.option("--map", "map_text", required=True,
              metavar="1:1,2:2,3:2,4:3,5:3", help="Level to merged-level pairs.")
@click.option("--allow-subset", is_flag=True)
@click.option("--out", type=click.Path(), help="Merged matrix CSV to write.")
@pipeline_errors
def merge(matrix, map_text, allow_subset, out):
    """Merge grade levels through an order-preserving mapping."""
    dataset = read_feature_matrix(matrix, allow_subset=allow_subset)
    merged = merge_levels(dataset, LevelMapping(_parse_mapping(map_text)))
    if out:
        write_feature_matrix(merged, out)
    _echo_json(
        {
            "command": "merge",
            "level_counts": {str(k): v for k, v in merged.level_counts().items()},
            "instances": len(merged),
            "out": str(out) if out else None,
        }
    )


@cli.command()
@click.option("--a", "path_a", required=True, type=click.Path(),
              help="First annotator's labels, one per line.")
@click.option("--b", "path_b", required=True, type=click.Path(),
              help="Second annotator's labels, one per line.")
@click.option("--out", type=click.Path(), help="Agreement JSON to write.")
@pipeline_errors
def kappa(path_a, path_b, out):
    """Cohen's kappa between two label files."""
    def read_labels(path):
        path = Path(path)
        if not path.exists():
            raise CorpusIOError(f"label file not found: {path}")
        return [
            line.strip()
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]

    report = cohen_kappa(read_labels(path_a), read_labels(path_b))
    if out:
        save_report(report, out)
    _echo_json(
        {
            "command": "kappa",
            "kappa": report.kappa,
            "observed_agreement": report.observed_agreement,
            "expected_agreement": report.expected_agreement,
            "band": report.band,
            "degenerate": report.degenerate,
            "out": str(out) if out else None,
        }
    )


@cli.command(name="al-run")
@click.option("--labeled", required=True, type=click.Path(),
              help="Matrix of already labeled documents.")
@click.option("--pool", required=True, type=click.Path(),
              help="Matrix of unlabeled candidates.")
@click.option("--oracle", required=True, type=click.Path(),
              help="CSV id,level answer key; missing ids are dropped.")
@click.option("--steps", type=int, default=4, show_default=True)
@click.option("--k", type=int, default=100, show_default=True,
              help="Documents selected per step.")
@click.option("--eval-k", type=int, default=10, show_default=True)
@click.option("--eval-seed", type=int, default=0, show_default=True)
@click.option("--stratified/--no-stratified", default=True, show_default=True)
@train_options
@click.option("--method", type=click.Choice(("min", "mean", "vote_margin")),
              default="min", show_default=True)
@click.option("--on-unavailable", type=click.Choice(("error", "zero")),
              default="error", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--allow-subset", is_flag=True)
@click.option("--out", type=click.Path(), help="Run report JSON to write.")
@pipeline_errors
def al_run(labeled, pool, oracle, steps, k, eval_k, eval_seed, stratified,
           c, tolerance, max_iterations, seed, method, on_unavailable, jobs,
           allow_subset, out):
    """Scripted active-learning run against an answer-key oracle."""
    labeled_ds, unlabeled = _labeled_only(
        read_feature_matrix(labeled, allow_subset=allow_subset)
    )
    pool_ds = read_feature_matrix(pool, allow_subset=allow_subset)
    answers: dict[str, int] = {}
    oracle_path = Path(oracle)
    if not oracle_path.exists():
        raise CorpusIOError(f"oracle file not found: {oracle_path}")
    with open(oracle_path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or header[:2] != ["id", "level"]:
            raise CorpusIOError("oracle file must start with an id,level header")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                answers[row[0]] = int(row[1])
            except (IndexError, ValueError):
                raise CorpusIOError(
                    f"oracle line {line_no}: expected id,level"
                ) from None
    report = active_learning_run(
        labeled_ds,
        pool_ds,
        oracle=answers.get,
        steps=steps,
        k=k,
        eval_cfg=EvalConfig(k=eval_k, seed=eval_seed, stratified=stratified),
        train_cfg=_train_config(c, tolerance, max_iterations, seed),
        method=method,
        on_unavailable=on_unavailable,
        jobs=jobs,
    )
    if out:
        save_report(report, out)
    click.echo(render_alrun(report))
    _echo_json(
        {
            "command": "al-run",
            "records": len(report.records),
            "final_size": report.records[-1].labeled_size,
            "final_accuracy": report.records[-1].mean_accuracy,
            "aborted": report.aborted,
            "train_seed": seed,
            "eval_seed": eval_seed,
            "unlabeled_dropped": unlabeled,
            "out": str(out) if out else None,
        }
    )


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--state-dir", type=click.Path(), default="readlevel-state",
              show_default=True, help="Event log and snapshot directory.")
@click.option("--frontend", "frontend_dir", type=click.Path(),
              help="Static workbench bundle to mount at /.")
@pipeline_errors
def serve(host, port, state_dir, frontend_dir):
    """Run the annotation service (REST API under /api/v1)."""
    import uvicorn

    from .service import create_app

    app = create_app(state_dir=state_dir, frontend_dir=frontend_dir)
    uvicorn.run(app, host=host, port=port)


main = cli


if __name__ == "__main__":
    main()
