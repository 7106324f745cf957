"""End-to-end acceptance gate.

Each test prints one PASS/FAIL line for its criterion; run with -s to see
them all.  Expected values come from hand computations, analytic solutions,
or brute-force oracles, never from the implementation under test.
"""

import functools
import json
import random

import numpy as np
from fastapi.testclient import TestClient

from readlevel.corpusio import (
    load_model,
    read_feature_matrix,
    save_model,
    write_feature_matrix,
)
from readlevel.data import dataset_from_rows
from readlevel.evaluation import (
    EvalConfig,
    accuracy_from_confusion,
    cohen_kappa,
    cross_validate,
    landis_koch,
)
from readlevel.features import extract_all, feature_names
from readlevel.features.metrics import (
    brunet_index,
    flesch_kincaid_grade,
    flesch_reading_ease,
    honore_statistic,
)
from readlevel.learnloop import merge_levels, rfe, select_batch
from readlevel.lexicons import default_resources
from readlevel.service import create_app
from readlevel.svm import (
    TrainConfig,
    predict_batch,
    primal_objective,
    train_binary,
    train_multiclass,
    uncertainty,
)
from readlevel.textmodel import build_document_from_text

from test_svm import grid_qp_objective, random_problem

RESOURCES = default_resources()

# Published 10-fold confusion matrix over the five school levels.
CONFUSION = np.array(
    [
        [182, 45, 9, 4, 2],
        [36, 160, 102, 14, 1],
        [11, 99, 170, 39, 19],
        [6, 13, 79, 118, 71],
        [3, 5, 28, 60, 180],
    ],
    dtype=float,
)
MERGE_MAP = {1: 1, 2: 2, 3: 2, 4: 3, 5: 3}


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"FAIL  {name}")
                raise
            print(f"PASS  {name}")

        return wrapper

    return decorate


def blob_dataset(rng, centers, per_class, names=("num_words", "num_sentences"),
                 std=0.5, prefix="d", labels=True):
    rows = []
    for level, center in centers.items():
        for i in range(per_class):
            point = rng.normal(center, std)
            rows.append(
                (
                    f"{prefix}{level}_{i}",
                    dict(zip(names, (float(v) for v in point))),
                    level if labels else None,
                    "",
                )
            )
    return dataset_from_rows(rows, names)


@criterion("confusion-matrix arithmetic")
def test_confusion_matrix_arithmetic():
    accuracy = accuracy_from_confusion(CONFUSION)
    assert accuracy == 810 / 1456
    assert round(accuracy, 4) == 0.5563
    assert CONFUSION.sum(axis=1).tolist() == [242.0, 313.0, 338.0, 287.0, 276.0]
    assert CONFUSION.sum() == 1456.0


@criterion("level-merge bookkeeping")
def test_level_merge_bookkeeping():
    counts = {1: 242, 2: 313, 3: 338, 4: 287, 5: 276}
    rows = []
    for level, n in counts.items():
        for i in range(n):
            rows.append((f"t{level}_{i}", {"num_words": float(i)}, level, ""))
    dataset = dataset_from_rows(rows, ("num_words",))
    merged = merge_levels(dataset, MERGE_MAP)
    assert merged.level_counts() == {1: 242, 2: 651, 3: 563}
    assert len(merged) == 1456
    assert merge_levels(merged, MERGE_MAP) is merged  # idempotent
    assert merged.matrix().tobytes() == dataset.matrix().tobytes()


@criterion("kappa oracle")
def test_kappa_oracle():
    assert cohen_kappa([1, 2, 3, 2], [1, 2, 3, 2]).kappa == 1.0
    # contingency [[20, 5], [10, 15]]: p_o = 0.7, p_e = 0.5, kappa = 0.4
    a = [1] * 25 + [2] * 25
    b = [1] * 20 + [2] * 5 + [1] * 10 + [2] * 15
    assert abs(cohen_kappa(a, b).kappa - 0.4) < 1e-12
    assert cohen_kappa([1, 2], [2, 1]).kappa == -1.0
    assert landis_koch(0.528) == "moderate"


@criterion("svm analytic and grid-search oracle")
def test_svm_against_grid_oracle():
    model = train_binary(
        np.array([[-1.0], [1.0]]), np.array([-1.0, 1.0]), TrainConfig(C=1.0)
    )
    assert abs(model.weights[0] - 1.0) <= 1e-3
    assert abs(model.bias) <= 1e-3

    rng = np.random.default_rng(20240819)
    checked = 0
    for trial in range(24):
        n = int(rng.integers(3, 7))
        X, y = random_problem(rng, n)
        C = float(rng.choice([0.5, 1.0, 2.0]))
        trained = train_binary(X, y, TrainConfig(C=C))
        ours = primal_objective(trained, X, y, C)
        reference = grid_qp_objective(X, y, C)
        assert abs(ours - reference) <= 1e-2, (trial, ours, reference)
        checked += 1
    assert checked >= 20


@criterion("feature formula oracles")
def test_feature_formula_oracles():
    honore, capped = honore_statistic(10, 7, 5)
    assert not capped
    assert abs(honore - 805.9) <= 0.1
    assert abs(brunet_index(100, 50) - 11.19) <= 0.01
    assert abs(flesch_reading_ease(10.0, 2.0) - 69.485) < 1e-9
    assert abs(flesch_kincaid_grade(10.0, 2.0) - 11.91) < 1e-9

    vocab = (
        "o gato casa viu por isso dia sol mar feliz menina livro e nao "
        "quando depois bola azul ele fala"
    ).split()
    incidence_names = [
        n for n in feature_names() if n.startswith("inc_") or n == "punct_incidence"
    ]
    rng = random.Random(20240820)
    for trial in range(100):
        paragraphs = []
        for _ in range(rng.randint(1, 3)):
            sentences = []
            for _ in range(rng.randint(1, 4)):
                words = [rng.choice(vocab) for _ in range(rng.randint(2, 9))]
                sentences.append(" ".join(words).capitalize() + ".")
            paragraphs.append(" ".join(sentences))
        text = "\n\n".join(paragraphs)
        single = extract_all(build_document_from_text(text, f"s{trial}"), RESOURCES)
        doubled = extract_all(
            build_document_from_text(text + "\n\n" + text, f"w{trial}"), RESOURCES
        )
        for name in incidence_names:
            assert abs(single.values[name] - doubled.values[name]) <= 1e-9, (
                name,
                text,
            )


@criterion("cross-validation harness")
def test_cross_validation_harness():
    # leave-one-out must match an explicit retrain-per-instance loop
    rng = np.random.default_rng(11)
    centers = {1: (-3.0, 0.0), 2: (0.0, 2.0), 3: (3.0, 0.0)}
    dataset = blob_dataset(rng, centers, per_class=10, std=1.5)
    report = cross_validate(
        dataset, TrainConfig(), EvalConfig(k=30, seed=0, stratified=False)
    )
    for i in range(30):
        rest = [j for j in range(30) if j != i]
        model = train_multiclass(dataset.subset(rest), TrainConfig())
        expected = predict_batch(model, dataset.subset([i]).matrix())[0]
        instance_id = dataset.instances[i].id
        assert report.predictions[instance_id] == int(expected), instance_id

    # shuffled labels carry no signal: accuracy sits at chance for 5 classes
    accuracies = []
    for seed in range(20):
        seeded = np.random.default_rng(seed)
        rows = [
            (f"r{i}", {"num_words": float(seeded.normal()),
                       "num_sentences": float(seeded.normal())},
             (i % 5) + 1, "")
            for i in range(100)
        ]
        noise = dataset_from_rows(rows, ("num_words", "num_sentences"))
        result = cross_validate(
            noise, TrainConfig(), EvalConfig(k=10, seed=seed)
        )
        accuracies.append(result.mean_accuracy)
    mean_accuracy = float(np.mean(accuracies))
    assert abs(mean_accuracy - 0.2) <= 0.1, mean_accuracy


@criterion("batch selection oracle")
def test_batch_selection_oracle():
    rng = np.random.default_rng(12)
    training = blob_dataset(rng, {1: (-2.0, 0.0), 2: (2.0, 0.0)}, per_class=10)
    model = train_multiclass(training, TrainConfig())
    pool = blob_dataset(
        rng, {1: (-2.0, 0.0), 2: (2.0, 0.0)}, per_class=500, std=2.0,
        prefix="p", labels=False,
    )
    assert len(pool) == 1000

    by_instance = [
        (uncertainty(model, inst.vector, "min"), inst.id)
        for inst in pool.instances
    ]
    expected = sorted((doc_id, score) for score, doc_id in by_instance)
    expected = sorted(expected, key=lambda item: (item[1], item[0]))
    for k in (1, 37, 999, 1000):
        batch = select_batch(model, pool, k, "most_uncertain", "min")
        assert list(batch.document_ids) == [doc_id for doc_id, _ in expected[:k]]
        assert batch.truncated is False

    batch = select_batch(model, pool, 137, "most_uncertain", "min")
    chosen = set(batch.document_ids)
    left_out = [score for doc_id, score in expected if doc_id not in chosen]
    assert max(batch.scores) <= min(left_out) + 1e-12


@criterion("merged-labeling direction")
def test_merged_labeling_direction():
    # adjacent levels 2/3 and 4/5 share feature distributions, so collapsing
    # them should lift cross-validation accuracy by a wide margin
    centers = {
        1: (0.0, 0.0),
        2: (3.0, 0.0),
        3: (3.0, 0.0),
        4: (6.0, 0.0),
        5: (6.0, 0.0),
    }
    gaps = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        dataset = blob_dataset(rng, centers, per_class=40, std=0.5)
        five = cross_validate(
            dataset, TrainConfig(), EvalConfig(k=5, seed=seed)
        ).mean_accuracy
        merged = merge_levels(dataset, MERGE_MAP)
        three = cross_validate(
            merged, TrainConfig(), EvalConfig(k=5, seed=seed)
        ).mean_accuracy
        gaps.append(three - five)
    assert float(np.mean(gaps)) >= 0.10, gaps


@criterion("rfe constant-feature sanity")
def test_rfe_eliminates_constant_first():
    names = ("num_words", "num_sentences")
    for seed in range(10):
        rng = np.random.default_rng(seed)
        rows = []
        for level, sign in ((1, -1.0), (2, 1.0)):
            for i in range(12):
                rows.append(
                    (
                        f"d{level}_{i}",
                        {
                            "num_words": sign + float(rng.normal(0.0, 0.05)),
                            "num_sentences": 3.0,
                        },
                        level,
                        "",
                    )
                )
        ranking = rfe(
            dataset_from_rows(rows, names), TrainConfig(seed=seed), target_count=1
        )
        assert ranking.elimination_order[0] == "num_sentences", seed
        assert ranking.survivor_set == {"num_words"}


@criterion("persistence round-trips")
def test_persistence_round_trips(tmp_path):
    rng = np.random.default_rng(13)
    centers = {1: (-3.0, 0.0), 2: (0.0, 2.5), 3: (3.0, 0.0)}
    dataset = blob_dataset(rng, centers, per_class=8)
    model = train_multiclass(dataset, TrainConfig(C=2.0, seed=5))
    probe = blob_dataset(rng, centers, per_class=6, prefix="q", labels=False)

    model_path = tmp_path / "model.json"
    save_model(model, model_path)
    restored = load_model(model_path)
    before = predict_batch(model, probe.matrix())
    after = predict_batch(restored, probe.matrix())
    assert before.tolist() == after.tolist()
    for binary, copy in zip(model.binaries, restored.binaries):
        assert binary.weights.tolist() == copy.weights.tolist()
        assert binary.bias == copy.bias

    matrix_path = tmp_path / "matrix.csv"
    write_feature_matrix(probe, matrix_path)
    reread = read_feature_matrix(matrix_path, allow_subset=True)
    assert reread.matrix().tobytes() == probe.matrix().tobytes()
    assert predict_batch(model, reread.matrix()).tolist() == before.tolist()


@criterion("service loop")
def test_service_loop(tmp_path):
    state_dir = tmp_path / "state"
    rng = np.random.default_rng(14)
    labeled = blob_dataset(rng, {1: (-2.0, 0.0), 2: (2.0, 0.0)}, per_class=10)
    pool_x = np.linspace(-4.0, 4.0, 40)
    pool_rows = [
        (f"p{i}", {"num_words": float(x), "num_sentences": 0.0}, None, "")
        for i, x in enumerate(pool_x)
    ]
    pool = dataset_from_rows(pool_rows, ("num_words", "num_sentences"))
    truth = {f"p{i}": (1 if x < 0 else 2) for i, x in enumerate(pool_x)}

    labeled_path = tmp_path / "labeled.csv"
    pool_path = tmp_path / "pool.csv"
    write_feature_matrix(labeled, labeled_path)
    write_feature_matrix(pool, pool_path)

    client = TestClient(create_app(state_dir))
    created = client.post(
        "/api/v1/sessions",
        json={
            "session_id": "acceptance",
            "labeled_matrix": labeled_path.read_text(encoding="utf-8"),
            "pool_matrix": pool_path.read_text(encoding="utf-8"),
            "config": {"k": 10, "eval_k": 5},
        },
    )
    assert created.status_code == 201, created.text

    for step in range(4):
        batch = client.get("/api/v1/sessions/acceptance/batch?k=10").json()
        assert len(batch["batch"]) == 10
        labels = [
            {"document_id": item["id"], "level": truth[item["id"]]}
            for item in batch["batch"]
        ]
        ack = client.post(
            "/api/v1/sessions/acceptance/labels",
            json={"annotator": "oracle", "labels": labels},
        )
        assert ack.status_code == 200, ack.text
        retrain = client.post("/api/v1/sessions/acceptance/retrain")
        assert retrain.status_code == 200, retrain.text
        status = client.get("/api/v1/sessions/acceptance/status").json()
        assert status["labeled_size"] + status["pool_size"] == 60

    status = client.get("/api/v1/sessions/acceptance/status").json()
    assert len(status["history"]) == 4
    assert [row["size"] for row in status["history"]] == [30, 40, 50, 60]

    replayed = TestClient(create_app(state_dir))  # simulated crash + restart
    after = replayed.get("/api/v1/sessions/acceptance/status").json()
    assert after == status
