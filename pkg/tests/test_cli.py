"""Command-line pipeline behavior via CliRunner."""

import json

import numpy as np
import pytest
from click.testing import CliRunner

from readlevel.cli import cli
from readlevel.corpusio import (
    load_model,
    load_report,
    read_feature_matrix,
    write_feature_matrix,
)
from readlevel.data import dataset_from_rows

SUBSET = ("num_words", "num_sentences")


@pytest.fixture
def runner():
    return CliRunner()


def last_json(output: str) -> dict:
    return json.loads(output.strip().splitlines()[-1])


def blob_matrix(path, rng, centers, per_class, prefix="doc", std=0.4,
                labeled=True):
    rows = []
    for level, center in centers.items():
        for i in range(per_class):
            point = rng.normal(center, std)
            rows.append(
                (
                    f"{prefix}_{level}_{i}",
                    {"num_words": float(point[0]), "num_sentences": float(point[1])},
                    level if labeled else None,
                    "",
                )
            )
    ds = dataset_from_rows(rows, SUBSET)
    write_feature_matrix(ds, path)
    return ds


def corpus_file(path, n=3):
    lines = []
    texts = [
        "O gato preto dorme na casa. Ele gosta de leite.",
        "Uma menina corre no parque grande. Depois ela descansa.",
        "O livro azul tem muitas paginas. Alguem leu tudo ontem.",
    ]
    for i in range(n):
        lines.append(
            json.dumps(
                {
                    "id": f"doc{i}",
                    "text": texts[i % len(texts)],
                    "level": (i % 5) + 1,
                    "source": "unit",
                },
                ensure_ascii=False,
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestExtract:
    def test_extracts_full_registry(self, runner, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        out = tmp_path / "matrix.csv"
        corpus_file(corpus)
        result = runner.invoke(
            cli, ["extract", "--corpus", str(corpus), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        summary = last_json(result.stdout)
        assert summary["documents"] == 3
        assert summary["features"] == 108
        ds = read_feature_matrix(out)
        assert len(ds) == 3
        assert ds.levels == (1, 2, 3)

    def test_lenient_skips_unprocessable_documents(self, runner, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        out = tmp_path / "matrix.csv"
        lines = [
            json.dumps({"id": "good", "text": "Um gato dorme.", "level": 1}),
            json.dumps({"id": "bad", "text": "...", "level": 1}),
        ]
        corpus.write_text("\n".join(lines) + "\n", encoding="utf-8")
        strict = runner.invoke(
            cli, ["extract", "--corpus", str(corpus), "--out", str(out)]
        )
        assert strict.exit_code == 1
        lenient = runner.invoke(
            cli,
            ["extract", "--corpus", str(corpus), "--out", str(out), "--lenient"],
        )
        assert lenient.exit_code == 0, lenient.output
        summary = last_json(lenient.stdout)
        assert summary["documents"] == 1
        assert summary["skipped"] == 1

    def test_single_category_extraction(self, runner, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        out = tmp_path / "matrix.csv"
        corpus_file(corpus, n=2)
        result = runner.invoke(
            cli,
            [
                "extract", "--corpus", str(corpus), "--out", str(out),
                "--category", "punctuation",
            ],
        )
        assert result.exit_code == 0, result.output
        assert last_json(result.stdout)["features"] == 5
        ds = read_feature_matrix(out, allow_subset=True)
        assert "punct_diversity" in ds.feature_names


class TestTrainPredict:
    centers = {1: (-2.0, 0.0), 2: (2.0, 0.0)}

    def test_train_then_predict(self, runner, tmp_path):
        rng = np.random.default_rng(0)
        matrix = tmp_path / "train.csv"
        model_path = tmp_path / "model.json"
        blob_matrix(matrix, rng, self.centers, per_class=10)
        result = runner.invoke(
            cli,
            [
                "train", "--matrix", str(matrix), "--out", str(model_path),
                "--allow-subset",
            ],
        )
        assert result.exit_code == 0, result.output
        summary = last_json(result.stdout)
        assert summary["labels"] == [1, 2]
        assert summary["seed"] == 0
        model = load_model(model_path)
        assert model.feature_names == SUBSET

        pool = tmp_path / "pool.csv"
        predictions = tmp_path / "pred.csv"
        blob_matrix(pool, rng, self.centers, per_class=4, prefix="pool",
                    labeled=False)
        result = runner.invoke(
            cli,
            [
                "predict", "--model", str(model_path), "--matrix", str(pool),
                "--out", str(predictions), "--allow-subset",
                "--uncertainty", "min",
            ],
        )
        assert result.exit_code == 0, result.output
        lines = predictions.read_text(encoding="utf-8").strip().splitlines()
        assert lines[0] == "id,predicted,uncertainty"
        assert len(lines) == 9
        # class-1 pool points start with pool_1 ids and should map to 1
        got = {row.split(",")[0]: row.split(",")[1] for row in lines[1:]}
        assert got["pool_1_0"] == "1"
        assert got["pool_2_0"] == "2"

    def test_predict_to_stdout(self, runner, tmp_path):
        rng = np.random.default_rng(1)
        matrix = tmp_path / "train.csv"
        model_path = tmp_path / "model.json"
        blob_matrix(matrix, rng, self.centers, per_class=8)
        runner.invoke(
            cli,
            ["train", "--matrix", str(matrix), "--out", str(model_path),
             "--allow-subset"],
        )
        result = runner.invoke(
            cli,
            ["predict", "--model", str(model_path), "--matrix", str(matrix),
             "--allow-subset"],
        )
        assert result.exit_code == 0
        assert result.stdout.splitlines()[0] == "id,predicted"


class TestCv:
    def test_report_printed_with_seeds(self, runner, tmp_path):
        rng = np.random.default_rng(2)
        matrix = tmp_path / "m.csv"
        report_path = tmp_path / "report.json"
        blob_matrix(matrix, rng, {1: (-3.0, 0.0), 2: (3.0, 0.0)}, per_class=10)
        result = runner.invoke(
            cli,
            [
                "cv", "--matrix", str(matrix), "--k", "5", "--c", "1.0",
                "--eval-seed", "7", "--allow-subset", "--out", str(report_path),
            ],
        )
        assert result.exit_code == 0, result.output
        summary = last_json(result.stdout)
        assert summary["mean_accuracy"] == 1.0
        assert summary["k"] == 5
        assert summary["eval_seed"] == 7
        assert summary["train_seed"] == 0
        assert "gold\\pred" in result.stdout
        saved = load_report(report_path)
        assert saved.mean_accuracy == 1.0

    def test_deterministic_output(self, runner, tmp_path):
        rng = np.random.default_rng(3)
        matrix = tmp_path / "m.csv"
        blob_matrix(matrix, rng, {1: (-1.0, 0.0), 2: (1.0, 0.0)}, per_class=8,
                    std=1.0)
        args = ["cv", "--matrix", str(matrix), "--k", "4", "--allow-subset"]
        first = runner.invoke(cli, args)
        second = runner.invoke(cli, args)
        assert first.stdout == second.stdout


class TestRfeSelect:
    def test_rfe_drops_constant_feature(self, runner, tmp_path):
        rows = []
        for level, sign in ((1, -1.0), (2, 1.0)):
            for i in range(10):
                rows.append(
                    (
                        f"d{level}_{i}",
                        {"num_words": sign, "num_sentences": 0.0},
                        level,
                        "",
                    )
                )
        matrix = tmp_path / "m.csv"
        write_feature_matrix(dataset_from_rows(rows, SUBSET), matrix)
        out = tmp_path / "ranking.json"
        result = runner.invoke(
            cli,
            ["rfe", "--matrix", str(matrix), "--target", "1",
             "--allow-subset", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        summary = last_json(result.stdout)
        assert summary["survivors"] == ["num_words"]
        assert summary["eliminated"] == 1
        assert load_report(out).survivor_set == {"num_words"}

    def test_select_batch(self, runner, tmp_path):
        rng = np.random.default_rng(4)
        matrix = tmp_path / "m.csv"
        model_path = tmp_path / "model.json"
        pool = tmp_path / "pool.csv"
        blob_matrix(matrix, rng, {1: (-2.0, 0.0), 2: (2.0, 0.0)}, per_class=10)
        runner.invoke(
            cli,
            ["train", "--matrix", str(matrix), "--out", str(model_path),
             "--allow-subset"],
        )
        blob_matrix(pool, rng, {1: (-2.0, 0.0), 2: (2.0, 0.0)}, per_class=5,
                    prefix="pool", labeled=False)
        result = runner.invoke(
            cli,
            ["select", "--model", str(model_path), "--pool", str(pool),
             "--k", "3", "--allow-subset"],
        )
        assert result.exit_code == 0, result.output
        summary = last_json(result.stdout)
        assert len(summary["document_ids"]) == 3
        assert summary["scores"] == sorted(summary["scores"])
        oversized = runner.invoke(
            cli,
            ["select", "--model", str(model_path), "--pool", str(pool),
             "--k", "99", "--allow-subset"],
        )
        assert last_json(oversized.stdout)["truncated"] is True


class TestMerge:
    def test_counts_echoed(self, runner, tmp_path):
        rows = []
        counts = {1: 4, 2: 3, 3: 3, 4: 2, 5: 2}
        for level, n in counts.items():
            for i in range(n):
                rows.append(
                    (f"d{level}_{i}",
                     {"num_words": float(i), "num_sentences": 0.0}, level, "")
                )
        matrix = tmp_path / "m.csv"
        out = tmp_path / "merged.csv"
        write_feature_matrix(dataset_from_rows(rows, SUBSET), matrix)
        result = runner.invoke(
            cli,
            ["merge", "--matrix", str(matrix), "--map", "1:1,2:2,3:2,4:3,5:3",
             "--allow-subset", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        summary = last_json(result.stdout)
        assert summary["level_counts"] == {"1": 4, "2": 6, "3": 4}
        merged = read_feature_matrix(out, allow_subset=True)
        assert merged.level_mapping == {1: 1, 2: 2, 3: 2, 4: 3, 5: 3}

    def test_bad_map_syntax_is_usage_error(self, runner, tmp_path):
        matrix = tmp_path / "m.csv"
        blob_matrix(matrix, np.random.default_rng(5), {1: (0.0, 0.0)}, 3)
        result = runner.invoke(
            cli,
            ["merge", "--matrix", str(matrix), "--map", "1=>2",
             "--allow-subset"],
        )
        assert result.exit_code == 2

    def test_invalid_mapping_is_pipeline_error(self, runner, tmp_path):
        matrix = tmp_path / "m.csv"
        blob_matrix(matrix, np.random.default_rng(6), {1: (0.0, 0.0)}, 3)
        result = runner.invoke(
            cli,
            ["merge", "--matrix", str(matrix), "--map", "1:1,2:2,3:2,4:3",
             "--allow-subset"],
        )
        assert result.exit_code == 1
        assert json.loads(result.stderr.splitlines()[0])["error"] == "LearnloopError"


class TestKappa:
    def test_identical_files_score_one(self, runner, tmp_path):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("1\n2\n3\n2\n", encoding="utf-8")
        b.write_text("1\n2\n3\n2\n", encoding="utf-8")
        result = runner.invoke(cli, ["kappa", "--a", str(a), "--b", str(b)])
        assert result.exit_code == 0, result.output
        summary = last_json(result.stdout)
        assert summary["kappa"] == 1.0
        assert summary["band"] == "almost perfect"

    def test_hand_computed_value(self, runner, tmp_path):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("\n".join(["1"] * 25 + ["2"] * 25) + "\n", encoding="utf-8")
        b.write_text(
            "\n".join(["1"] * 20 + ["2"] * 5 + ["1"] * 10 + ["2"] * 15) + "\n",
            encoding="utf-8",
        )
        summary = last_json(
            runner.invoke(cli, ["kappa", "--a", str(a), "--b", str(b)]).stdout
        )
        assert abs(summary["kappa"] - 0.4) < 1e-12


class TestAlRun:
    def test_scripted_run(self, runner, tmp_path):
        rng = np.random.default_rng(7)
        centers = {1: (-2.0, 0.0), 2: (2.0, 0.0)}
        labeled = tmp_path / "labeled.csv"
        pool = tmp_path / "pool.csv"
        oracle = tmp_path / "oracle.csv"
        blob_matrix(labeled, rng, centers, per_class=3)
        pool_ds = blob_matrix(pool, rng, centers, per_class=10, prefix="pool",
                              std=1.0, labeled=False)
        truth_rows = ["id,level"]
        for doc_id in pool_ds.ids:
            truth_rows.append(f"{doc_id},{doc_id.split('_')[1]}")
        oracle.write_text("\n".join(truth_rows) + "\n", encoding="utf-8")
        out = tmp_path / "run.json"
        result = runner.invoke(
            cli,
            [
                "al-run", "--labeled", str(labeled), "--pool", str(pool),
                "--oracle", str(oracle), "--steps", "2", "--k", "4",
                "--eval-k", "2", "--allow-subset", "--out", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        summary = last_json(result.stdout)
        assert summary["records"] == 3
        assert summary["final_size"] == 6 + 8
        assert summary["aborted"] is None
        report = load_report(out)
        assert [r.labeled_size for r in report.records] == [6, 10, 14]

    def test_missing_oracle_answers_drop_documents(self, runner, tmp_path):
        rng = np.random.default_rng(8)
        centers = {1: (-2.0, 0.0), 2: (2.0, 0.0)}
        labeled = tmp_path / "labeled.csv"
        pool = tmp_path / "pool.csv"
        oracle = tmp_path / "oracle.csv"
        blob_matrix(labeled, rng, centers, per_class=3)
        blob_matrix(pool, rng, centers, per_class=3, prefix="pool",
                    labeled=False)
        oracle.write_text("id,level\n", encoding="utf-8")  # knows nothing
        result = runner.invoke(
            cli,
            [
                "al-run", "--labeled", str(labeled), "--pool", str(pool),
                "--oracle", str(oracle), "--steps", "1", "--k", "3",
                "--eval-k", "2", "--allow-subset",
            ],
        )
        assert result.exit_code == 0, result.output
        summary = last_json(result.stdout)
        assert summary["final_size"] == 6  # every selected document dropped


class TestErrorHandling:
    def test_missing_file_exits_one_with_json_error(self, runner, tmp_path):
        result = runner.invoke(
            cli, ["cv", "--matrix", str(tmp_path / "nope.csv")]
        )
        assert result.exit_code == 1
        machine = json.loads(result.stderr.splitlines()[0])
        assert machine["error"] == "CorpusIOError"
        assert "not found" in machine["message"]

    def test_unknown_flag_exits_two(self, runner):
        result = runner.invoke(cli, ["cv", "--bogus", "x"])
        assert result.exit_code == 2

    def test_unknown_command_exits_two(self, runner):
        result = runner.invoke(cli, ["transmogrify"])
        assert result.exit_code == 2

    def test_help_everywhere(self, runner):
        commands = [
            "extract", "train", "predict", "cv", "rfe", "select", "merge",
            "kappa", "al-run", "serve",
        ]
        assert runner.invoke(cli, ["--help"]).exit_code == 0
        for command in commands:
            result = runner.invoke(cli, [command, "--help"])
            assert result.exit_code == 0, command
            assert "--help" in result.stdout or "Usage" in result.stdout
