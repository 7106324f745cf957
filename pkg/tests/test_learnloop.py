"""Feature elimination, batch selection, merging, and the AL loop."""

import numpy as np
import pytest

from readlevel.data import Dataset, dataset_from_rows
from readlevel.evaluation import EvalConfig
from readlevel.learnloop import (
    ALRunReport,
    FeatureRanking,
    LearnloopError,
    LevelMapping,
    SelectionBatch,
    active_learning_run,
    merge_levels,
    rfe,
    select_batch,
)
from readlevel.svm import (
    BinaryModel,
    MulticlassModel,
    ScalingParams,
    TrainConfig,
)

ADJACENT_MERGE = {1: 1, 2: 2, 3: 2, 4: 3, 5: 3}
LEVEL_COUNTS = {1: 242, 2: 313, 3: 338, 4: 287, 5: 276}


def line_model():
    """1-D model whose decision value is the raw coordinate itself."""
    scaling = ScalingParams(
        means=np.zeros(1), stds=np.ones(1), constant_mask=np.zeros(1, dtype=bool)
    )
    binary = BinaryModel(weights=np.ones(1), bias=0.0, label_pair=(1, 2))
    return MulticlassModel(
        binaries=(binary,), labels=(1, 2), scaling=scaling, feature_names=("f_x",)
    )


def pool_from_values(pairs):
    return dataset_from_rows(
        [(doc_id, {"f_x": value}, None, "") for doc_id, value in pairs],
        feature_names=("f_x",),
    )


def labeled_blobs(rng, centers, per_class, prefix="lab", std=0.4):
    rows = []
    for level, center in centers.items():
        for i in range(per_class):
            point = rng.normal(center, std)
            rows.append(
                (
                    f"{prefix}_{level}_{i}",
                    {"f_x": point[0], "f_y": point[1]},
                    level,
                    "",
                )
            )
    return dataset_from_rows(rows, ("f_x", "f_y"))


class TestLevelMapping:
    def test_adjacent_pair_mapping_valid(self):
        mapping = LevelMapping(ADJACENT_MERGE)
        assert mapping.mapping[5] == 3
        assert not mapping.is_identity

    def test_identity_detected(self):
        assert LevelMapping({i: i for i in range(1, 6)}).is_identity

    def test_must_be_total(self):
        with pytest.raises(LearnloopError, match="total"):
            LevelMapping({1: 1, 2: 2, 3: 2, 4: 3})

    def test_merged_labels_contiguous(self):
        with pytest.raises(LearnloopError, match="contiguous"):
            LevelMapping({1: 1, 2: 3, 3: 3, 4: 4, 5: 5})

    def test_order_preserving(self):
        with pytest.raises(LearnloopError, match="order"):
            LevelMapping({1: 1, 2: 2, 3: 1, 4: 2, 5: 2})


class TestMergeLevels:
    def build(self, rng):
        rows = []
        for level, count in LEVEL_COUNTS.items():
            for i in range(count):
                rows.append(
                    (
                        f"t{level}_{i}",
                        {"f_x": float(rng.normal()), "f_y": float(rng.normal())},
                        level,
                        "",
                    )
                )
        return dataset_from_rows(rows, ("f_x", "f_y"))

    def test_merged_counts_add_up(self):
        ds = self.build(np.random.default_rng(0))
        merged = merge_levels(ds, LevelMapping(ADJACENT_MERGE))
        assert merged.level_counts() == {1: 242, 2: 651, 3: 563}
        assert len(merged) == len(ds) == 1456

    def test_features_untouched(self):
        ds = self.build(np.random.default_rng(1))
        merged = merge_levels(ds, LevelMapping(ADJACENT_MERGE))
        assert merged.matrix().tobytes() == ds.matrix().tobytes()
        assert merged.ids == ds.ids

    def test_applied_twice_equals_applied_once(self):
        ds = self.build(np.random.default_rng(2))
        once = merge_levels(ds, LevelMapping(ADJACENT_MERGE))
        twice = merge_levels(once, LevelMapping(ADJACENT_MERGE))
        assert twice is once

    def test_identity_returns_dataset_unchanged(self):
        ds = self.build(np.random.default_rng(3))
        assert merge_levels(ds, LevelMapping({i: i for i in range(1, 6)})) is ds

    def test_conflicting_remerge_rejected(self):
        ds = self.build(np.random.default_rng(4))
        merged = merge_levels(ds, LevelMapping(ADJACENT_MERGE))
        other = LevelMapping({1: 1, 2: 1, 3: 2, 4: 2, 5: 3})
        with pytest.raises(LearnloopError, match="different mapping"):
            merge_levels(merged, other)

    def test_unlabeled_instances_pass_through(self):
        ds = dataset_from_rows(
            [
                ("a", {"f_x": 0.0, "f_y": 0.0}, 2, ""),
                ("b", {"f_x": 1.0, "f_y": 1.0}, None, ""),
            ],
            ("f_x", "f_y"),
        )
        merged = merge_levels(ds, LevelMapping(ADJACENT_MERGE))
        assert merged.levels == (2, None)

    def test_level_outside_domain_rejected(self):
        ds = dataset_from_rows(
            [("a", {"f_x": 0.0, "f_y": 0.0}, 7, "")], ("f_x", "f_y")
        )
        with pytest.raises(LearnloopError, match="outside mapping domain"):
            merge_levels(ds, LevelMapping(ADJACENT_MERGE))


def rfe_dataset(rng, n_per_class=30, extra_noise=0):
    """Two classes; f_sig equals the class sign, f_const is always zero."""
    rows = []
    for level, sign in ((1, -1.0), (2, 1.0)):
        for i in range(n_per_class):
            values = {"f_sig": sign, "f_const": 0.0}
            for j in range(extra_noise):
                values[f"f_noise{j}"] = float(rng.normal())
            rows.append((f"d{level}_{i}", values, level, ""))
    names = ["f_sig", "f_const"] + [f"f_noise{j}" for j in range(extra_noise)]
    return dataset_from_rows(rows, names)


class TestRFE:
    def test_constant_feature_eliminated_first(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            ds = rfe_dataset(rng, extra_noise=2)
            ranking = rfe(ds, TrainConfig(), target_count=1)
            assert ranking.elimination_order[0] == "f_const"
            assert ranking.survivor_set == {"f_sig"}

    def test_order_and_survivors_partition_names(self):
        rng = np.random.default_rng(7)
        ds = rfe_dataset(rng, extra_noise=3)
        ranking = rfe(ds, TrainConfig(), target_count=2)
        all_names = set(ranking.elimination_order) | ranking.survivor_set
        assert all_names == set(ds.feature_names)
        assert len(ranking.elimination_order) == len(ds.feature_names) - 2

    def test_target_equal_to_count_is_noop(self):
        rng = np.random.default_rng(8)
        ds = rfe_dataset(rng, extra_noise=1)
        ranking = rfe(ds, TrainConfig(), target_count=3)
        assert ranking.elimination_order == ()
        assert ranking.survivor_set == set(ds.feature_names)

    def test_three_features_target_one(self):
        rng = np.random.default_rng(9)
        ds = rfe_dataset(rng, extra_noise=1)
        ranking = rfe(ds, TrainConfig(), target_count=1)
        assert len(ranking.elimination_order) == 2

    def test_step_clamps_to_target(self):
        rng = np.random.default_rng(10)
        ds = rfe_dataset(rng, extra_noise=3)  # 5 features
        ranking = rfe(ds, TrainConfig(), target_count=2, step=2)
        assert len(ranking.elimination_order) == 3
        assert len(ranking.survivor_set) == 2

    def test_deterministic(self):
        rng = np.random.default_rng(11)
        ds = rfe_dataset(rng, extra_noise=3)
        a = rfe(ds, TrainConfig(), target_count=1)
        b = rfe(ds, TrainConfig(), target_count=1)
        assert a.elimination_order == b.elimination_order

    def test_bad_arguments(self):
        rng = np.random.default_rng(12)
        ds = rfe_dataset(rng)
        with pytest.raises(LearnloopError, match="target_count"):
            rfe(ds, TrainConfig(), target_count=0)
        with pytest.raises(LearnloopError, match="target_count"):
            rfe(ds, TrainConfig(), target_count=9)
        with pytest.raises(LearnloopError, match="step"):
            rfe(ds, TrainConfig(), target_count=1, step=0)


class TestSelectBatch:
    def test_most_uncertain_takes_smallest_distance(self):
        pool = pool_from_values([("p1", -3.0), ("p2", 0.5), ("p3", 2.0)])
        batch = select_batch(line_model(), pool, 1, "most_uncertain")
        assert batch.document_ids == ("p2",)
        assert batch.scores == (0.5,)

    def test_most_confident_takes_largest_distance(self):
        pool = pool_from_values([("p1", -3.0), ("p2", 0.5), ("p3", 2.0)])
        batch = select_batch(line_model(), pool, 1, "most_confident")
        assert batch.document_ids == ("p1",)
        assert batch.scores == (3.0,)

    def test_k_equal_to_pool_returns_everything(self):
        pool = pool_from_values([("p1", -3.0), ("p2", 0.5), ("p3", 2.0)])
        uncertain = select_batch(line_model(), pool, 3, "most_uncertain")
        confident = select_batch(line_model(), pool, 3, "most_confident")
        assert set(uncertain.document_ids) == {"p1", "p2", "p3"}
        assert uncertain.document_ids == tuple(reversed(confident.document_ids))
        assert not uncertain.truncated

    def test_oversized_k_flagged_truncated(self):
        pool = pool_from_values([("p1", -3.0), ("p2", 0.5)])
        batch = select_batch(line_model(), pool, 10, "most_uncertain")
        assert len(batch.document_ids) == 2
        assert batch.truncated

    def test_matches_brute_force_sort(self):
        rng = np.random.default_rng(13)
        pairs = [(f"doc{i:04d}", float(rng.normal(0, 2))) for i in range(300)]
        pool = pool_from_values(pairs)
        scored = sorted(((abs(v), doc_id) for doc_id, v in pairs))
        for k in (1, 17, 300):
            batch = select_batch(line_model(), pool, k, "most_uncertain")
            assert batch.document_ids == tuple(d for _, d in scored[:k])
        confident = select_batch(line_model(), pool, 25, "most_confident")
        by_conf = sorted(((-abs(v), doc_id) for doc_id, v in pairs))
        assert confident.document_ids == tuple(d for _, d in by_conf[:25])

    def test_ties_break_by_document_id(self):
        pool = pool_from_values([("zz", 1.0), ("aa", -1.0), ("mm", 1.0)])
        batch = select_batch(line_model(), pool, 2, "most_uncertain")
        assert batch.document_ids == ("aa", "mm")

    def test_monotone_split_between_batch_and_remainder(self):
        rng = np.random.default_rng(14)
        for trial in range(10):
            pairs = [
                (f"doc{i}", float(rng.normal(0, 3)))
                for i in range(int(rng.integers(5, 40)))
            ]
            pool = pool_from_values(pairs)
            k = int(rng.integers(1, len(pairs)))
            batch = select_batch(line_model(), pool, k, "most_uncertain")
            chosen = set(batch.document_ids)
            rest = [abs(v) for doc_id, v in pairs if doc_id not in chosen]
            assert max(batch.scores) <= min(rest) + 1e-12

    def test_input_validation(self):
        pool = pool_from_values([("p1", 1.0)])
        with pytest.raises(LearnloopError, match="strategy"):
            select_batch(line_model(), pool, 1, "random")
        with pytest.raises(LearnloopError, match="positive"):
            select_batch(line_model(), pool, 0, "most_uncertain")
        empty = Dataset(instances=(), feature_names=("f_x",))
        with pytest.raises(LearnloopError, match="empty"):
            select_batch(line_model(), empty, 1, "most_uncertain")


class TestActiveLearningRun:
    centers = {1: (0.0, 0.0), 2: (3.0, 3.0)}

    def setup_run(self, seed, pool_per_class=15):
        rng = np.random.default_rng(seed)
        labeled = labeled_blobs(rng, self.centers, 3, prefix="lab")
        pool_labeled = labeled_blobs(
            rng, self.centers, pool_per_class, prefix="pool", std=1.0
        )
        truth = {inst.id: inst.level for inst in pool_labeled.instances}
        pool = Dataset(
            instances=tuple(
                inst.__class__(inst.id, inst.vector, None, inst.source)
                for inst in pool_labeled.instances
            ),
            feature_names=pool_labeled.feature_names,
        )
        return labeled, pool, truth

    def test_sizes_grow_by_batch(self):
        labeled, pool, truth = self.setup_run(15)
        report = active_learning_run(
            labeled,
            pool,
            oracle=lambda doc_id: truth[doc_id],
            steps=2,
            k=5,
            eval_cfg=EvalConfig(k=2, seed=1),
            train_cfg=TrainConfig(),
        )
        sizes = [r.labeled_size for r in report.records]
        assert sizes == [6, 11, 16]
        assert [len(r.selected_ids) for r in report.records] == [0, 5, 5]
        assert report.aborted is None

    def test_steps_zero_is_single_evaluation(self):
        labeled, pool, truth = self.setup_run(16)
        report = active_learning_run(
            labeled,
            pool,
            oracle=lambda doc_id: truth[doc_id],
            steps=0,
            k=5,
            eval_cfg=EvalConfig(k=2, seed=1),
        )
        assert len(report.records) == 1
        assert report.records[0].step == 0
        assert report.records[0].selected_ids == ()

    def test_dropped_documents_counted(self):
        labeled, pool, truth = self.setup_run(17)
        calls = []

        def oracle(doc_id):
            calls.append(doc_id)
            if len(calls) <= 2:
                return None  # first two asked cannot be processed
            return truth[doc_id]

        report = active_learning_run(
            labeled,
            pool,
            oracle=oracle,
            steps=1,
            k=5,
            eval_cfg=EvalConfig(k=2, seed=1),
        )
        step1 = report.records[1]
        assert step1.dropped == 2
        assert step1.labeled_size == 6 + 5 - 2
        # dropped documents still leave the pool
        assert len(report.records[1].selected_ids) == 5

    def test_oracle_exception_preserves_earlier_records(self):
        labeled, pool, truth = self.setup_run(18)
        calls = []

        def oracle(doc_id):
            calls.append(doc_id)
            if len(calls) > 5:
                raise RuntimeError("annotator went home")
            return truth[doc_id]

        report = active_learning_run(
            labeled,
            pool,
            oracle=oracle,
            steps=3,
            k=5,
            eval_cfg=EvalConfig(k=2, seed=1),
        )
        assert report.aborted is not None
        assert report.aborted.startswith("step 2")
        assert "annotator went home" in report.aborted
        assert [r.step for r in report.records] == [0, 1]

    def test_invalid_oracle_label_aborts(self):
        labeled, pool, truth = self.setup_run(19)
        report = active_learning_run(
            labeled,
            pool,
            oracle=lambda doc_id: "hard",
            steps=1,
            k=3,
            eval_cfg=EvalConfig(k=2, seed=1),
        )
        assert report.aborted is not None
        assert "invalid level" in report.aborted
        assert len(report.records) == 1

    def test_pool_exhaustion_stops_early(self):
        labeled, pool, truth = self.setup_run(20, pool_per_class=4)
        report = active_learning_run(
            labeled,
            pool,
            oracle=lambda doc_id: truth[doc_id],
            steps=4,
            k=5,
            eval_cfg=EvalConfig(k=2, seed=1),
        )
        # pool of 8: batches of 5 then 3, then nothing remains
        assert [r.labeled_size for r in report.records] == [6, 11, 14]

    def test_overlapping_pool_rejected(self):
        labeled, pool, truth = self.setup_run(21)
        bad_pool = Dataset(
            instances=(
                labeled.instances[0].__class__(
                    labeled.instances[0].id,
                    labeled.instances[0].vector,
                    None,
                    "",
                ),
            )
            + pool.instances[1:],
            feature_names=pool.feature_names,
        )
        with pytest.raises(LearnloopError, match="overlaps"):
            active_learning_run(
                labeled, bad_pool, oracle=lambda d: 1, steps=1, k=2
            )

    def test_feature_mismatch_rejected(self):
        labeled, pool, truth = self.setup_run(22)
        with pytest.raises(LearnloopError, match="different features"):
            active_learning_run(
                labeled,
                pool.restrict(["f_x"]),
                oracle=lambda d: 1,
                steps=1,
                k=2,
            )
