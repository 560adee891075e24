#!/usr/bin/env python
# -*- coding: utf-8 -*-
""" test_train.py
Tests for the training configuration, the training loop, checkpoints, evaluation, and the hidden-size sweep.
"""
# Package Header #
from src.neuralign.header import *

# Header #
__author__ = __author__
__credits__ = __credits__
__maintainer__ = __maintainer__
__email__ = __email__


# Imports #
# Standard Libraries #
import csv
import itertools
import json

# Third-Party Packages #
import numpy as np
import pytest

# Local Packages #
from src.neuralign import (
    ChecksumError,
    ConfigError,
    DivergenceError,
    FormatError,
    FormatVersionError,
    EvalSplit,
    HISTORY_COLUMNS,
    SWEEP_COLUMNS,
    SubjectSpec,
    SyntheticWorldSpec,
    TrainConfig,
    apply_seed_override,
    binary_path,
    checkpoints_equal,
    initial_model,
    load_checkpoint,
    rank_sweep,
    report_checkpoint,
    save_checkpoint,
    seed_override,
    simulate_dataset,
    train,
    write_history_csv,
    write_sweep_csv,
)
from src.neuralign.metrics import retrieval_top1
from src.neuralign.model import Dims
from src.neuralign.numerics import RngState
from src.neuralign.train.trainer import _improves_best, _last_improvement, epoch_batches


# Definitions #
WORLD = SyntheticWorldSpec(
    latent_dim=4,
    embedding_dim=6,
    bank_size=200,
    noise_std=0.05,
    conserved_fraction=0.5,
    train_samples=40,
    eval_samples=30,
    seed=3,
    subjects=(SubjectSpec("s1", 12), SubjectSpec("s2", 10)),
)


# Functions #
def small_config(**changes):
    settings = {
        "hidden_size": 3,
        "epochs": 4,
        "eval_interval": 2,
        "batch_size": 8,
        "retrieval_candidates": 10,
        "retrieval_repeats": 3,
    }
    return TrainConfig(**(settings | changes))


def noiseless_world(**changes):
    settings = {
        "latent_dim": 16,
        "noise_std": 0.0,
        "variable_gain_spread": 0.0,
        "private_dim": 0,
        "private_std": 0.0,
        "train_samples": 800,
        "eval_samples": 200,
        "subjects": (SubjectSpec("subj01", 200), SubjectSpec("subj02", 240)),
    }
    return SyntheticWorldSpec(**(settings | changes))


def train_pair(spec, novel_id, known_id, config):
    dataset = simulate_dataset(spec)
    split = EvalSplit.from_dataset(dataset, novel_id, known_id, dataset.world())
    return train(config, dataset.recording(novel_id).train, dataset.recording(known_id).train, split)


# Classes #
class ClassTest:
    """Default class tests that all classes should pass."""

    class_ = None


class TestTrainConfig(ClassTest):
    class_ = TrainConfig

    def test_defaults(self):
        config = TrainConfig()
        assert config.batch_size == 16
        assert (config.alpha_rec, config.alpha_kl, config.alpha_latent) == (1.0, 0.001, 0.001)
        assert config.learning_rates == {"btm": 2e-3, "mapper": 2e-3, "embedder": 2e-3}
        assert config.train_mapper_bias is False

    def test_full_scale_setting(self):
        config = TrainConfig.full_scale()
        assert config.hidden_size == 4096
        assert set(config.learning_rates.values()) == {1e-5}

    def test_partial_learning_rates(self):
        config = TrainConfig(learning_rates={"mapper": 0.1})
        assert config.learning_rates["mapper"] == 0.1
        assert config.learning_rates["btm"] == 2e-3

    @pytest.mark.parametrize(
        "changes",
        [
            {"batch_size": 1},
            {"hidden_size": 0},
            {"alpha_kl": -1.0},
            {"learning_rates": {"decoder": 0.1}},
            {"train_fraction": 0.0},
            {"pretrain_decoder": "yes"},
            {"train_mapper_bias": 1},
        ],
    )
    def test_rejects_invalid(self, changes):
        with pytest.raises(ConfigError):
            TrainConfig(**changes)

    def test_from_dict_unknown_key(self):
        with pytest.raises(ConfigError):
            TrainConfig.from_dict({"hidden": 4})

    def test_json_round_trip(self, tmp_path):
        config = small_config(alpha_latent=0.0)
        config.to_json(tmp_path / "train.json")
        assert TrainConfig.from_json(tmp_path / "train.json") == config

    def test_coefficients(self):
        coeffs = small_config(alpha_rec=2.0).coefficients
        assert (coeffs.rec, coeffs.kl, coeffs.latent) == (2.0, 0.001, 0.001)


class TestSeedOverride(ClassTest):
    def test_unset(self):
        assert seed_override({}) is None
        assert seed_override({"NEURALIGN_SEED": " "}) is None

    def test_set(self):
        assert seed_override({"NEURALIGN_SEED": "42"}) == 42

    def test_invalid(self):
        with pytest.raises(ConfigError):
            seed_override({"NEURALIGN_SEED": "forty"})
        with pytest.raises(ConfigError):
            seed_override({"NEURALIGN_SEED": "-1"})

    def test_applies_to_every_seed(self):
        config = apply_seed_override(small_config(), {"NEURALIGN_SEED": "9"})
        assert config.seed_init == 9 and config.seed_data == 9
        world = apply_seed_override(WORLD, {"NEURALIGN_SEED": "9"})
        assert world.seed == 9

    def test_no_override_returns_same(self):
        config = small_config()
        assert apply_seed_override(config, {}) is config


class TestEpochBatches(ClassTest):
    def test_drops_single_row_tail(self):
        batches = epoch_batches(small_config(batch_size=16), 33, epoch=1)
        assert [b.size for b in batches] == [16, 16]

    def test_keeps_two_row_tail(self):
        batches = epoch_batches(small_config(batch_size=16), 34, epoch=1)
        assert [b.size for b in batches] == [16, 16, 2]

    def test_order_depends_on_epoch_only(self):
        config = small_config()
        first = np.concatenate(epoch_batches(config, 40, epoch=3))
        again = np.concatenate(epoch_batches(config, 40, epoch=3))
        other = np.concatenate(epoch_batches(config, 40, epoch=4))
        assert np.array_equal(first, again)
        assert not np.array_equal(first, other)
        assert sorted(first.tolist()) == list(range(40))


class TestTraining(ClassTest):
    @pytest.fixture(scope="class")
    def dataset(self):
        return simulate_dataset(WORLD)

    @pytest.fixture(scope="class")
    def world(self, dataset):
        return dataset.world()

    @pytest.fixture
    def split(self, dataset, world):
        return EvalSplit.from_dataset(dataset, "s1", "s2", world)

    def run(self, dataset, config, split=None, **kwargs):
        return train(config, dataset.recording("s1").train, dataset.recording("s2").train, split, **kwargs)

    def test_split(self, split):
        assert split.samples == 30
        assert split.m_star.shape == (12, 10)
        assert split.conserved_count == 5

    def test_split_needs_shared_stimuli(self, dataset):
        recordings = dict(dataset.recordings)
        s2 = recordings["s2"]
        shifted = type(s2)("s2", s2.train, s2.eval.subset(np.arange(29, -1, -1)))
        changed = type(dataset)(dataset.world_spec, recordings | {"s2": shifted})
        with pytest.raises(ConfigError):
            EvalSplit.from_dataset(changed, "s1", "s2")

    def test_zero_epochs_keeps_initial_model(self, dataset, split):
        config = small_config(epochs=0)
        result = self.run(dataset, config, split)
        assert result.history == []
        assert result.checkpoint.best_model is None
        init = initial_model(config, Dims(n=12, k=10, h=3, a=6), dataset.recording("s2").train)
        assert result.model.equals(init)
        assert result.report.baseline_init_fsc == result.report.fsc_mean

    def test_history_and_evaluations(self, dataset, split):
        result = self.run(dataset, small_config(), split)
        history = result.history
        assert [row["epoch"] for row in history] == [1, 2, 3, 4]
        assert history[0]["fsc_mean"] is None and history[1]["fsc_mean"] is not None
        assert all(np.isfinite(row["l_total"]) for row in history)
        assert result.checkpoint.best_epoch in (2, 4)
        assert result.checkpoint.initial_fsc is not None

    def test_report_contents(self, dataset, split):
        report = self.run(dataset, small_config(), split).report
        assert report.novel_id == "s1" and report.known_id == "s2"
        assert len(report.fsc_per_voxel) == 10
        assert len(report.tq) == 12
        assert report.retrieval_candidates == 10
        assert 0.0 <= report.retrieval_top1_image <= 1.0
        assert report.oracle_relative_error is not None
        assert set(report.block_summary) == {"conserved", "variable"}
        assert report.param_count["btm"] == 12 * 3 + 3 * 10
        assert len(report.loss_curve) == 4

    def test_deterministic(self, dataset, split):
        first = self.run(dataset, small_config(), split)
        second = self.run(dataset, small_config(), split)
        assert checkpoints_equal(first.checkpoint, second.checkpoint)

    def test_train_fraction(self, dataset):
        result = self.run(dataset, small_config(epochs=1, train_fraction=0.5, batch_size=4))
        assert result.report is None
        assert result.history[0]["epoch"] == 1
        with pytest.raises(ConfigError):
            self.run(dataset, small_config(train_fraction=0.01))

    def test_resume_matches_uninterrupted(self, dataset, split, tmp_path):
        config = small_config(epochs=6)
        full = self.run(dataset, config, split)
        partial = self.run(dataset, config, split, stop_after=3)
        assert partial.checkpoint.epoch == 3
        path = save_checkpoint(tmp_path / "partial.ckpt", partial.checkpoint)
        resumed = self.run(dataset, config, split, resume=load_checkpoint(path))
        assert checkpoints_equal(full.checkpoint, resumed.checkpoint)
        assert full.report == resumed.report

    def test_resume_with_other_dims(self, dataset, split):
        partial = self.run(dataset, small_config(epochs=1), split)
        with pytest.raises(ConfigError):
            self.run(dataset, small_config(hidden_size=4), split, resume=partial.checkpoint)

    def test_early_stopping(self, dataset, split):
        frozen = {"btm": 0.0, "mapper": 0.0, "embedder": 0.0}
        config = small_config(epochs=20, eval_interval=1, patience=1, learning_rates=frozen)
        result = self.run(dataset, config, split)
        assert result.checkpoint.stopped_early
        assert result.checkpoint.epoch == 2
        assert result.checkpoint.best_epoch == 1

    def test_mapper_bias_held_at_zero(self, dataset, split):
        model = self.run(dataset, small_config(), split).checkpoint.model
        assert not np.any(model.b_diff)
        z_novel = model.encode_latent(split.f_novel)
        same_stimulus = np.zeros_like(split.embeddings)
        mapped = model.decode_latent(model.film_modulate(z_novel, same_stimulus))
        assert np.array_equal(mapped, model.btm_apply(split.f_novel))

    def test_mapper_bias_trained_when_enabled(self, dataset, split):
        model = self.run(dataset, small_config(train_mapper_bias=True), split).checkpoint.model
        assert np.any(model.b_diff)

    def test_divergence(self, dataset, split):
        config = small_config(learning_rates={"btm": 1e150, "mapper": 1e150, "embedder": 1e150})
        with pytest.raises(DivergenceError) as error:
            self.run(dataset, config, split)
        assert error.value.epoch >= 1
        assert error.value.checkpoint.epoch == error.value.epoch - 1

    def test_report_checkpoint_matches_training(self, dataset, world, split, tmp_path):
        result = self.run(dataset, small_config(), split)
        path = save_checkpoint(tmp_path / "run.ckpt", result.checkpoint)
        assert report_checkpoint(load_checkpoint(path), dataset, world) == result.report

    def test_history_csv(self, dataset, split, tmp_path):
        result = self.run(dataset, small_config(), split)
        path = write_history_csv(result.history, tmp_path / "history.csv")
        with path.open(newline="", encoding="utf-8") as file:
            rows = list(csv.reader(file))
        assert tuple(rows[0]) == HISTORY_COLUMNS
        assert len(rows) == 5
        assert rows[1][0] == "1" and rows[1][6] == ""
        assert float(rows[2][6]) == result.history[1]["fsc_mean"]


class TestModelSelection(ClassTest):
    HISTORY = [
        {"epoch": 1, "fsc_mean": None, "transfer_error": None},
        {"epoch": 2, "fsc_mean": 0.5, "transfer_error": 0.4},
        {"epoch": 4, "fsc_mean": 0.5, "transfer_error": 0.3},
        {"epoch": 6, "fsc_mean": 0.45, "transfer_error": 0.35},
    ]

    def test_last_improvement_counts_either_metric(self):
        assert _last_improvement(self.HISTORY) == 4
        assert _last_improvement(self.HISTORY + [{"epoch": 8, "fsc_mean": 0.4, "transfer_error": 0.2}]) == 8
        assert _last_improvement(self.HISTORY[:1]) == 0

    def test_higher_fsc_replaces_best(self):
        assert _improves_best(0.6, 0.9, 2, 0.5, self.HISTORY[:2])
        assert _improves_best(0.1, 0.9, None, None, [])

    def test_lower_fsc_never_replaces_best(self):
        assert not _improves_best(0.45, 0.01, 2, 0.5, self.HISTORY[:2])

    def test_equal_fsc_needs_lower_error(self):
        assert _improves_best(0.5, 0.3, 2, 0.5, self.HISTORY[:2])
        assert not _improves_best(0.5, 0.4, 2, 0.5, self.HISTORY[:2])


class TestCheckpoint(ClassTest):
    @pytest.fixture(scope="class")
    def result(self):
        dataset = simulate_dataset(WORLD)
        split = EvalSplit.from_dataset(dataset, "s1", "s2")
        return train(small_config(), dataset.recording("s1").train, dataset.recording("s2").train, split)

    def test_round_trip(self, result, tmp_path):
        path = save_checkpoint(tmp_path / "run.ckpt", result.checkpoint)
        loaded = load_checkpoint(path)
        assert checkpoints_equal(result.checkpoint, loaded)
        assert loaded.best_model is not None
        assert loaded.optimizer.t == result.checkpoint.optimizer.t
        assert not (tmp_path / "run.ckpt.incomplete").exists()

    def test_header(self, result, tmp_path):
        path = save_checkpoint(tmp_path / "run.ckpt", result.checkpoint)
        header = json.loads(path.read_text(encoding="utf-8"))
        assert header["binary_file"] == "run.ckpt.bin"
        assert header["block_order"][-1] == "w_dec"
        assert header["dims"]["h"] == 3

    def test_corrupted_binary(self, result, tmp_path):
        path = save_checkpoint(tmp_path / "run.ckpt", result.checkpoint)
        data = bytearray(binary_path(path).read_bytes())
        data[10] ^= 0xFF
        binary_path(path).write_bytes(bytes(data))
        with pytest.raises(ChecksumError):
            load_checkpoint(path)

    def test_unsupported_version(self, result, tmp_path):
        path = save_checkpoint(tmp_path / "run.ckpt", result.checkpoint)
        header = json.loads(path.read_text(encoding="utf-8"))
        header["version"] = "2.0.0"
        path.write_text(json.dumps(header), encoding="utf-8")
        with pytest.raises(FormatVersionError):
            load_checkpoint(path)

    def test_missing_binary(self, result, tmp_path):
        path = save_checkpoint(tmp_path / "run.ckpt", result.checkpoint)
        binary_path(path).unlink()
        with pytest.raises(FormatError):
            load_checkpoint(path)

    def test_not_a_checkpoint(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text("{}", encoding="utf-8")
        with pytest.raises(FormatError):
            load_checkpoint(path)


class TestSweep(ClassTest):
    def test_failed_row_does_not_abort(self, tmp_path):
        dataset = simulate_dataset(WORLD)
        rows = rank_sweep(small_config(epochs=2), [0, 2], dataset, "s1", "s2")
        assert [row.hidden_size for row in rows] == [0, 2]
        assert rows[0].status == "failed:ConfigError" and not rows[0].succeeded
        assert rows[1].succeeded
        assert rows[1].btm_params == 12 * 2 + 2 * 10

        path = write_sweep_csv(rows, tmp_path / "sweep.csv")
        with path.open(newline="", encoding="utf-8") as file:
            table = list(csv.reader(file))
        assert tuple(table[0]) == SWEEP_COLUMNS
        assert table[1][:3] == ["0", "failed:ConfigError", ""]
        assert table[2][1] == "ok"


class TestExperiments(ClassTest):
    @pytest.fixture(scope="class")
    def noiseless_sweep(self):
        rows = rank_sweep(TrainConfig(), [1, 2, 16, 32], simulate_dataset(noiseless_world()), "subj01", "subj02")
        return {row.hidden_size: row for row in rows}

    @pytest.mark.slow
    def test_noiseless_transfer_recovers_the_oracle(self):
        report = train_pair(noiseless_world(), "subj01", "subj02", TrainConfig(hidden_size=32)).report
        assert report.oracle_relative_error < 1e-6
        assert report.transfer_relative_error < 0.05
        assert report.fsc_mean >= 0.95
        assert report.baseline_init_fsc < 0.2

    @pytest.mark.slow
    def test_full_rank_hidden_size_reaches_the_oracle(self, noiseless_sweep):
        assert all(row.succeeded for row in noiseless_sweep.values())
        assert noiseless_sweep[16].transfer_error < 0.05
        assert noiseless_sweep[32].transfer_error < 0.05
        assert noiseless_sweep[1].transfer_error >= 0.05

    @pytest.mark.slow
    def test_error_falls_with_hidden_size(self, noiseless_sweep):
        small = min(noiseless_sweep[1].transfer_error, noiseless_sweep[2].transfer_error)
        large = max(noiseless_sweep[16].transfer_error, noiseless_sweep[32].transfer_error)
        assert 3.0 * large <= small

    @pytest.mark.slow
    def test_every_pair_beats_both_baselines(self):
        spec = SyntheticWorldSpec(
            bank_size=3000,
            noise_std=0.05,
            subjects=(SubjectSpec("subj01", 400), SubjectSpec("subj02", 300), SubjectSpec("subj03", 350)),
        )
        dataset = simulate_dataset(spec)
        world = dataset.world()
        config = TrainConfig(epochs=100)
        for novel_id, known_id in itertools.permutations(("subj01", "subj02", "subj03"), 2):
            split = EvalSplit.from_dataset(dataset, novel_id, known_id, world)
            novel, known = dataset.recording(novel_id).train, dataset.recording(known_id).train
            report = train(config, novel, known, split).report
            assert report.fsc_mean >= report.baseline_identity_fsc + 0.3, (novel_id, known_id)
            assert report.fsc_mean >= report.baseline_init_fsc + 0.3, (novel_id, known_id)

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_variable_block_stands_out(self, seed):
        spec = SyntheticWorldSpec(conserved_fraction=0.3, seed=seed)
        config = TrainConfig(epochs=100, seed_init=seed, seed_data=seed)
        blocks = train_pair(spec, "subj01", "subj02", config).report.block_summary
        assert blocks["variable"]["tq_deviation"] > blocks["conserved"]["tq_deviation"]
        assert blocks["conserved"]["fsc_mean"] > blocks["variable"]["fsc_mean"]

    @pytest.mark.slow
    def test_retrieval_beats_chance(self):
        config = TrainConfig(retrieval_candidates=300, retrieval_repeats=30)
        spec = noiseless_world(eval_samples=300)
        result = train_pair(spec, "subj01", "subj02", config)
        assert result.report.retrieval_candidates == 300
        assert result.report.retrieval_top1_image >= 0.167

        dataset = simulate_dataset(spec)
        split = EvalSplit.from_dataset(dataset, "subj01", "subj02")
        decoded = result.model.proxy_decode(result.model.btm_apply(split.f_novel))
        order = RngState(seed=11, stream=0).permutation(split.samples)
        derangement = np.empty_like(order)
        derangement[order] = np.roll(order, -1)
        shuffled = split.embeddings[derangement]
        top1 = retrieval_top1(decoded, shuffled, 300, 30, RngState(seed=12, stream=0))
        chance = 1.0 / 300
        assert abs(top1 - chance) <= 3.0 * np.sqrt(chance * (1.0 - chance) / split.samples)

    @pytest.mark.slow
    def test_learned_transfer_beats_baselines(self):
        spec = SyntheticWorldSpec(
            latent_dim=8,
            embedding_dim=16,
            bank_size=1200,
            noise_std=0.05,
            conserved_fraction=0.3,
            train_samples=400,
            eval_samples=200,
            seed=0,
            subjects=(SubjectSpec("subj01", 60), SubjectSpec("subj02", 50)),
        )
        dataset = simulate_dataset(spec)
        split = EvalSplit.from_dataset(dataset, "subj01", "subj02", dataset.world())
        config = TrainConfig(hidden_size=8, epochs=60, eval_interval=5, patience=0)
        report = train(config, dataset.recording("subj01").train, dataset.recording("subj02").train, split).report
        assert report.fsc_mean > report.baseline_init_fsc
        assert report.fsc_mean > report.baseline_identity_fsc
        assert report.transfer_relative_error < 1.0

    @pytest.mark.slow
    def test_rank_sweep_improves_with_hidden_size(self):
        spec = SyntheticWorldSpec(
            latent_dim=8,
            embedding_dim=16,
            bank_size=1200,
            train_samples=400,
            eval_samples=200,
            subjects=(SubjectSpec("subj01", 60), SubjectSpec("subj02", 50)),
        )
        rows = rank_sweep(TrainConfig(epochs=40, patience=0), [1, 8], simulate_dataset(spec), "subj01", "subj02")
        assert all(row.succeeded for row in rows)
        assert rows[1].fsc_mean > rows[0].fsc_mean


# Main #
if __name__ == "__main__":
    pytest.main(["-v", "-s"])
