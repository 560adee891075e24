#!/usr/bin/env python
# -*- coding: utf-8 -*-
""" test_metrics.py
Tests for spatial correlation, transfer quantity, retrieval, transfer error, and the metrics report.
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

# Third-Party Packages #
import numpy as np
import pytest

# Local Packages #
from src.neuralign import (
    ConfigError,
    DimensionError,
    ZeroNormError,
    MetricsReport,
    RngState,
    TQ_CONVENTION,
    block_summary,
    fsc,
    gaussian,
    read_tq_csv,
    relative_transfer_error,
    retrieval_top1,
    tq,
    tq_agreement,
    transfer_error,
    write_tq_csv,
)


# Definitions #
# Classes #
class ClassTest:
    """Default class tests that all classes should pass."""

    class_ = None


class TestSpatialCorrelation(ClassTest):
    def test_perfect_prediction(self):
        target = gaussian(RngState(seed=1), 20, 6)
        correlation = fsc(target * 3.0 + 1.0, target)
        assert correlation.mean == pytest.approx(1.0)
        assert np.allclose(correlation.per_voxel, 1.0)
        assert correlation.excluded == 0

    def test_inverted_prediction(self):
        target = gaussian(RngState(seed=1), 20, 6)
        per_voxel, mean = fsc(-target, target)
        assert mean == pytest.approx(-1.0)
        assert np.allclose(per_voxel, -1.0)

    def test_constant_voxel_excluded(self):
        target = gaussian(RngState(seed=2), 10, 3)
        pred = target.copy()
        pred[:, 1] = 0.5
        correlation = fsc(pred, target)
        assert correlation.excluded == 1
        assert correlation.per_voxel[1] == 0.0
        assert not correlation.defined[1]
        assert correlation.mean == pytest.approx(1.0)

    def test_all_constant(self):
        correlation = fsc(np.ones((4, 2)), gaussian(RngState(), 4, 2))
        assert correlation.mean == 0.0
        assert correlation.excluded == 2

    def test_shape_checks(self):
        with pytest.raises(DimensionError):
            fsc(np.zeros((5, 2)), np.zeros((5, 3)))
        with pytest.raises(DimensionError):
            fsc(np.zeros((1, 2)), np.zeros((1, 2)))


class TestTransferQuantity(ClassTest):
    def test_row_sums(self):
        assert np.array_equal(tq([[1.0, -2.0], [0.0, 3.0]]), [3.0, 3.0])

    def test_absolute_homogeneity(self):
        m = gaussian(RngState(seed=3), 5, 4)
        assert np.array_equal(tq(-4.0 * m), 4.0 * tq(m))

    def test_non_negative(self):
        assert np.all(tq(gaussian(RngState(seed=4), 6, 3)) >= 0.0)

    def test_agreement(self):
        values = np.array([1.0, 2.0, 4.0])
        assert tq_agreement(values, 2.0 * values) == pytest.approx(1.0)
        assert tq_agreement(values, np.ones(3)) is None

    def test_csv_round_trip(self, tmp_path):
        values = tq(gaussian(RngState(seed=5), 7, 3))
        path = write_tq_csv(values, tmp_path / "tq.csv")
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "voxel_index,tq"
        assert len(lines) == 8
        assert lines[3].startswith("2,")
        assert np.array_equal(read_tq_csv(path), values)

    def test_csv_header_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n0,1.0\n", encoding="utf-8")
        with pytest.raises(DimensionError):
            read_tq_csv(path)

    def test_block_summary(self):
        tq_values = np.array([1.0, 1.0, 3.0, 5.0])
        target = gaussian(RngState(seed=6), 8, 3)
        summary = block_summary(tq_values, fsc(target, target), conserved_count=2)
        assert summary["conserved"]["voxels"] == 2
        assert summary["variable"]["voxels"] == 2
        assert summary["conserved"]["tq_mean"] == pytest.approx(1.0)
        assert summary["variable"]["tq_mean"] == pytest.approx(4.0)
        assert summary["conserved"]["tq_deviation"] == pytest.approx(1.0)
        assert summary["variable"]["tq_deviation"] == pytest.approx(2.0)
        assert summary["conserved"]["fsc_mean"] == pytest.approx(1.0)


class TestRetrieval(ClassTest):
    def test_perfect_match(self):
        gallery = gaussian(RngState(seed=7), 40, 8)
        assert retrieval_top1(gallery, gallery, candidates_per_trial=20, repeats=5) == 1.0

    def test_chance_level(self):
        rng = RngState(seed=8)
        queries = gaussian(rng, 100, 8)
        gallery = gaussian(rng, 100, 8)
        score = retrieval_top1(queries, gallery, candidates_per_trial=10, repeats=50, rng=RngState(seed=9))
        assert 0.02 < score < 0.25

    def test_single_candidate(self):
        gallery = gaussian(RngState(seed=7), 5, 3)
        assert retrieval_top1(-gallery, gallery, candidates_per_trial=1, repeats=2) == 1.0

    def test_deterministic(self):
        rng = RngState(seed=10)
        queries = gaussian(rng, 30, 4)
        gallery = gaussian(rng, 30, 4)
        first = retrieval_top1(queries, gallery, 10, 5, RngState(seed=1))
        assert first == retrieval_top1(queries, gallery, 10, 5, RngState(seed=1))

    @pytest.mark.parametrize("kwargs", [{"candidates_per_trial": 0}, {"candidates_per_trial": 41}, {"repeats": 0}])
    def test_rejects_invalid(self, kwargs):
        gallery = gaussian(RngState(seed=7), 40, 8)
        with pytest.raises(ConfigError):
            retrieval_top1(gallery, gallery, **kwargs)


class TestTransferError(ClassTest):
    def test_zero_transfer(self):
        rng = RngState(seed=11)
        f_n = gaussian(rng, 10, 4)
        f_k = gaussian(rng, 10, 3)
        assert relative_transfer_error(np.zeros((4, 3)), f_n, f_k) == pytest.approx(1.0)

    def test_exact_transfer(self):
        rng = RngState(seed=12)
        f_n = gaussian(rng, 10, 4)
        m = gaussian(rng, 4, 3)
        errors = transfer_error(m, m, f_n, f_n @ m)
        assert errors.error < 1e-12
        assert errors.oracle_error < 1e-12

    def test_without_oracle(self):
        rng = RngState(seed=13)
        errors = transfer_error(np.zeros((2, 2)), None, gaussian(rng, 3, 2), gaussian(rng, 3, 2))
        assert errors.oracle_error is None

    def test_zero_target(self):
        with pytest.raises(ZeroNormError):
            relative_transfer_error(np.ones((2, 2)), np.ones((3, 2)), np.zeros((3, 2)))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            relative_transfer_error(np.ones((3, 2)), np.ones((3, 2)), np.ones((3, 2)))


class TestMetricsReport(ClassTest):
    class_ = MetricsReport

    @pytest.fixture
    def report(self):
        return MetricsReport(
            novel_id="s1",
            known_id="s2",
            eval_samples=30,
            fsc_mean=0.75,
            fsc_per_voxel=[0.5, 1.0],
            tq=[1.25, 2.5, 0.125],
            block_summary={"conserved": {"voxels": 1, "tq_mean": 1.25, "tq_deviation": 0.0, "fsc_mean": 0.5}},
            retrieval_top1_image=0.5,
            transfer_relative_error=0.25,
            oracle_relative_error=None,
            loss_curve=[{"epoch": 1, "l_total": 3.0, "fsc_mean": None}],
        )

    def test_json_round_trip(self, report):
        assert MetricsReport.from_json(report.to_json()) == report

    def test_file_round_trip(self, report, tmp_path):
        path = report.write(tmp_path / "report.json")
        assert MetricsReport.read(path) == report

    def test_convention_recorded(self, report):
        assert report.to_dict()["tq_convention"] == TQ_CONVENTION

    def test_unknown_field(self):
        with pytest.raises(ConfigError):
            MetricsReport.from_dict({"fsc_mean": 0.1, "other": 1})

    def test_inference_metrics(self, report):
        assert set(report.inference_metrics()) == {"fsc_mean", "fsc_per_voxel", "tq", "transfer_relative_error"}


# Main #
if __name__ == "__main__":
    pytest.main(["-v", "-s"])
