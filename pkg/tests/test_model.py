#!/usr/bin/env python
# -*- coding: utf-8 -*-
""" test_model.py
Tests for the model dims, parameter accounting, and the forward passes of the alignment model.
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
    NonFiniteError,
    AlignmentModel,
    Dims,
    Gradients,
    RngState,
    fit_proxy_decoder,
    gaussian,
    init_model,
    param_count,
    stimulus_difference,
)


# Definitions #
SMALL_DIMS = Dims(n=7, k=5, h=3, a=4)


# Classes #
class ClassTest:
    """Default class tests that all classes should pass."""

    class_ = None


class TestDims(ClassTest):
    class_ = Dims

    def test_rejects_non_positive(self):
        with pytest.raises(ConfigError):
            Dims(n=0, k=5, h=3, a=4)
        with pytest.raises(ConfigError):
            Dims(n=5, k=5, h=True, a=4)

    def test_dict_round_trip(self):
        assert Dims.from_dict(SMALL_DIMS.to_dict()) == SMALL_DIMS

    def test_from_dict_unknown_key(self):
        with pytest.raises(ConfigError):
            Dims.from_dict({"n": 1, "k": 1, "h": 1, "a": 1, "z": 1})

    @pytest.mark.parametrize("h", [2.5, "3", True, None])
    def test_from_dict_rejects_fractional_and_non_numbers(self, h):
        with pytest.raises(ValueError):
            Dims.from_dict({"n": 4, "k": 4, "h": h, "a": 2})

    def test_from_dict_accepts_whole_floats(self):
        assert Dims.from_dict({"n": 7.0, "k": 5, "h": 3, "a": 4}) == SMALL_DIMS


class TestParamCount(ClassTest):
    def test_full_scale_counts(self):
        counts = param_count(Dims(n=15724, k=14278, h=4096, a=768))
        assert counts.btm == 122_888_192
        assert counts.mapper == 6_299_648
        assert counts.embedder == 16_781_312
        assert counts.decoder == 14278 * 768
        assert counts.trainable == 122_888_192 + 6_299_648 + 16_781_312
        assert counts.inference == counts.btm

    def test_shares_sum_to_one(self):
        shares = param_count(SMALL_DIMS).shares
        assert sum(shares.values()) == pytest.approx(1.0)

    def test_to_dict(self):
        data = param_count(SMALL_DIMS).to_dict()
        assert data["btm"] == 7 * 3 + 3 * 5
        assert set(data["shares"]) == {"btm", "mapper", "embedder"}


class TestAlignmentModel(ClassTest):
    class_ = AlignmentModel

    @pytest.fixture
    def model(self):
        return init_model(SMALL_DIMS, RngState(seed=0))

    def test_block_shapes(self, model):
        for name, shape in AlignmentModel.block_shapes(SMALL_DIMS).items():
            assert model[name].shape == shape

    def test_init_biases_zero(self, model):
        assert not model.b_diff.any()
        assert not model.b_f.any()

    def test_init_is_deterministic(self, model):
        assert model.equals(init_model(SMALL_DIMS, RngState(seed=0)))
        assert not model.equals(init_model(SMALL_DIMS, RngState(seed=1)))

    def test_blocks_are_read_only(self, model):
        with pytest.raises(ValueError):
            model.btm_a[0, 0] = 1.0

    def test_iterates_in_checkpoint_order(self, model):
        assert tuple(model) == AlignmentModel.block_order
        with pytest.raises(KeyError):
            model["nope"]

    def test_replace(self, model):
        new = model.replace(b_f=np.ones(3))
        assert np.array_equal(new.b_f, np.ones(3))
        assert not model.b_f.any()
        with pytest.raises(KeyError):
            model.replace(other=np.ones(3))
        with pytest.raises(DimensionError):
            model.replace(b_f=np.ones(4))
        with pytest.raises(NonFiniteError):
            model.replace(b_f=np.array([1.0, np.inf, 0.0]))

    def test_missing_block(self):
        with pytest.raises(DimensionError):
            AlignmentModel(dims=SMALL_DIMS, blocks={"btm_a": np.zeros((7, 3))})

    def test_group_of(self):
        assert AlignmentModel.group_of("btm_b") == "btm"
        assert AlignmentModel.group_of("b_diff") == "mapper"
        assert AlignmentModel.group_of("w_f") == "embedder"
        with pytest.raises(KeyError):
            AlignmentModel.group_of("w_dec")

    def test_btm_apply_matches_composed(self, model):
        f = gaussian(RngState(seed=2), 6, 7)
        assert np.allclose(model.btm_apply(f), f @ model.compose_btm())

    def test_composed_rank_bounded_by_hidden(self, model):
        assert np.linalg.matrix_rank(model.compose_btm()) <= SMALL_DIMS.h

    def test_width_checked(self, model):
        with pytest.raises(DimensionError):
            model.btm_apply(np.zeros((2, 6)))

    def test_film_identity_with_zero_mapper(self, model):
        z = gaussian(RngState(seed=3), 4, 3)
        e = gaussian(RngState(seed=4), 4, 4)
        zeroed = model.without_training_modules()
        assert np.array_equal(zeroed.film_modulate(z, e), z)

    def test_film_modulation(self, model):
        z = gaussian(RngState(seed=3), 2, 3)
        e = gaussian(RngState(seed=4), 2, 4)
        gamma, beta = model.film_parameters(e)
        assert gamma.shape == beta.shape == (2, 3)
        assert np.allclose(model.film_modulate(z, e), (1.0 + gamma) * z + beta)

    def test_film_row_mismatch(self, model):
        with pytest.raises(DimensionError):
            model.film_modulate(np.zeros((3, 3)), np.zeros((2, 4)))

    def test_without_training_modules(self, model):
        zeroed = model.without_training_modules()
        for name in ("w_diff", "b_diff", "w_f", "b_f"):
            assert not zeroed[name].any()
        assert zeroed.btm_a.tobytes() == model.btm_a.tobytes()
        assert zeroed.w_dec.tobytes() == model.w_dec.tobytes()

    def test_copy_is_equal(self, model):
        assert model.copy().equals(model)


class TestGradients(ClassTest):
    class_ = Gradients

    def test_frozen_gradient_is_zero(self):
        shapes = AlignmentModel.block_shapes(SMALL_DIMS)
        grads = Gradients(SMALL_DIMS, {name: np.ones(shapes[name]) for name in AlignmentModel.trainable_blocks})
        assert not grads["w_dec"].any()
        total = sum(int(np.prod(shapes[name])) for name in AlignmentModel.trainable_blocks)
        assert grads.norm() == pytest.approx(np.sqrt(total))

    def test_missing_gradient(self):
        with pytest.raises(DimensionError):
            Gradients(SMALL_DIMS, {"btm_a": np.zeros((7, 3))})

    def test_masked(self):
        shapes = AlignmentModel.block_shapes(SMALL_DIMS)
        grads = Gradients(SMALL_DIMS, {name: np.ones(shapes[name]) for name in AlignmentModel.trainable_blocks})
        masked = grads.masked(("b_diff",))
        assert not masked["b_diff"].any()
        assert masked["btm_a"].tobytes() == grads["btm_a"].tobytes()
        assert grads["b_diff"].all()
        with pytest.raises(KeyError):
            grads.masked(("w_dec",))


class TestDecoderFit(ClassTest):
    def test_recovers_linear_decoder(self):
        rng = RngState(seed=6)
        f_known = gaussian(rng, 60, SMALL_DIMS.k)
        w_true = gaussian(rng, SMALL_DIMS.k, SMALL_DIMS.a)
        model = fit_proxy_decoder(init_model(SMALL_DIMS, rng), f_known, f_known @ w_true, lambda_=1e-10)
        assert np.allclose(model.w_dec, w_true, atol=1e-6)

    def test_row_mismatch(self):
        model = init_model(SMALL_DIMS, RngState())
        with pytest.raises(DimensionError):
            fit_proxy_decoder(model, np.zeros((4, 5)), np.zeros((3, 4)))

    def test_stimulus_difference(self):
        assert np.array_equal(stimulus_difference([[1.0, 2.0]], [[0.5, 3.0]]), [[0.5, -1.0]])
        with pytest.raises(DimensionError):
            stimulus_difference([[1.0, 2.0]], [[1.0, 2.0, 3.0]])


# Main #
if __name__ == "__main__":
    pytest.main(["-v", "-s"])
