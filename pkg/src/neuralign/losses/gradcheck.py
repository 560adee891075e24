"""gradcheck.py
Verifies analytic gradients against central finite differences.
"""
# Package Header #
from ..header import *

# Header #
__author__ = __author__
__credits__ = __credits__
__maintainer__ = __maintainer__
__email__ = __email__


# Imports #
# Standard Libraries #
from dataclasses import dataclass, field
import logging
from typing import Any

# Third-Party Packages #
import numpy as np

# Local Packages #
from ..exceptions import ConfigError
from ..numerics import RngState, gaussian
from ..model import AlignmentModel, Dims, init_model
from .alignmentloss import LossCoefficients, PairedBatch, backward, forward_loss


# Definitions #
logger = logging.getLogger(__name__)

EPS_RANGE: tuple[float, float] = (1e-7, 1e-3)
DEFAULT_COORDINATES: int = 200


# Classes #
@dataclass(frozen=True)
class GradientCheck:
    """The outcome of a finite-difference gradient check.

    Attributes:
        worst: The largest relative error over every sampled coordinate.
        per_block: The largest relative error of each trainable block.
        coordinates: The number of coordinates sampled from each block.
        eps: The central-difference step.
    """

    worst: float
    per_block: dict[str, float] = field(default_factory=dict)
    coordinates: dict[str, int] = field(default_factory=dict)
    eps: float = 1e-5

    def passed(self, tolerance: float = 1e-5) -> bool:
        return self.worst <= tolerance

    def to_dict(self) -> dict[str, Any]:
        return {
            "worst_relative_error": self.worst,
            "per_block": dict(self.per_block),
            "coordinates": dict(self.coordinates),
            "eps": self.eps,
        }


# Functions #
def relative_error(analytic: float, numeric: float) -> float:
    """|analytic - numeric| / max(1e-12, |analytic| + |numeric|)."""
    return abs(analytic - numeric) / max(1e-12, abs(analytic) + abs(numeric))


def finite_diff_check(
    model: AlignmentModel,
    batch: PairedBatch,
    coeffs: LossCoefficients | None = None,
    eps: float = 1e-5,
    coordinates: int = DEFAULT_COORDINATES,
    rng: RngState | None = None,
) -> GradientCheck:
    """Compares the analytic gradient of the total loss to central differences on sampled coordinates.

    Every perturbation is applied to a private copy of the block, so the given model is never modified.

    Args:
        model: The model to check.
        batch: The pairs to evaluate on.
        coeffs: The loss weights, the defaults when None.
        eps: The central-difference step, within [1e-7, 1e-3].
        coordinates: The number of coordinates sampled per block, all of them when the block is smaller.
        rng: The random stream used to sample coordinates.

    Returns:
        The worst relative error overall and per block.
    """
    if not EPS_RANGE[0] <= eps <= EPS_RANGE[1]:
        raise ConfigError(f"eps must be within [{EPS_RANGE[0]:g}, {EPS_RANGE[1]:g}], got {eps:g}")
    if coordinates < 1:
        raise ConfigError(f"coordinates must be positive, got {coordinates}")

    coeffs = coeffs or LossCoefficients()
    rng = rng or RngState(seed=0, stream=7)
    _, gradients = backward(model, batch, coeffs)

    per_block = {}
    counts = {}
    for name in AlignmentModel.trainable_blocks:
        block = model[name]
        if block.size <= coordinates:
            flat_indices = np.arange(block.size)
        else:
            flat_indices = np.sort(rng.choice(block.size, coordinates))

        analytic = gradients[name].reshape(-1)
        worst = 0.0
        for flat_index in flat_indices:
            perturbed = block.copy()
            flat = perturbed.reshape(-1)
            original = flat[flat_index]

            flat[flat_index] = original + eps
            upper = forward_loss(model.replace(**{name: perturbed}), batch, coeffs).l_total
            flat[flat_index] = original - eps
            lower = forward_loss(model.replace(**{name: perturbed}), batch, coeffs).l_total

            numeric = (upper - lower) / (2.0 * eps)
            worst = max(worst, relative_error(float(analytic[flat_index]), numeric))

        per_block[name] = worst
        counts[name] = int(flat_indices.size)
        logger.debug("gradient check %s: %d coordinates, worst relative error %.3e", name, flat_indices.size, worst)

    return GradientCheck(worst=max(per_block.values()), per_block=per_block, coordinates=counts, eps=eps)


def gradcheck_instance(
    dims: Dims,
    batch_size: int = 3,
    seed: int = 0,
    data_std: float = 0.5,
) -> tuple[AlignmentModel, PairedBatch]:
    """Creates a random model with non-zero biases and a random batch for gradient checking.

    Args:
        dims: The model sizes.
        batch_size: The number of pairs in the batch.
        seed: The seed of every random draw.
        data_std: The standard deviation of the batch entries.

    Returns:
        The model and the batch.
    """
    model = init_model(dims, RngState(seed=seed, stream=0))
    bias_rng = RngState(seed=seed, stream=1)
    model = model.replace(
        b_diff=gaussian(bias_rng, 1, 2 * dims.h, std=0.1)[0],
        b_f=gaussian(bias_rng, 1, dims.h, std=0.1)[0],
    )

    data_rng = RngState(seed=seed, stream=2)
    batch = PairedBatch(
        f_novel=gaussian(data_rng, batch_size, dims.n, std=data_std),
        f_known=gaussian(data_rng, batch_size, dims.k, std=data_std),
        e_novel=gaussian(data_rng, batch_size, dims.a, std=data_std),
        e_known=gaussian(data_rng, batch_size, dims.a, std=data_std),
    )
    return model, batch
