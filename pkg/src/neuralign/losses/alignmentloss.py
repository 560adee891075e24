"""alignmentloss.py
The combined alignment loss over a batch of cross-subject pairs and its analytic gradients.
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
from collections.abc import Mapping
from dataclasses import dataclass, field
import math
from typing import Any

# Third-Party Packages #
import numpy as np

# Local Packages #
from ..exceptions import ConfigError, DimensionError
from ..numerics import Matrix, as_matrix, matmul, normalize_rows
from ..model import AlignmentModel, Gradients, stimulus_difference
from .components import kl_rows, latent_gap


# Definitions #
# Classes #
@dataclass(frozen=True)
class LossCoefficients:
    """The weights of the reconstruction, KL and latent terms; the proxy decoding term always has weight 1.

    Attributes:
        rec: The reconstruction weight α_rec.
        kl: The KL weight α_KL.
        latent: The latent alignment weight α_la.
    """

    rec: float = 1.0
    kl: float = 0.001
    latent: float = 0.001

    def __post_init__(self) -> None:
        for name in ("rec", "kl", "latent"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value < 0:
                raise ConfigError(f"loss coefficient {name} must be a finite non-negative number, got {value!r}")
            object.__setattr__(self, name, float(value))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LossCoefficients":
        return cls(**{name: data[name] for name in ("rec", "kl", "latent") if name in data})

    def to_dict(self) -> dict[str, float]:
        return {"rec": self.rec, "kl": self.kl, "latent": self.latent}


@dataclass(frozen=True, eq=False)
class PairedBatch:
    """A batch of cross-subject pairs whose stimuli are similar.

    Attributes:
        f_novel: The novel subject's signals, B × n.
        f_known: The known subject's signals, B × k.
        e_novel: The stimulus embeddings shown to the novel subject, B × a.
        e_known: The stimulus embeddings shown to the known subject, B × a.
        novel_index: The rows of the novel subject's session the pairs came from.
        known_index: The rows of the known subject's session the pairs came from.
    """

    f_novel: Matrix
    f_known: Matrix
    e_novel: Matrix
    e_known: Matrix
    novel_index: np.ndarray | None = None
    known_index: np.ndarray | None = None

    def __post_init__(self) -> None:
        for name in ("f_novel", "f_known", "e_novel", "e_known"):
            object.__setattr__(self, name, as_matrix(getattr(self, name), name))
        rows = {self.f_novel.shape[0], self.f_known.shape[0], self.e_novel.shape[0], self.e_known.shape[0]}
        if len(rows) != 1:
            raise DimensionError(f"batch members disagree in row count: {sorted(rows)}")
        if self.size < 2:
            raise DimensionError(f"a batch needs at least 2 pairs, got {self.size}")
        if self.e_novel.shape[1] != self.e_known.shape[1]:
            raise DimensionError("E_N and E_K differ in width")

    @property
    def size(self) -> int:
        return self.f_novel.shape[0]

    def check_model(self, model: AlignmentModel) -> None:
        """Verifies that the batch widths match the model."""
        dims = model.dims
        expected = {"f_novel": dims.n, "f_known": dims.k, "e_novel": dims.a, "e_known": dims.a}
        for name, width in expected.items():
            if getattr(self, name).shape[1] != width:
                raise DimensionError(f"{name} has width {getattr(self, name).shape[1]}, the model expects {width}")


@dataclass(frozen=True)
class LossBreakdown:
    """The terms of the alignment loss for one batch.

    Attributes:
        l_rec: The reconstruction loss.
        l_kl: The KL loss.
        l_latent: The latent alignment loss, 0 when its weight is zero.
        l_dec: The proxy decoding loss.
        l_total: l_dec + α_rec·l_rec + α_KL·l_kl + α_la·l_latent.
        coefficients: The weights the total was combined with.
    """

    l_rec: float
    l_kl: float
    l_latent: float
    l_dec: float
    l_total: float
    coefficients: LossCoefficients = field(default_factory=LossCoefficients)

    @classmethod
    def combine(
        cls,
        l_rec: float,
        l_kl: float,
        l_latent: float,
        l_dec: float,
        coefficients: LossCoefficients,
    ) -> "LossBreakdown":
        total = l_dec + coefficients.rec * l_rec + coefficients.kl * l_kl + coefficients.latent * l_latent
        return cls(l_rec, l_kl, l_latent, l_dec, total, coefficients)

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.l_rec, self.l_kl, self.l_latent, self.l_dec, self.l_total))

    def to_dict(self) -> dict[str, float]:
        return {
            "l_total": self.l_total,
            "l_rec": self.l_rec,
            "l_kl": self.l_kl,
            "l_latent": self.l_latent,
            "l_dec": self.l_dec,
        }


@dataclass(frozen=True, eq=False)
class ForwardCache:
    """The intermediate values of one forward pass that the backward pass reuses.

    The latent alignment values are None when the latent weight is zero.
    """

    e_diff: Matrix
    z_novel: Matrix
    gamma: Matrix
    beta: Matrix
    z_known: Matrix
    f_hat: Matrix
    u: Matrix | None
    v: Matrix | None
    u_unit: Matrix | None
    v_unit: Matrix | None
    u_norms: np.ndarray | None
    v_norms: np.ndarray | None
    d_functional: Matrix | None
    d_stimulus: Matrix | None
    kl_p: Matrix
    kl_log_ratio: Matrix
    kl_rows: np.ndarray
    decoded: Matrix
    breakdown: LossBreakdown


# Functions #
def forward(model: AlignmentModel, batch: PairedBatch, coeffs: LossCoefficients) -> ForwardCache:
    """Runs the training pipeline over a batch and keeps every intermediate value.

    Args:
        model: The model to evaluate.
        batch: The pairs to evaluate on.
        coeffs: The loss weights.

    Returns:
        The forward cache, including the loss breakdown.
    """
    batch.check_model(model)
    e_diff = stimulus_difference(batch.e_novel, batch.e_known)
    z_novel = model.encode_latent(batch.f_novel)
    gamma, beta = model.film_parameters(e_diff)
    z_known = (1.0 + gamma) * z_novel + beta
    f_hat = model.decode_latent(z_known)

    residual = f_hat - batch.f_known
    l_rec = float(np.mean(np.sum(residual * residual, axis=1)))

    kl, p, log_ratio = kl_rows(f_hat, batch.f_known)
    l_kl = max(0.0, float(np.mean(kl)))

    # Latent alignment, skipped at zero weight
    u = v = u_unit = v_unit = u_norms = v_norms = d_functional = d_stimulus = None
    l_latent = 0.0
    if coeffs.latent > 0:
        u = model.functional_embed(z_novel)
        v = model.functional_embed(z_known)
        u_unit, u_norms = normalize_rows(u, "E_f(z_N)")
        v_unit, v_norms = normalize_rows(v, "E_f(z_K)")
        d_functional = 1.0 - matmul(u_unit, v_unit.T)
        e_novel_unit, _ = normalize_rows(batch.e_novel, "E_N")
        e_known_unit, _ = normalize_rows(batch.e_known, "E_K")
        d_stimulus = 1.0 - matmul(e_novel_unit, e_known_unit.T)
        l_latent = latent_gap(d_functional, d_stimulus)

    decoded = model.proxy_decode(f_hat)
    decoded_residual = decoded - batch.e_novel
    l_dec = float(np.mean(decoded_residual * decoded_residual))

    return ForwardCache(
        e_diff=e_diff,
        z_novel=z_novel,
        gamma=gamma,
        beta=beta,
        z_known=z_known,
        f_hat=f_hat,
        u=u,
        v=v,
        u_unit=u_unit,
        v_unit=v_unit,
        u_norms=u_norms,
        v_norms=v_norms,
        d_functional=d_functional,
        d_stimulus=d_stimulus,
        kl_p=p,
        kl_log_ratio=log_ratio,
        kl_rows=kl,
        decoded=decoded,
        breakdown=LossBreakdown.combine(l_rec, l_kl, l_latent, l_dec, coeffs),
    )


def forward_loss(model: AlignmentModel, batch: PairedBatch, coeffs: LossCoefficients | None = None) -> LossBreakdown:
    """Computes every term of the alignment loss over a batch.

    Args:
        model: The model to evaluate.
        batch: The pairs to evaluate on.
        coeffs: The loss weights, the defaults when None.

    Returns:
        The loss breakdown.
    """
    return forward(model, batch, coeffs or LossCoefficients()).breakdown


def _unit_rows_backward(unit: Matrix, norms: np.ndarray, d_unit: Matrix) -> Matrix:
    # d(u/‖u‖) projected onto the tangent of the unit sphere
    radial = np.sum(unit * d_unit, axis=1, keepdims=True)
    return (d_unit - unit * radial) / norms[:, None]


def backward(
    model: AlignmentModel,
    batch: PairedBatch,
    coeffs: LossCoefficients | None = None,
) -> tuple[LossBreakdown, Gradients]:
    """Computes the alignment loss and its exact gradients with respect to every trainable block.

    Args:
        model: The model to differentiate.
        batch: The pairs to evaluate on.
        coeffs: The loss weights, the defaults when None.

    Returns:
        The loss breakdown and the gradients, where the frozen decoder's gradient is zero.
    """
    coeffs = coeffs or LossCoefficients()
    cache = forward(model, batch, coeffs)
    size = batch.size
    a = model.dims.a

    # Output space
    d_f_hat = np.zeros_like(cache.f_hat)
    if coeffs.rec > 0:
        d_f_hat += (coeffs.rec * 2.0 / size) * (cache.f_hat - batch.f_known)
    if coeffs.kl > 0:
        d_f_hat += (coeffs.kl / size) * cache.kl_p * (cache.kl_log_ratio - cache.kl_rows[:, None])
    d_decoded = (2.0 / (size * a)) * (cache.decoded - batch.e_novel)
    d_f_hat += matmul(d_decoded, model.w_dec.T)

    d_btm_b = matmul(cache.z_known.T, d_f_hat)
    d_z_known = matmul(d_f_hat, model.btm_b.T)
    d_z_novel = np.zeros_like(cache.z_novel)

    # Latent alignment
    d_w_f = np.zeros_like(model.w_f)
    d_b_f = np.zeros_like(model.b_f)
    if coeffs.latent > 0:
        d_dissimilarity = (coeffs.latent * 2.0 / cache.d_functional.size) * (cache.d_functional - cache.d_stimulus)
        d_similarity = -d_dissimilarity
        d_u = _unit_rows_backward(cache.u_unit, cache.u_norms, matmul(d_similarity, cache.v_unit))
        d_v = _unit_rows_backward(cache.v_unit, cache.v_norms, matmul(d_similarity.T, cache.u_unit))
        d_w_f = matmul(cache.z_novel.T, d_u) + matmul(cache.z_known.T, d_v)
        d_b_f = np.sum(d_u, axis=0) + np.sum(d_v, axis=0)
        d_z_novel += matmul(d_u, model.w_f.T)
        d_z_known += matmul(d_v, model.w_f.T)

    # Cross-stimulus modulation
    d_gamma = d_z_known * cache.z_novel
    d_beta = d_z_known
    d_z_novel += d_z_known * (1.0 + cache.gamma)
    d_z_diff = np.concatenate([d_gamma, d_beta], axis=1)
    d_w_diff = matmul(cache.e_diff.T, d_z_diff)
    d_b_diff = np.sum(d_z_diff, axis=0)

    d_btm_a = matmul(batch.f_novel.T, d_z_novel)

    gradients = Gradients(
        dims=model.dims,
        blocks={
            "btm_a": d_btm_a,
            "btm_b": d_btm_b,
            "w_diff": d_w_diff,
            "b_diff": d_b_diff,
            "w_f": d_w_f,
            "b_f": d_b_f,
        },
    )
    return cache.breakdown, gradients
