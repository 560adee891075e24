"""components.py
The individual terms of the multi-level alignment loss.
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
from typing import Any

# Third-Party Packages #
import numpy as np

# Local Packages #
from ..exceptions import DimensionError
from ..numerics import Matrix, as_matrix, log_softmax, matmul, normalize_rows, softmax
from ..model import AlignmentModel


# Definitions #
# Functions #
def _paired(x: Any, y: Any, x_name: str, y_name: str) -> tuple[Matrix, Matrix]:
    x = as_matrix(x, x_name)
    y = as_matrix(y, y_name)
    if x.shape != y.shape:
        raise DimensionError(f"{x_name} {x.shape} and {y_name} {y.shape} differ in shape")
    return x, y


def loss_rec(f_hat: Any, f_known: Any) -> float:
    """The mean over the batch of the squared Euclidean distance between predicted and real known-subject signals.

    Args:
        f_hat: The predicted known-subject signals, B × k.
        f_known: The real known-subject signals, B × k.

    Returns:
        The reconstruction loss.
    """
    f_hat, f_known = _paired(f_hat, f_known, "F̂_K", "F_K")
    residual = f_hat - f_known
    return float(np.mean(np.sum(residual * residual, axis=1)))


def kl_rows(f_hat: Matrix, f_known: Matrix) -> tuple[np.ndarray, Matrix, Matrix]:
    """Computes KL(softmax(f̂) ‖ softmax(f)) for every row.

    Args:
        f_hat: The predicted known-subject signals, B × k.
        f_known: The real known-subject signals, B × k.

    Returns:
        The per-row divergences, the predicted distributions, and the log ratio of the two distributions.
    """
    p = softmax(f_hat)
    log_ratio = log_softmax(f_hat) - log_softmax(f_known)
    return np.sum(p * log_ratio, axis=1), p, log_ratio


def loss_kl(f_hat: Any, f_known: Any) -> float:
    """The batch mean of the KL divergence between the softmax-normalized predicted and real signals.

    Args:
        f_hat: The predicted known-subject signals, B × k.
        f_known: The real known-subject signals, B × k.

    Returns:
        The KL loss, never negative.
    """
    f_hat, f_known = _paired(f_hat, f_known, "F̂_K", "F_K")
    divergences, _, _ = kl_rows(f_hat, f_known)
    return max(0.0, float(np.mean(divergences)))


def dissimilarity_matrix(u: Any, v: Any) -> Matrix:
    """Computes the cosine dissimilarity 1 - cos(u_i, v_j) between every row of u and every row of v.

    Args:
        u: The first set of embeddings, B × width.
        v: The second set of embeddings, B' × width.

    Returns:
        The B × B' dissimilarity matrix.
    """
    u_unit, _ = normalize_rows(u, "U")
    v_unit, _ = normalize_rows(v, "V")
    if u_unit.shape[1] != v_unit.shape[1]:
        raise DimensionError(f"U and V differ in width: {u_unit.shape[1]} != {v_unit.shape[1]}")
    return 1.0 - matmul(u_unit, v_unit.T)


def latent_gap(d_functional: Matrix, d_stimulus: Matrix) -> float:
    """The mean squared element-wise difference between two dissimilarity matrices."""
    gap = d_functional - d_stimulus
    return float(np.sum(gap * gap)) / gap.size


def loss_latent(model: AlignmentModel, z_novel: Any, z_known: Any, e_novel: Any, e_known: Any) -> float:
    """Compares the dissimilarity structure of functional embeddings to that of their stimuli.

    Args:
        model: The model whose functional embedder is applied.
        z_novel: The hidden embeddings of the novel subject, B × h.
        z_known: The modulated hidden embeddings for the known subject, B × h.
        e_novel: The stimulus embeddings shown to the novel subject, B × a.
        e_known: The stimulus embeddings shown to the known subject, B × a.

    Returns:
        The latent alignment loss.
    """
    z_novel, z_known = _paired(z_novel, z_known, "z_N", "z_K")
    e_novel, e_known = _paired(e_novel, e_known, "E_N", "E_K")
    if z_novel.shape[0] != e_novel.shape[0]:
        raise DimensionError(f"z_N has {z_novel.shape[0]} rows but E_N has {e_novel.shape[0]}")
    if z_novel.shape[0] < 2:
        raise DimensionError("the latent loss needs at least 2 pairs")

    d_functional = dissimilarity_matrix(model.functional_embed(z_novel), model.functional_embed(z_known))
    d_stimulus = dissimilarity_matrix(e_novel, e_known)
    return latent_gap(d_functional, d_stimulus)


def loss_dec_proxy(model: AlignmentModel, f_hat: Any, e_novel: Any) -> float:
    """The per-element mean squared error between the decoded predicted signals and the novel stimulus embeddings.

    Args:
        model: The model whose frozen decoder is applied.
        f_hat: The predicted known-subject signals, B × k.
        e_novel: The stimulus embeddings shown to the novel subject, B × a.

    Returns:
        The proxy decoding loss.
    """
    decoded, e_novel = _paired(model.proxy_decode(f_hat), e_novel, "decoded", "E_N")
    residual = decoded - e_novel
    return float(np.mean(residual * residual))
