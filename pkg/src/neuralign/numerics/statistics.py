"""statistics.py
Elementary statistics: correlation, softmax and cosine geometry.
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
from scipy import special

# Local Packages #
from ..exceptions import DimensionError, ZeroNormError
from .linalg import Matrix, as_matrix, matmul


# Definitions #
# Functions #
def _as_vector(value: Any, name: str) -> np.ndarray:
    vector = np.asarray(value, dtype=np.float64)
    if vector.ndim == 2 and 1 in vector.shape:
        vector = vector.reshape(-1)
    if vector.ndim != 1:
        raise DimensionError(f"{name} must be a vector, got shape {vector.shape}")
    return vector


def pearson(x: Any, y: Any) -> float | None:
    """Computes the Pearson correlation of two vectors.

    Args:
        x: The first vector.
        y: The second vector, the same length as x.

    Returns:
        The correlation in [-1, 1], or None when either vector is constant.
    """
    x = _as_vector(x, "x")
    y = _as_vector(y, "y")
    if x.shape != y.shape:
        raise DimensionError(f"x and y differ in length: {x.size} != {y.size}")
    if x.size < 2:
        raise DimensionError("pearson needs at least 2 samples")

    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        return None

    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    r = float(np.dot(dx, dy)) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def softmax(x: Any) -> np.ndarray:
    """Normalizes the last axis into a probability distribution, shifting by the max for stability."""
    return special.softmax(np.asarray(x, dtype=np.float64), axis=-1)


def log_softmax(x: Any) -> np.ndarray:
    """The log of softmax along the last axis."""
    return special.log_softmax(np.asarray(x, dtype=np.float64), axis=-1)


def normalize_rows(x: Any, name: str = "rows") -> tuple[Matrix, np.ndarray]:
    """Scales every row to unit Euclidean norm.

    Args:
        x: The matrix whose rows are normalized.
        name: The name of the matrix used in error messages.

    Returns:
        The unit-norm rows and the original row norms.
    """
    x = as_matrix(x, name)
    norms = np.sqrt(np.sum(x * x, axis=1))
    if np.any(norms == 0.0):
        raise ZeroNormError(f"{name} has zero-norm rows at {np.flatnonzero(norms == 0.0).tolist()}")
    return x / norms[:, None], norms


def cosine_similarity_matrix(u: Any, v: Any) -> Matrix:
    """Computes the cosine similarity of every row of u with every row of v."""
    u_unit, _ = normalize_rows(u, "u")
    v_unit, _ = normalize_rows(v, "v")
    if u_unit.shape[1] != v_unit.shape[1]:
        raise DimensionError(f"u and v differ in width: {u_unit.shape[1]} != {v_unit.shape[1]}")
    return matmul(u_unit, v_unit.T)


def cosine_dissimilarity(u: Any, v: Any) -> float:
    """Computes 1 - cos(u, v), a value in [0, 2].

    Args:
        u: The first non-zero vector.
        v: The second non-zero vector.

    Returns:
        The cosine dissimilarity.
    """
    u = _as_vector(u, "u")
    v = _as_vector(v, "v")
    if u.shape != v.shape:
        raise DimensionError(f"u and v differ in length: {u.size} != {v.size}")
    similarity = cosine_similarity_matrix(u, v)[0, 0]
    return float(np.clip(1.0 - similarity, 0.0, 2.0))
