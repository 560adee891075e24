"""linalg.py
Deterministic dense linear algebra on row-major float64 matrices.
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
from scipy.linalg import cho_factor, cho_solve

# Local Packages #
from ..exceptions import DimensionError, FactorizationError, NonFiniteError


# Definitions #
Matrix = np.ndarray
MAX_CONDITION: float = 1e12


# Functions #
def as_matrix(value: Any, name: str = "matrix") -> Matrix:
    """Casts the value to a 2-D float64 matrix, a 1-D input becomes a single row.

    Args:
        value: An array-like value.
        name: The name of the value used in error messages.

    Returns:
        The value as a C-contiguous float64 matrix.
    """
    matrix = np.ascontiguousarray(value, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix.reshape(1, -1)
    elif matrix.ndim == 0:
        matrix = matrix.reshape(1, 1)
    elif matrix.ndim != 2:
        raise DimensionError(f"{name} must have at most 2 dimensions, got {matrix.ndim}")
    return matrix


def check_finite(value: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Verifies that every entry of the array is finite.

    Args:
        value: The array to check.
        name: The name of the array used in error messages.

    Returns:
        The same array.
    """
    if not np.all(np.isfinite(value)):
        raise NonFiniteError(f"{name} contains non-finite entries")
    return value


def matmul(a: Any, b: Any) -> Matrix:
    """Computes the dense product a·b with a fixed accumulation order.

    Each output entry is accumulated as ((0 + a[i,0]·b[0,j]) + a[i,1]·b[1,j]) + ..., which is the order of a plain
    triple loop, so results are bit-identical across calls and do not depend on BLAS blocking or threading.

    Args:
        a: The left matrix, rows × inner.
        b: The right matrix, inner × cols.

    Returns:
        The product, rows × cols.
    """
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")

    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.float64)
    term = np.empty_like(out)
    for p in range(a.shape[1]):
        np.multiply(a[:, p : p + 1], b[p : p + 1, :], out=term)
        out += term
    return check_finite(out, "product")


def gram(g: Any) -> Matrix:
    """Computes gᵀg with the deterministic product."""
    g = as_matrix(g, "g")
    return matmul(g.T, g)


def ridge_pinv(g: Any, lambda_: float = 0.0) -> Matrix:
    """Computes the ridge pseudo-inverse (gᵀg + λI)⁻¹gᵀ through a Cholesky factorization.

    Args:
        g: The matrix to invert, rows × cols.
        lambda_: The non-negative ridge penalty.

    Returns:
        The pseudo-inverse, cols × rows.
    """
    if lambda_ < 0:
        raise ValueError(f"lambda must be non-negative, got {lambda_}")

    g = check_finite(as_matrix(g, "g"), "g")
    normal = gram(g)
    if lambda_ > 0:
        normal[np.diag_indices_from(normal)] += lambda_
    else:
        condition = np.linalg.cond(normal)
        if not np.isfinite(condition) or condition > MAX_CONDITION:
            raise FactorizationError(f"gᵀg is ill-conditioned (condition estimate {condition:.3e})")

    try:
        factor = cho_factor(normal, lower=True, check_finite=False)
    except np.linalg.LinAlgError as error:
        raise FactorizationError(f"gᵀg + λI is not positive definite: {error}") from error

    return check_finite(cho_solve(factor, g.T.copy(), check_finite=False), "pseudo-inverse")


def identity_residual(product: Any) -> float:
    """Returns the max-abs distance between a square product and the identity."""
    product = as_matrix(product, "product")
    if product.shape[0] != product.shape[1]:
        raise DimensionError(f"expected a square matrix, got {product.shape}")
    return float(np.max(np.abs(product - np.eye(product.shape[0]))))
