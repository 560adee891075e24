"""transfer.py
The functional error of a transfer matrix against held-out shared-stimulus signals.
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
from typing import Any, NamedTuple

# Third-Party Packages #
import numpy as np

# Local Packages #
from ..exceptions import DimensionError, ZeroNormError
from ..numerics import as_matrix, matmul


# Definitions #
# Classes #
class TransferError(NamedTuple):
    """The relative error of a transfer matrix and of the ground-truth transfer."""

    error: float
    oracle_error: float | None


# Functions #
def relative_transfer_error(m: Any, f_novel: Any, f_known: Any) -> float:
    """‖F_N·M − F_K‖_F / ‖F_K‖_F."""
    m = as_matrix(m, "M")
    f_novel = as_matrix(f_novel, "F_N")
    f_known = as_matrix(f_known, "F_K")
    if f_novel.shape[0] != f_known.shape[0] or m.shape != (f_novel.shape[1], f_known.shape[1]):
        raise DimensionError(f"cannot compare F_N {f_novel.shape}·M {m.shape} with F_K {f_known.shape}")
    scale = float(np.linalg.norm(f_known))
    if scale == 0.0:
        raise ZeroNormError("F_K is all zeros")
    return float(np.linalg.norm(matmul(f_novel, m) - f_known)) / scale


def transfer_error(m: Any, m_star: Any | None, f_novel: Any, f_known: Any) -> TransferError:
    """Computes the relative functional error of a transfer matrix and, when given, of the oracle transfer.

    Args:
        m: The learned transfer matrix, n × k.
        m_star: The ground-truth transfer matrix, n × k, or None.
        f_novel: The novel subject's shared-stimulus signals, S × n.
        f_known: The known subject's shared-stimulus signals, S × k.

    Returns:
        The error and the oracle floor.
    """
    error = relative_transfer_error(m, f_novel, f_known)
    oracle = None if m_star is None else relative_transfer_error(m_star, f_novel, f_known)
    return TransferError(error, oracle)
