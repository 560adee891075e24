"""exceptions.py
The errors raised by neuralign, each subclassing the builtin a caller would otherwise catch.
"""
# Package Header #
from .header import *

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


# Definitions #
# Classes #
class DimensionError(ValueError):
    """Raised when the shapes of operands do not agree."""


class NonFiniteError(ArithmeticError):
    """Raised when an operation produces NaN or Inf entries."""


class FactorizationError(np.linalg.LinAlgError):
    """Raised when a symmetric positive-definite factorization fails or is ill-conditioned."""


class RankDeficiencyError(FactorizationError):
    """Raised when a simulated mixing map stays rank deficient after resampling."""


class ZeroNormError(ValueError):
    """Raised when a cosine computation receives a zero-norm vector."""


class ConfigError(ValueError):
    """Raised when a configuration document is malformed."""


class FormatError(OSError):
    """Raised when a dataset or checkpoint on disk does not match its declared format."""


class ChecksumError(FormatError):
    """Raised when a binary file does not match the checksum recorded for it."""


class FormatVersionError(FormatError):
    """Raised when a file was written by an unsupported format version."""


class DivergenceError(ArithmeticError):
    """Raised when training produces a non-finite loss.

    Attributes:
        checkpoint: The last checkpoint whose losses were all finite.
        epoch: The epoch in which the divergence occurred.

    Args:
        message: The error message.
        checkpoint: The last checkpoint whose losses were all finite.
        epoch: The epoch in which the divergence occurred.
    """

    def __init__(self, message: str, checkpoint: Any = None, epoch: int | None = None) -> None:
        super().__init__(message)
        self.checkpoint: Any = checkpoint
        self.epoch: int | None = epoch
