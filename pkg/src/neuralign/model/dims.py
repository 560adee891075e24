"""dims.py
The sizes of an alignment model and the parameter accounting derived from them.
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
from dataclasses import asdict, dataclass
from typing import Any

# Third-Party Packages #

# Local Packages #
from ..exceptions import ConfigError


# Definitions #
# Classes #
@dataclass(frozen=True)
class Dims:
    """The sizes of an alignment model.

    Attributes:
        n: The novel subject's voxel count.
        k: The known subject's voxel count.
        h: The hidden size of the low-rank transfer.
        a: The stimulus-embedding size.
        d_latentworld: The simulator's latent size, carried for bookkeeping only.
    """

    n: int
    k: int
    h: int
    a: int
    d_latentworld: int = 1

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"dimension {name} must be a positive integer, got {value!r}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Dims":
        """Creates dims from a mapping such as a checkpoint header, rejecting values that are not whole numbers."""
        sizes = {}
        for key, value in data.items():
            if isinstance(value, float) and value.is_integer():
                value = int(value)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"dimension {key} must be a whole number, got {value!r}")
            sizes[key] = value
        try:
            return cls(**sizes)
        except TypeError as error:
            raise ConfigError(f"invalid dims {dict(data)}: {error}") from error

    def to_dict(self) -> dict[str, int]:
        """Returns the dims as a plain dictionary."""
        return asdict(self)


@dataclass(frozen=True)
class ParamCount:
    """The parameter counts of every block group.

    Attributes:
        btm: The transfer matrix factors, n·h + h·k.
        mapper: The cross-stimulus mapper, a·2h + 2h.
        embedder: The functional embedder, h·h + h.
        decoder: The frozen proxy decoder, k·a, excluded from the trainable total.
        trainable: The sum of the trainable groups.
        inference: The parameters used at inference, only the transfer matrix.
    """

    btm: int
    mapper: int
    embedder: int
    decoder: int
    trainable: int
    inference: int

    @property
    def shares(self) -> dict[str, float]:
        """The share of each trainable group in the trainable total."""
        return {
            "btm": self.btm / self.trainable,
            "mapper": self.mapper / self.trainable,
            "embedder": self.embedder / self.trainable,
        }

    def to_dict(self) -> dict[str, Any]:
        """Returns the counts and shares as a plain dictionary."""
        return asdict(self) | {"shares": self.shares}


# Functions #
def param_count(dims: Dims) -> ParamCount:
    """Counts the parameters of a model with the given dims.

    Args:
        dims: The model sizes.

    Returns:
        The per-group counts and totals.
    """
    n, k, h, a = dims.n, dims.k, dims.h, dims.a
    btm = n * h + h * k
    mapper = a * 2 * h + 2 * h
    embedder = h * h + h
    return ParamCount(
        btm=btm,
        mapper=mapper,
        embedder=embedder,
        decoder=k * a,
        trainable=btm + mapper + embedder,
        inference=btm,
    )
