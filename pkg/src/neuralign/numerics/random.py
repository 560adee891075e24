"""random.py
Explicit, reproducible random number streams.
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
from baseobjects import BaseObject
import numpy as np

# Local Packages #
from .linalg import Matrix


# Definitions #
# Classes #
class RngState(BaseObject):
    """A seeded random stream, the same (seed, stream, call sequence) always yields the same numbers.

    Streams are derived with numpy's SeedSequence spawn keys, so distinct streams of one seed are independent and
    can be handed to concurrent users.

    Attributes:
        seed: The 64-bit seed.
        stream: The stream counter which selects an independent sequence of the seed.
        generator: The PCG64 generator that draws the numbers.

    Args:
        seed: The 64-bit seed.
        stream: The stream counter which selects an independent sequence of the seed.
        init: Determines if this object will construct.
    """

    # Magic Methods #
    # Construction/Destruction
    def __init__(self, seed: int = 0, stream: int = 0, init: bool = True) -> None:
        # New Attributes #
        self.seed: int = 0
        self.stream: int = 0
        self.generator: np.random.Generator | None = None

        # Parent Attributes #
        super().__init__(init=False)

        # Object Construction #
        if init:
            self.construct(seed=seed, stream=stream)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(seed={self.seed}, stream={self.stream})"

    # Instance Methods #
    # Constructors/Destructors
    def construct(self, seed: int = 0, stream: int = 0, **kwargs: Any) -> None:
        """Constructs this object.

        Args:
            seed: The 64-bit seed.
            stream: The stream counter which selects an independent sequence of the seed.
            **kwargs: Keyword arguments for inheritance.
        """
        if not 0 <= seed < 2**64 or not 0 <= stream < 2**64:
            raise ValueError(f"seed and stream must be unsigned 64-bit integers, got {seed} and {stream}")
        self.seed = int(seed)
        self.stream = int(stream)
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        self.generator = np.random.Generator(np.random.PCG64(sequence))

    def spawn(self, stream: int) -> "RngState":
        """Creates a fresh state of the same seed on another stream.

        Args:
            stream: The stream counter of the new state.

        Returns:
            The new state.
        """
        return RngState(seed=self.seed, stream=stream)

    # Sampling
    def standard_normal(self, shape: tuple[int, ...]) -> np.ndarray:
        """Draws standard normal samples."""
        return self.generator.standard_normal(shape)

    def permutation(self, n: int) -> np.ndarray:
        """Draws a permutation of range(n)."""
        return self.generator.permutation(n)

    def choice(self, n: int, size: int) -> np.ndarray:
        """Draws size distinct integers from range(n)."""
        return self.generator.choice(n, size=size, replace=False)


# Functions #
def gaussian(rng: RngState, rows: int, cols: int, mean: float = 0.0, std: float = 1.0) -> Matrix:
    """Draws a rows × cols matrix of i.i.d. normal entries.

    Args:
        rng: The random stream to draw from.
        rows: The number of rows.
        cols: The number of columns.
        mean: The mean of every entry.
        std: The non-negative standard deviation of every entry.

    Returns:
        The sampled matrix.
    """
    if std < 0:
        raise ValueError(f"std must be non-negative, got {std}")
    return mean + std * rng.standard_normal((rows, cols))
