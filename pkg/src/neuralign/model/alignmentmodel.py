"""alignmentmodel.py
The parameter blocks of a cross-subject alignment model and its forward passes.
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
from collections.abc import Iterable, Iterator, Mapping
from typing import Any

# Third-Party Packages #
from baseobjects import BaseObject
import numpy as np

# Local Packages #
from ..exceptions import DimensionError
from ..numerics import Matrix, RngState, as_matrix, check_finite, gaussian, matmul, ridge_pinv
from .dims import Dims


# Definitions #
# Functions #
def _frozen(value: Any) -> np.ndarray:
    array = np.array(value, dtype=np.float64, copy=True)
    array.flags.writeable = False
    return array


def _check_width(x: Matrix, width: int, name: str) -> Matrix:
    if x.shape[1] != width:
        raise DimensionError(f"{name} has width {x.shape[1]}, expected {width}")
    return x


# Classes #
class AlignmentModel(BaseObject):
    """The parameter blocks of a cross-subject alignment model.

    Signals are rows, so the transfer of a novel subject's signal is F_N·A·B. Every block is stored read-only and
    updates build a new model, which keeps forward passes safe to run concurrently.

    Class Attributes:
        block_groups: The trainable blocks of each learning-rate group.
        trainable_blocks: The names of the trainable blocks in checkpoint order.
        frozen_blocks: The names of the blocks that training never changes.
        block_order: The names of every block in checkpoint order.

    Attributes:
        dims: The sizes of this model.
        btm_a: The encoding factor of the transfer matrix, n × h.
        btm_b: The decoding factor of the transfer matrix, h × k.
        w_diff: The mapper weights from stimulus difference to scale and shift, a × 2h.
        b_diff: The mapper bias, 2h.
        w_f: The functional embedder weights, h × h.
        b_f: The functional embedder bias, h.
        w_dec: The frozen proxy decoder from known voxels to stimulus embeddings, k × a.

    Args:
        dims: The sizes of this model.
        blocks: The arrays of every block by name.
        init: Determines if this object will construct.
    """

    block_groups: dict[str, tuple[str, ...]] = {
        "btm": ("btm_a", "btm_b"),
        "mapper": ("w_diff", "b_diff"),
        "embedder": ("w_f", "b_f"),
    }
    trainable_blocks: tuple[str, ...] = ("btm_a", "btm_b", "w_diff", "b_diff", "w_f", "b_f")
    frozen_blocks: tuple[str, ...] = ("w_dec",)
    block_order: tuple[str, ...] = trainable_blocks + frozen_blocks

    # Class Methods #
    @classmethod
    def block_shapes(cls, dims: Dims) -> dict[str, tuple[int, ...]]:
        """Gets the shape of every block for the given dims.

        Args:
            dims: The model sizes.

        Returns:
            The shape of every block by name.
        """
        return {
            "btm_a": (dims.n, dims.h),
            "btm_b": (dims.h, dims.k),
            "w_diff": (dims.a, 2 * dims.h),
            "b_diff": (2 * dims.h,),
            "w_f": (dims.h, dims.h),
            "b_f": (dims.h,),
            "w_dec": (dims.k, dims.a),
        }

    @classmethod
    def group_of(cls, block: str) -> str:
        """Gets the learning-rate group that a trainable block belongs to."""
        for group, names in cls.block_groups.items():
            if block in names:
                return group
        raise KeyError(f"{block} is not a trainable block")

    # Magic Methods #
    # Construction/Destruction
    def __init__(
        self,
        dims: Dims | None = None,
        blocks: Mapping[str, Any] | None = None,
        init: bool = True,
    ) -> None:
        # New Attributes #
        self.dims: Dims | None = None

        self.btm_a: np.ndarray | None = None
        self.btm_b: np.ndarray | None = None
        self.w_diff: np.ndarray | None = None
        self.b_diff: np.ndarray | None = None
        self.w_f: np.ndarray | None = None
        self.b_f: np.ndarray | None = None
        self.w_dec: np.ndarray | None = None

        # Parent Attributes #
        super().__init__(init=False)

        # Object Construction #
        if init:
            self.construct(dims=dims, blocks=blocks)

    # Container Methods
    def __getitem__(self, name: str) -> np.ndarray:
        """Gets a block by name."""
        if name not in self.block_order:
            raise KeyError(f"{name} is not a block of {self.__class__.__name__}")
        return getattr(self, name)

    def __iter__(self) -> Iterator[str]:
        """Iterates over the block names in checkpoint order."""
        return iter(self.block_order)

    # Instance Methods #
    # Constructors/Destructors
    def construct(self, dims: Dims | None = None, blocks: Mapping[str, Any] | None = None, **kwargs: Any) -> None:
        """Constructs this object.

        Args:
            dims: The sizes of this model.
            blocks: The arrays of every block by name.
            **kwargs: Keyword arguments for inheritance.
        """
        if dims is not None:
            self.dims = dims

        if blocks is not None:
            shapes = self.block_shapes(self.dims)
            missing = set(self.block_order) - set(blocks)
            if missing:
                raise DimensionError(f"missing blocks: {sorted(missing)}")
            for name in self.block_order:
                array = _frozen(blocks[name])
                if array.shape != shapes[name]:
                    raise DimensionError(f"block {name} has shape {array.shape}, expected {shapes[name]}")
                check_finite(array, name)
                setattr(self, name, array)

    @property
    def blocks(self) -> dict[str, np.ndarray]:
        """Every block by name in checkpoint order."""
        return {name: getattr(self, name) for name in self.block_order}

    def replace(self, **blocks: Any) -> "AlignmentModel":
        """Creates a new model with some blocks replaced and the others shared.

        Args:
            **blocks: The new arrays by block name.

        Returns:
            The new model.
        """
        unknown = set(blocks) - set(self.block_order)
        if unknown:
            raise KeyError(f"unknown blocks: {sorted(unknown)}")
        return AlignmentModel(dims=self.dims, blocks=self.blocks | blocks)

    def copy(self) -> "AlignmentModel":
        """Creates a copy of this model with its own arrays."""
        return AlignmentModel(dims=self.dims, blocks={name: array.copy() for name, array in self.blocks.items()})

    def without_training_modules(self) -> "AlignmentModel":
        """Creates a copy whose mapper and embedder blocks are all zeros."""
        return self.replace(**{name: np.zeros_like(getattr(self, name)) for name in ("w_diff", "b_diff", "w_f", "b_f")})

    def equals(self, other: "AlignmentModel") -> bool:
        """Checks if another model has the same dims and bit-identical blocks."""
        return self.dims == other.dims and all(
            getattr(self, name).tobytes() == getattr(other, name).tobytes() for name in self.block_order
        )

    # Forward Passes
    def encode_latent(self, f_n: Any) -> Matrix:
        """Projects novel-subject signals into the hidden space, z_N = F_N·A."""
        f_n = _check_width(as_matrix(f_n, "F_N"), self.dims.n, "F_N")
        return matmul(f_n, self.btm_a)

    def decode_latent(self, z: Any) -> Matrix:
        """Projects hidden embeddings into the known subject's voxel space, z·B."""
        z = _check_width(as_matrix(z, "z"), self.dims.h, "z")
        return matmul(z, self.btm_b)

    def btm_apply(self, f_n: Any) -> Matrix:
        """Transfers novel-subject signals into the known subject's voxel space, the whole inference path."""
        return self.decode_latent(self.encode_latent(f_n))

    def compose_btm(self) -> Matrix:
        """Materializes the transfer matrix M = A·B, n × k."""
        return matmul(self.btm_a, self.btm_b)

    def film_parameters(self, e_diff: Any) -> tuple[Matrix, Matrix]:
        """Computes the scale and shift conditioned on a stimulus difference.

        Args:
            e_diff: The stimulus-embedding differences, rows × a.

        Returns:
            The scale γ and shift β, each rows × h.
        """
        e_diff = _check_width(as_matrix(e_diff, "E_diff"), self.dims.a, "E_diff")
        z_diff = matmul(e_diff, self.w_diff) + self.b_diff
        h = self.dims.h
        return z_diff[:, :h], z_diff[:, h:]

    def film_modulate(self, z_n: Any, e_diff: Any) -> Matrix:
        """Maps hidden embeddings under one stimulus to those expected under another, z_K = (1 + γ)⊙z_N + β.

        Args:
            z_n: The hidden embeddings of the novel subject, rows × h.
            e_diff: The stimulus-embedding differences, rows × a.

        Returns:
            The modulated embeddings, rows × h.
        """
        z_n = _check_width(as_matrix(z_n, "z_N"), self.dims.h, "z_N")
        gamma, beta = self.film_parameters(e_diff)
        if gamma.shape[0] != z_n.shape[0]:
            raise DimensionError(f"z_N has {z_n.shape[0]} rows but E_diff has {gamma.shape[0]}")
        return (1.0 + gamma) * z_n + beta

    def functional_embed(self, z: Any) -> Matrix:
        """Embeds hidden embeddings for dissimilarity computation, z·W_f + b_f."""
        z = _check_width(as_matrix(z, "z"), self.dims.h, "z")
        return matmul(z, self.w_f) + self.b_f

    def proxy_decode(self, f: Any) -> Matrix:
        """Decodes known-subject signals to stimulus embeddings through the frozen decoder."""
        f = _check_width(as_matrix(f, "F"), self.dims.k, "F")
        return matmul(f, self.w_dec)


class Gradients(BaseObject):
    """The gradients of a loss with respect to every block of an AlignmentModel.

    The frozen decoder always carries an all-zero gradient.

    Attributes:
        dims: The sizes of the model the gradients belong to.
        blocks: The gradient arrays by block name, shape-matched to the model.

    Args:
        dims: The sizes of the model the gradients belong to.
        blocks: The gradient arrays of the trainable blocks by name.
        init: Determines if this object will construct.
    """

    # Magic Methods #
    # Construction/Destruction
    def __init__(self, dims: Dims | None = None, blocks: Mapping[str, Any] | None = None, init: bool = True) -> None:
        # New Attributes #
        self.dims: Dims | None = None
        self.blocks: dict[str, np.ndarray] = {}

        # Parent Attributes #
        super().__init__(init=False)

        # Object Construction #
        if init:
            self.construct(dims=dims, blocks=blocks)

    # Container Methods
    def __getitem__(self, name: str) -> np.ndarray:
        return self.blocks[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.blocks)

    # Instance Methods #
    # Constructors/Destructors
    def construct(self, dims: Dims | None = None, blocks: Mapping[str, Any] | None = None, **kwargs: Any) -> None:
        """Constructs this object.

        Args:
            dims: The sizes of the model the gradients belong to.
            blocks: The gradient arrays of the trainable blocks by name.
            **kwargs: Keyword arguments for inheritance.
        """
        if dims is not None:
            self.dims = dims

        if blocks is not None:
            shapes = AlignmentModel.block_shapes(self.dims)
            missing = set(AlignmentModel.trainable_blocks) - set(blocks)
            if missing:
                raise DimensionError(f"missing gradient blocks: {sorted(missing)}")
            for name in AlignmentModel.trainable_blocks:
                array = _frozen(blocks[name])
                if array.shape != shapes[name]:
                    raise DimensionError(f"gradient {name} has shape {array.shape}, expected {shapes[name]}")
                self.blocks[name] = check_finite(array, f"gradient {name}")
            self.blocks["w_dec"] = _frozen(np.zeros(shapes["w_dec"]))

    def masked(self, names: Iterable[str]) -> "Gradients":
        """Creates a copy whose named blocks carry all-zero gradients, which Adam turns into zero updates.

        Args:
            names: The trainable blocks to hold in place.

        Returns:
            The masked gradients.
        """
        names = set(names)
        unknown = names - set(AlignmentModel.trainable_blocks)
        if unknown:
            raise KeyError(f"unknown trainable blocks: {sorted(unknown)}")
        return Gradients(
            dims=self.dims,
            blocks={
                name: np.zeros_like(self.blocks[name]) if name in names else self.blocks[name]
                for name in AlignmentModel.trainable_blocks
            },
        )

    def norm(self) -> float:
        """The Euclidean norm of all trainable gradients taken together."""
        return float(np.sqrt(sum(float(np.sum(self.blocks[name] ** 2)) for name in AlignmentModel.trainable_blocks)))


# Functions #
def init_model(dims: Dims, rng: RngState) -> AlignmentModel:
    """Creates a model with fan-in scaled Gaussian weights and zero biases.

    Args:
        dims: The model sizes.
        rng: The random stream to draw the weights from.

    Returns:
        The new model.
    """
    n, k, h, a = dims.n, dims.k, dims.h, dims.a
    blocks = {
        "btm_a": gaussian(rng, n, h, std=1.0 / np.sqrt(n)),
        "btm_b": gaussian(rng, h, k, std=1.0 / np.sqrt(h)),
        "w_diff": gaussian(rng, a, 2 * h, std=1.0 / np.sqrt(a)),
        "b_diff": np.zeros(2 * h),
        "w_f": gaussian(rng, h, h, std=1.0 / np.sqrt(h)),
        "b_f": np.zeros(h),
        "w_dec": gaussian(rng, k, a, std=1.0 / np.sqrt(k)),
    }
    return AlignmentModel(dims=dims, blocks=blocks)


def stimulus_difference(e_n: Any, e_k: Any) -> Matrix:
    """Computes the element-wise difference of the stimulus embeddings seen by the two subjects."""
    e_n = as_matrix(e_n, "E_N")
    e_k = as_matrix(e_k, "E_K")
    if e_n.shape != e_k.shape:
        raise DimensionError(f"E_N {e_n.shape} and E_K {e_k.shape} differ in shape")
    return e_n - e_k


def fit_proxy_decoder(model: AlignmentModel, f_known: Any, e_known: Any, lambda_: float = 1.0) -> AlignmentModel:
    """Fits the frozen decoder as a ridge regression from the known subject's voxels to its stimulus embeddings.

    Args:
        model: The model whose decoder is replaced.
        f_known: The known subject's signals, samples × k.
        e_known: The stimulus embeddings shown to the known subject, samples × a.
        lambda_: The ridge penalty.

    Returns:
        A new model with the fitted decoder.
    """
    f_known = _check_width(as_matrix(f_known, "F_K"), model.dims.k, "F_K")
    e_known = _check_width(as_matrix(e_known, "E_K"), model.dims.a, "E_K")
    if f_known.shape[0] != e_known.shape[0]:
        raise DimensionError(f"F_K has {f_known.shape[0]} rows but E_K has {e_known.shape[0]}")
    return model.replace(w_dec=matmul(ridge_pinv(f_known, lambda_), e_known))
