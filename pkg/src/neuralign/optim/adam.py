"""adam.py
Adam with a learning rate per block group.
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
from typing import Any

# Third-Party Packages #
from baseobjects import BaseObject
import numpy as np

# Local Packages #
from ..exceptions import ConfigError, DimensionError
from ..model import AlignmentModel, Dims, Gradients


# Definitions #
DEFAULT_LEARNING_RATE: float = 1e-5


# Classes #
class AdamState(BaseObject):
    """The moment estimates and hyperparameters of Adam over the trainable blocks of an AlignmentModel.

    Class Attributes:
        default_learning_rate: The learning rate of every group when none is given.

    Attributes:
        m: The first-moment estimate of each trainable block.
        v: The second-moment estimate of each trainable block.
        t: The number of steps taken.
        beta1: The decay rate of the first moment.
        beta2: The decay rate of the second moment.
        eps: The denominator offset.
        learning_rates: The learning rate of each block group.

    Args:
        dims: The model sizes the moments are shaped for.
        learning_rates: The learning rate of each block group, missing groups take the default.
        beta1: The decay rate of the first moment.
        beta2: The decay rate of the second moment.
        eps: The denominator offset.
        init: Determines if this object will construct.
    """

    default_learning_rate: float = DEFAULT_LEARNING_RATE

    # Magic Methods #
    # Construction/Destruction
    def __init__(
        self,
        dims: Dims | None = None,
        learning_rates: Mapping[str, float] | float | None = None,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        init: bool = True,
    ) -> None:
        # New Attributes #
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.t: int = 0

        self.beta1: float = 0.9
        self.beta2: float = 0.999
        self.eps: float = 1e-8
        self.learning_rates: dict[str, float] = {g: self.default_learning_rate for g in AlignmentModel.block_groups}

        # Parent Attributes #
        super().__init__(init=False)

        # Object Construction #
        if init:
            self.construct(dims=dims, learning_rates=learning_rates, beta1=beta1, beta2=beta2, eps=eps)

    # Instance Methods #
    # Constructors/Destructors
    def construct(
        self,
        dims: Dims | None = None,
        learning_rates: Mapping[str, float] | float | None = None,
        beta1: float | None = None,
        beta2: float | None = None,
        eps: float | None = None,
        **kwargs: Any,
    ) -> None:
        """Constructs this object.

        Args:
            dims: The model sizes the moments are shaped for.
            learning_rates: The learning rate of each block group, or one rate for every group.
            beta1: The decay rate of the first moment.
            beta2: The decay rate of the second moment.
            eps: The denominator offset.
            **kwargs: Keyword arguments for inheritance.
        """
        if beta1 is not None:
            self.beta1 = float(beta1)
        if beta2 is not None:
            self.beta2 = float(beta2)
        if eps is not None:
            self.eps = float(eps)
        if not (0.0 <= self.beta1 < 1.0 and 0.0 <= self.beta2 < 1.0):
            raise ConfigError(f"betas must be within [0, 1), got {self.beta1} and {self.beta2}")
        if self.eps <= 0.0:
            raise ConfigError(f"eps must be positive, got {self.eps}")

        if isinstance(learning_rates, (int, float)):
            learning_rates = {group: float(learning_rates) for group in AlignmentModel.block_groups}
        if learning_rates is not None:
            unknown = set(learning_rates) - set(AlignmentModel.block_groups)
            if unknown:
                raise ConfigError(f"unknown learning-rate groups: {sorted(unknown)}")
            for group, rate in learning_rates.items():
                if rate < 0:
                    raise ConfigError(f"learning rate of {group} must be non-negative, got {rate}")
                self.learning_rates[group] = float(rate)

        if dims is not None:
            shapes = AlignmentModel.block_shapes(dims)
            self.m = {name: np.zeros(shapes[name]) for name in AlignmentModel.trainable_blocks}
            self.v = {name: np.zeros(shapes[name]) for name in AlignmentModel.trainable_blocks}
            self.t = 0

    def copy(self) -> "AdamState":
        """Creates a copy of this state with its own moment arrays."""
        new = AdamState(init=False)
        new.m = {name: array.copy() for name, array in self.m.items()}
        new.v = {name: array.copy() for name, array in self.v.items()}
        new.t = self.t
        new.beta1 = self.beta1
        new.beta2 = self.beta2
        new.eps = self.eps
        new.learning_rates = dict(self.learning_rates)
        return new

    def learning_rate_of(self, block: str) -> float:
        """Gets the learning rate that applies to a trainable block."""
        return self.learning_rates[AlignmentModel.group_of(block)]

    def hyperparameters(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "learning_rates": dict(self.learning_rates),
        }


# Functions #
def adam_update(
    param: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    t: int,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Applies one bias-corrected Adam update to a single array without modifying the inputs.

    Args:
        param: The current parameter values.
        grad: The gradient of the parameter.
        m: The first-moment estimate before this step.
        v: The second-moment estimate before this step.
        t: The step number of this update, starting at 1.
        lr: The learning rate.
        beta1: The decay rate of the first moment.
        beta2: The decay rate of the second moment.
        eps: The denominator offset.

    Returns:
        The updated parameter, first moment, and second moment.
    """
    if t < 1:
        raise ValueError(f"the step number must start at 1, got {t}")
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * (grad * grad)
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    return param - lr * m_hat / (np.sqrt(v_hat) + eps), m, v


def adam_step(model: AlignmentModel, grads: Gradients, state: AdamState) -> tuple[AlignmentModel, AdamState]:
    """Takes one Adam step on every trainable block; the frozen decoder is shared untouched.

    Args:
        model: The model to update.
        grads: The gradients of the model's blocks.
        state: The optimizer state before the step.

    Returns:
        The updated model and optimizer state.
    """
    shapes = AlignmentModel.block_shapes(model.dims)
    for name in AlignmentModel.trainable_blocks:
        if grads[name].shape != shapes[name]:
            raise DimensionError(f"gradient {name} has shape {grads[name].shape}, expected {shapes[name]}")
        if name not in state.m or state.m[name].shape != shapes[name] or state.v[name].shape != shapes[name]:
            raise DimensionError(f"optimizer moments of {name} do not match shape {shapes[name]}")

    new_state = state.copy()
    new_state.t = state.t + 1
    updated = {}
    for name in AlignmentModel.trainable_blocks:
        updated[name], new_state.m[name], new_state.v[name] = adam_update(
            model[name],
            grads[name],
            state.m[name],
            state.v[name],
            new_state.t,
            state.learning_rate_of(name),
            state.beta1,
            state.beta2,
            state.eps,
        )
    return model.replace(**updated), new_state
