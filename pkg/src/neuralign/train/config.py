"""config.py
The training configuration document and the seed override from the environment.
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
import dataclasses
from dataclasses import dataclass, field, fields
import json
import logging
import math
import os
import pathlib
from typing import Any, TypeVar

# Local Packages #
from ..exceptions import ConfigError
from ..losses import LossCoefficients
from ..model import AlignmentModel


# Definitions #
logger = logging.getLogger(__name__)

SEED_ENVIRONMENT_VARIABLE: str = "NEURALIGN_SEED"
DESK_LEARNING_RATE: float = 2e-3
FULL_SCALE_LEARNING_RATE: float = 1e-5

_Config = TypeVar("_Config")


def _desk_learning_rates() -> dict[str, float]:
    return {group: DESK_LEARNING_RATE for group in AlignmentModel.block_groups}


# Classes #
@dataclass(frozen=True)
class TrainConfig:
    """The hyperparameters of one training run.

    The defaults are desk-scale: the loss weights and batch size follow the published setting while the hidden size
    and learning rate are sized to converge in minutes on the synthetic world.

    Attributes:
        hidden_size: The hidden size h of the low-rank transfer.
        alpha_rec: The reconstruction weight.
        alpha_kl: The KL weight.
        alpha_latent: The latent alignment weight.
        learning_rates: The learning rate of each block group: btm, mapper and embedder.
        batch_size: The number of pairs per step, at least 2.
        epochs: The number of passes over the training pairs.
        eval_interval: The number of epochs between evaluations.
        patience: The number of epochs without an improved evaluation before stopping, 0 disables stopping.
        seed_init: The seed of the model initialization.
        seed_data: The seed of the per-epoch pair order and of retrieval trials.
        beta1: The decay rate of Adam's first moment.
        beta2: The decay rate of Adam's second moment.
        adam_eps: Adam's denominator offset.
        train_mapper_bias: Whether the mapper bias is trained. Held at zero, a shared stimulus maps through the
            transfer matrix alone, exactly as at inference.
        pretrain_decoder: Whether the frozen decoder is first fit to the known subject by ridge regression.
        decoder_ridge: The ridge penalty of the decoder fit.
        train_fraction: The leading fraction of the novel subject's training session that is used.
        retrieval_candidates: The candidates per retrieval trial, capped by the evaluation size.
        retrieval_repeats: The retrieval trials per query.
    """

    hidden_size: int = 32
    alpha_rec: float = 1.0
    alpha_kl: float = 0.001
    alpha_latent: float = 0.001
    learning_rates: dict[str, float] = field(default_factory=_desk_learning_rates)
    batch_size: int = 16
    epochs: int = 200
    eval_interval: int = 5
    patience: int = 20
    seed_init: int = 0
    seed_data: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    train_mapper_bias: bool = False
    pretrain_decoder: bool = True
    decoder_ridge: float = 1.0
    train_fraction: float = 1.0
    retrieval_candidates: int = 300
    retrieval_repeats: int = 30

    def __post_init__(self) -> None:
        rates = dict(self.learning_rates)
        unknown = set(rates) - set(AlignmentModel.block_groups)
        if unknown:
            raise ConfigError(f"unknown learning-rate groups: {sorted(unknown)}")
        object.__setattr__(self, "learning_rates", _desk_learning_rates() | {k: float(v) for k, v in rates.items()})

        for name in ("hidden_size", "batch_size", "eval_interval", "retrieval_candidates", "retrieval_repeats"):
            self._check_int(name, minimum=1)
        for name in ("epochs", "patience", "seed_init", "seed_data"):
            self._check_int(name, minimum=0)
        if self.batch_size < 2:
            raise ConfigError(f"batch_size must be at least 2 for the latent loss, got {self.batch_size}")
        for name in ("alpha_rec", "alpha_kl", "alpha_latent", "decoder_ridge"):
            self._check_float(name, minimum=0.0)
        for group, rate in self.learning_rates.items():
            if not math.isfinite(rate) or rate < 0:
                raise ConfigError(f"learning rate of {group} must be finite and non-negative, got {rate}")
        if not 0.0 < self.train_fraction <= 1.0:
            raise ConfigError(f"train_fraction must be within (0, 1], got {self.train_fraction}")
        for name in ("train_mapper_bias", "pretrain_decoder"):
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(f"{name} must be a boolean, got {getattr(self, name)!r}")
        if self.seed_init >= 2**64 or self.seed_data >= 2**64:
            raise ConfigError("seeds must be unsigned 64-bit integers")

    def _check_int(self, name: str, minimum: int) -> None:
        value = getattr(self, name)
        if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
            raise ConfigError(f"{name} must be an integer of at least {minimum}, got {value!r}")

    def _check_float(self, name: str, minimum: float) -> None:
        value = getattr(self, name)
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) or value < minimum:
            raise ConfigError(f"{name} must be a finite number of at least {minimum}, got {value!r}")
        object.__setattr__(self, name, float(value))

    # Class Methods #
    @classmethod
    def full_scale(cls, **overrides: Any) -> "TrainConfig":
        """The published full-scale setting: h = 4096, learning rates 1e-5, batch 16."""
        settings: dict[str, Any] = {
            "hidden_size": 4096,
            "alpha_rec": 1.0,
            "alpha_kl": 0.001,
            "alpha_latent": 0.001,
            "learning_rates": {group: FULL_SCALE_LEARNING_RATE for group in AlignmentModel.block_groups},
            "batch_size": 16,
        }
        return cls(**(settings | overrides))

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TrainConfig":
        """Creates a config from a JSON-like document, rejecting unknown keys."""
        if not isinstance(data, Mapping):
            raise ConfigError(f"a train config must be an object, got {type(data).__name__}")
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown train config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: pathlib.Path | str) -> "TrainConfig":
        with pathlib.Path(path).open("r", encoding="utf-8") as file:
            try:
                data = json.load(file)
            except json.JSONDecodeError as error:
                raise ConfigError(f"{path} is not valid JSON: {error}") from error
        return cls.from_dict(data)

    # Instance Methods #
    @property
    def coefficients(self) -> LossCoefficients:
        return LossCoefficients(rec=self.alpha_rec, kl=self.alpha_kl, latent=self.alpha_latent)

    def replace(self, **changes: Any) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["learning_rates"] = dict(self.learning_rates)
        return data

    def to_json(self, path: pathlib.Path | str) -> None:
        with pathlib.Path(path).open("w", encoding="utf-8") as file:
            json.dump(self.to_dict(), file, indent=2, sort_keys=True)
            file.write("\n")


# Functions #
def seed_override(environ: Mapping[str, str] | None = None) -> int | None:
    """Reads the seed override from the environment.

    Args:
        environ: The environment, the process environment when None.

    Returns:
        The seed, or None when the variable is unset or empty.
    """
    environ = os.environ if environ is None else environ
    raw = environ.get(SEED_ENVIRONMENT_VARIABLE, "").strip()
    if not raw:
        return None
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENVIRONMENT_VARIABLE} must be an integer, got {raw!r}") from None
    if not 0 <= seed < 2**64:
        raise ConfigError(f"{SEED_ENVIRONMENT_VARIABLE} must be an unsigned 64-bit integer, got {seed}")
    return seed


def apply_seed_override(config: _Config, environ: Mapping[str, str] | None = None) -> _Config:
    """Replaces every seed field of a config dataclass when the seed override is set.

    Args:
        config: A config dataclass with fields named seed or seed_*.
        environ: The environment, the process environment when None.

    Returns:
        The config, with its seeds replaced when the override is set.
    """
    seed = seed_override(environ)
    if seed is None:
        return config
    names = [f.name for f in fields(config) if f.name == "seed" or f.name.startswith("seed_")]
    logger.info("%s overrides %s with %d", SEED_ENVIRONMENT_VARIABLE, ", ".join(names), seed)
    return dataclasses.replace(config, **{name: seed for name in names})
