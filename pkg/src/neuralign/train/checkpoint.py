"""checkpoint.py
Training checkpoints as a JSON header plus one binary file of little-endian 64-bit floats.
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
from dataclasses import dataclass, field
import hashlib
import json
import logging
import pathlib
from typing import Any

# Third-Party Packages #
from classversioning import TriNumberVersion
import numpy as np

# Local Packages #
from ..exceptions import ChecksumError, ConfigError, FormatError, FormatVersionError
from ..model import AlignmentModel, Dims
from ..optim import AdamState
from .config import TrainConfig


# Definitions #
logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT: str = "neuralign-checkpoint"
CHECKPOINT_VERSION: TriNumberVersion = TriNumberVersion(1, 0, 0)
NEXT_INCOMPATIBLE: TriNumberVersion = TriNumberVersion(2, 0, 0)
BLOCK_DTYPE: str = "<f8"


# Classes #
@dataclass(eq=False)
class Checkpoint:
    """The complete state of a training run.

    Attributes:
        model: The model after the last completed epoch.
        optimizer: The Adam state after the last completed epoch.
        config: The configuration of the run.
        epoch: The number of completed epochs.
        history: One row per completed epoch with the mean loss breakdown and any evaluation.
        novel_id: The subject transferred from.
        known_id: The subject transferred to.
        best_model: The model with the best evaluation so far, None before the first evaluation.
        best_epoch: The epoch of the best model.
        best_fsc: The evaluation fsc mean of the best model.
        initial_fsc: The evaluation fsc mean of the initialized model.
        stopped_early: Whether the run ended by running out of patience.
        version: The checkpoint format version.
    """

    model: AlignmentModel
    optimizer: AdamState
    config: TrainConfig
    epoch: int = 0
    history: list[dict[str, Any]] = field(default_factory=list)
    novel_id: str = ""
    known_id: str = ""
    best_model: AlignmentModel | None = None
    best_epoch: int | None = None
    best_fsc: float | None = None
    initial_fsc: float | None = None
    stopped_early: bool = False
    version: str = CHECKPOINT_VERSION.str()

    @property
    def inference_model(self) -> AlignmentModel:
        """The model to evaluate: the best evaluated one when any evaluation happened, else the current one."""
        return self.best_model if self.best_model is not None else self.model

    def header(self) -> dict[str, Any]:
        """The JSON-serializable fields of this checkpoint, without the binary layout."""
        return {
            "format": CHECKPOINT_FORMAT,
            "version": self.version,
            "dims": self.model.dims.to_dict(),
            "config": self.config.to_dict(),
            "epoch": self.epoch,
            "history": self.history,
            "novel_id": self.novel_id,
            "known_id": self.known_id,
            "best_epoch": self.best_epoch,
            "best_fsc": self.best_fsc,
            "initial_fsc": self.initial_fsc,
            "stopped_early": self.stopped_early,
            "adam": self.optimizer.hyperparameters(),
        }


# Functions #
def binary_path(path: pathlib.Path | str) -> pathlib.Path:
    """The binary file that accompanies a checkpoint header."""
    path = pathlib.Path(path)
    return path.with_name(path.name + ".bin")


def _segments(checkpoint: Checkpoint) -> list[tuple[str, str, np.ndarray]]:
    segments = [("model", name, checkpoint.model[name]) for name in AlignmentModel.block_order]
    if checkpoint.best_model is not None:
        segments += [("best", name, checkpoint.best_model[name]) for name in AlignmentModel.block_order]
    segments += [("adam_m", name, checkpoint.optimizer.m[name]) for name in AlignmentModel.trainable_blocks]
    segments += [("adam_v", name, checkpoint.optimizer.v[name]) for name in AlignmentModel.trainable_blocks]
    return segments


def save_checkpoint(path: pathlib.Path | str, checkpoint: Checkpoint) -> pathlib.Path:
    """Writes a checkpoint header and its binary file.

    Args:
        path: The header file; the binary file takes the same name with a .bin suffix.
        checkpoint: The checkpoint to write.

    Returns:
        The path of the header.
    """
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    marker = path.with_name(path.name + ".incomplete")
    marker.touch()

    segments = _segments(checkpoint)
    payload = b"".join(np.ascontiguousarray(array, dtype=BLOCK_DTYPE).tobytes() for _, _, array in segments)
    data_path = binary_path(path)
    data_path.write_bytes(payload)

    header = checkpoint.header() | {
        "binary_file": data_path.name,
        "binary_sha256": hashlib.sha256(payload).hexdigest(),
        "block_order": list(AlignmentModel.block_order),
        "block_shapes": {name: list(shape) for name, shape in AlignmentModel.block_shapes(checkpoint.model.dims).items()},
        "segments": [[segment, name] for segment, name, _ in segments],
    }
    with path.open("w", encoding="utf-8") as file:
        json.dump(header, file, indent=2, sort_keys=True, allow_nan=False)
        file.write("\n")

    marker.unlink()
    logger.info("wrote checkpoint at epoch %d to %s", checkpoint.epoch, path)
    return path


def load_checkpoint(path: pathlib.Path | str) -> Checkpoint:
    """Reads a checkpoint, verifying its version, checksum and size.

    Args:
        path: The header file.

    Returns:
        The checkpoint, bit-identical to the one saved.
    """
    path = pathlib.Path(path)
    if not path.is_file():
        raise FormatError(f"checkpoint {path} does not exist")
    try:
        header = json.loads(path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as error:
        raise FormatError(f"{path} is not a checkpoint header: {error}") from error
    if not isinstance(header, dict) or header.get("format") != CHECKPOINT_FORMAT:
        raise FormatError(f"{path} is not a {CHECKPOINT_FORMAT} header")

    try:
        version = TriNumberVersion(str(header.get("version")))
    except Exception as error:
        raise FormatVersionError(f"{path} has an unreadable version {header.get('version')!r}") from error
    if not CHECKPOINT_VERSION <= version < NEXT_INCOMPATIBLE:
        raise FormatVersionError(f"checkpoint version {header['version']} is not supported")

    try:
        dims = Dims.from_dict(header["dims"])
        config = TrainConfig.from_dict(header["config"])
        segments = [tuple(segment) for segment in header["segments"]]
        data_path = path.with_name(header["binary_file"])
        checksum = header["binary_sha256"]
        adam = header["adam"]
    except (KeyError, TypeError, ValueError, ConfigError) as error:
        raise FormatError(f"{path} has a malformed header: {error}") from error

    if not data_path.is_file():
        raise FormatError(f"checkpoint binary {data_path} does not exist")
    payload = data_path.read_bytes()
    if hashlib.sha256(payload).hexdigest() != checksum:
        raise ChecksumError(f"{data_path.name} does not match the checksum in {path.name}")

    shapes = AlignmentModel.block_shapes(dims)
    expected = sum(int(np.prod(shapes[name])) for _, name in segments) * np.dtype(BLOCK_DTYPE).itemsize
    if len(payload) != expected:
        raise FormatError(f"{data_path.name} holds {len(payload)} bytes, the header implies {expected}")

    arrays: dict[str, dict[str, np.ndarray]] = {}
    offset = 0
    for segment, name in segments:
        count = int(np.prod(shapes[name]))
        array = np.frombuffer(payload, dtype=BLOCK_DTYPE, count=count, offset=offset).reshape(shapes[name])
        arrays.setdefault(segment, {})[name] = array.astype(np.float64)
        offset += count * np.dtype(BLOCK_DTYPE).itemsize

    optimizer = AdamState(
        learning_rates=adam["learning_rates"],
        beta1=adam["beta1"],
        beta2=adam["beta2"],
        eps=adam["eps"],
    )
    optimizer.m = arrays["adam_m"]
    optimizer.v = arrays["adam_v"]
    optimizer.t = int(adam["t"])

    return Checkpoint(
        model=AlignmentModel(dims=dims, blocks=arrays["model"]),
        optimizer=optimizer,
        config=config,
        epoch=int(header["epoch"]),
        history=header["history"],
        novel_id=header["novel_id"],
        known_id=header["known_id"],
        best_model=AlignmentModel(dims=dims, blocks=arrays["best"]) if "best" in arrays else None,
        best_epoch=header["best_epoch"],
        best_fsc=header["best_fsc"],
        initial_fsc=header["initial_fsc"],
        stopped_early=bool(header["stopped_early"]),
        version=header["version"],
    )


def checkpoints_equal(a: Checkpoint, b: Checkpoint) -> bool:
    """Checks if two checkpoints hold bit-identical arrays and equal headers."""
    if a.header() != b.header():
        return False
    segments_a = _segments(a)
    segments_b = _segments(b)
    return len(segments_a) == len(segments_b) and all(
        x[:2] == y[:2] and x[2].tobytes() == y[2].tobytes() for x, y in zip(segments_a, segments_b)
    )
