"""sweep.py
Trains one model per hidden size and tabulates how capacity affects alignment.
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
from collections.abc import Iterable
import csv
from dataclasses import asdict, dataclass
import logging
import pathlib
from typing import Any

# Third-Party Packages #
import numpy as np

# Local Packages #
from ..model import Dims, param_count
from ..simdata import SyntheticDataset, SyntheticWorld
from .config import TrainConfig
from .trainer import EvalSplit, train


# Definitions #
logger = logging.getLogger(__name__)

SWEEP_COLUMNS: tuple[str, ...] = (
    "hidden_size",
    "status",
    "fsc_mean",
    "transfer_error",
    "oracle_error",
    "retrieval_top1_image",
    "retrieval_top1_brain",
    "btm_params",
    "mapper_params",
    "embedder_params",
    "trainable_params",
)


# Classes #
@dataclass(frozen=True)
class SweepRow:
    """The outcome of training at one hidden size; metric fields are None when the run failed."""

    hidden_size: int
    status: str
    fsc_mean: float | None = None
    transfer_error: float | None = None
    oracle_error: float | None = None
    retrieval_top1_image: float | None = None
    retrieval_top1_brain: float | None = None
    btm_params: int | None = None
    mapper_params: int | None = None
    embedder_params: int | None = None
    trainable_params: int | None = None

    @property
    def succeeded(self) -> bool:
        return self.status == "ok"


# Functions #
def rank_sweep(
    config: TrainConfig,
    hidden_sizes: Iterable[int],
    dataset: SyntheticDataset,
    novel_id: str,
    known_id: str,
    world: SyntheticWorld | None = None,
) -> list[SweepRow]:
    """Trains one model per hidden size under otherwise identical settings.

    A hidden size whose run fails yields a row marked with the error type instead of aborting the sweep.

    Args:
        config: The run configuration; its hidden size is replaced per row.
        hidden_sizes: The hidden sizes, in output order.
        dataset: The dataset holding both subjects.
        novel_id: The subject transferred from.
        known_id: The subject transferred to.
        world: The ground-truth world, regenerated from the dataset when None.

    Returns:
        One row per hidden size.
    """
    world = world or dataset.world()
    split = EvalSplit.from_dataset(dataset, novel_id, known_id, world)
    novel = dataset.recording(novel_id).train
    known = dataset.recording(known_id).train

    rows = []
    for hidden_size in hidden_sizes:
        try:
            run_config = config.replace(hidden_size=hidden_size)
            report = train(run_config, novel, known, split).report
            counts = param_count(Dims(n=novel.voxels, k=known.voxels, h=hidden_size, a=novel.embeddings.shape[1]))
        except (ArithmeticError, ValueError, np.linalg.LinAlgError) as error:
            logger.warning("sweep row h=%s failed: %s", hidden_size, error)
            rows.append(SweepRow(hidden_size=hidden_size, status=f"failed:{type(error).__name__}"))
            continue

        rows.append(
            SweepRow(
                hidden_size=hidden_size,
                status="ok",
                fsc_mean=report.fsc_mean,
                transfer_error=report.transfer_relative_error,
                oracle_error=report.oracle_relative_error,
                retrieval_top1_image=report.retrieval_top1_image,
                retrieval_top1_brain=report.retrieval_top1_brain,
                btm_params=counts.btm,
                mapper_params=counts.mapper,
                embedder_params=counts.embedder,
                trainable_params=counts.trainable,
            )
        )
        logger.info("sweep row h=%d: fsc %.4f, transfer error %.4f", hidden_size, report.fsc_mean, report.transfer_relative_error)
    return rows


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_sweep_csv(rows: Iterable[SweepRow], path: pathlib.Path | str) -> pathlib.Path:
    """Writes the sweep table with one row per hidden size in input order."""
    path = pathlib.Path(path)
    with path.open("w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            values = asdict(row)
            writer.writerow([_cell(values[column]) for column in SWEEP_COLUMNS])
    return path
