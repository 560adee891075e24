"""spatial.py
Voxel-wise alignment metrics: fMRI spatial correlation and transfer quantity.
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
from collections.abc import Iterator
import csv
from dataclasses import dataclass
import logging
import pathlib
from typing import Any

# Third-Party Packages #
import numpy as np

# Local Packages #
from ..exceptions import DimensionError
from ..numerics import as_matrix, pearson


# Definitions #
logger = logging.getLogger(__name__)

TQ_CONVENTION: str = "row_sum_abs: tq[i] = sum_j |M[i, j]| over target voxels j, i indexes novel-subject voxels"
TQ_HEADER: tuple[str, str] = ("voxel_index", "tq")


# Classes #
@dataclass(frozen=True, eq=False)
class SpatialCorrelation:
    """The per-voxel correlation between predicted and real signals.

    Unpacks as (per_voxel, mean).

    Attributes:
        per_voxel: The Pearson correlation of every voxel, 0 where undefined.
        mean: The mean over the voxels whose correlation is defined.
        defined: Which voxels have a defined correlation.
    """

    per_voxel: np.ndarray
    mean: float
    defined: np.ndarray

    def __iter__(self) -> Iterator[Any]:
        return iter((self.per_voxel, self.mean))

    @property
    def excluded(self) -> int:
        """The number of voxels left out for having zero variance."""
        return int(self.defined.size - np.count_nonzero(self.defined))


# Functions #
def fsc(pred: Any, target: Any) -> SpatialCorrelation:
    """Computes the Pearson correlation across samples of every voxel between predicted and real signals.

    Args:
        pred: The transferred signals, S × k.
        target: The real signals of the known subject, S × k.

    Returns:
        The per-voxel correlations and their mean over voxels with defined correlation.
    """
    pred = as_matrix(pred, "pred")
    target = as_matrix(target, "target")
    if pred.shape != target.shape:
        raise DimensionError(f"pred {pred.shape} and target {target.shape} differ in shape")
    if pred.shape[0] < 2:
        raise DimensionError(f"fsc needs at least 2 samples, got {pred.shape[0]}")

    per_voxel = np.zeros(pred.shape[1])
    defined = np.zeros(pred.shape[1], dtype=bool)
    for voxel in range(pred.shape[1]):
        r = pearson(pred[:, voxel], target[:, voxel])
        if r is not None:
            per_voxel[voxel] = r
            defined[voxel] = True

    excluded = pred.shape[1] - int(np.count_nonzero(defined))
    if excluded:
        logger.warning("fsc excluded %d zero-variance voxels", excluded)
    mean = float(np.mean(per_voxel[defined])) if defined.any() else 0.0
    return SpatialCorrelation(per_voxel=per_voxel, mean=mean, defined=defined)


def tq(m: Any) -> np.ndarray:
    """The transfer quantity of every novel-subject voxel, the L1 mass of its row of the transfer matrix.

    Args:
        m: The transfer matrix, n × k.

    Returns:
        The non-negative transfer quantity, length n.
    """
    return np.sum(np.abs(as_matrix(m, "M")), axis=1)


def tq_agreement(tq_a: Any, tq_b: Any) -> float | None:
    """The Pearson agreement of two transfer-quantity maps, None when either is constant."""
    return pearson(tq_a, tq_b)


def block_summary(
    tq_values: np.ndarray,
    correlation: SpatialCorrelation,
    conserved_count: int,
) -> dict[str, dict[str, float | None]]:
    """Summarizes the transfer quantity and correlation over the conserved and variable voxel blocks.

    The first conserved_count voxels of both subjects form the conserved block, the rest the variable block. The
    TQ deviation is the mean of |tq_i - median(tq)| over a block with the median taken over every voxel.

    Args:
        tq_values: The transfer quantity of every novel-subject voxel.
        correlation: The spatial correlation of every known-subject voxel.
        conserved_count: The number of conserved voxels.

    Returns:
        The tq mean, tq deviation, and fsc mean of each block.
    """
    median = float(np.median(tq_values))
    summary = {}
    for name, tq_block, voxels in (
        ("conserved", tq_values[:conserved_count], np.arange(correlation.per_voxel.size) < conserved_count),
        ("variable", tq_values[conserved_count:], np.arange(correlation.per_voxel.size) >= conserved_count),
    ):
        mask = voxels & correlation.defined
        summary[name] = {
            "voxels": int(tq_block.size),
            "tq_mean": float(np.mean(tq_block)) if tq_block.size else None,
            "tq_deviation": float(np.mean(np.abs(tq_block - median))) if tq_block.size else None,
            "fsc_mean": float(np.mean(correlation.per_voxel[mask])) if mask.any() else None,
        }
    return summary


def write_tq_csv(tq_values: Any, path: pathlib.Path | str) -> pathlib.Path:
    """Writes one `voxel_index,tq` row per novel-subject voxel in index order.

    Args:
        tq_values: The transfer quantity of every voxel.
        path: The CSV file to write.

    Returns:
        The path written.
    """
    path = pathlib.Path(path)
    with path.open("w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(TQ_HEADER)
        for index, value in enumerate(np.asarray(tq_values, dtype=np.float64)):
            writer.writerow((index, repr(float(value))))
    logger.info("wrote transfer quantity of %d voxels to %s", len(tq_values), path)
    return path


def read_tq_csv(path: pathlib.Path | str) -> np.ndarray:
    """Reads a transfer-quantity CSV written by write_tq_csv."""
    with pathlib.Path(path).open("r", newline="", encoding="utf-8") as file:
        reader = csv.reader(file)
        header = next(reader, None)
        if tuple(header or ()) != TQ_HEADER:
            raise DimensionError(f"{path} does not start with the header {','.join(TQ_HEADER)}")
        return np.array([float(row[1]) for row in reader])
