"""report.py
The metrics report of an evaluated alignment model.
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
from dataclasses import dataclass, field, fields
import json
import pathlib
from typing import Any

# Local Packages #
from ..exceptions import ConfigError
from .spatial import TQ_CONVENTION


# Definitions #
# Classes #
@dataclass
class MetricsReport:
    """Every metric of one evaluation, serializable to and from JSON.

    Attributes:
        novel_id: The subject transferred from.
        known_id: The subject transferred to.
        eval_samples: The number of shared-stimulus samples evaluated.
        fsc_mean: The mean spatial correlation over voxels with defined correlation.
        fsc_per_voxel: The spatial correlation of every known-subject voxel, 0 where undefined.
        fsc_excluded: The number of zero-variance voxels left out of the mean.
        tq: The transfer quantity of every novel-subject voxel.
        tq_convention: How tq is computed from the transfer matrix.
        block_summary: The tq and fsc summaries of the conserved and variable voxel blocks, when known.
        retrieval_top1_image: The top-1 fraction retrieving stimuli from transferred signals.
        retrieval_top1_brain: The top-1 fraction retrieving transferred signals from stimuli.
        retrieval_candidates: The candidates per retrieval trial.
        retrieval_repeats: The trials per query.
        transfer_relative_error: The relative functional error of the learned transfer.
        oracle_relative_error: The relative functional error of the ground-truth transfer, when known.
        baseline_identity_fsc: The mean spatial correlation of the rectangular identity transfer.
        baseline_init_fsc: The mean spatial correlation of the untrained model, when known.
        param_count: The parameter counts of the model's blocks.
        loss_curve: The per-epoch loss breakdown of training, when known.
    """

    novel_id: str = ""
    known_id: str = ""
    eval_samples: int = 0
    fsc_mean: float = 0.0
    fsc_per_voxel: list[float] = field(default_factory=list)
    fsc_excluded: int = 0
    tq: list[float] = field(default_factory=list)
    tq_convention: str = TQ_CONVENTION
    block_summary: dict[str, Any] | None = None
    retrieval_top1_image: float = 0.0
    retrieval_top1_brain: float = 0.0
    retrieval_candidates: int = 0
    retrieval_repeats: int = 0
    transfer_relative_error: float = 0.0
    oracle_relative_error: float | None = None
    baseline_identity_fsc: float | None = None
    baseline_init_fsc: float | None = None
    param_count: dict[str, Any] = field(default_factory=dict)
    loss_curve: list[dict[str, Any]] = field(default_factory=list)

    # Class Methods #
    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MetricsReport":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown report fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        return cls.from_dict(json.loads(text))

    @classmethod
    def read(cls, path: pathlib.Path | str) -> "MetricsReport":
        return cls.from_json(pathlib.Path(path).read_text(encoding="utf-8"))

    # Instance Methods #
    def to_dict(self) -> dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def write(self, path: pathlib.Path | str) -> pathlib.Path:
        path = pathlib.Path(path)
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        return path

    def inference_metrics(self) -> dict[str, Any]:
        """The metrics that depend only on the transfer matrix."""
        return {
            "fsc_mean": self.fsc_mean,
            "fsc_per_voxel": self.fsc_per_voxel,
            "tq": self.tq,
            "transfer_relative_error": self.transfer_relative_error,
        }
