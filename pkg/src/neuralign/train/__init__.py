"""__init__.py
Training, evaluation, checkpointing, and hidden-size sweeps.
"""
# Package Header #
from ..header import *

# Header #
__author__ = __author__
__credits__ = __credits__
__maintainer__ = __maintainer__
__email__ = __email__


# Imports #
# Local Packages #
from .config import TrainConfig, seed_override, apply_seed_override
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint, binary_path, checkpoints_equal
from .trainer import (
    HISTORY_COLUMNS,
    EvalSplit,
    TrainResult,
    initial_model,
    evaluate,
    train,
    report_checkpoint,
    write_history_csv,
)
from .sweep import SWEEP_COLUMNS, SweepRow, rank_sweep, write_sweep_csv
