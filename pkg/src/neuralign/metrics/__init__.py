"""__init__.py
Alignment-quality metrics: spatial correlation, transfer quantity, retrieval, and transfer error.
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
from .spatial import (
    TQ_CONVENTION,
    SpatialCorrelation,
    fsc,
    tq,
    tq_agreement,
    block_summary,
    write_tq_csv,
    read_tq_csv,
)
from .retrieval import retrieval_top1
from .transfer import TransferError, relative_transfer_error, transfer_error
from .report import MetricsReport
