"""__init__.py
Cross-subject fMRI alignment through a low-rank brain transfer matrix trained with multi-level functional losses.
"""
# Package Header #
from .header import *

# Header #
__author__ = __author__
__credits__ = __credits__
__maintainer__ = __maintainer__
__email__ = __email__


# Imports #
# Local Packages #
from .exceptions import (
    DimensionError,
    NonFiniteError,
    FactorizationError,
    RankDeficiencyError,
    ZeroNormError,
    ConfigError,
    FormatError,
    ChecksumError,
    FormatVersionError,
    DivergenceError,
)
from .numerics import *
from .model import *
from .losses import *
from .optim import *
from .simdata import *
from .metrics import *
from .train import *
