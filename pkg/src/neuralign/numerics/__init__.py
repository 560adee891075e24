"""__init__.py
Deterministic linear algebra, random streams, and statistics that the rest of neuralign builds on.
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
from .linalg import Matrix, as_matrix, check_finite, matmul, gram, ridge_pinv, identity_residual
from .random import RngState, gaussian
from .statistics import (
    pearson,
    softmax,
    log_softmax,
    normalize_rows,
    cosine_similarity_matrix,
    cosine_dissimilarity,
)
