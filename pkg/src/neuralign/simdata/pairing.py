"""pairing.py
Pairs samples of two subjects whose stimuli are most similar.
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
from typing import Any

# Third-Party Packages #
import numpy as np

# Local Packages #
from ..exceptions import DimensionError
from ..numerics import cosine_similarity_matrix
from ..losses import PairedBatch
from .sessions import SubjectSession


# Definitions #
# Functions #
def pair_by_similarity(novel: SubjectSession, known: SubjectSession) -> np.ndarray:
    """Pairs every novel sample with the known sample whose stimulus embedding is most cosine-similar.

    Ties go to the lowest known index and a known sample may be paired more than once.

    Args:
        novel: The novel subject's session.
        known: The known subject's session.

    Returns:
        The known row paired with each novel row.
    """
    if novel.samples == 0 or known.samples == 0:
        raise DimensionError("pairing needs non-empty sessions")
    similarity = cosine_similarity_matrix(novel.embeddings, known.embeddings)
    return np.argmax(similarity, axis=1).astype(np.int64)


def paired_batch(novel: SubjectSession, known: SubjectSession, pairing: np.ndarray, rows: Any) -> PairedBatch:
    """Gathers the given novel rows and their paired known rows into a batch.

    Args:
        novel: The novel subject's session.
        known: The known subject's session.
        pairing: The known row paired with each novel row.
        rows: The novel rows of the batch.

    Returns:
        The batch.
    """
    rows = np.asarray(rows, dtype=np.int64)
    partners = pairing[rows]
    return PairedBatch(
        f_novel=novel.signals[rows],
        f_known=known.signals[partners],
        e_novel=novel.embeddings[rows],
        e_known=known.embeddings[partners],
        novel_index=rows,
        known_index=partners,
    )
