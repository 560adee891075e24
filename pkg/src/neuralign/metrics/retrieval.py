"""retrieval.py
Top-1 retrieval among randomly drawn candidates.
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
from ..exceptions import ConfigError
from ..numerics import RngState, as_matrix, cosine_similarity_matrix


# Definitions #
DEFAULT_CANDIDATES: int = 300
DEFAULT_REPEATS: int = 30


# Functions #
def retrieval_top1(
    queries: Any,
    gallery: Any,
    candidates_per_trial: int = DEFAULT_CANDIDATES,
    repeats: int = DEFAULT_REPEATS,
    rng: RngState | None = None,
) -> float:
    """The fraction of trials in which a query is most cosine-similar to its true match among the candidates.

    The true match of query i is gallery row i. Each trial adds candidates_per_trial - 1 distinct distractors drawn
    from the other gallery rows; a tie with the true match counts as a success.

    Args:
        queries: The query embeddings, Q × width.
        gallery: The gallery embeddings, G × width with G ≥ Q.
        candidates_per_trial: The number of candidates per trial including the true match.
        repeats: The number of trials per query.
        rng: The random stream the distractors are drawn from.

    Returns:
        The top-1 success fraction.
    """
    queries = as_matrix(queries, "queries")
    gallery = as_matrix(gallery, "gallery")
    n_queries, n_gallery = queries.shape[0], gallery.shape[0]
    if n_queries > n_gallery:
        raise ConfigError(f"every query needs its match in the gallery: {n_queries} queries, {n_gallery} gallery rows")
    if not 1 <= candidates_per_trial <= n_gallery:
        raise ConfigError(f"candidates_per_trial must be within [1, {n_gallery}], got {candidates_per_trial}")
    if repeats < 1:
        raise ConfigError(f"repeats must be positive, got {repeats}")

    rng = rng or RngState(seed=0, stream=0)
    similarity = cosine_similarity_matrix(queries, gallery)
    successes = 0
    for _ in range(repeats):
        for query in range(n_queries):
            distractors = rng.choice(n_gallery - 1, candidates_per_trial - 1)
            distractors = distractors + (distractors >= query)
            row = similarity[query]
            if candidates_per_trial == 1 or row[query] >= np.max(row[distractors]):
                successes += 1
    return successes / (n_queries * repeats)
