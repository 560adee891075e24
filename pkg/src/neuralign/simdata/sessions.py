"""sessions.py
Recorded sessions of simulated subjects and whole simulated datasets.
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
from dataclasses import dataclass
import logging
from typing import Any

# Third-Party Packages #
import numpy as np

# Local Packages #
from ..exceptions import ConfigError, DimensionError
from ..numerics import Matrix, RngState, as_matrix, gaussian
from .world import SyntheticWorld, SyntheticWorldSpec, generate_world


# Definitions #
logger = logging.getLogger(__name__)


# Classes #
@dataclass(frozen=True, eq=False)
class SubjectSession:
    """The signals one subject produced while viewing a sequence of stimuli.

    Attributes:
        subject_id: The subject that was recorded.
        signals: The recorded signals F, samples × voxels.
        stimulus_ids: The bank index of the stimulus behind every sample.
        embeddings: The embeddings E of the stimuli actually shown, samples × a.
    """

    subject_id: str
    signals: Matrix
    stimulus_ids: np.ndarray
    embeddings: Matrix

    def __post_init__(self) -> None:
        object.__setattr__(self, "signals", as_matrix(self.signals, "F"))
        object.__setattr__(self, "embeddings", as_matrix(self.embeddings, "E"))
        object.__setattr__(self, "stimulus_ids", np.asarray(self.stimulus_ids, dtype=np.int64).reshape(-1))
        if not (self.signals.shape[0] == self.embeddings.shape[0] == self.stimulus_ids.size):
            raise DimensionError(
                f"session {self.subject_id} disagrees in row count: {self.signals.shape[0]} signals, "
                f"{self.embeddings.shape[0]} embeddings, {self.stimulus_ids.size} stimulus ids"
            )

    @property
    def samples(self) -> int:
        return self.signals.shape[0]

    @property
    def voxels(self) -> int:
        return self.signals.shape[1]

    def subset(self, rows: Any) -> "SubjectSession":
        """Creates a session of the given rows in the given order."""
        rows = np.asarray(rows, dtype=np.int64)
        return SubjectSession(self.subject_id, self.signals[rows], self.stimulus_ids[rows], self.embeddings[rows])

    def head(self, count: int) -> "SubjectSession":
        """Creates a session of the first count rows."""
        return self.subset(np.arange(min(count, self.samples)))

    def quantized(self) -> "SubjectSession":
        """Creates the session as it reads back from 32-bit storage."""
        return SubjectSession(
            self.subject_id,
            self.signals.astype("<f4").astype(np.float64),
            self.stimulus_ids.copy(),
            self.embeddings.astype("<f4").astype(np.float64),
        )

    def equals(self, other: "SubjectSession") -> bool:
        """Checks if another session is bitwise equal to this one."""
        return (
            self.subject_id == other.subject_id
            and self.signals.shape == other.signals.shape
            and self.embeddings.shape == other.embeddings.shape
            and self.signals.tobytes() == other.signals.tobytes()
            and self.embeddings.tobytes() == other.embeddings.tobytes()
            and np.array_equal(self.stimulus_ids, other.stimulus_ids)
        )


@dataclass(frozen=True, eq=False)
class SubjectRecording:
    """The training and shared-stimulus evaluation sessions of one subject."""

    subject_id: str
    train: SubjectSession
    eval: SubjectSession

    def quantized(self) -> "SubjectRecording":
        return SubjectRecording(self.subject_id, self.train.quantized(), self.eval.quantized())

    def equals(self, other: "SubjectRecording") -> bool:
        return self.subject_id == other.subject_id and self.train.equals(other.train) and self.eval.equals(other.eval)


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    """Every subject's recordings together with the document of the world they came from.

    Attributes:
        world_spec: The document the world was generated from.
        recordings: The recordings of every subject by id, in spec order.
    """

    world_spec: SyntheticWorldSpec
    recordings: Mapping[str, SubjectRecording]

    @property
    def subject_ids(self) -> tuple[str, ...]:
        return tuple(self.recordings)

    def recording(self, subject_id: str) -> SubjectRecording:
        try:
            return self.recordings[subject_id]
        except KeyError:
            raise ConfigError(f"unknown subject {subject_id!r}, expected one of {list(self.recordings)}") from None

    def world(self) -> SyntheticWorld:
        """Regenerates the ground-truth world of this dataset."""
        return generate_world(self.world_spec)

    def quantized(self) -> "SyntheticDataset":
        return SyntheticDataset(self.world_spec, {k: r.quantized() for k, r in self.recordings.items()})

    def equals(self, other: "SyntheticDataset") -> bool:
        return (
            self.world_spec == other.world_spec
            and list(self.recordings) == list(other.recordings)
            and all(r.equals(other.recordings[k]) for k, r in self.recordings.items())
        )


# Functions #
def generate_session(world: SyntheticWorld, subject_id: str, stimulus_ids: Any, rng: RngState) -> SubjectSession:
    """Records a subject viewing the given stimuli, its clean signal plus Gaussian noise.

    Args:
        world: The world holding the subject.
        subject_id: The subject to record.
        stimulus_ids: The bank indices of the stimuli, in viewing order.
        rng: The random stream of the measurement noise.

    Returns:
        The recorded session.
    """
    stimulus_ids = np.asarray(stimulus_ids, dtype=np.int64).reshape(-1)
    embeddings = world.embeddings(stimulus_ids)
    signals = world.clean_signal(subject_id, stimulus_ids)
    signals = signals + gaussian(rng, signals.shape[0], signals.shape[1], std=world.spec.noise_std)
    return SubjectSession(subject_id, signals, stimulus_ids, embeddings)


def simulate_dataset(spec: SyntheticWorldSpec, world: SyntheticWorld | None = None) -> SyntheticDataset:
    """Records every subject of a world.

    The evaluation session of every subject shows the first eval_samples stimuli of the bank; the training session
    of each subject shows its own disjoint range of the remaining stimuli.

    Args:
        spec: The world document.
        world: The world, generated from the spec when None.

    Returns:
        The dataset.
    """
    world = world or generate_world(spec)
    eval_ids = np.arange(spec.eval_samples)
    recordings = {}
    for index, subject in enumerate(spec.subjects):
        start = spec.eval_samples + index * spec.train_samples
        train_ids = np.arange(start, start + spec.train_samples)
        train = generate_session(world, subject.subject_id, train_ids, RngState(spec.seed, stream=100 + 2 * index))
        eval_ = generate_session(world, subject.subject_id, eval_ids, RngState(spec.seed, stream=101 + 2 * index))
        recordings[subject.subject_id] = SubjectRecording(subject.subject_id, train, eval_)
        logger.debug("recorded %s: %d train and %d eval samples", subject.subject_id, train.samples, eval_.samples)
    return SyntheticDataset(spec, recordings)
