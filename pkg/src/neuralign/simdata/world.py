"""world.py
A synthetic multi-subject world whose cross-subject transfer is known exactly.
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
import logging
import math
import pathlib
from typing import Any

# Third-Party Packages #
from baseobjects import BaseObject
import numpy as np

# Local Packages #
from ..exceptions import ConfigError, DimensionError, FactorizationError, RankDeficiencyError
from ..numerics import Matrix, RngState, as_matrix, gaussian, identity_residual, matmul, normalize_rows, ridge_pinv


# Definitions #
logger = logging.getLogger(__name__)

RANK_TOLERANCE: float = 1e-6
MAX_RANK_ATTEMPTS: int = 10


# Classes #
@dataclass(frozen=True)
class SubjectSpec:
    """One simulated subject.

    Attributes:
        subject_id: The name of the subject.
        voxels: The number of voxels the subject is recorded with.
    """

    subject_id: str
    voxels: int

    def __post_init__(self) -> None:
        if not isinstance(self.subject_id, str) or not self.subject_id:
            raise ConfigError(f"subject ids must be non-empty strings, got {self.subject_id!r}")
        if isinstance(self.voxels, bool) or not isinstance(self.voxels, int) or self.voxels < 1:
            raise ConfigError(f"subject {self.subject_id} needs a positive voxel count, got {self.voxels!r}")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SubjectSpec":
        unknown = set(data) - {"id", "voxels"}
        if unknown or "id" not in data or "voxels" not in data:
            raise ConfigError(f"a subject needs exactly the keys id and voxels, got {sorted(data)}")
        return cls(subject_id=data["id"], voxels=data["voxels"])

    def to_dict(self) -> dict[str, Any]:
        return {"id": self.subject_id, "voxels": self.voxels}


def _default_subjects() -> tuple[SubjectSpec, ...]:
    return SubjectSpec("subj01", 400), SubjectSpec("subj02", 300)


@dataclass(frozen=True)
class SyntheticWorldSpec:
    """The document that determines a synthetic world and the sessions recorded in it.

    Every subject observes a shared latent code x = E·C through its own mixing map G_s. The first
    ⌊conserved_fraction · min voxels⌋ columns of every mixing map are identical across subjects. The remaining
    variable voxels carry per-voxel gains and an idiosyncratic response that no other subject shares.

    Attributes:
        latent_dim: The size d of the shared latent code.
        embedding_dim: The size a of the stimulus embeddings.
        bank_size: The number of stimuli in the bank.
        noise_std: The standard deviation σ of the measurement noise.
        conserved_fraction: The fraction ρ of voxels whose mixing is shared by all subjects.
        train_samples: The number of training samples recorded per subject.
        eval_samples: The number of shared-stimulus evaluation samples recorded per subject.
        seed: The seed of every random draw.
        subjects: The simulated subjects.
        variable_gain_spread: The log-normal spread of the per-voxel gains on variable voxels.
        private_dim: The number of idiosyncratic response components each subject carries on its variable voxels.
        private_std: The standard deviation of the idiosyncratic signal on a variable voxel.
    """

    latent_dim: int = 24
    embedding_dim: int = 32
    bank_size: int = 2000
    noise_std: float = 0.05
    conserved_fraction: float = 0.3
    train_samples: int = 800
    eval_samples: int = 200
    seed: int = 0
    subjects: tuple[SubjectSpec, ...] = field(default_factory=_default_subjects)
    variable_gain_spread: float = 0.75
    private_dim: int = 4
    private_std: float = 0.5

    def __post_init__(self) -> None:
        object.__setattr__(self, "subjects", tuple(self.subjects))
        for name in ("latent_dim", "embedding_dim", "bank_size", "train_samples", "eval_samples"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        for name in ("noise_std", "variable_gain_spread", "private_std"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value) or value < 0:
                raise ConfigError(f"{name} must be a finite non-negative number, got {value!r}")
        if isinstance(self.private_dim, bool) or not isinstance(self.private_dim, int) or self.private_dim < 0:
            raise ConfigError(f"private_dim must be a non-negative integer, got {self.private_dim!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not 0.0 <= self.conserved_fraction <= 1.0:
            raise ConfigError(f"conserved_fraction must be within [0, 1], got {self.conserved_fraction}")

        if not self.subjects:
            raise ConfigError("a world needs at least one subject")
        ids = [subject.subject_id for subject in self.subjects]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"subject ids must be unique, got {ids}")
        if self.latent_dim > self.min_voxels:
            raise ConfigError(f"latent_dim {self.latent_dim} exceeds the smallest voxel count {self.min_voxels}")
        if self.stimuli_needed > self.bank_size:
            raise ConfigError(
                f"bank_size {self.bank_size} cannot hold {self.eval_samples} shared stimuli plus "
                f"{self.train_samples} distinct training stimuli for each of {len(self.subjects)} subjects"
            )

    # Class Methods #
    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SyntheticWorldSpec":
        """Creates a spec from a JSON-like document, rejecting unknown keys.

        Args:
            data: The document.

        Returns:
            The spec.
        """
        if not isinstance(data, Mapping):
            raise ConfigError(f"a world document must be an object, got {type(data).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown world fields: {sorted(unknown)}")
        kwargs = dict(data)
        if "subjects" in kwargs:
            kwargs["subjects"] = tuple(SubjectSpec.from_dict(subject) for subject in kwargs["subjects"])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, path: pathlib.Path | str) -> "SyntheticWorldSpec":
        """Reads a spec from a JSON file."""
        with pathlib.Path(path).open("r", encoding="utf-8") as file:
            try:
                data = json.load(file)
            except json.JSONDecodeError as error:
                raise ConfigError(f"{path} is not valid JSON: {error}") from error
        return cls.from_dict(data)

    # Properties
    @property
    def subject_ids(self) -> tuple[str, ...]:
        return tuple(subject.subject_id for subject in self.subjects)

    @property
    def min_voxels(self) -> int:
        return min(subject.voxels for subject in self.subjects)

    @property
    def conserved_count(self) -> int:
        """The number of leading voxels whose mixing columns every subject shares."""
        return int(math.floor(self.conserved_fraction * self.min_voxels))

    @property
    def stimuli_needed(self) -> int:
        return self.eval_samples + self.train_samples * len(self.subjects)

    # Instance Methods #
    def subject(self, subject_id: str) -> SubjectSpec:
        for subject in self.subjects:
            if subject.subject_id == subject_id:
                return subject
        raise ConfigError(f"unknown subject {subject_id!r}, expected one of {list(self.subject_ids)}")

    def to_dict(self) -> dict[str, Any]:
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data["subjects"] = [subject.to_dict() for subject in self.subjects]
        return data

    def to_json(self, path: pathlib.Path | str) -> None:
        with pathlib.Path(path).open("w", encoding="utf-8") as file:
            json.dump(self.to_dict(), file, indent=2, sort_keys=True)
            file.write("\n")


class SyntheticWorld(BaseObject):
    """The ground truth of a synthetic world: the stimulus bank and every subject's mixing.

    Attributes:
        spec: The document the world was generated from.
        bank: The unit-norm stimulus embeddings, bank_size × a.
        stimulus_map: The map C from stimulus embeddings to the latent code, a × d.
        mixing: The mixing map G_s of each subject, d × voxels.
        private_responses: The idiosyncratic response of each subject to every bank stimulus, bank_size × private_dim.
        private_loadings: The loading of each subject's idiosyncratic response, private_dim × voxels, zero on conserved
            voxels.

    Args:
        spec: The document the world was generated from.
        bank: The stimulus embeddings.
        stimulus_map: The map from stimulus embeddings to the latent code.
        mixing: The mixing map of each subject.
        private_responses: The idiosyncratic responses of each subject.
        private_loadings: The loadings of the idiosyncratic responses of each subject.
        init: Determines if this object will construct.
    """

    # Magic Methods #
    # Construction/Destruction
    def __init__(
        self,
        spec: SyntheticWorldSpec | None = None,
        bank: Any = None,
        stimulus_map: Any = None,
        mixing: Mapping[str, Any] | None = None,
        private_responses: Mapping[str, Any] | None = None,
        private_loadings: Mapping[str, Any] | None = None,
        init: bool = True,
    ) -> None:
        # New Attributes #
        self.spec: SyntheticWorldSpec | None = None
        self.bank: Matrix | None = None
        self.stimulus_map: Matrix | None = None
        self.mixing: dict[str, Matrix] = {}
        self.private_responses: dict[str, Matrix] = {}
        self.private_loadings: dict[str, Matrix] = {}

        # Parent Attributes #
        super().__init__(init=False)

        # Object Construction #
        if init:
            self.construct(
                spec=spec,
                bank=bank,
                stimulus_map=stimulus_map,
                mixing=mixing,
                private_responses=private_responses,
                private_loadings=private_loadings,
            )

    # Instance Methods #
    # Constructors/Destructors
    def construct(
        self,
        spec: SyntheticWorldSpec | None = None,
        bank: Any = None,
        stimulus_map: Any = None,
        mixing: Mapping[str, Any] | None = None,
        private_responses: Mapping[str, Any] | None = None,
        private_loadings: Mapping[str, Any] | None = None,
        **kwargs: Any,
    ) -> None:
        """Constructs this object.

        Args:
            spec: The document the world was generated from.
            bank: The stimulus embeddings.
            stimulus_map: The map from stimulus embeddings to the latent code.
            mixing: The mixing map of each subject.
            private_responses: The idiosyncratic responses of each subject.
            private_loadings: The loadings of the idiosyncratic responses of each subject.
            **kwargs: Keyword arguments for inheritance.
        """
        if spec is not None:
            self.spec = spec
        if bank is not None:
            self.bank = as_matrix(bank, "bank")
        if stimulus_map is not None:
            self.stimulus_map = as_matrix(stimulus_map, "C")
        if mixing is not None:
            self.mixing = {subject_id: as_matrix(g, f"G_{subject_id}") for subject_id, g in mixing.items()}
        if private_responses is not None:
            self.private_responses = {s: as_matrix(r, f"R_{s}") for s, r in private_responses.items()}
        if private_loadings is not None:
            self.private_loadings = {s: as_matrix(p, f"P_{s}") for s, p in private_loadings.items()}

        for subject_id, g in self.mixing.items():
            if g.shape[0] != self.stimulus_map.shape[1]:
                raise DimensionError(f"G_{subject_id} has {g.shape[0]} rows, the latent code has {self.stimulus_map.shape[1]}")

    @property
    def subject_ids(self) -> tuple[str, ...]:
        return tuple(self.mixing)

    def voxels(self, subject_id: str) -> int:
        return self.mixing_of(subject_id).shape[1]

    def mixing_of(self, subject_id: str) -> Matrix:
        try:
            return self.mixing[subject_id]
        except KeyError:
            raise ConfigError(f"unknown subject {subject_id!r}, expected one of {list(self.mixing)}") from None

    def embeddings(self, stimulus_ids: Any) -> Matrix:
        """Gets the bank embeddings of the given stimuli."""
        stimulus_ids = np.asarray(stimulus_ids, dtype=np.int64).reshape(-1)
        if stimulus_ids.size and (stimulus_ids.min() < 0 or stimulus_ids.max() >= self.bank.shape[0]):
            raise ConfigError(f"stimulus ids must index the bank of {self.bank.shape[0]} stimuli")
        return self.bank[stimulus_ids]

    def clean_signal(self, subject_id: str, stimulus_ids: Any) -> Matrix:
        """The noiseless response of a subject to the given stimuli, (E·C)·G_s plus its idiosyncratic response.

        The idiosyncratic response is tied to the stimulus, not to its embedding, so no other subject can predict it.

        Args:
            subject_id: The subject to respond.
            stimulus_ids: The bank indices of the stimuli.

        Returns:
            The noiseless signals, samples × voxels.
        """
        stimulus_ids = np.asarray(stimulus_ids, dtype=np.int64).reshape(-1)
        embeddings = self.embeddings(stimulus_ids)
        signal = matmul(matmul(embeddings, self.stimulus_map), self.mixing_of(subject_id))
        if subject_id in self.private_loadings:
            responses = self.private_responses[subject_id][stimulus_ids]
            signal = signal + matmul(responses, self.private_loadings[subject_id])
        return signal


# Functions #
def _full_row_rank(g: Matrix) -> bool:
    try:
        residual = identity_residual(matmul(ridge_pinv(g.T, 0.0), g.T))
    except FactorizationError:
        return False
    return residual <= RANK_TOLERANCE


def generate_world(spec: SyntheticWorldSpec) -> SyntheticWorld:
    """Samples a synthetic world from its document.

    Args:
        spec: The world document.

    Returns:
        The world with its stimulus bank and every subject's mixing.
    """
    d, a = spec.latent_dim, spec.embedding_dim
    conserved = spec.conserved_count
    shared_rng = RngState(seed=spec.seed, stream=0)

    bank, _ = normalize_rows(gaussian(shared_rng, spec.bank_size, a), "bank")
    stimulus_map = gaussian(shared_rng, a, d)
    conserved_columns = gaussian(shared_rng, d, conserved, std=1.0 / math.sqrt(d))

    mixing = {}
    responses = {}
    loadings = {}
    for index, subject in enumerate(spec.subjects):
        rng = RngState(seed=spec.seed, stream=1 + index)
        variable = subject.voxels - conserved
        for attempt in range(1, MAX_RANK_ATTEMPTS + 1):
            variable_columns = gaussian(rng, d, variable, std=1.0 / math.sqrt(d))
            if spec.variable_gain_spread > 0 and variable > 0:
                gains = np.exp(spec.variable_gain_spread * rng.standard_normal((variable,)))
                variable_columns = variable_columns * gains
            g = np.concatenate([conserved_columns, variable_columns], axis=1)
            if _full_row_rank(g):
                break
            logger.debug("mixing map of %s failed the rank check on attempt %d", subject.subject_id, attempt)
        else:
            raise RankDeficiencyError(
                f"mixing map of {subject.subject_id} stayed rank deficient after {MAX_RANK_ATTEMPTS} attempts"
            )
        mixing[subject.subject_id] = g

        if spec.private_dim > 0 and spec.private_std > 0 and variable > 0:
            responses[subject.subject_id] = gaussian(rng, spec.bank_size, spec.private_dim)
            loading = gaussian(rng, spec.private_dim, variable, std=spec.private_std / math.sqrt(spec.private_dim))
            loadings[subject.subject_id] = np.concatenate([np.zeros((spec.private_dim, conserved)), loading], axis=1)

    logger.debug("generated a world with %d subjects and %d conserved voxels", len(mixing), conserved)
    return SyntheticWorld(
        spec=spec,
        bank=bank,
        stimulus_map=stimulus_map,
        mixing=mixing,
        private_responses=responses,
        private_loadings=loadings,
    )


def oracle_transfer(world: SyntheticWorld, novel_id: str, known_id: str, lambda_: float = 0.0) -> Matrix:
    """The ground-truth transfer M* = G_N⁺·G_K that satisfies F_N·M* = F_K for noiseless shared stimuli.

    Args:
        world: The world holding both subjects.
        novel_id: The subject transferred from.
        known_id: The subject transferred to.
        lambda_: The ridge penalty of the pseudo-inverse.

    Returns:
        The n × k transfer matrix.
    """
    g_novel = world.mixing_of(novel_id)
    g_known = world.mixing_of(known_id)
    return matmul(ridge_pinv(g_novel.T, lambda_).T, g_known)
