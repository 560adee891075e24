"""datasetio.py
Reads and writes simulated datasets as a manifest plus raw little-endian binaries.
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
import hashlib
import json
import logging
import pathlib
from typing import Any

# Third-Party Packages #
from baseobjects.functions import singlekwargdispatch
from classversioning import TriNumberVersion
import numpy as np

# Local Packages #
from ..exceptions import ChecksumError, ConfigError, FormatError, FormatVersionError
from .world import SyntheticWorldSpec
from .sessions import SubjectRecording, SubjectSession, SyntheticDataset


# Definitions #
logger = logging.getLogger(__name__)

DATASET_FORMAT: str = "neuralign-dataset"
DATASET_VERSION: TriNumberVersion = TriNumberVersion(1, 0, 0)
NEXT_INCOMPATIBLE: TriNumberVersion = TriNumberVersion(2, 0, 0)
MANIFEST_NAME: str = "manifest.json"
INCOMPLETE_MARKER: str = ".incomplete"
BINARY_DTYPE: str = "<f4"


# Functions #
def sha256_of(path: pathlib.Path) -> str:
    """The SHA-256 hex digest of a file."""
    digest = hashlib.sha256()
    with path.open("rb") as file:
        for chunk in iter(lambda: file.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def check_version(value: Any, kind: str) -> TriNumberVersion:
    """Parses a format version and rejects versions of another major release.

    Args:
        value: The version string read from disk.
        kind: The kind of file, used in error messages.

    Returns:
        The parsed version.
    """
    try:
        version = TriNumberVersion(str(value))
    except Exception as error:
        raise FormatVersionError(f"{kind} has an unreadable format version {value!r}") from error
    if not DATASET_VERSION <= version < NEXT_INCOMPATIBLE:
        raise FormatVersionError(f"{kind} format version {value} is not supported, expected {DATASET_VERSION.str()}")
    return version


def _write_rows(path: pathlib.Path, *blocks: np.ndarray) -> str:
    with path.open("wb") as file:
        for block in blocks:
            file.write(np.ascontiguousarray(block, dtype=BINARY_DTYPE).tobytes())
    return sha256_of(path)


def _read_rows(path: pathlib.Path, checksum: str, rows: int, cols: int) -> np.ndarray:
    if not path.is_file():
        raise FormatError(f"{path} is missing")
    if sha256_of(path) != checksum:
        raise ChecksumError(f"{path.name} does not match its recorded checksum")
    raw = path.read_bytes()
    expected = rows * cols * np.dtype(BINARY_DTYPE).itemsize
    if len(raw) != expected:
        raise FormatError(f"{path.name} holds {len(raw)} bytes, the manifest implies {expected} ({rows} × {cols})")
    return np.frombuffer(raw, dtype=BINARY_DTYPE).reshape(rows, cols).astype(np.float64)


def save_dataset(dataset: SyntheticDataset, path: pathlib.Path | str) -> pathlib.Path:
    """Writes a dataset into a directory.

    A sentinel file marks the directory as incomplete until every file is written.

    Args:
        dataset: The dataset to write.
        path: The directory to write into, created when missing.

    Returns:
        The path of the manifest.
    """
    path = pathlib.Path(path)
    path.mkdir(parents=True, exist_ok=True)
    marker = path / INCOMPLETE_MARKER
    marker.touch()

    subjects = []
    for subject_id, recording in dataset.recordings.items():
        train, eval_ = recording.train, recording.eval
        fmri_name = f"fmri_{subject_id}.bin"
        stim_name = f"stim_{subject_id}.bin"
        subjects.append(
            {
                "id": subject_id,
                "voxels": train.voxels,
                "train_samples": train.samples,
                "eval_samples": eval_.samples,
                "train_stimulus_ids": train.stimulus_ids.tolist(),
                "eval_stimulus_ids": eval_.stimulus_ids.tolist(),
                "fmri_file": fmri_name,
                "fmri_sha256": _write_rows(path / fmri_name, train.signals, eval_.signals),
                "stim_file": stim_name,
                "stim_sha256": _write_rows(path / stim_name, train.embeddings, eval_.embeddings),
            }
        )

    manifest = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION.str(),
        "seed": dataset.world_spec.seed,
        "embedding_dim": dataset.world_spec.embedding_dim,
        "world": dataset.world_spec.to_dict(),
        "subjects": subjects,
    }
    manifest_path = path / MANIFEST_NAME
    with manifest_path.open("w", encoding="utf-8") as file:
        json.dump(manifest, file, indent=2, sort_keys=True)
        file.write("\n")

    marker.unlink()
    logger.info("wrote dataset with %d subjects to %s", len(subjects), path)
    return manifest_path


def read_manifest(path: pathlib.Path | str) -> dict[str, Any]:
    """Reads and checks the manifest of a dataset directory."""
    path = pathlib.Path(path)
    if not path.is_dir():
        raise FormatError(f"{path} is not a dataset directory")
    if (path / INCOMPLETE_MARKER).exists():
        raise FormatError(f"{path} was not completely written")
    manifest_path = path / MANIFEST_NAME
    if not manifest_path.is_file():
        raise FormatError(f"{path} has no {MANIFEST_NAME}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as error:
        raise FormatError(f"{manifest_path} is not valid JSON: {error}") from error

    if not isinstance(manifest, dict) or manifest.get("format") != DATASET_FORMAT:
        raise FormatError(f"{manifest_path} is not a {DATASET_FORMAT} manifest")
    check_version(manifest.get("version"), "dataset")
    for key in ("world", "subjects", "embedding_dim"):
        if key not in manifest:
            raise FormatError(f"{manifest_path} is missing {key}")
    return manifest


def load_dataset(path: pathlib.Path | str) -> SyntheticDataset:
    """Reads a dataset directory, verifying checksums before sizes.

    Args:
        path: The dataset directory.

    Returns:
        The dataset with float64 signals and embeddings.
    """
    path = pathlib.Path(path)
    manifest = read_manifest(path)
    try:
        world_spec = SyntheticWorldSpec.from_dict(manifest["world"])
    except (ConfigError, TypeError) as error:
        raise FormatError(f"the world document of {path} is malformed: {error}") from error
    a = int(manifest["embedding_dim"])

    recordings = {}
    for entry in manifest["subjects"]:
        try:
            subject_id = entry["id"]
            voxels = int(entry["voxels"])
            n_train = int(entry["train_samples"])
            n_eval = int(entry["eval_samples"])
            train_ids = np.asarray(entry["train_stimulus_ids"], dtype=np.int64)
            eval_ids = np.asarray(entry["eval_stimulus_ids"], dtype=np.int64)
            fmri = (entry["fmri_file"], entry["fmri_sha256"])
            stim = (entry["stim_file"], entry["stim_sha256"])
        except (KeyError, TypeError, ValueError) as error:
            raise FormatError(f"malformed subject entry in {path / MANIFEST_NAME}: {error}") from error
        if train_ids.size != n_train or eval_ids.size != n_eval:
            raise FormatError(f"stimulus id lists of {subject_id} disagree with the sample counts")

        signals = _read_rows(path / fmri[0], fmri[1], n_train + n_eval, voxels)
        embeddings = _read_rows(path / stim[0], stim[1], n_train + n_eval, a)
        recordings[subject_id] = SubjectRecording(
            subject_id,
            SubjectSession(subject_id, signals[:n_train], train_ids, embeddings[:n_train]),
            SubjectSession(subject_id, signals[n_train:], eval_ids, embeddings[n_train:]),
        )

    logger.info("loaded dataset with %d subjects from %s", len(recordings), path)
    return SyntheticDataset(world_spec, recordings)


@singlekwargdispatch("path")
def load_sessions(path: pathlib.Path | str) -> SyntheticDataset:
    """Loads a dataset from either a dataset directory or an HDF5 session file.

    Args:
        path: The dataset directory or HDF5 file.

    Returns:
        The dataset.
    """
    raise TypeError(f"{type(path)} is not a valid type for load_sessions.")


@load_sessions.register
def _load_sessions(path: pathlib.Path) -> SyntheticDataset:
    if path.is_dir():
        return load_dataset(path)

    from .sessionhdf5 import SessionHDF5

    if SessionHDF5.validate_file_type(file=path):
        with SessionHDF5(path) as file:
            return file.read_dataset()
    if path.exists():
        raise FormatError(f"{path} is neither a dataset directory nor a session file")
    raise FormatError(f"{path} does not exist")


@load_sessions.register
def _load_sessions(path: str) -> SyntheticDataset:
    return load_sessions(path=pathlib.Path(path))
