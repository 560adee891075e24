"""sessionhdf5.py
A versioned HDF5 container holding every subject's sessions of a simulated dataset.
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
import json
import logging
import pathlib
from typing import Any

# Third-Party Packages #
from baseobjects import BaseObject
from baseobjects.functions import singlekwargdispatch
from bidict import bidict
from classversioning import TriNumberVersion
import h5py
import numpy as np

# Local Packages #
from ..exceptions import ConfigError, FormatError
from .world import SyntheticWorldSpec
from .sessions import SubjectRecording, SubjectSession, SyntheticDataset
from .datasetio import BINARY_DTYPE, check_version


# Definitions #
logger = logging.getLogger(__name__)


# Classes #
class SessionHDF5(BaseObject):
    """An HDF5 file with one group per subject, each holding a train and an eval session.

    Values are stored as 32-bit floats, so a dataset reads back equal to its quantized form.

    Class Attributes:
        FILE_TYPE: The file type name written into the file.
        VERSION: The version of the layout.
        attribute_names: The python names of the file attributes mapped to their HDF5 names.
        dataset_names: The python names of the session arrays mapped to their HDF5 names.

    Attributes:
        path: The path of the file.
        mode: The mode the file is opened with.
        file: The open h5py file.

    Args:
        path: The path of the file.
        mode: The h5py mode to open the file with.
        init: Determines if this object will construct.
    """

    FILE_TYPE: str = "NeuralignSessions"
    VERSION: TriNumberVersion = TriNumberVersion(1, 0, 0)
    attribute_names: bidict = bidict(
        {"file_type": "FileType", "file_version": "FileVersion", "world": "WorldSpec", "voxels": "Voxels"}
    )
    dataset_names: bidict = bidict({"signals": "fmri", "stimulus_ids": "stimulus_ids", "embeddings": "stim"})

    # Class Methods #
    # File Validation
    @classmethod
    @singlekwargdispatch("file")
    def validate_file_type(cls, file: pathlib.Path | str | h5py.File) -> bool:
        """Checks if the given file or path is a session file.

        Args:
            file: The path or file object.

        Returns:
            If this is a valid file type.
        """
        raise TypeError(f"{type(file)} is not a valid type for validate_file_type.")

    @classmethod
    @validate_file_type.__wrapped__.register
    def _validate_file_type(cls, file: pathlib.Path) -> bool:
        if not file.is_file():
            return False
        try:
            with h5py.File(file, mode="r") as obj:
                return cls.validate_file_type(file=obj)
        except OSError:
            return False

    @classmethod
    @validate_file_type.__wrapped__.register
    def _validate_file_type(cls, file: str) -> bool:
        return cls.validate_file_type(file=pathlib.Path(file))

    @classmethod
    @validate_file_type.__wrapped__.register
    def _validate_file_type(cls, file: h5py.File) -> bool:
        t_name = cls.attribute_names["file_type"]
        return t_name in file.attrs and cls.FILE_TYPE == file.attrs[t_name]

    # Magic Methods #
    # Construction/Destruction
    def __init__(self, path: pathlib.Path | str | None = None, mode: str = "r", init: bool = True) -> None:
        # New Attributes #
        self.path: pathlib.Path | None = None
        self.mode: str = "r"
        self.file: h5py.File | None = None

        # Parent Attributes #
        super().__init__(init=False)

        # Object Construction #
        if init:
            self.construct(path=path, mode=mode)

    def __enter__(self) -> "SessionHDF5":
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        self.close()

    # Instance Methods #
    # Constructors/Destructors
    def construct(self, path: pathlib.Path | str | None = None, mode: str | None = None, **kwargs: Any) -> None:
        """Constructs this object.

        Args:
            path: The path of the file.
            mode: The h5py mode to open the file with.
            **kwargs: Keyword arguments for inheritance.
        """
        if path is not None:
            self.path = pathlib.Path(path)
        if mode is not None:
            self.mode = mode
        if self.path is not None:
            self.open()

    def open(self) -> "SessionHDF5":
        """Opens the file, writing the file attributes when it is created."""
        try:
            self.file = h5py.File(self.path, mode=self.mode)
        except OSError as error:
            raise FormatError(f"cannot open {self.path} as HDF5: {error}") from error

        if self.mode in {"w", "w-", "x"}:
            self.file.attrs[self.attribute_names["file_type"]] = self.FILE_TYPE
            self.file.attrs[self.attribute_names["file_version"]] = self.VERSION.str()
        elif not self.validate_file_type(file=self.file):
            self.close()
            raise FormatError(f"{self.path} is not a {self.FILE_TYPE} file")
        else:
            check_version(self.file.attrs.get(self.attribute_names["file_version"]), "session file")
        return self

    def close(self) -> None:
        if self.file is not None:
            self.file.close()
            self.file = None

    # Writing
    def _write_session(self, group: h5py.Group, session: SubjectSession) -> None:
        for name, array in (
            ("signals", session.signals.astype(BINARY_DTYPE)),
            ("stimulus_ids", session.stimulus_ids),
            ("embeddings", session.embeddings.astype(BINARY_DTYPE)),
        ):
            group.create_dataset(self.dataset_names[name], data=array)

    def write_dataset(self, dataset: SyntheticDataset) -> None:
        """Writes every subject's sessions and the world document.

        Args:
            dataset: The dataset to write.
        """
        self.file.attrs[self.attribute_names["world"]] = json.dumps(dataset.world_spec.to_dict(), sort_keys=True)
        for subject_id, recording in dataset.recordings.items():
            group = self.file.create_group(subject_id)
            group.attrs[self.attribute_names["voxels"]] = recording.train.voxels
            self._write_session(group.create_group("train"), recording.train)
            self._write_session(group.create_group("eval"), recording.eval)
        self.file.flush()
        logger.info("wrote %d subjects to %s", len(dataset.recordings), self.path)

    # Reading
    def _read_session(self, subject_id: str, group: h5py.Group) -> SubjectSession:
        arrays = {name: group[hdf5_name][()] for name, hdf5_name in self.dataset_names.items()}
        return SubjectSession(
            subject_id,
            arrays["signals"].astype(np.float64),
            arrays["stimulus_ids"],
            arrays["embeddings"].astype(np.float64),
        )

    def read_dataset(self) -> SyntheticDataset:
        """Reads every subject's sessions and the world document.

        Returns:
            The dataset.
        """
        try:
            world_spec = SyntheticWorldSpec.from_dict(json.loads(self.file.attrs[self.attribute_names["world"]]))
        except (KeyError, ValueError, ConfigError) as error:
            raise FormatError(f"{self.path} has no readable world document: {error}") from error

        recordings = {}
        for subject_id in world_spec.subject_ids:
            if subject_id not in self.file:
                raise FormatError(f"{self.path} is missing subject {subject_id}")
            group = self.file[subject_id]
            try:
                train = self._read_session(subject_id, group["train"])
                eval_ = self._read_session(subject_id, group["eval"])
            except KeyError as error:
                raise FormatError(f"{self.path} has an incomplete group for {subject_id}: {error}") from error
            recordings[subject_id] = SubjectRecording(subject_id, train, eval_)
        return SyntheticDataset(world_spec, recordings)


# Functions #
def save_session_hdf5(dataset: SyntheticDataset, path: pathlib.Path | str) -> pathlib.Path:
    """Writes a dataset into a new session file, replacing any existing one."""
    path = pathlib.Path(path)
    with SessionHDF5(path, mode="w") as file:
        file.write_dataset(dataset)
    return path
