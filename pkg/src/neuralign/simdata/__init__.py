"""__init__.py
The synthetic multi-subject world, its recorded sessions, cross-subject pairing, and dataset persistence.
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
from .world import SubjectSpec, SyntheticWorldSpec, SyntheticWorld, generate_world, oracle_transfer
from .sessions import SubjectSession, SubjectRecording, SyntheticDataset, generate_session, simulate_dataset
from .pairing import pair_by_similarity, paired_batch
from .datasetio import save_dataset, load_dataset, read_manifest, load_sessions
from .sessionhdf5 import SessionHDF5, save_session_hdf5
