"""__init__.py
The alignment model: the low-rank transfer matrix, the cross-stimulus mapper, the functional embedder and the frozen
proxy decoder.
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
from .dims import Dims, ParamCount, param_count
from .alignmentmodel import AlignmentModel, Gradients, init_model, stimulus_difference, fit_proxy_decoder
