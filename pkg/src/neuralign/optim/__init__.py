"""__init__.py
Optimizers for the alignment model.
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
from .adam import AdamState, adam_update, adam_step
