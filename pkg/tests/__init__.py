""" __init__.py
Test suite for the neuralign package.
"""
# Package Header #
from src.neuralign.header import *

# Header #
__author__ = __author__
__credits__ = __credits__
__maintainer__ = __maintainer__
__email__ = __email__
