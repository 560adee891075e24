"""__init__.py
The multi-level alignment loss, its analytic gradients, and a finite-difference check of those gradients.
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
from .components import loss_rec, loss_kl, dissimilarity_matrix, loss_latent, loss_dec_proxy
from .alignmentloss import LossCoefficients, PairedBatch, LossBreakdown, forward, forward_loss, backward
from .gradcheck import GradientCheck, relative_error, finite_diff_check, gradcheck_instance
