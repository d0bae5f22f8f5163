"""Phase-space tools for two-mode bosonic states with fixed total photon number.

Spherical, planar and discrete Wigner functions, qudit encodings on the
(N+1)-dimensional Fock ladder, and the continuous-variable limit
experiments that connect them.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .fock import SSRCState, DensityMatrix, spin_coherent, schwinger_operators  # noqa: F401
