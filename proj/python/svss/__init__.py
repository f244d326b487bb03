"""Spectral mixture kernels with variance-optimal spectral sampling."""

from ._svss import *  # noqa: F401,F403
from ._svss import __doc__  # noqa: F401
