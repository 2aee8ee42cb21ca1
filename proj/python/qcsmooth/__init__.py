"""Filtering and smoothing of monitored hybrid quantum-classical systems."""

from ._core import *  # noqa: F401,F403
from ._core import __version__, fluor  # noqa: F401
