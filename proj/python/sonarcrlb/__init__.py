"""Bistatic two-node ULA localization bounds."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
