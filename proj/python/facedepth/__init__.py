"""Synthetic facial RGB-D rendering and depth evaluation."""

from ._facedepth import *  # noqa: F401,F403
from ._facedepth import __version__  # noqa: F401
