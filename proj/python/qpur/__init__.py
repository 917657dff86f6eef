"""Continuous-measurement purification toolkit (Python bindings)."""

from ._qpur import *  # noqa: F401,F403
from ._qpur import QpurError, __version__  # noqa: F401
