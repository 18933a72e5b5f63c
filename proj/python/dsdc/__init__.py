"""Truncated discrete Safronov-Dubovskii coagulation system.

Thin wrapper over the compiled ``_core`` extension; see ``help(dsdc._core)``.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
