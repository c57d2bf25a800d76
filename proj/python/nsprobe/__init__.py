"""Noise-sensitivity estimators and exact oracles for Boolean functions."""

from ._nsprobe import *  # noqa: F401,F403
from ._nsprobe import __version__  # noqa: F401
