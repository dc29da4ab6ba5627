"""Bit-sliced crossbar reprogramming simulator.

Report functions (analyze, plan, balance, simulate, sweep) take the same
options as the command-line tool as keyword arguments and return the
rendered report text.
"""

from ._xbar import *  # noqa: F401,F403
from ._xbar import Error, IoError, ValidationError

__all__ = [name for name in dir() if not name.startswith("_")]
