"""Python access to the TREA accelerator model."""

from ._trea import *  # noqa: F401,F403
from ._trea import FXP4, FXP8, FxPFormat, FxPValue, encode, decode

__all__ = [name for name in dir() if not name.startswith("_")]
