"""Python bindings for the metadsp C++ core."""

from ._core import *  # noqa: F401,F403
from ._core import ConfigError, IoError, NumericalError  # noqa: F401

__version__ = "0.1.0"
