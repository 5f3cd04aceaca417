"""Python bindings for the avrc calibration engine."""

from ._avrc import *  # noqa: F401,F403
from ._avrc import ConfigError, DataError, InvariantViolation  # noqa: F401

__version__ = "0.1.0"
