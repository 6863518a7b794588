"""SiV spin cavity-QED and optomechanics toolkit."""

from ._core import *  # noqa: F401,F403
from ._core import (
    DataError,
    DomainError,
    ExtractionError,
    FitFailureError,
    InvalidInputError,
    IoError,
    OmcspinError,
)

__version__ = "0.1.0"
