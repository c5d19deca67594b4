"""
Core Package

Error hierarchy and run configuration shared by every other package.
"""

from .config import RunConfig, default_dt, default_runs_dir, default_seed, load_config_file
from .errors import (
    DriveStateError,
    DuplicateDriverError,
    GenerationError,
    ModelFormatError,
    NumericalError,
    TrainingError,
    UnknownDriverError,
    ValidationError
)

__all__ = [
    'RunConfig',
    'default_dt',
    'default_runs_dir',
    'default_seed',
    'load_config_file',
    'DriveStateError',
    'DuplicateDriverError',
    'GenerationError',
    'ModelFormatError',
    'NumericalError',
    'TrainingError',
    'UnknownDriverError',
    'ValidationError'
]
