"""
Domain Package

Car-following sequence types, extraction-criteria validation, fixed-length
resampling with overlap, and CSV storage.
"""

from .sequence import (
    CarFollowingSequence,
    Dataset,
    Frame,
    ResampleConfig,
    ValidationVerdict,
    count_windows,
    resample,
    validate_car_following
)
from .io import read_dataset, read_sequence, read_sequence_files, write_dataset, write_sequence

__all__ = [
    'CarFollowingSequence',
    'Dataset',
    'Frame',
    'ResampleConfig',
    'ValidationVerdict',
    'count_windows',
    'resample',
    'validate_car_following',
    'read_dataset',
    'read_sequence',
    'read_sequence_files',
    'write_dataset',
    'write_sequence'
]
