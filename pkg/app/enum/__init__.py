"""
Enumerations Package

Shared enums for chart colours, feature names and process exit codes.
"""

from .colors import ChartColors, RowColors
from .exit_codes import ExitCodes
from .features import FeatureName, N_RAW_FEATURES

__all__ = [
    'ChartColors',
    'RowColors',
    'ExitCodes',
    'FeatureName',
    'N_RAW_FEATURES'
]
