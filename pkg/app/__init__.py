"""
DriveState Application Package

This package contains the driver identification library: car-following
sequences, feature extraction and projection, the shared-state driver model,
joint training, the synthetic corpus generator, evaluation and the CLI commands.
"""

__version__ = "0.1.0"
__author__ = "DriveState Development Team"
