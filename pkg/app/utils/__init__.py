"""
Utilities Package

Atomic file writes, CSV rendering and SVG chart helpers.
"""

from .files import atomic_write_bytes, atomic_write_text, render_csv, write_csv

__all__ = [
    'atomic_write_bytes',
    'atomic_write_text',
    'render_csv',
    'write_csv'
]
