"""
Commands Package

Command-line subcommands, their registry and the manager that dispatches to
them.
"""

from .base import COMMAND_REGISTRY, BaseCommand, get_available_commands
from .manager import CommandManager

__all__ = [
    'COMMAND_REGISTRY',
    'BaseCommand',
    'get_available_commands',
    'CommandManager'
]
