"""
Command Manager for DriveState

Builds the argument parser from the command registry, loads command classes
lazily and applies the error policy: expected failures print one JSON line to
stderr and map to their exit code, anything else exits with 1.
"""

import argparse
import importlib
import json
import logging
import sys
from typing import Dict, List, Optional

from app import __version__
from app.commands.base import COMMAND_REGISTRY, BaseCommand
from app.core.errors import DriveStateError, ValidationError
from app.enum.exit_codes import ExitCodes

logger = logging.getLogger(__name__)


def _load(dotted_path: str) -> type:
    module_name, class_name = dotted_path.rsplit('.', 1)
    return getattr(importlib.import_module(module_name), class_name)


class _ArgumentParser(argparse.ArgumentParser):
    """Parser whose usage errors follow the JSON error policy instead of exiting."""

    def error(self, message: str):
        raise ValidationError(f"{self.prog}: {message}", reason='bad_argument')


class CommandManager:
    """Coordinates the registered subcommands."""

    def __init__(self):
        self.commands: Dict[str, BaseCommand] = {}
        self._initialize_commands()

    def _initialize_commands(self):
        for name, dotted_path in COMMAND_REGISTRY.items():
            try:
                self.commands[name] = _load(dotted_path)()
            except Exception as e:
                logger.error(f"Error loading command {name} from {dotted_path}: {e}")

    def build_parser(self) -> argparse.ArgumentParser:
        shared = _ArgumentParser(add_help=False)
        shared.add_argument('--config', type=str, default=None, help='JSON file with parameter values')
        shared.add_argument('--seed', type=int, default=None, help='Master random seed')
        shared.add_argument('--out', type=str, default=None, help='Output location')

        parser = _ArgumentParser(
            prog='drivestate',
            description='Driver identification from stochastic multi-state car-following models'
        )
        parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
        subparsers = parser.add_subparsers(dest='command', required=True)
        for name, command in self.commands.items():
            subparser = subparsers.add_parser(name, help=command.help, parents=[shared])
            command.add_arguments(subparser)
        return parser

    def run(self, argv: Optional[List[str]] = None) -> int:
        """
        Parse argv and execute the selected command.

        Returns:
            int: Process exit code
        """
        name = 'drivestate'
        try:
            args = self.build_parser().parse_args(argv)
            name = args.command
            command = self.commands[name]
            config = command.resolve_config(args)
            return int(command.execute(config))
        except DriveStateError as e:
            logger.error(f"{name} failed ({e.reason}): {e}")
            print(json.dumps(e.to_payload()), file=sys.stderr)
            return e.exit_code.value
        except Exception as e:
            logger.exception(f"Unexpected error in {name}: {e}")
            print(json.dumps({'error': 'unexpected', 'message': str(e)}), file=sys.stderr)
            return ExitCodes.FAILURE.value
