"""
Base Command Classes

Contains the base command class and the registry used by the command manager
for lazy loading.
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict

from app.core.config import RunConfig, default_runs_dir, default_seed, load_config_file
from app.core.errors import ValidationError
from app.utils.files import atomic_write_text


class BaseCommand:
    """
    Base class for all subcommands.

    Subclasses declare their configuration keys and defaults in defaults();
    every key can be set from the --config file or from a flag of the same name.
    """

    name = ''
    help = ''

    def __init__(self):
        self.logger = logging.getLogger(self.__class__.__name__)

    def defaults(self) -> Dict[str, Any]:
        """Built-in defaults of the command's own keys."""
        return {}

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        """Register command-specific flags; every dest must default to None."""

    def execute(self, config: RunConfig) -> int:
        """
        Run the command.

        Args:
            config: Fully resolved configuration

        Returns:
            int: Process exit code
        """
        raise NotImplementedError("Subclasses must implement execute() method")

    def resolve_config(self, args: argparse.Namespace) -> RunConfig:
        defaults = {'seed': default_seed(), 'out': str(default_runs_dir())}
        defaults.update(self.defaults())
        overrides = {key: getattr(args, key, None) for key in defaults}
        return RunConfig.resolve(self.name, defaults, load_config_file(args.config), overrides)

    def run_dir(self, config: RunConfig) -> Path:
        """Create the run directory named by the config hash and record the config in it."""
        path = Path(config['out']) / f"{self.name}-{config.digest()}"
        path.mkdir(parents=True, exist_ok=True)
        atomic_write_text(path / 'config.json', config.to_json())
        self.logger.info(f"Run directory: {path}")
        return path


def require(config: RunConfig, key: str) -> Any:
    """Value of a key that has no usable default."""
    value = config.get(key)
    if value in (None, ''):
        raise ValidationError(f"'{config.command}' needs --{key.replace('_', '-')} (or '{key}' in --config)",
                              reason="missing_argument")
    return value


# Command registry for dynamic loading
COMMAND_REGISTRY = {
    'generate': 'app.commands.corpus.GenerateCommand',
    'features': 'app.commands.corpus.FeaturesCommand',
    'train': 'app.commands.modeling.TrainCommand',
    'register': 'app.commands.modeling.RegisterCommand',
    'inspect': 'app.commands.modeling.InspectCommand',
    'identify': 'app.commands.identification.IdentifyCommand',
    'evaluate': 'app.commands.evaluation.EvaluateCommand',
    'sweep': 'app.commands.evaluation.SweepCommand'
}


def get_available_commands() -> list:
    """
    Get list of available subcommand names.

    Returns:
        list: Registered command names
    """
    return list(COMMAND_REGISTRY.keys())
