"""
Run Configuration

Resolves the parameters of one command from built-in defaults, the environment
(loaded from .env by main.py), an optional JSON config file and explicit
command-line flags, in that order of precedence.
"""

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from app.core.errors import ValidationError

logger = logging.getLogger(__name__)


def default_seed() -> int:
    return int(os.getenv('DRIVESTATE_SEED', '7'))


def default_runs_dir() -> Path:
    return Path(os.getenv('DRIVESTATE_RUNS_DIR', 'runs'))


def default_dt() -> float:
    return float(os.getenv('DRIVESTATE_DT', '0.1'))


def load_config_file(path: Optional[str]) -> Dict[str, Any]:
    """
    Read a JSON config file.

    Args:
        path: Path to the file, or None

    Returns:
        Dict[str, Any]: Parsed mapping (empty when path is None)
    """
    if not path:
        return {}

    config_path = Path(path)
    if not config_path.is_file():
        raise ValidationError(f"Config file not found: {config_path}", reason="config_missing")

    try:
        data = json.loads(config_path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ValidationError(f"Config file {config_path} is not valid JSON: {e}", reason="config_corrupt")

    if not isinstance(data, dict):
        raise ValidationError(f"Config file {config_path} must hold a JSON object", reason="config_corrupt")
    return data


@dataclass
class RunConfig:
    """Fully resolved parameters of a single command invocation."""

    command: str
    values: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def resolve(cls, command: str, defaults: Mapping[str, Any],
                file_values: Optional[Mapping[str, Any]] = None,
                overrides: Optional[Mapping[str, Any]] = None) -> 'RunConfig':
        """
        Merge defaults, config-file values and flag overrides.

        Flag overrides equal to None are treated as "not given". Keys in the
        config file that the command does not know are rejected.

        Args:
            command: Subcommand name
            defaults: Built-in defaults (already including environment values)
            file_values: Values read from --config
            overrides: Values from explicit flags

        Returns:
            RunConfig: Resolved configuration
        """
        values = dict(defaults)
        for key, value in (file_values or {}).items():
            if key not in values:
                raise ValidationError(f"Unknown config key for '{command}': {key}", reason="config_key")
            values[key] = value
        for key, value in (overrides or {}).items():
            if value is not None:
                values[key] = value
        return cls(command=command, values=values)

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    def to_json(self) -> str:
        from app import __version__

        document = {
            'tool_version': __version__,
            'command': self.command,
            'config': _jsonable(self.values)
        }
        return json.dumps(document, indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        """Short hash naming the run directory of this configuration."""
        canonical = json.dumps(_jsonable(self.values), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(f"{self.command}:{canonical}".encode('utf-8')).hexdigest()[:12]


def _jsonable(value: Any) -> Any:
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value
