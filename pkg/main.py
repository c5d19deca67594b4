"""
DriveState
Driver identification from stochastic multi-state car-following models.

Command-line entry point: loads .env, configures logging and dispatches to
the registered subcommands.
"""

import os
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

from app.commands.manager import CommandManager

# Load environment variables
load_dotenv()


# Setup logging
def setup_logging():
    log_level = getattr(logging, os.getenv('LOG_LEVEL', 'INFO').upper())
    log_file = os.getenv('LOG_FILE', 'logs/drivestate.log')

    # Create logs directory if it doesn't exist
    Path(log_file).parent.mkdir(parents=True, exist_ok=True)

    # stdout carries command results, so console logs go to stderr
    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file, encoding='utf-8'),
            logging.StreamHandler(sys.stderr)
        ]
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Main function to run one command."""
    setup_logging()
    return CommandManager().run(argv)


if __name__ == '__main__':
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\nInterrupted by user", file=sys.stderr)
        sys.exit(1)
