"""
Identify Command

Prints {"predicted", "scores", "n_sequences"} to stdout, where scores are the
per-driver log-posteriors summed over every window of the given files.
"""

import argparse
import json
from pathlib import Path
from typing import Any, Dict

from app.commands.base import BaseCommand, require
from app.commands.modeling import model_windows
from app.core.config import RunConfig, default_dt
from app.domain.io import read_sequence_files
from app.model.generative import infer_multi
from app.model.persistence import load_model


class IdentifyCommand(BaseCommand):
    name = 'identify'
    help = 'Identify the driver of one or more car-following sequence files'

    def defaults(self) -> Dict[str, Any]:
        return {'model': None, 'sequences': None, 'dt': default_dt()}

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument('--model', type=str, default=None, help='Trained model.json')
        parser.add_argument('--sequences', nargs='+', default=None, help='Sequence CSV files of one driver')
        parser.add_argument('--dt', type=float, default=None, help='Sampling period for single-frame files')

    def execute(self, config: RunConfig) -> int:
        model = load_model(Path(require(config, 'model')))
        paths = [Path(p) for p in require(config, 'sequences')]
        windows = model_windows(model, read_sequence_files(paths, dt=config['dt']))

        predicted, scores = infer_multi(windows.sequences, model)
        self.logger.info(f"Identified {predicted} from {len(windows)} windows in {len(paths)} files")
        print(json.dumps({'predicted': predicted, 'scores': scores, 'n_sequences': len(windows)}))
        return 0
