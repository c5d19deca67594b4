"""
Corpus Commands

generate: writes a synthetic corpus from a preset or a JSON spec file.
features: dumps the eight raw features of every window of a dataset.
"""

import argparse
import json
from pathlib import Path
from typing import Any, Dict

from app.commands.base import BaseCommand, require
from app.core.config import RunConfig, default_dt
from app.domain.io import read_dataset, write_dataset
from app.domain.sequence import ResampleConfig
from app.enum.features import FeatureName
from app.eval.reports import write_dataset_summary
from app.features.extractor import TTC_CAP, ReactionTimeConfig, extract_feature_matrix
from app.synthdata.generator import generate_from_spec
from app.synthdata.specs import get_available_presets, load_corpus_spec, preset, save_corpus_spec
from app.utils.files import atomic_write_text, write_csv


class GenerateCommand(BaseCommand):
    name = 'generate'
    help = 'Generate a synthetic car-following corpus (--out is the corpus directory)'

    def defaults(self) -> Dict[str, Any]:
        return {'preset': 'easy4', 'spec': None, 'n_sequences': 100, 'out': 'data/corpus'}

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument('--preset', choices=get_available_presets(), default=None,
                            help='Built-in driver population')
        parser.add_argument('--spec', type=str, default=None, help='JSON corpus spec; overrides --preset')
        parser.add_argument('--n-sequences', dest='n_sequences', type=int, default=None,
                            help='Raw sequences per driver')

    def execute(self, config: RunConfig) -> int:
        spec = load_corpus_spec(Path(config['spec'])) if config['spec'] else preset(config['preset'])
        spec = spec.with_seed(config['seed'])
        out = Path(config['out'])

        dataset = generate_from_spec(spec, int(config['n_sequences']))
        write_dataset(dataset, out)
        save_corpus_spec(spec, out / 'spec.json')
        write_dataset_summary(dataset, out / 'summary.csv')
        atomic_write_text(out / 'config.json', config.to_json())

        self.logger.info(f"Corpus of {len(dataset)} sequences from {dataset.n_drivers} drivers written to {out}")
        print(json.dumps({'data': str(out), 'n_sequences': len(dataset), 'drivers': dataset.driver_ids}))
        return 0


class FeaturesCommand(BaseCommand):
    name = 'features'
    help = 'Dump driver_id, window_id and f1..f8 for every window of a dataset'

    def defaults(self) -> Dict[str, Any]:
        return {
            'data': None,
            'dt': default_dt(),
            'window_T': 15.0,
            'overlap_ratio': 0.0,
            'tau_min': 0.0,
            'tau_max': 5.0,
            'ttc_cap': TTC_CAP
        }

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument('--data', type=str, default=None, help='Dataset directory')
        parser.add_argument('--dt', type=float, default=None, help='Sampling period for single-frame files')
        parser.add_argument('--window-T', dest='window_T', type=float, default=None, help='Window length (s)')
        parser.add_argument('--overlap-ratio', dest='overlap_ratio', type=float, default=None)
        parser.add_argument('--tau-min', dest='tau_min', type=float, default=None)
        parser.add_argument('--tau-max', dest='tau_max', type=float, default=None)
        parser.add_argument('--ttc-cap', dest='ttc_cap', type=float, default=None)

    def execute(self, config: RunConfig) -> int:
        dataset = read_dataset(Path(require(config, 'data')), dt=config['dt'])
        windows = dataset.resampled(ResampleConfig(config['window_T'], config['overlap_ratio']))
        raw = extract_feature_matrix(windows.sequences, ReactionTimeConfig(config['tau_min'], config['tau_max']),
                                     config['ttc_cap'])

        run_dir = self.run_dir(config)
        path = write_csv(run_dir / 'features.csv', ['driver_id', 'window_id'] + FeatureName.labels(),
                         [[w.driver_id, w.source_id] + row.tolist() for w, row in zip(windows.sequences, raw)])
        print(json.dumps({'features': str(path), 'n_windows': len(windows)}))
        return 0

