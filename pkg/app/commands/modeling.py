"""
Model Commands

train: fits a model on the training split and writes model.json plus the trace.
register: adds a new driver's profile to a copy of an existing model.
inspect: prints driver profiles, feature contributions and a state summary.
"""

import argparse
import json
from pathlib import Path
from typing import Any, Dict, List

from app.commands.base import BaseCommand, require
from app.commands.data import add_data_arguments, data_defaults, load_split
from app.core.config import RunConfig, default_dt
from app.core.errors import TrainingError, ValidationError
from app.domain.io import read_sequence_files
from app.domain.sequence import CarFollowingSequence, Dataset, ResampleConfig
from app.eval.reports import inspection_tables, write_inspection, write_split_summary, write_trace
from app.features.extractor import TTC_CAP, ReactionTimeConfig
from app.model.generative import GenerativeModel
from app.model.persistence import load_model, save_model
from app.model.registration import DEFAULT_REGISTRATION_ITERATIONS, register_driver
from app.training.trainer import TrainingConfig, train

TRAINING_DEFAULTS: Dict[str, Any] = {
    'M': 2,
    'Q': 8,
    'n_outer': 10,
    'n_inner': 10,
    'lr': 0.01,
    'lr_max': 0.1,
    'n_final_em': 200,
    'window_T': 15.0,
    'overlap_ratio': 0.0,
    'tau_min': 0.0,
    'tau_max': 5.0,
    'ttc_cap': TTC_CAP,
    'freeze_projection': False
}


def add_training_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--M', dest='M', type=int, default=None, help='Projected feature dimension (1..8)')
    parser.add_argument('--Q', dest='Q', type=int, default=None, help='Number of shared driver states')
    parser.add_argument('--n-outer', dest='n_outer', type=int, default=None, help='Outer gradient iterations')
    parser.add_argument('--n-inner', dest='n_inner', type=int, default=None, help='EM iterations per outer step')
    parser.add_argument('--lr', type=float, default=None, help='Initial learning rate')
    parser.add_argument('--lr-max', dest='lr_max', type=float, default=None, help='Learning-rate cap')
    parser.add_argument('--n-final-em', dest='n_final_em', type=int, default=None, help='Final EM iterations')
    parser.add_argument('--window-T', dest='window_T', type=float, default=None, help='Window length (s)')
    parser.add_argument('--overlap-ratio', dest='overlap_ratio', type=float, default=None,
                        help='Overlap of training windows, in [0, 1)')
    parser.add_argument('--tau-min', dest='tau_min', type=float, default=None, help='Smallest reaction lag (s)')
    parser.add_argument('--tau-max', dest='tau_max', type=float, default=None, help='Largest reaction lag (s)')
    parser.add_argument('--ttc-cap', dest='ttc_cap', type=float, default=None, help='TTC cap (s)')
    parser.add_argument('--freeze-projection', dest='freeze_projection', action='store_true', default=None,
                        help='Skip gradient steps on the projection')


def training_config(config: RunConfig, seed: int) -> TrainingConfig:
    return TrainingConfig(
        M=int(config['M']), Q=int(config['Q']), n_outer=int(config['n_outer']), n_inner=int(config['n_inner']),
        lr=float(config['lr']), lr_max=float(config['lr_max']), n_final_em=int(config['n_final_em']),
        seed=int(seed), freeze_projection=bool(config['freeze_projection'])
    )


def model_windows(model: GenerativeModel, sequences: List[CarFollowingSequence]) -> Dataset:
    """Cut sequences into the model's window length; sequences shorter than one window stay whole."""
    cfg = ResampleConfig(model.hyper.window_T, 0.0)
    windows: List[CarFollowingSequence] = []
    for seq in sequences:
        cut = Dataset([seq]).resampled(cfg).sequences
        windows.extend(cut if cut else [seq])
    return Dataset(windows)


class TrainCommand(BaseCommand):
    name = 'train'
    help = 'Train a model on the training split of a dataset'

    def defaults(self) -> Dict[str, Any]:
        return {**data_defaults(), **TRAINING_DEFAULTS}

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        add_data_arguments(parser)
        add_training_arguments(parser)

    def execute(self, config: RunConfig) -> int:
        train_raw, test_raw = load_split(config)
        resample_cfg = ResampleConfig(float(config['window_T']), float(config['overlap_ratio']))
        windows = train_raw.resampled(resample_cfg)
        run_dir = self.run_dir(config)
        write_split_summary(train_raw, test_raw, run_dir / 'split.csv')

        try:
            model, trace = train(windows, training_config(config, config['seed']), resample_cfg,
                                 ReactionTimeConfig(config['tau_min'], config['tau_max']), float(config['ttc_cap']))
        except TrainingError as e:
            if e.trace is not None and len(e.trace):
                write_trace(e.trace, run_dir)
            raise

        model_path = save_model(model, run_dir / 'model.json')
        write_trace(trace, run_dir)
        best = float(trace.best_losses[-1])
        print(json.dumps({'run_dir': str(run_dir), 'model': str(model_path), 'best_loss': best,
                          'drivers': model.driver_ids}))
        return 0


class RegisterCommand(BaseCommand):
    name = 'register'
    help = "Register a new driver from their own sequences (--out is the new model file)"

    def defaults(self) -> Dict[str, Any]:
        return {'model': None, 'data': None, 'driver_id': None, 'n_iter': DEFAULT_REGISTRATION_ITERATIONS,
                'dt': default_dt(), 'out': None}

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument('--model', type=str, default=None, help='Existing model.json')
        parser.add_argument('--data', type=str, default=None, help="Directory with the new driver's CSV files")
        parser.add_argument('--driver-id', dest='driver_id', type=str, default=None, help='Id of the new driver')
        parser.add_argument('--n-iter', dest='n_iter', type=int, default=None, help='Weights-only EM iterations')
        parser.add_argument('--dt', type=float, default=None, help='Sampling period for single-frame files')

    def execute(self, config: RunConfig) -> int:
        model_path = Path(require(config, 'model'))
        driver_id = str(require(config, 'driver_id'))
        data_dir = Path(require(config, 'data'))
        out = Path(config['out']) if config['out'] else model_path.with_name(f"{model_path.stem}-{driver_id}.json")
        if out.resolve() == model_path.resolve():
            raise ValidationError("Registration writes a new model file; --out must differ from --model")

        model = load_model(model_path)
        paths = sorted(data_dir.rglob('*.csv')) if data_dir.is_dir() else []
        if not paths:
            raise ValidationError(f"No sequence files found under {data_dir}", reason="data_missing")
        windows = model_windows(model, read_sequence_files(paths, dt=config['dt']))

        registered = register_driver(model, driver_id, windows.sequences, int(config['n_iter']))
        save_model(registered, out)
        print(json.dumps({'model': str(out), 'driver_id': driver_id, 'n_windows': len(windows),
                          'drivers': registered.driver_ids}))
        return 0


class InspectCommand(BaseCommand):
    name = 'inspect'
    help = 'Print driver profiles, feature contributions and states (--out writes CSV and SVG)'

    def defaults(self) -> Dict[str, Any]:
        return {'model': None, 'out': None, 'driver_ids': None}

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument('--model', type=str, default=None, help='model.json to inspect')
        parser.add_argument('--driver-id', dest='driver_ids', nargs='+', default=None,
                            help='only print these drivers\' profiles')

    def execute(self, config: RunConfig) -> int:
        model = load_model(Path(require(config, 'model')))
        tables = inspection_tables(model, config['driver_ids'])
        if config['out']:
            tables['files'] = [str(p) for p in write_inspection(model, Path(config['out']))]
        print(json.dumps(tables, indent=2))
        return 0
