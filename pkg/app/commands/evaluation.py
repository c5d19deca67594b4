"""
Evaluation Commands

evaluate: accuracy and confusion matrices of a model on the test split, for
one or more numbers of windows per identification.
sweep: hyper-parameter grid, or the registration case study with --case-study.
"""

import argparse
import json
from pathlib import Path
from typing import Any, Dict, List, Mapping, Union

from app.commands.base import BaseCommand, require
from app.commands.data import add_data_arguments, data_defaults, load_split
from app.commands.modeling import TRAINING_DEFAULTS, add_training_arguments, training_config
from app.core.config import RunConfig
from app.core.errors import ValidationError
from app.domain.sequence import ResampleConfig
from app.eval.evaluate import evaluate_many
from app.eval.reports import write_case_study, write_evaluation, write_sweep
from app.eval.sweep import SWEEP_AXES, SweepSettings, registration_case_study, sweep
from app.features.extractor import ReactionTimeConfig
from app.model.persistence import load_model

AXIS_TYPES = {'M': int, 'Q': int, 'n_sequences': int, 'window_T': float, 'overlap_ratio': float}


def parse_grid(grid: Union[str, Mapping[str, Any]]) -> Dict[str, List[Any]]:
    """
    Parse "M=2,4;Q=8,16" or a mapping of axis -> values.

    Returns:
        Dict[str, List[Any]]: Axis -> typed values, in the given order
    """
    if isinstance(grid, str):
        parsed: Dict[str, Any] = {}
        for part in filter(None, (p.strip() for p in grid.split(';'))):
            if '=' not in part:
                raise ValidationError(f"Grid axis '{part}' must look like name=v1,v2", reason="grid")
            name, values = part.split('=', 1)
            parsed[name.strip()] = [v.strip() for v in values.split(',') if v.strip()]
        grid = parsed
    if not isinstance(grid, Mapping):
        raise ValidationError("Sweep grid must be a mapping of axis to values", reason="grid")

    typed: Dict[str, List[Any]] = {}
    for axis, values in grid.items():
        if axis not in SWEEP_AXES:
            raise ValidationError(f"Unknown sweep axis '{axis}'; allowed: {', '.join(SWEEP_AXES)}", reason="grid")
        values = values if isinstance(values, (list, tuple)) else [values]
        try:
            typed[axis] = [AXIS_TYPES[axis](v) for v in values]
        except (TypeError, ValueError) as e:
            raise ValidationError(f"Bad value on sweep axis '{axis}': {e}", reason="grid")
    return typed


class EvaluateCommand(BaseCommand):
    name = 'evaluate'
    help = 'Evaluate a model on the test split with 1..n windows per identification'

    def defaults(self) -> Dict[str, Any]:
        return {**data_defaults(), 'model': None, 'n_values': [1, 3, 5, 10]}

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        add_data_arguments(parser)
        parser.add_argument('--model', type=str, default=None, help='Trained model.json')
        parser.add_argument('--n', dest='n_values', type=int, nargs='+', default=None,
                            help='Windows per identification, one report row each')

    def execute(self, config: RunConfig) -> int:
        model = load_model(Path(require(config, 'model')))
        _, test_raw = load_split(config)
        if len(test_raw) == 0:
            raise ValidationError("The test split is empty; lower --split", reason="empty_test")
        windows = test_raw.resampled(ResampleConfig(model.hyper.window_T, 0.0))

        results = evaluate_many(model, windows, [int(n) for n in config['n_values']], int(config['seed']))
        run_dir = self.run_dir(config)
        write_evaluation(results, run_dir)
        print(json.dumps({'run_dir': str(run_dir),
                          'accuracy': {str(r.n_sequences): r.accuracy for r in results}}))
        return 0


class SweepCommand(BaseCommand):
    name = 'sweep'
    help = 'Hyper-parameter grid over M, Q, window_T, overlap_ratio, n_sequences, or a registration case study'

    def defaults(self) -> Dict[str, Any]:
        return {**data_defaults(), **TRAINING_DEFAULTS, 'grid': {'M': [2, 4], 'Q': [8, 16]},
                'repetitions': 1, 'n_sequences': 1, 'case_study': None}

    def add_arguments(self, parser: argparse.ArgumentParser) -> None:
        add_data_arguments(parser)
        add_training_arguments(parser)
        parser.add_argument('--grid', type=str, default=None, help='Axes, e.g. "M=2,4;Q=8,16"')
        parser.add_argument('--repetitions', type=int, default=None, help='Model seeds per cell')
        parser.add_argument('--n-sequences', dest='n_sequences', type=int, default=None,
                            help='Test windows per identification')
        parser.add_argument('--case-study', dest='case_study', type=str, default=None,
                            help='Driver id held out and registered instead of running the grid')

    def execute(self, config: RunConfig) -> int:
        train_raw, test_raw = load_split(config)
        resample_cfg = ResampleConfig(float(config['window_T']), float(config['overlap_ratio']))
        rt_cfg = ReactionTimeConfig(config['tau_min'], config['tau_max'])
        cfg = training_config(config, config['seed'])
        run_dir = self.run_dir(config)

        if config['case_study']:
            result = registration_case_study(
                train_raw.resampled(resample_cfg), test_raw.resampled(ResampleConfig(resample_cfg.window_T, 0.0)),
                str(config['case_study']), cfg, resample_cfg, rt_cfg, float(config['ttc_cap']),
                int(config['n_sequences'])
            )
            write_case_study(result, run_dir)
            print(json.dumps({'run_dir': str(run_dir),
                              'accuracy': {name: r.accuracy for name, r in result.results.items()}}))
            return 0

        settings = SweepSettings(training=cfg, resample=resample_cfg, rt_cfg=rt_cfg,
                                 ttc_cap=float(config['ttc_cap']), n_sequences=int(config['n_sequences']),
                                 repetitions=int(config['repetitions']))
        result = sweep(parse_grid(config['grid']), train_raw, test_raw, settings)
        write_sweep(result, run_dir)
        print(json.dumps({'run_dir': str(run_dir), 'cells': len(result.cells), 'failures': result.n_failures}))
        return 0
