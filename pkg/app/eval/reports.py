"""
Report Writers

CSV tables and SVG charts for training traces, evaluations, sweeps and model
inspection. Every writer returns the paths it produced.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from app.domain.sequence import Dataset
from app.enum.colors import ChartColors
from app.enum.features import FeatureName
from app.eval.evaluate import EvaluationResult
from app.eval.sweep import CaseStudyResult, SweepResult
from app.features.projection import feature_contributions
from app.model.generative import GenerativeModel
from app.training.trainer import TRACE_HEADER, TrainingTrace
from app.utils import charts
from app.utils.files import write_csv

logger = logging.getLogger(__name__)


def write_trace(trace: TrainingTrace, out_dir: Path) -> List[Path]:
    out_dir = Path(out_dir)
    iterations = [row.iter for row in trace.rows]
    paths = [
        write_csv(out_dir / 'trace.csv', TRACE_HEADER, trace.as_rows()),
        charts.line_chart(
            out_dir / 'trace.svg', iterations,
            {'loss': (trace.losses, ChartColors.LOSS.value), 'best loss': (trace.best_losses, ChartColors.BEST.value)},
            title='Training loss and accuracy', xlabel='iteration', ylabel='loss',
            secondary={'train accuracy': (trace.accuracies, ChartColors.ACCURACY.value)},
            secondary_label='accuracy'
        )
    ]
    return paths


def write_confusion(result: EvaluationResult, path: Path) -> Path:
    header = ['truth'] + list(result.confusion.labels) + ['recall']
    rows = [row + [float(recall)] for row, recall in zip(result.confusion.as_rows(), result.confusion.recall)]
    return write_csv(path, header, rows)


def write_evaluation(results: Sequence[EvaluationResult], out_dir: Path) -> List[Path]:
    """accuracy.csv (one row per n), one confusion CSV per n and the accuracy curve."""
    out_dir = Path(out_dir)
    paths = [write_csv(out_dir / 'accuracy.csv', ('n_sequences', 'accuracy', 'n_trials', 'skipped'),
                       [(r.n_sequences, r.accuracy, r.n_trials, ';'.join(r.skipped)) for r in results])]
    for result in results:
        paths.append(write_confusion(result, out_dir / f"confusion_n{result.n_sequences}.csv"))
    if len(results) > 1:
        paths.append(charts.line_chart(
            out_dir / 'accuracy.svg', [r.n_sequences for r in results],
            {'test accuracy': ([r.accuracy for r in results], ChartColors.ACCURACY.value)},
            title='Accuracy with multiple sequences', xlabel='sequences per identification', ylabel='accuracy'
        ))
    return paths


def write_sweep(result: SweepResult, out_dir: Path) -> List[Path]:
    """
    sweep.csv in long form; for two-axis grids also the train/test
    tables with the first axis down and the second across, plus heatmaps.
    """
    out_dir = Path(out_dir)
    header = list(result.axes) + ['mean_train_acc', 'mean_test_acc', 'n_runs', 'seeds', 'failures']
    rows = []
    for cell in result.cells:
        rows.append([cell.values[axis] for axis in result.axes] + [
            cell.mean_train_accuracy, cell.mean_test_accuracy, cell.n_runs,
            ';'.join(str(s) for s in cell.seeds),
            ';'.join(f"{seed}:{reason}" for seed, reason in cell.failures)
        ])
    paths = [write_csv(out_dir / 'sweep.csv', header, rows)]

    if len(result.axes) == 2:
        row_axis, col_axis = result.axes
        row_values, col_values = result.axis_values(row_axis), result.axis_values(col_axis)
        for metric in ('train', 'test'):
            table = result.grid(row_axis, col_axis, metric)
            paths.append(write_csv(out_dir / f"{metric}_grid.csv", [f"{row_axis}\\{col_axis}"] + col_values,
                                   [[r] + table[i].tolist() for i, r in enumerate(row_values)]))
            paths.append(charts.heatmap(out_dir / f"{metric}_grid.svg", table, row_values, col_values,
                                        title=f"Mean {metric} accuracy", row_name=row_axis, col_name=col_axis))
    elif len(result.axes) == 1:
        axis = result.axes[0]
        values = result.axis_values(axis)
        paths.append(charts.line_chart(
            out_dir / 'sweep.svg', list(range(len(values))),
            {'train': ([result.cell(**{axis: v}).mean_train_accuracy for v in values], ChartColors.LOSS.value),
             'test': ([result.cell(**{axis: v}).mean_test_accuracy for v in values], ChartColors.ACCURACY.value)},
            title=f"Mean accuracy over {axis} ({', '.join(str(v) for v in values)})",
            xlabel=f"{axis} index", ylabel='accuracy'
        ))
    return paths


def write_case_study(result: CaseStudyResult, out_dir: Path) -> List[Path]:
    out_dir = Path(out_dir)
    paths = [write_csv(out_dir / 'case_study.csv', ('model', 'accuracy', 'n_trials'),
                       [(name, r.accuracy, r.n_trials) for name, r in result.results.items()])]
    for name, evaluation in result.results.items():
        paths.append(write_confusion(evaluation, out_dir / f"confusion_{name}.csv"))
    return paths


def write_dataset_summary(dataset: Dataset, path: Path) -> Path:
    counts = dataset.counts()
    durations = dataset.durations()
    return write_csv(path, ('driver_id', 'n_sequences', 'total_seconds'),
                     [(d, counts[d], durations[d]) for d in dataset.driver_ids])


def write_split_summary(train: Dataset, test: Dataset, path: Path) -> Path:
    train_counts, test_counts = train.counts(), test.counts()
    drivers = list(dict.fromkeys(train.driver_ids + test.driver_ids))
    return write_csv(path, ('driver_id', 'n_train', 'n_test'),
                     [(d, train_counts.get(d, 0), test_counts.get(d, 0)) for d in drivers])


def inspection_tables(model: GenerativeModel, driver_ids: Optional[Sequence[str]] = None) -> Dict[str, object]:
    """Profiles, feature contributions and a state summary as plain data."""
    selected = model.driver_ids if driver_ids is None else list(driver_ids)
    contributions = feature_contributions(model.projection)
    return {
        'profiles': {driver_id: model.profile(driver_id).weights.tolist() for driver_id in selected},
        'contributions': dict(zip(FeatureName.labels(), contributions.tolist())),
        'states': [
            {
                'mu': model.states.means[q].tolist(),
                'sigma_diag': np.diag(model.states.covariances[q]).tolist(),
                'log_det': float(np.linalg.slogdet(model.states.covariances[q])[1])
            }
            for q in range(model.states.Q)
        ]
    }


def write_inspection(model: GenerativeModel, out_dir: Path) -> List[Path]:
    out_dir = Path(out_dir)
    features = FeatureName.labels()
    states = [f"q{q + 1}" for q in range(model.states.Q)]
    tables = inspection_tables(model)
    weights = model.weight_matrix()
    squared = model.projection.A ** 2

    paths = [
        write_csv(out_dir / 'profiles.csv', ['driver_id'] + states,
                  [[d] + w for d, w in tables['profiles'].items()]),
        write_csv(out_dir / 'contributions.csv', ('feature', 'contribution'), list(tables['contributions'].items())),
        write_csv(out_dir / 'states.csv', ['state'] + [f"mu{m + 1}" for m in range(model.states.M)]
                  + [f"var{m + 1}" for m in range(model.states.M)] + ['log_det'],
                  [[states[q]] + s['mu'] + s['sigma_diag'] + [s['log_det']] for q, s in enumerate(tables['states'])]),
        charts.stacked_bars(out_dir / 'projection_weights.svg', squared, features,
                            [f"row {i + 1}" for i in range(model.projection.M)],
                            title='Squared projection weights', ylabel='a_ij^2'),
        charts.grouped_bars(out_dir / 'profiles.svg', weights, states, model.driver_ids,
                            title='Driver profiles', ylabel='weight')
    ]
    return paths
