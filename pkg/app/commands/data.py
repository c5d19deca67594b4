"""
Dataset loading shared by the training and evaluation commands.
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, Tuple

from app.commands.base import require
from app.core.config import RunConfig, default_dt
from app.domain.io import read_dataset
from app.domain.sequence import Dataset
from app.synthdata.generator import split_dataset

logger = logging.getLogger(__name__)


def data_defaults() -> Dict[str, Any]:
    return {'data': None, 'dt': default_dt(), 'split': 0.8, 'max_gap': 60.0, 'min_duration': 25.0}


def add_data_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--data', type=str, default=None, help='Dataset directory (<driver_id>/<sequence>.csv)')
    parser.add_argument('--dt', type=float, default=None, help='Sampling period for single-frame files')
    parser.add_argument('--split', type=float, default=None, help='Per-driver training fraction')
    parser.add_argument('--max-gap', dest='max_gap', type=float, default=None,
                        help='Reject sequences whose gap exceeds this (m)')
    parser.add_argument('--min-duration', dest='min_duration', type=float, default=None,
                        help='Reject sequences shorter than this (s)')


def load_split(config: RunConfig) -> Tuple[Dataset, Dataset]:
    """Read, validate and split the dataset; the split depends only on (data, split, seed)."""
    dataset = read_dataset(Path(require(config, 'data')), dt=config['dt'])
    dataset = dataset.validated(config['max_gap'], config['min_duration'])
    train, test = split_dataset(dataset, float(config['split']), int(config['seed']))
    logger.info(f"Split {len(dataset)} sequences into {len(train)} train and {len(test)} test")
    return train, test
