"""
Sequence CSV Storage

One CSV file per raw sequence with header t,v,a,h,hdot, laid out as
<dataset>/<driver_id>/<sequence>.csv.
"""

import csv
import io
import logging
from pathlib import Path
from typing import List, Optional

import numpy as np

from app.core.errors import ValidationError
from app.domain.sequence import CarFollowingSequence, COLUMNS, Dataset
from app.utils.files import atomic_write_text

logger = logging.getLogger(__name__)

HEADER = ('t',) + COLUMNS


def sequence_to_csv(seq: CarFollowingSequence) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(HEADER)
    for index, row in enumerate(seq.data):
        t = round(index * seq.dt, 9)
        writer.writerow([repr(t)] + [repr(float(value)) for value in row])
    return buffer.getvalue()


def write_sequence(seq: CarFollowingSequence, path: Path) -> Path:
    return atomic_write_text(path, sequence_to_csv(seq))


def read_sequence(path: Path, driver_id: Optional[str] = None, dt: Optional[float] = None) -> CarFollowingSequence:
    """
    Load one sequence CSV.

    The sampling period is taken from the t column when it has at least two
    rows; otherwise the dt argument is required.

    Args:
        path: CSV file
        driver_id: Label to attach
        dt: Fallback sampling period

    Returns:
        CarFollowingSequence: Parsed sequence
    """
    path = Path(path)
    try:
        with path.open(newline='', encoding='utf-8') as handle:
            reader = csv.reader(handle)
            header = tuple(next(reader))
            rows = [[float(cell) for cell in row] for row in reader if row]
    except (OSError, StopIteration, ValueError) as e:
        raise ValidationError(f"Cannot read sequence {path}: {e}", reason="sequence_corrupt")

    if header != HEADER:
        raise ValidationError(f"Sequence {path} has header {header}, expected {HEADER}", reason="sequence_corrupt")
    if not rows:
        raise ValidationError(f"Sequence {path} has no frames", reason="sequence_corrupt")

    table = np.array(rows, dtype=float)
    t = table[:, 0]
    if len(t) >= 2:
        steps = np.diff(t)
        inferred = float(np.mean(steps))
        if inferred <= 0 or np.max(np.abs(steps - inferred)) > 1e-6:
            raise ValidationError(f"Sequence {path} is not sampled at a fixed monotone rate", reason="sequence_corrupt")
        dt = round(inferred, 9)
    elif dt is None:
        raise ValidationError(f"Sequence {path} has a single frame and no dt was given", reason="sequence_corrupt")

    return CarFollowingSequence(table[:, 1:], dt, driver_id=driver_id, source_id=f"{driver_id or '-'}/{path.stem}")


def write_dataset(dataset: Dataset, root: Path) -> List[Path]:
    """Write every sequence under root/<driver_id>/<name>.csv, named by its source id."""
    root = Path(root)
    written = []
    for seq in dataset:
        driver = seq.driver_id or 'unlabeled'
        name = seq.source_id.split('/')[-1] or f"seq{len(written):04d}"
        written.append(write_sequence(seq, root / driver / f"{name}.csv"))
    logger.info(f"Wrote {len(written)} sequences under {root}")
    return written


def read_dataset(root: Path, dt: Optional[float] = None, split: str = "all") -> Dataset:
    """
    Load a dataset directory.

    Driver ids are the sub-directory names; drivers and files are read in
    sorted order so the resulting Dataset is deterministic.
    """
    root = Path(root)
    if not root.is_dir():
        raise ValidationError(f"Dataset directory not found: {root}", reason="data_missing")

    sequences = []
    for driver_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for csv_path in sorted(driver_dir.glob('*.csv')):
            sequences.append(read_sequence(csv_path, driver_id=driver_dir.name, dt=dt))

    if not sequences:
        raise ValidationError(f"No sequences found under {root}", reason="data_missing")
    logger.info(f"Loaded {len(sequences)} sequences of {len({s.driver_id for s in sequences})} drivers from {root}")
    return Dataset(sequences, split)


def read_sequence_files(paths: List[Path], dt: Optional[float] = None) -> List[CarFollowingSequence]:
    return [read_sequence(Path(p), dt=dt) for p in paths]
