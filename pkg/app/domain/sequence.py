"""
Car-Following Sequence Types

Frames are stored column-wise in a read-only (T, 4) array with columns
v, a, h, hdot. Frame objects are produced on demand for callers that want
per-frame access.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence

import numpy as np

from app.core.errors import ValidationError

logger = logging.getLogger(__name__)

V, A, H, HDOT = 0, 1, 2, 3
COLUMNS = ('v', 'a', 'h', 'hdot')


class Frame(NamedTuple):
    """One sample: ego speed, ego acceleration, gap to leader, leader-minus-ego speed."""
    v: float
    a: float
    h: float
    hdot: float


@dataclass(frozen=True)
class CarFollowingSequence:
    """
    A fixed-rate car-following time series for one follower-leader pair.

    Args:
        data: (T, 4) array of v, a, h, hdot
        dt: Sampling period in seconds
        driver_id: Ground-truth driver label, if known
        source_id: Provenance tag; one source id means one leader
    """

    data: np.ndarray
    dt: float
    driver_id: Optional[str] = None
    source_id: str = ""

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim != 2 or data.shape[1] != 4:
            raise ValidationError(f"Sequence data must have shape (T, 4), got {data.shape}")
        if data.shape[0] == 0:
            raise ValidationError("Sequence must contain at least one frame")
        if not self.dt > 0:
            raise ValidationError(f"Sampling period must be positive, got {self.dt}")
        if not np.all(np.isfinite(data)):
            raise ValidationError(f"Sequence {self.source_id!r} contains non-finite values")
        if np.any(data[:, H] <= 0):
            raise ValidationError(f"Sequence {self.source_id!r} has a non-positive gap")
        data.setflags(write=False)
        object.__setattr__(self, 'data', data)
        object.__setattr__(self, 'dt', float(self.dt))

    @classmethod
    def from_frames(cls, frames: Iterable[Frame], dt: float, driver_id: Optional[str] = None,
                    source_id: str = "") -> 'CarFollowingSequence':
        rows = [tuple(frame) for frame in frames]
        return cls(np.array(rows, dtype=float).reshape(-1, 4), dt, driver_id, source_id)

    @property
    def frames(self) -> List[Frame]:
        return [Frame(*map(float, row)) for row in self.data]

    def __len__(self) -> int:
        return self.data.shape[0]

    @property
    def duration(self) -> float:
        return len(self) * self.dt

    @property
    def v(self) -> np.ndarray:
        return self.data[:, V]

    @property
    def a(self) -> np.ndarray:
        return self.data[:, A]

    @property
    def h(self) -> np.ndarray:
        return self.data[:, H]

    @property
    def hdot(self) -> np.ndarray:
        return self.data[:, HDOT]

    @property
    def leader_speed(self) -> np.ndarray:
        return self.data[:, V] + self.data[:, HDOT]

    def window(self, start: int, stop: int, source_id: Optional[str] = None) -> 'CarFollowingSequence':
        return CarFollowingSequence(
            self.data[start:stop].copy(), self.dt, self.driver_id,
            source_id if source_id is not None else self.source_id
        )


@dataclass(frozen=True)
class ResampleConfig:
    """
    Fixed-length window resampling parameters.

    Args:
        window_T: Window duration T in seconds
        overlap_ratio: r = (T - T') / T, in [0, 1)
    """

    window_T: float = 15.0
    overlap_ratio: float = 0.0

    def __post_init__(self):
        if not self.window_T > 0:
            raise ValidationError(f"Window duration must be positive, got {self.window_T}")
        if not 0.0 <= self.overlap_ratio < 1.0:
            raise ValidationError(f"Overlap ratio must lie in [0, 1), got {self.overlap_ratio}")

    @property
    def stride(self) -> float:
        """T' = T (1 - r)."""
        return self.window_T * (1.0 - self.overlap_ratio)

    def window_frames(self, dt: float) -> int:
        return int(round(self.window_T / dt))


@dataclass(frozen=True)
class ValidationVerdict:
    accepted: bool
    reasons: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.accepted


def validate_car_following(seq: CarFollowingSequence, max_gap: float = 40.0,
                           min_duration: float = 25.0) -> ValidationVerdict:
    """
    Check a raw sequence against the extraction criteria.

    A single source id is taken to mean the leader never changes, so only the
    duration and the gap bound are checked. The first violated criterion is
    reported first.

    Args:
        seq: Raw sequence
        max_gap: Largest admissible gap (m) at any frame
        min_duration: Shortest admissible duration (s)

    Returns:
        ValidationVerdict: accepted flag plus human-readable reasons
    """
    reasons = []
    if seq.duration < min_duration - 1e-9:
        reasons.append(f"too_short: duration {seq.duration:.2f} s < {min_duration:.2f} s")
    over = np.flatnonzero(seq.h > max_gap)
    if over.size:
        first = int(over[0])
        reasons.append(f"gap_exceeded: h = {seq.h[first]:.2f} m > {max_gap:.2f} m at frame {first}")
    return ValidationVerdict(accepted=not reasons, reasons=reasons)


def count_windows(n_frames: int, window_frames: int, stride_frames: float) -> int:
    """Number of windows floor((L - T) / T') + 1, or 0 when L < T (all in frames)."""
    if n_frames < window_frames:
        return 0
    return int(np.floor((n_frames - window_frames) / stride_frames + 1e-9)) + 1


def resample(seq: CarFollowingSequence, cfg: ResampleConfig) -> List[CarFollowingSequence]:
    """
    Cut a raw sequence into windows of exactly T seconds starting at n T'.

    The start grid is anchored at the first frame. A tail shorter than T is
    dropped. Sequences shorter than T give an empty list.

    Args:
        seq: Raw sequence
        cfg: Window duration and overlap ratio

    Returns:
        List[CarFollowingSequence]: Windows inheriting the driver label
    """
    window_frames = cfg.window_frames(seq.dt)
    if window_frames < 1:
        raise ValidationError(f"Window of {cfg.window_T} s is shorter than one frame at dt={seq.dt}")
    stride_frames = cfg.stride / seq.dt

    windows = []
    for n in range(count_windows(len(seq), window_frames, stride_frames)):
        start = int(round(n * stride_frames))
        stop = start + window_frames
        if stop > len(seq):
            break
        windows.append(seq.window(start, stop, source_id=f"{seq.source_id}@{start}"))
    return windows


@dataclass
class Dataset:
    """
    Sequences grouped by driver.

    Args:
        sequences: All sequences, in a deterministic order
        split: Free-form tag, e.g. "train" or "test"
    """

    sequences: List[CarFollowingSequence]
    split: str = "all"

    def __post_init__(self):
        self.sequences = list(self.sequences)

    def __len__(self) -> int:
        return len(self.sequences)

    def __iter__(self) -> Iterator[CarFollowingSequence]:
        return iter(self.sequences)

    @property
    def is_labeled(self) -> bool:
        return all(seq.driver_id is not None for seq in self.sequences)

    def require_labeled(self) -> None:
        missing = [seq.source_id for seq in self.sequences if seq.driver_id is None]
        if missing:
            raise ValidationError(f"{len(missing)} sequences have no driver label, e.g. {missing[0]!r}")
        if not self.sequences:
            raise ValidationError("Dataset is empty")

    @property
    def driver_ids(self) -> List[str]:
        """Distinct driver ids in order of first appearance."""
        return list(OrderedDict.fromkeys(seq.driver_id for seq in self.sequences if seq.driver_id is not None))

    @property
    def n_drivers(self) -> int:
        return len(self.driver_ids)

    def by_driver(self) -> Dict[str, List[CarFollowingSequence]]:
        groups: Dict[str, List[CarFollowingSequence]] = OrderedDict()
        for seq in self.sequences:
            groups.setdefault(seq.driver_id, []).append(seq)
        return groups

    def counts(self) -> Dict[str, int]:
        return {driver: len(seqs) for driver, seqs in self.by_driver().items()}

    def durations(self) -> Dict[str, float]:
        return {driver: float(sum(seq.duration for seq in seqs)) for driver, seqs in self.by_driver().items()}

    def subset(self, driver_ids: Sequence[str], split: Optional[str] = None) -> 'Dataset':
        keep = set(driver_ids)
        return Dataset([seq for seq in self.sequences if seq.driver_id in keep], split or self.split)

    def without(self, driver_ids: Sequence[str]) -> 'Dataset':
        drop = set(driver_ids)
        return Dataset([seq for seq in self.sequences if seq.driver_id not in drop], self.split)

    def validated(self, max_gap: float = 40.0, min_duration: float = 25.0) -> 'Dataset':
        """Keep only sequences passing validate_car_following; rejections are logged."""
        kept = []
        for seq in self.sequences:
            verdict = validate_car_following(seq, max_gap, min_duration)
            if verdict:
                kept.append(seq)
            else:
                logger.warning(f"Rejected sequence {seq.source_id}: {verdict.reasons[0]}")
        return Dataset(kept, self.split)

    def resampled(self, cfg: ResampleConfig) -> 'Dataset':
        windows = []
        for seq in self.sequences:
            windows.extend(resample(seq, cfg))
        return Dataset(windows, self.split)
