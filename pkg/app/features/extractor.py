"""
Hand-Crafted Car-Following Features

Maps a fixed-length window to the 8-vector
(mean speed, mean gap, mean accel, mean positive accel, mean negative accel,
harmonic-mean TTC, reaction time, max cross-correlation).

Conventions for degenerate windows:
    * no frame with a > 0  -> f4 = 0; no frame with a < 0 -> f5 = 0
    * no frame with hdot > 0 -> f6 = TTC_CAP
    * flat ego or leader speed -> f7 = 0, f8 = 0

TTC follows the sign convention hdot = leader speed - ego speed and keeps the
frames with hdot > 0, i.e. an opening gap.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from app.core.errors import ValidationError
from app.domain.sequence import CarFollowingSequence
from app.enum.features import FeatureName, N_RAW_FEATURES

logger = logging.getLogger(__name__)

TTC_CAP = 100.0
FLAT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ReactionTimeConfig:
    """Lag search bounds (s) for the reaction-time cross-correlation."""

    tau_min: float = 0.0
    tau_max: float = 5.0

    def __post_init__(self):
        if not 0.0 <= self.tau_min < self.tau_max:
            raise ValidationError(f"Need 0 <= tau_min < tau_max, got [{self.tau_min}, {self.tau_max}]")

    def lags(self, dt: float) -> Tuple[int, int]:
        return int(round(self.tau_min / dt)), int(round(self.tau_max / dt))


@dataclass(frozen=True)
class RawFeatureVector:
    f1: float
    f2: float
    f3: float
    f4: float
    f5: float
    f6: float
    f7: float
    f8: float

    @classmethod
    def from_array(cls, values: np.ndarray) -> 'RawFeatureVector':
        values = np.asarray(values, dtype=float)
        if values.shape != (N_RAW_FEATURES,):
            raise ValidationError(f"Raw feature vector needs {N_RAW_FEATURES} values, got shape {values.shape}")
        return cls(*map(float, values))

    def as_array(self) -> np.ndarray:
        return np.array([self.f1, self.f2, self.f3, self.f4, self.f5, self.f6, self.f7, self.f8])

    def as_dict(self) -> dict:
        return dict(zip(FeatureName.labels(), self.as_array().tolist()))


def _is_flat(x: np.ndarray) -> bool:
    return float(np.ptp(x)) <= FLAT_TOLERANCE * max(1.0, float(np.max(np.abs(x))))


def _mean_where(values: np.ndarray, mask: np.ndarray) -> float:
    return float(values[mask].mean()) if mask.any() else 0.0


def harmonic_mean_ttc(h: np.ndarray, hdot: np.ndarray, ttc_cap: float = TTC_CAP) -> float:
    """
    Harmonic mean of TTC_j = h_j / hdot_j over frames with hdot_j > 0.

    Each TTC is capped at ttc_cap first; with no eligible frame the cap itself
    is returned.
    """
    mask = hdot > 0
    if not mask.any():
        return float(ttc_cap)
    ttc = np.minimum(h[mask] / hdot[mask], ttc_cap)
    return float(mask.sum() / np.sum(1.0 / ttc))


def lagged_correlations(x: np.ndarray, y: np.ndarray, lag_min: int, lag_max: int) -> np.ndarray:
    """
    Pearson correlation between x[k:] and y[:T-k] for k = lag_min..lag_max.

    Lags that leave fewer than two overlapping frames are not evaluated; a lag
    whose overlapping segments are flat scores 0.
    """
    T = len(x)
    lag_max = min(lag_max, T - 2)
    if lag_max < lag_min:
        return np.zeros(0)

    rhos = np.zeros(lag_max - lag_min + 1)
    for i, k in enumerate(range(lag_min, lag_max + 1)):
        xs = x[k:]
        ys = y[:T - k]
        if _is_flat(xs) or _is_flat(ys):
            continue
        xc = xs - xs.mean()
        yc = ys - ys.mean()
        rhos[i] = float(np.dot(xc, yc) / np.sqrt(np.dot(xc, xc) * np.dot(yc, yc)))
    return rhos


def reaction_time(ego_speed: np.ndarray, leader_speed: np.ndarray, dt: float,
                  rt_cfg: ReactionTimeConfig) -> Tuple[float, float]:
    """
    Lag (s) at which the ego speed best follows the leader speed, and that correlation.

    Ties go to the smallest lag.

    Returns:
        Tuple[float, float]: (f7, f8)
    """
    if _is_flat(ego_speed) or _is_flat(leader_speed):
        return 0.0, 0.0

    lag_min, lag_max = rt_cfg.lags(dt)
    rhos = lagged_correlations(ego_speed, leader_speed, lag_min, lag_max)
    if rhos.size == 0:
        return 0.0, 0.0

    best = int(np.argmax(rhos))
    return (lag_min + best) * dt, float(np.clip(rhos[best], -1.0, 1.0))


def extract_features(seq: CarFollowingSequence, rt_cfg: ReactionTimeConfig = ReactionTimeConfig(),
                     ttc_cap: float = TTC_CAP) -> RawFeatureVector:
    """
    Compute the 8 hand-crafted features of one window.

    Args:
        seq: Fixed-length window with at least two frames
        rt_cfg: Reaction-time lag bounds
        ttc_cap: Upper bound applied to each TTC before averaging

    Returns:
        RawFeatureVector: f1..f8
    """
    if len(seq) < 2:
        raise ValidationError(f"Feature extraction needs at least 2 frames, {seq.source_id!r} has {len(seq)}")

    v, a, h, hdot = seq.v, seq.a, seq.h, seq.hdot
    f7, f8 = reaction_time(v, seq.leader_speed, seq.dt, rt_cfg)

    return RawFeatureVector(
        f1=float(v.mean()),
        f2=float(h.mean()),
        f3=float(a.mean()),
        f4=_mean_where(a, a > 0),
        f5=_mean_where(a, a < 0),
        f6=harmonic_mean_ttc(h, hdot, ttc_cap),
        f7=float(f7),
        f8=float(f8)
    )


def extract_feature_matrix(windows: Iterable[CarFollowingSequence],
                           rt_cfg: ReactionTimeConfig = ReactionTimeConfig(),
                           ttc_cap: float = TTC_CAP) -> np.ndarray:
    """Stack extract_features over windows into an (N, 8) array, in input order."""
    rows: List[np.ndarray] = [extract_features(w, rt_cfg, ttc_cap).as_array() for w in windows]
    if not rows:
        return np.zeros((0, N_RAW_FEATURES))
    return np.vstack(rows)
