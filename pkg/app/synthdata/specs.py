"""
Synthetic Corpus Specifications

Drivers are described by one or more follower-controller regimes plus a
regime transition matrix; the scenario fixes the leader speed profile family,
the sequence duration range and the validation thresholds the generated data
must satisfy. Both round-trip through a JSON document:

    {
      "scenario": {dt, duration_min, duration_max, leader_speed_min, ...},
      "drivers": [
        {"driver_id": "d1", "accel_noise": 0.15,
         "transition": [[...], ...],
         "regimes": [{"time_headway": 1.2, "max_accel": 1.0, ...}, ...]}
      ]
    }
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np

from app.core.errors import ValidationError
from app.model.gaussian import SIMPLEX_TOL
from app.utils.files import atomic_write_text

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegimeParams:
    """Intelligent-driver parameters of one regime."""

    time_headway: float
    max_accel: float
    comfortable_decel: float
    reaction_lag: float
    desired_speed: float = 36.0
    min_gap: float = 2.0

    def __post_init__(self):
        for name in ('time_headway', 'max_accel', 'comfortable_decel', 'desired_speed', 'min_gap'):
            if not getattr(self, name) > 0:
                raise ValidationError(f"Regime parameter {name} must be positive, got {getattr(self, name)}")
        if self.reaction_lag < 0:
            raise ValidationError(f"Reaction lag must be non-negative, got {self.reaction_lag}")

    def equilibrium_gap(self, speed: float) -> float:
        """Steady-state gap behind a leader driving at a constant speed."""
        ratio = min(speed / self.desired_speed, 0.99)
        return (self.min_gap + speed * self.time_headway) / np.sqrt(1.0 - ratio ** 4)


@dataclass(frozen=True)
class DriverSpec:
    driver_id: str
    regimes: Tuple[RegimeParams, ...]
    transition: Tuple[Tuple[float, ...], ...] = ((1.0,),)
    accel_noise: float = 0.1

    def __post_init__(self):
        regimes = tuple(r if isinstance(r, RegimeParams) else RegimeParams(**r) for r in self.regimes)
        transition = np.array(self.transition, dtype=float)
        if not self.driver_id:
            raise ValidationError("Driver spec needs a driver_id")
        if not regimes:
            raise ValidationError(f"Driver {self.driver_id} needs at least one regime")
        if transition.shape != (len(regimes), len(regimes)):
            raise ValidationError(f"Driver {self.driver_id}: transition matrix must be "
                                  f"{len(regimes)} x {len(regimes)}, got {transition.shape}")
        if np.any(transition < 0) or np.any(np.abs(transition.sum(axis=1) - 1.0) > SIMPLEX_TOL):
            raise ValidationError(f"Driver {self.driver_id}: transition rows must lie on the simplex")
        if self.accel_noise < 0:
            raise ValidationError(f"Driver {self.driver_id}: accel_noise must be non-negative")
        object.__setattr__(self, 'regimes', regimes)
        object.__setattr__(self, 'transition', tuple(tuple(float(p) for p in row) for row in transition))

    @property
    def transition_matrix(self) -> np.ndarray:
        return np.array(self.transition, dtype=float)

    def stationary_distribution(self) -> np.ndarray:
        return stationary_distribution(self.transition_matrix)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'driver_id': self.driver_id,
            'accel_noise': self.accel_noise,
            'transition': [list(row) for row in self.transition],
            'regimes': [asdict(r) for r in self.regimes]
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DriverSpec':
        try:
            return cls(
                driver_id=str(data['driver_id']),
                regimes=tuple(RegimeParams(**r) for r in data['regimes']),
                transition=tuple(tuple(row) for row in data.get('transition', [[1.0]])),
                accel_noise=float(data.get('accel_noise', 0.1))
            )
        except (KeyError, TypeError) as e:
            raise ValidationError(f"Malformed driver spec: {e}", reason="spec_corrupt")


@dataclass(frozen=True)
class ScenarioSpec:
    """
    Leader profile family, durations and validation thresholds.

    The leader holds piecewise-constant target speeds for hold_min..hold_max
    seconds, ramps between them with bounded acceleration, and carries an
    AR(1) acceleration perturbation clipped to +-perturbation.
    """

    dt: float = 0.1
    duration_min: float = 30.0
    duration_max: float = 180.0
    leader_speed_min: float = 4.0
    leader_speed_max: float = 12.0
    hold_min: float = 8.0
    hold_max: float = 25.0
    leader_accel: float = 1.0
    leader_decel: float = 1.5
    perturbation: float = 0.3
    switch_interval: float = 5.0
    max_gap: float = 60.0
    min_duration: float = 25.0
    max_attempts: int = 20
    seed: int = 7

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError(f"dt must be positive, got {self.dt}")
        if not 0 < self.duration_min <= self.duration_max:
            raise ValidationError(f"Duration range must satisfy 0 < min <= max, got "
                                  f"[{self.duration_min}, {self.duration_max}]")
        if self.duration_min < self.min_duration:
            raise ValidationError(f"duration_min {self.duration_min} is below the validation minimum "
                                  f"{self.min_duration}")
        if not 0 <= self.leader_speed_min <= self.leader_speed_max:
            raise ValidationError("Leader speeds must satisfy 0 <= min <= max")
        if not 0 < self.hold_min <= self.hold_max:
            raise ValidationError("Hold times must satisfy 0 < min <= max")
        if self.leader_accel <= 0 or self.leader_decel <= 0 or self.perturbation < 0:
            raise ValidationError("Leader acceleration bounds must be positive and perturbation non-negative")
        if self.switch_interval <= 0 or self.max_gap <= 0 or self.max_attempts < 1:
            raise ValidationError("switch_interval, max_gap and max_attempts must be positive")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class CorpusSpec:
    drivers: Tuple[DriverSpec, ...]
    scenario: ScenarioSpec = field(default_factory=ScenarioSpec)

    def __post_init__(self):
        ids = [d.driver_id for d in self.drivers]
        if not ids:
            raise ValidationError("Corpus spec needs at least one driver")
        if len(set(ids)) != len(ids):
            raise ValidationError(f"Duplicate driver ids in corpus spec: {ids}")
        object.__setattr__(self, 'drivers', tuple(self.drivers))

    def to_dict(self) -> Dict[str, Any]:
        return {'scenario': self.scenario.to_dict(), 'drivers': [d.to_dict() for d in self.drivers]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CorpusSpec':
        if not isinstance(data, dict) or 'drivers' not in data:
            raise ValidationError("Corpus spec must be an object with a 'drivers' list", reason="spec_corrupt")
        try:
            scenario = ScenarioSpec(**data.get('scenario', {}))
        except TypeError as e:
            raise ValidationError(f"Malformed scenario spec: {e}", reason="spec_corrupt")
        return cls(tuple(DriverSpec.from_dict(d) for d in data['drivers']), scenario)

    def with_seed(self, seed: int) -> 'CorpusSpec':
        return CorpusSpec(self.drivers, ScenarioSpec(**{**self.scenario.to_dict(), 'seed': int(seed)}))


def stationary_distribution(transition: np.ndarray) -> np.ndarray:
    """Left eigenvector of the transition matrix for eigenvalue 1, on the simplex."""
    transition = np.asarray(transition, dtype=float)
    n = transition.shape[0]
    system = np.vstack([transition.T - np.eye(n), np.ones((1, n))])
    target = np.concatenate([np.zeros(n), [1.0]])
    pi, *_ = np.linalg.lstsq(system, target, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _single(driver_id: str, headway: float, accel: float, decel: float, lag: float,
            noise: float = 0.15) -> DriverSpec:
    return DriverSpec(driver_id, (RegimeParams(headway, accel, decel, lag),), accel_noise=noise)


def _easy4() -> CorpusSpec:
    drivers = (
        _single('d1', 0.8, 1.8, 2.5, 0.4),
        _single('d2', 1.3, 1.2, 2.0, 0.8),
        _single('d3', 1.9, 0.9, 1.5, 1.2),
        _single('d4', 2.5, 0.7, 1.2, 1.6)
    )
    return CorpusSpec(drivers, ScenarioSpec())


def _hard8() -> CorpusSpec:
    drivers: List[DriverSpec] = []
    for i in range(8):
        headway = 1.0 + 0.15 * i
        lag = 0.5 + 0.1 * (i % 4)
        stay = 0.9 - 0.05 * (i % 3)
        calm = RegimeParams(headway + 0.3, 0.8 + 0.05 * i, 1.4, lag + 0.3)
        tense = RegimeParams(max(headway - 0.3, 0.5), 1.4 + 0.05 * i, 2.2, lag)
        drivers.append(DriverSpec(f"d{i + 1}", (calm, tense),
                                  transition=((stay, 1.0 - stay), (1.0 - stay + 0.05, stay - 0.05)),
                                  accel_noise=0.2))
    return CorpusSpec(tuple(drivers), ScenarioSpec())


PRESETS = {
    'easy4': _easy4,
    'hard8': _hard8
}


def get_available_presets() -> List[str]:
    return list(PRESETS.keys())


def preset(name: str) -> CorpusSpec:
    if name not in PRESETS:
        raise ValidationError(f"Unknown preset '{name}'. Available: {', '.join(PRESETS)}", reason="unknown_preset")
    return PRESETS[name]()


def load_corpus_spec(path: Path) -> CorpusSpec:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"Spec file not found: {path}", reason="spec_missing")
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise ValidationError(f"Spec file {path} is not valid JSON: {e}", reason="spec_corrupt")
    return CorpusSpec.from_dict(data)


def save_corpus_spec(spec: CorpusSpec, path: Path) -> Path:
    return atomic_write_text(Path(path), json.dumps(spec.to_dict(), indent=2) + "\n")
