"""
Shared fixtures: a small generated corpus and hand-built models.
"""

from dataclasses import replace

import numpy as np
import pytest

from app.domain.sequence import CarFollowingSequence, Dataset, ResampleConfig
from app.features.projection import ProjectionModel, Standardizer
from app.model.gaussian import DriverProfile, StatePool
from app.model.generative import GenerativeModel, ModelHyper
from app.synthdata.generator import generate_corpus, split_dataset
from app.synthdata.specs import preset
from app.training.trainer import TrainingConfig

WINDOW_T = 10.0


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    monkeypatch.setenv('DRIVESTATE_SEED', '7')
    monkeypatch.setenv('DRIVESTATE_RUNS_DIR', str(tmp_path / 'runs'))
    monkeypatch.setenv('DRIVESTATE_DT', '0.1')


@pytest.fixture(scope='session')
def small_scenario():
    return replace(preset('easy4').scenario, duration_min=30.0, duration_max=40.0, seed=11)


@pytest.fixture(scope='session')
def small_corpus(small_scenario) -> Dataset:
    """Three easy4 drivers, six sequences each."""
    return generate_corpus(preset('easy4').drivers[:3], small_scenario, 6)


@pytest.fixture(scope='session')
def small_split(small_corpus):
    return split_dataset(small_corpus, 0.5, seed=3)


@pytest.fixture(scope='session')
def small_resample() -> ResampleConfig:
    return ResampleConfig(WINDOW_T, 0.0)


@pytest.fixture
def quick_training() -> TrainingConfig:
    return TrainingConfig(M=2, Q=3, n_outer=3, n_inner=5, lr=0.01, n_final_em=10, seed=5)


@pytest.fixture
def ramp_sequence() -> CarFollowingSequence:
    """A follower accelerating gently behind a constant-speed leader."""
    t = np.arange(200) * 0.1
    v = 10.0 + 0.05 * t
    a = np.full_like(t, 0.05)
    hdot = 12.0 - v
    h = 20.0 + np.cumsum(hdot) * 0.1
    return CarFollowingSequence(np.column_stack([v, a, h, hdot]), 0.1, driver_id='d1', source_id='d1/ramp')


def two_state_model(driver_weights=None, separation: float = 4.0) -> GenerativeModel:
    """Hand-built M=2 model whose two states sit on either side of the origin."""
    driver_weights = driver_weights or {'a': [0.9, 0.1], 'b': [0.1, 0.9]}
    states = StatePool(np.array([[-separation / 2, 0.0], [separation / 2, 0.0]]),
                       np.array([np.eye(2), np.eye(2)]))
    return GenerativeModel(
        projection=ProjectionModel.selector(2),
        standardizer=Standardizer(np.zeros(8), np.ones(8)),
        states=states,
        profiles={k: DriverProfile(np.array(w)) for k, w in driver_weights.items()},
        hyper=ModelHyper(M=2, Q=2)
    )


@pytest.fixture
def toy_model() -> GenerativeModel:
    return two_state_model()
