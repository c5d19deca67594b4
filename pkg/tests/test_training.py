from collections import OrderedDict
from dataclasses import replace

import numpy as np
import pytest

from app.core.errors import NumericalError, ValidationError
from app.features.projection import ProjectionModel
from app.model.em import EMInit, em_fit
from app.model.gaussian import StatePool
from app.model.registration import register_driver
from app.training.loss import LabeledFeatures, loss, loss_and_accuracy, loss_gradient_wrt_A
from app.training.trainer import TRACE_HEADER, TrainingConfig, train, train_on_features


def random_states(rng, Q=3, M=2) -> StatePool:
    means = rng.standard_normal((Q, M))
    covariances = []
    for _ in range(Q):
        B = rng.standard_normal((M, M))
        covariances.append(B @ B.T + 0.5 * np.eye(M))
    return StatePool(means, np.array(covariances))


def random_weights(rng, K, Q) -> np.ndarray:
    w = rng.uniform(0.1, 1.0, size=(K, Q))
    return w / w.sum(axis=1, keepdims=True)


def labeled(rng, N=12, K=3) -> LabeledFeatures:
    return LabeledFeatures(rng.standard_normal((N, 8)), np.arange(N) % K)


def clustered_features(rng, n=25):
    centers = {'d1': -1.5, 'd2': 0.0, 'd3': 1.5}
    raw = OrderedDict()
    for driver, c in centers.items():
        block = rng.standard_normal((n, 8))
        block[:, 0] += 3.0 * c
        block[:, 1] -= 2.0 * c
        raw[driver] = block
    return raw


def test_single_driver_loss_and_gradient_vanish():
    rng = np.random.default_rng(0)
    data = LabeledFeatures(rng.standard_normal((10, 8)), np.zeros(10, dtype=int))
    projection = ProjectionModel.random_orthonormal(2, rng)
    states = random_states(rng)
    weights = random_weights(rng, 1, 3)
    assert loss(projection, states, weights, data) == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(loss_gradient_wrt_A(projection, states, weights, data), 0.0, atol=1e-12)


def test_identical_profiles_give_uniform_loss():
    rng = np.random.default_rng(1)
    data = labeled(rng, N=9, K=3)
    projection = ProjectionModel.random_orthonormal(2, rng)
    weights = np.tile(random_weights(rng, 1, 3), (3, 1))
    value, accuracy = loss_and_accuracy(projection, random_states(rng), weights, data)
    assert value == pytest.approx(9 * np.log(3))
    # ties go to the first driver
    assert accuracy == pytest.approx(1.0 / 3.0)


@pytest.mark.parametrize('seed', range(20))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    data = labeled(rng, N=20, K=2)
    projection = ProjectionModel(rng.standard_normal((2, 8)) * 0.5)
    states = random_states(rng, Q=3, M=2)
    weights = random_weights(rng, 2, 3)

    analytic = loss_gradient_wrt_A(projection, states, weights, data)
    numeric = np.zeros_like(analytic)
    eps = 1e-5
    for i in range(analytic.shape[0]):
        for j in range(analytic.shape[1]):
            step = np.zeros_like(projection.A)
            step[i, j] = eps
            up = loss(ProjectionModel(projection.A + step), states, weights, data)
            down = loss(ProjectionModel(projection.A - step), states, weights, data)
            numeric[i, j] = (up - down) / (2 * eps)

    np.testing.assert_allclose(analytic, numeric, rtol=1e-4, atol=1e-8)


def test_loss_rejects_bad_labels():
    rng = np.random.default_rng(3)
    data = LabeledFeatures(rng.standard_normal((4, 8)), np.array([0, 1, 2, 3]))
    with pytest.raises(ValidationError):
        loss(ProjectionModel.selector(2), random_states(rng), random_weights(rng, 3, 3), data)


def test_loss_names_the_non_finite_sample():
    # the far sample overflows under the unit state but not under the wide one
    states = StatePool(np.zeros((2, 2)), np.array([np.eye(2), 1e300 * np.eye(2)]))
    weights = np.array([[1.0, 0.0], [0.0, 1.0]])
    X_std = np.zeros((2, 8))
    X_std[1, 0] = 1e160
    data = LabeledFeatures(X_std, np.array([0, 0]), ('w/first', 'w/second'))
    with pytest.raises(NumericalError) as info:
        loss(ProjectionModel.selector(2), states, weights, data)
    assert 'w/second' in str(info.value)
    assert info.value.reason == 'non_finite_loss'


@pytest.mark.parametrize('kwargs', [
    {'M': 0}, {'M': 9}, {'Q': 0}, {'n_inner': 0}, {'lr': 0.5}, {'lr_up': 0.9}, {'lr_down': 1.0},
])
def test_training_config_validation(kwargs):
    with pytest.raises(ValidationError):
        TrainingConfig(**kwargs)


def test_training_trace_mechanics():
    raw = clustered_features(np.random.default_rng(4))
    cfg = TrainingConfig(M=2, Q=4, n_outer=6, n_inner=5, lr=0.01, lr_up=1.1, lr_down=0.5, lr_max=0.1,
                         n_final_em=20, seed=1)
    model, trace = train_on_features(raw, cfg)

    assert len(trace) == cfg.n_outer + 1
    assert trace.rows[0].iter == 0 and trace.rows[0].is_best
    assert trace.rows[0].lr == pytest.approx(cfg.lr)
    assert np.all(np.diff(trace.best_losses) <= 0.0)
    assert trace.best_losses[-1] == pytest.approx(trace.losses.min())

    losses, rates = trace.losses, trace.learning_rates
    for t in range(1, len(trace)):
        if losses[t] < losses[t - 1]:
            assert rates[t] == pytest.approx(min(cfg.lr_up * rates[t - 1], cfg.lr_max))
        else:
            assert rates[t] == pytest.approx(cfg.lr_down * rates[t - 1])

    assert all(row.row_norm_error < 1e-9 for row in trace.rows)
    np.testing.assert_allclose(model.projection.row_norms(), 1.0)
    assert model.driver_ids == ['d1', 'd2', 'd3']
    assert len(TRACE_HEADER) == len(trace.as_rows()[0])


def test_training_is_deterministic():
    raw = clustered_features(np.random.default_rng(5))
    cfg = TrainingConfig(M=2, Q=3, n_outer=4, n_inner=4, n_final_em=10, seed=9)
    a, trace_a = train_on_features(raw, cfg)
    b, trace_b = train_on_features(raw, cfg)
    np.testing.assert_array_equal(trace_a.losses, trace_b.losses)
    np.testing.assert_array_equal(a.projection.A, b.projection.A)
    np.testing.assert_array_equal(a.weight_matrix(), b.weight_matrix())


def test_frozen_projection_reduces_to_em():
    raw = clustered_features(np.random.default_rng(6))
    cfg = TrainingConfig(M=2, Q=3, n_outer=3, n_inner=4, n_final_em=0, seed=2, freeze_projection=True)
    model, trace = train_on_features(raw, cfg)

    rng = np.random.default_rng(cfg.seed)
    projection = ProjectionModel.random_orthonormal(cfg.M, rng)
    np.testing.assert_array_equal(model.projection.A, projection.A)

    X_std = model.standardizer.transform(np.vstack(list(raw.values())))
    groups = np.split(projection.project(X_std), np.cumsum([len(r) for r in raw.values()])[:-1])
    em = em_fit(groups, cfg.Q, cfg.n_inner, rng=rng)
    em_trace = [em.final_log_likelihood]
    for _ in range(cfg.n_outer):
        em = em_fit(groups, cfg.Q, cfg.n_inner, init=EMInit.from_result(em), rng=rng)
        em_trace.append(em.final_log_likelihood)

    np.testing.assert_allclose([row.em_log_likelihood for row in trace.rows], em_trace)


def test_training_needs_two_drivers():
    raw = OrderedDict(d1=np.random.default_rng(7).standard_normal((10, 8)))
    with pytest.raises(ValidationError):
        train_on_features(raw, TrainingConfig(Q=2))


def test_learned_and_frozen_runs_share_initialization():
    raw = clustered_features(np.random.default_rng(8), n=30)
    base = TrainingConfig(M=1, Q=3, n_outer=15, n_inner=5, lr=0.01, n_final_em=0, seed=3)
    _, learned = train_on_features(raw, base)
    _, frozen = train_on_features(raw, replace(base, freeze_projection=True))
    assert learned.losses[0] == frozen.losses[0]
    assert learned.best_losses[-1] <= frozen.losses[0]


@pytest.mark.slow
def test_train_on_generated_windows(small_split, small_resample, quick_training):
    train_raw, _ = small_split
    model, trace = train(train_raw.resampled(small_resample), quick_training, small_resample)
    assert model.driver_ids == ['d1', 'd2', 'd3']
    assert model.hyper.window_T == small_resample.window_T
    assert model.hyper.dt == pytest.approx(0.1)
    assert len(trace) == quick_training.n_outer + 1


def test_registering_training_data_reproduces_the_trained_profile():
    raw = clustered_features(np.random.default_rng(10))
    model, _ = train_on_features(raw, TrainingConfig(M=2, Q=3, n_outer=3, n_inner=5, n_final_em=10, seed=4))
    again = register_driver(model, 'd1_again', raw['d1'])
    np.testing.assert_allclose(again.profile('d1_again').weights, model.profile('d1').weights, atol=1e-6)


@pytest.mark.slow
def test_registering_training_windows_reproduces_the_trained_profile(small_split, small_resample, quick_training):
    train_windows = small_split[0].resampled(small_resample)
    model, _ = train(train_windows, quick_training, small_resample)
    d1_windows = [seq for seq in train_windows if seq.driver_id == 'd1']
    again = register_driver(model, 'd1_again', d1_windows)
    np.testing.assert_allclose(again.profile('d1_again').weights, model.profile('d1').weights, atol=1e-6)
