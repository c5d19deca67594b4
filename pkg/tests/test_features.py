import numpy as np
import pytest

from app.core.errors import ValidationError
from app.domain.sequence import CarFollowingSequence
from app.features.extractor import (
    TTC_CAP,
    RawFeatureVector,
    ReactionTimeConfig,
    extract_feature_matrix,
    extract_features,
    harmonic_mean_ttc,
    lagged_correlations,
    reaction_time
)
from app.features.projection import (
    ProjectionModel,
    Standardizer,
    destandardize,
    feature_contributions,
    fit_standardizer,
    standardize
)


def test_harmonic_mean_ttc_uses_opening_frames_only():
    h = np.array([10.0, 20.0, 30.0, 40.0])
    hdot = np.array([2.0, 4.0, -1.0, 0.0])
    # TTCs 5 and 5 -> harmonic mean 5
    assert harmonic_mean_ttc(h, hdot) == pytest.approx(5.0)


def test_harmonic_mean_ttc_cap():
    h = np.array([50.0, 50.0])
    hdot = np.array([0.1, 1.0])
    # 500 is capped at 100; harmonic mean of (100, 50)
    assert harmonic_mean_ttc(h, hdot) == pytest.approx(2.0 / (1.0 / 100.0 + 1.0 / 50.0))
    assert harmonic_mean_ttc(h, -hdot) == TTC_CAP
    assert harmonic_mean_ttc(h, -hdot, ttc_cap=30.0) == 30.0


def test_flat_speeds_give_zero_reaction_features():
    flat = np.full(100, 12.0)
    moving = 12.0 + np.sin(np.arange(100) * 0.1)
    assert reaction_time(flat, moving, 0.1, ReactionTimeConfig()) == (0.0, 0.0)
    assert reaction_time(moving, flat, 0.1, ReactionTimeConfig()) == (0.0, 0.0)


def test_reaction_time_recovers_known_lag():
    rng = np.random.default_rng(0)
    leader = 12.0 + np.cumsum(rng.standard_normal(400)) * 0.1
    lag = 12
    ego = np.concatenate([np.full(lag, leader[0]), leader[:-lag]])
    f7, f8 = reaction_time(ego, leader, 0.1, ReactionTimeConfig(0.0, 3.0))
    assert f7 == pytest.approx(1.2)
    assert f8 == pytest.approx(1.0, abs=1e-9)


def test_lag_bounds_are_inclusive():
    x = np.arange(20, dtype=float) ** 2
    y = np.sqrt(np.arange(20, dtype=float) + 1.0)
    assert lagged_correlations(x, y, 3, 7).shape == (5,)
    # lags leaving fewer than two frames are not evaluated
    assert lagged_correlations(x, y, 0, 40).shape == (19,)


def test_extract_features_ramp(ramp_sequence):
    features = extract_features(ramp_sequence)
    assert features.f1 == pytest.approx(ramp_sequence.v.mean())
    assert features.f2 == pytest.approx(ramp_sequence.h.mean())
    assert features.f3 == pytest.approx(0.05)
    assert features.f4 == pytest.approx(0.05)
    # no decelerating frame
    assert features.f5 == 0.0
    assert 0.0 < features.f6 <= TTC_CAP
    # constant leader
    assert (features.f7, features.f8) == (0.0, 0.0)


def test_extract_features_needs_two_frames():
    seq = CarFollowingSequence(np.array([[10.0, 0.0, 20.0, 0.0]]), 0.1)
    with pytest.raises(ValidationError):
        extract_features(seq)


def test_feature_matrix_order_and_empty(ramp_sequence):
    matrix = extract_feature_matrix([ramp_sequence, ramp_sequence.window(0, 100)])
    assert matrix.shape == (2, 8)
    np.testing.assert_allclose(matrix[0], extract_features(ramp_sequence).as_array())
    assert extract_feature_matrix([]).shape == (0, 8)


def test_raw_feature_vector_labels():
    vector = RawFeatureVector.from_array(np.arange(8.0))
    assert list(vector.as_dict()) == ['f1', 'f2', 'f3', 'f4', 'f5', 'f6', 'f7', 'f8']
    with pytest.raises(ValidationError):
        RawFeatureVector.from_array(np.arange(7.0))


def test_standardizer_population_std_and_floor():
    raw = np.array([[1.0, 5.0, 0, 0, 0, 0, 0, 0],
                    [3.0, 5.0, 0, 0, 0, 0, 0, 2.0]])
    standardizer = fit_standardizer(raw)
    np.testing.assert_allclose(standardizer.mean[:2], [2.0, 5.0])
    assert standardizer.std[0] == pytest.approx(1.0)
    assert standardizer.std[1] == pytest.approx(1e-8)
    np.testing.assert_allclose(standardizer.transform(raw)[:, 0], [-1.0, 1.0])
    np.testing.assert_allclose(standardizer.inverse(standardizer.transform(raw)), raw)
    np.testing.assert_array_equal(standardize(raw, standardizer), standardizer.transform(raw))
    np.testing.assert_allclose(destandardize(standardize(raw, standardizer), standardizer), raw, atol=1e-12)


def test_standardizer_needs_two_rows():
    with pytest.raises(ValidationError):
        fit_standardizer(np.zeros((1, 8)))
    with pytest.raises(ValidationError):
        Standardizer(np.zeros(8), np.zeros(8))


def test_projection_shapes_and_contributions():
    rng = np.random.default_rng(1)
    projection = ProjectionModel.random_orthonormal(3, rng)
    np.testing.assert_allclose(projection.row_norms(), np.ones(3))
    np.testing.assert_allclose(projection.A @ projection.A.T, np.eye(3), atol=1e-12)
    assert feature_contributions(projection).sum() == pytest.approx(3.0)
    assert projection.project(np.ones(8)).shape == (3,)
    assert projection.project(np.ones((5, 8))).shape == (5, 3)


def test_projection_row_normalization():
    projection = ProjectionModel(np.array([[3.0, 4.0, 0, 0, 0, 0, 0, 0]])).row_normalized()
    np.testing.assert_allclose(projection.A[0, :2], [0.6, 0.8])


def test_random_orthonormal_is_seeded():
    a = ProjectionModel.random_orthonormal(2, np.random.default_rng(9))
    b = ProjectionModel.random_orthonormal(2, np.random.default_rng(9))
    np.testing.assert_array_equal(a.A, b.A)


@pytest.mark.parametrize('M', [0, 9])
def test_projection_dimension_bounds(M):
    with pytest.raises(ValidationError):
        ProjectionModel.random_orthonormal(M, np.random.default_rng(0))
