import numpy as np
import pytest

from app.core.errors import UnknownDriverError, ValidationError
from app.domain.sequence import ResampleConfig
from app.eval.evaluate import ConfusionMatrix, evaluate, evaluate_log_posteriors, evaluate_many
from app.eval.reports import inspection_tables, write_evaluation, write_inspection, write_sweep, write_trace
from app.eval.sweep import SweepSettings, registration_case_study, sweep
from app.synthdata.generator import generate_corpus, split_dataset
from app.synthdata.specs import preset
from app.training.trainer import TrainingConfig, TrainingTrace, TraceRow, train


def one_hot_log_posteriors(predicted, K):
    log_post = np.full((len(predicted), K), np.log(1e-6))
    log_post[np.arange(len(predicted)), predicted] = 0.0
    return log_post


def test_oracle_posteriors_give_perfect_diagonal():
    truths = ['a', 'a', 'b', 'c', 'c', 'c']
    log_post = one_hot_log_posteriors([0, 0, 1, 2, 2, 2], 3)
    result = evaluate_log_posteriors(log_post, truths, ['a', 'b', 'c'])
    assert result.accuracy == 1.0
    np.testing.assert_array_equal(result.confusion.counts, np.diag([2, 1, 3]))
    np.testing.assert_array_equal(result.confusion.recall, [1.0, 1.0, 1.0])


def test_uniform_posteriors_give_one_over_k():
    truths = ['a', 'b', 'c'] * 4
    result = evaluate_log_posteriors(np.full((12, 3), -np.log(3)), truths, ['a', 'b', 'c'])
    assert result.accuracy == pytest.approx(1.0 / 3.0)
    # every tie resolves to the first driver
    np.testing.assert_array_equal(result.confusion.counts[:, 0], [4, 4, 4])


def test_row_sums_count_windows_or_trials():
    truths = ['a'] * 7 + ['b'] * 4
    log_post = one_hot_log_posteriors([0] * 7 + [1] * 4, 2)
    single = evaluate_log_posteriors(log_post, truths, ['a', 'b'], n_sequences=1)
    np.testing.assert_array_equal(single.confusion.row_sums, [7, 4])

    triple = evaluate_log_posteriors(log_post, truths, ['a', 'b'], n_sequences=3, seed=5)
    # ceil(7 / 3) = 3 trials for a, ceil(4 / 3) = 2 for b
    np.testing.assert_array_equal(triple.confusion.row_sums, [3, 2])
    assert triple.n_trials == 5


def test_single_window_results_ignore_the_seed():
    rng = np.random.default_rng(0)
    log_post = np.log(rng.dirichlet(np.ones(3), size=20))
    truths = [['a', 'b', 'c'][i % 3] for i in range(20)]
    a = evaluate_log_posteriors(log_post, truths, ['a', 'b', 'c'], 1, seed=1)
    b = evaluate_log_posteriors(log_post, truths, ['a', 'b', 'c'], 1, seed=99)
    np.testing.assert_array_equal(a.confusion.counts, b.confusion.counts)


def test_multi_window_trials_are_seeded():
    rng = np.random.default_rng(1)
    log_post = np.log(rng.dirichlet(np.ones(2), size=30))
    truths = ['a'] * 15 + ['b'] * 15
    a = evaluate_log_posteriors(log_post, truths, ['a', 'b'], 4, seed=3)
    b = evaluate_log_posteriors(log_post, truths, ['a', 'b'], 4, seed=3)
    np.testing.assert_array_equal(a.confusion.counts, b.confusion.counts)


def test_combining_windows_fixes_noisy_single_calls():
    # every driver's windows lean towards the truth, but one in three is wrong
    predicted = [0, 0, 1] * 4 + [1, 1, 0] * 4
    log_post = np.log(np.where(np.eye(2)[predicted] > 0, 0.6, 0.4))
    truths = ['a'] * 12 + ['b'] * 12
    single = evaluate_log_posteriors(log_post, truths, ['a', 'b'], 1)
    full = evaluate_log_posteriors(log_post, truths, ['a', 'b'], 12, seed=0)
    assert single.accuracy == pytest.approx(2.0 / 3.0)
    assert full.accuracy == 1.0


def test_drivers_with_too_few_windows_are_skipped():
    truths = ['a'] * 5 + ['b'] * 2
    log_post = one_hot_log_posteriors([0] * 5 + [1] * 2, 2)
    result = evaluate_log_posteriors(log_post, truths, ['a', 'b'], n_sequences=3, seed=0)
    assert result.skipped == ['b']
    assert result.confusion.row_sums[1] == 0


def test_unknown_truth_gets_its_own_row():
    log_post = one_hot_log_posteriors([0, 1, 1], 2)
    result = evaluate_log_posteriors(log_post, ['a', 'b', 'z'], ['a', 'b'])
    assert result.confusion.labels == ['a', 'b', 'z']
    assert result.confusion.counts[2, 1] == 1
    assert result.accuracy == pytest.approx(2.0 / 3.0)


def test_evaluation_argument_checks():
    with pytest.raises(ValidationError):
        evaluate_log_posteriors(np.zeros((2, 2)), ['a'], ['a', 'b'])
    with pytest.raises(ValidationError):
        evaluate_log_posteriors(np.zeros((2, 2)), ['a', 'b'], ['a', 'b'], n_sequences=0)
    with pytest.raises(ValidationError):
        ConfusionMatrix(['a'], np.zeros((2, 2)))


def test_sweep_rejects_unknown_axes(small_split):
    train_raw, test_raw = small_split
    with pytest.raises(ValidationError):
        sweep({'lr': [0.1]}, train_raw, test_raw, SweepSettings())
    with pytest.raises(ValidationError):
        sweep({'M': []}, train_raw, test_raw, SweepSettings())


def make_trace():
    rows = [
        TraceRow(0, 5.0, 0.5, 0.01, True, 5.0, 0.0, -10.0),
        TraceRow(1, 4.0, 0.6, 0.011, True, 4.0, 0.0, -9.0),
        TraceRow(2, 4.5, 0.7, 0.0055, False, 4.0, 0.0, -8.5),
    ]
    return TrainingTrace(rows)


def test_trace_report_is_deterministic(tmp_path):
    first = write_trace(make_trace(), tmp_path / 'a')
    second = write_trace(make_trace(), tmp_path / 'b')
    for x, y in zip(first, second):
        assert x.read_bytes() == y.read_bytes()
    assert first[0].read_text(encoding='utf-8').splitlines()[0] == \
        'iter,loss,train_acc,lr,is_best,best_loss,row_norm_error,em_log_likelihood'


def test_inspection_tables(toy_model, tmp_path):
    tables = inspection_tables(toy_model)
    assert tables['profiles']['a'] == [0.9, 0.1]
    assert sum(tables['contributions'].values()) == pytest.approx(2.0)
    assert tables['contributions']['f3'] == 0.0
    assert tables['states'][0]['log_det'] == pytest.approx(0.0)
    assert inspection_tables(toy_model, ['b'])['profiles'] == {'b': [0.1, 0.9]}
    with pytest.raises(UnknownDriverError):
        inspection_tables(toy_model, ['zz'])

    paths = write_inspection(toy_model, tmp_path)
    assert {p.name for p in paths} == {'profiles.csv', 'contributions.csv', 'states.csv',
                                       'projection_weights.svg', 'profiles.svg'}


@pytest.mark.slow
def test_trained_model_beats_chance(small_split, small_resample, quick_training, tmp_path):
    train_raw, test_raw = small_split
    model, _ = train(train_raw.resampled(small_resample), quick_training, small_resample)
    test_windows = test_raw.resampled(small_resample)

    results = evaluate_many(model, test_windows, [1, 3], seed=2)
    assert [r.n_sequences for r in results] == [1, 3]
    assert results[0].confusion.total == len(test_windows)
    assert results[0].accuracy > 1.0 / 3.0

    paths = write_evaluation(results, tmp_path)
    assert {p.name for p in paths} == {'accuracy.csv', 'confusion_n1.csv', 'confusion_n3.csv', 'accuracy.svg'}


@pytest.mark.slow
def test_easy4_accuracy_grows_with_more_windows():
    corpus_spec = preset('easy4')
    train_raw, test_raw = split_dataset(generate_corpus(corpus_spec.drivers, corpus_spec.scenario, 100), 0.8, seed=0)
    resample = ResampleConfig(15.0, 0.0)
    model, _ = train(train_raw.resampled(resample), TrainingConfig(M=2, Q=8, n_outer=10), resample)

    acc = [r.accuracy for r in evaluate_many(model, test_raw.resampled(resample), [1, 5, 10], seed=0)]
    assert acc[0] > 0.5
    assert acc[2] >= acc[1] >= acc[0]
    assert acc[2] >= 0.9


@pytest.mark.slow
def test_sweep_bookkeeping(small_split, quick_training, small_resample, tmp_path):
    train_raw, test_raw = small_split
    settings = SweepSettings(training=quick_training, resample=small_resample, repetitions=2)
    result = sweep({'M': [1, 2], 'Q': [2, 3]}, train_raw, test_raw, settings)

    assert len(result.cells) == 4
    assert sum(cell.n_runs for cell in result.cells) + result.n_failures == 8
    for cell in result.cells:
        assert cell.seeds == [quick_training.seed, quick_training.seed + 1]
    assert result.grid('M', 'Q').shape == (2, 2)

    names = {p.name for p in write_sweep(result, tmp_path)}
    assert {'sweep.csv', 'train_grid.csv', 'test_grid.csv', 'train_grid.svg', 'test_grid.svg'} <= names


@pytest.mark.slow
def test_single_cell_sweep_matches_direct_training(small_split, quick_training, small_resample):
    train_raw, test_raw = small_split
    settings = SweepSettings(training=quick_training, resample=small_resample)
    result = sweep({'M': [quick_training.M]}, train_raw, test_raw, settings)

    model, _ = train(train_raw.resampled(small_resample), quick_training, small_resample)
    direct = evaluate(model, test_raw.resampled(ResampleConfig(small_resample.window_T, 0.0)), 1,
                      quick_training.seed)
    assert result.cells[0].test_accuracies == [direct.accuracy]


@pytest.mark.slow
def test_registration_case_study(small_split, quick_training, small_resample):
    train_raw, test_raw = small_split
    result = registration_case_study(train_raw.resampled(small_resample), test_raw.resampled(small_resample),
                                     'd3', quick_training, small_resample)
    assert set(result.results) == {'A1', 'A2', 'A2-known', 'A3'}
    assert result.models['A1'].driver_ids == ['d1', 'd2']
    assert result.models['A2'].driver_ids == ['d1', 'd2', 'd3']
    assert result.models['A2'].states is result.models['A1'].states
    # A1 cannot name d3, so its d3 row is all errors
    a1 = result.results['A1'].confusion
    assert a1.counts[a1.labels.index('d3'), a1.labels.index('d3')] == 0
    known = result.results['A2-known'].confusion
    assert known.row_sums[known.labels.index('d3')] == 0
