import json
import re
from pathlib import Path

import pytest

from app.commands import CommandManager, get_available_commands
from app.commands.evaluation import parse_grid
from app.core.errors import ValidationError
from app.enum.exit_codes import ExitCodes
from app.model.persistence import load_model

TRAIN_FLAGS = ['--window-T', '10', '--Q', '3', '--n-outer', '2', '--n-inner', '3', '--n-final-em', '5']


def run(*argv) -> int:
    return CommandManager().run([str(a) for a in argv])


def stdout_json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def stderr_json(capsys) -> dict:
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


@pytest.fixture(scope='module')
def trained(tmp_path_factory):
    """A four-driver corpus and a model trained on it through the CLI."""
    root = tmp_path_factory.mktemp('cli')
    corpus = root / 'corpus'
    assert run('generate', '--preset', 'easy4', '--n-sequences', 3, '--seed', 7, '--out', corpus) == 0
    assert run('train', '--data', corpus, '--seed', 7, '--out', root / 'runs', *TRAIN_FLAGS) == 0
    model = next((root / 'runs').glob('train-*/model.json'))
    return root, corpus, model


def test_registry_lists_every_command():
    assert get_available_commands() == ['generate', 'features', 'train', 'register', 'inspect',
                                        'identify', 'evaluate', 'sweep']
    assert set(CommandManager().commands) == set(get_available_commands())


def test_generate_writes_a_reproducible_corpus(tmp_path, capsys):
    assert run('generate', '--preset', 'easy4', '--n-sequences', 2, '--seed', 3, '--out', tmp_path / 'a') == 0
    summary = stdout_json(capsys)
    assert summary['n_sequences'] == 8
    assert summary['drivers'] == ['d1', 'd2', 'd3', 'd4']
    for name in ('spec.json', 'summary.csv', 'config.json', 'd1/seq000.csv', 'd4/seq001.csv'):
        assert (tmp_path / 'a' / name).is_file()

    assert run('generate', '--preset', 'easy4', '--n-sequences', 2, '--seed', 3, '--out', tmp_path / 'b') == 0
    for csv_path in sorted((tmp_path / 'a').glob('*/*.csv')):
        twin = tmp_path / 'b' / csv_path.relative_to(tmp_path / 'a')
        assert csv_path.read_bytes() == twin.read_bytes()


def test_generate_from_spec_file(tmp_path, capsys):
    assert run('generate', '--preset', 'easy4', '--n-sequences', 1, '--out', tmp_path / 'a') == 0
    capsys.readouterr()
    spec = tmp_path / 'a' / 'spec.json'
    document = json.loads(spec.read_text(encoding='utf-8'))
    document['drivers'] = document['drivers'][:2]
    spec.write_text(json.dumps(document), encoding='utf-8')

    assert run('generate', '--spec', spec, '--n-sequences', 1, '--out', tmp_path / 'b') == 0
    assert stdout_json(capsys)['drivers'] == ['d1', 'd2']


def test_missing_argument_is_a_validation_error(tmp_path, capsys):
    assert run('train', '--out', tmp_path) == ExitCodes.VALIDATION.value
    payload = stderr_json(capsys)
    assert payload['error'] == 'missing_argument'


def test_missing_files_are_reported(tmp_path, capsys):
    assert run('identify', '--model', tmp_path / 'none.json', '--sequences', tmp_path / 'x.csv') == 2
    assert stderr_json(capsys)['error'] == 'model_missing'

    assert run('generate', '--spec', tmp_path / 'none.json', '--out', tmp_path / 'c') == 2
    assert stderr_json(capsys)['error'] == 'spec_missing'

    assert run('train', '--data', tmp_path / 'empty', '--out', tmp_path) == 2
    assert stderr_json(capsys)['error'] == 'data_missing'


def test_unknown_config_key_is_rejected(tmp_path, capsys):
    config = tmp_path / 'cfg.json'
    config.write_text('{"bogus": 1}', encoding='utf-8')
    assert run('train', '--config', config, '--data', tmp_path) == 2
    assert stderr_json(capsys)['error'] == 'config_key'


def test_config_file_values_are_used(tmp_path, capsys):
    config = tmp_path / 'cfg.json'
    config.write_text(json.dumps({'n_sequences': 1, 'preset': 'hard8'}), encoding='utf-8')
    assert run('generate', '--config', config, '--out', tmp_path / 'corpus') == 0
    assert len(stdout_json(capsys)['drivers']) == 8


def test_parse_grid():
    assert parse_grid('M=2,4; Q=8') == {'M': [2, 4], 'Q': [8]}
    assert parse_grid({'window_T': [10, 15], 'overlap_ratio': 0.5}) == {'window_T': [10.0, 15.0],
                                                                        'overlap_ratio': [0.5]}
    for bad in ('M', 'lr=0.1', 'M=two'):
        with pytest.raises(ValidationError) as info:
            parse_grid(bad)
        assert info.value.reason == 'grid'


@pytest.mark.slow
def test_train_writes_run_directory(trained):
    root, _, model_path = trained
    run_dir = model_path.parent
    assert re.fullmatch(r'train-[0-9a-f]{12}', run_dir.name)
    for name in ('config.json', 'split.csv', 'trace.csv', 'trace.svg'):
        assert (run_dir / name).is_file()
    model = load_model(model_path)
    assert model.driver_ids == ['d1', 'd2', 'd3', 'd4']
    assert model.hyper.window_T == 10.0
    assert len((run_dir / 'trace.csv').read_text(encoding='utf-8').splitlines()) == 1 + 3


@pytest.mark.slow
def test_identify_prints_prediction(trained, capsys):
    _, corpus, model_path = trained
    files = sorted((corpus / 'd2').glob('*.csv'))
    assert run('identify', '--model', model_path, '--sequences', *files) == 0
    result = stdout_json(capsys)
    assert result['predicted'] in ['d1', 'd2', 'd3', 'd4']
    assert set(result['scores']) == {'d1', 'd2', 'd3', 'd4'}
    assert result['n_sequences'] >= len(files)


@pytest.mark.slow
def test_register_writes_a_new_model(trained, tmp_path, capsys):
    _, corpus, model_path = trained
    before = model_path.read_bytes()
    out = tmp_path / 'registered.json'

    assert run('register', '--model', model_path, '--data', corpus / 'd3', '--driver-id', 'd9', '--out', out) == 0
    assert stdout_json(capsys)['drivers'] == ['d1', 'd2', 'd3', 'd4', 'd9']
    assert model_path.read_bytes() == before

    files = sorted((corpus / 'd3').glob('*.csv'))[:1]
    assert run('identify', '--model', out, '--sequences', *files) == 0
    assert 'd9' in stdout_json(capsys)['scores']

    registered, original = load_model(out), load_model(model_path)
    assert registered.driver_ids[-1] == 'd9'
    for driver_id in original.driver_ids:
        assert registered.profiles[driver_id].weights.tolist() == original.profiles[driver_id].weights.tolist()

    assert run('register', '--model', model_path, '--data', corpus / 'd3', '--driver-id', 'd1',
               '--out', tmp_path / 'dup.json') == 2
    assert stderr_json(capsys)['error'] == 'duplicate_driver'

    assert run('register', '--model', model_path, '--data', corpus / 'd3', '--driver-id', 'd8',
               '--out', model_path) == 2
    assert model_path.read_bytes() == before


@pytest.mark.slow
def test_inspect_prints_tables(trained, tmp_path, capsys):
    _, _, model_path = trained
    assert run('inspect', '--model', model_path, '--out', tmp_path / 'inspect') == 0
    tables = stdout_json(capsys)
    assert set(tables['profiles']) == {'d1', 'd2', 'd3', 'd4'}
    assert sum(tables['contributions'].values()) == pytest.approx(2.0)
    assert len(tables['states']) == 3
    assert (tmp_path / 'inspect' / 'projection_weights.svg').is_file()


@pytest.mark.slow
def test_evaluate_reports_each_n(trained, capsys):
    root, corpus, model_path = trained
    assert run('evaluate', '--data', corpus, '--model', model_path, '--seed', 7, '--n', 1, 2,
               '--out', root / 'runs') == 0
    result = stdout_json(capsys)
    assert set(result['accuracy']) == {'1', '2'}
    run_dir = Path(result['run_dir'])
    for name in ('accuracy.csv', 'confusion_n1.csv', 'confusion_n2.csv', 'accuracy.svg'):
        assert (run_dir / name).is_file()


@pytest.mark.slow
def test_features_dump(trained, capsys):
    root, corpus, _ = trained
    assert run('features', '--data', corpus, '--window-T', 10, '--out', root / 'runs') == 0
    path = Path(stdout_json(capsys)['features'])
    header = path.read_text(encoding='utf-8').splitlines()[0]
    assert header == 'driver_id,window_id,f1,f2,f3,f4,f5,f6,f7,f8'


@pytest.mark.slow
def test_sweep_and_case_study(trained, capsys):
    root, corpus, _ = trained
    flags = ['--data', corpus, '--seed', 7, '--out', root / 'runs', '--window-T', 10, '--Q', 2,
             '--n-outer', 1, '--n-inner', 2, '--n-final-em', 2]
    assert run('sweep', '--grid', 'M=1,2', *flags) == 0
    summary = stdout_json(capsys)
    assert summary['cells'] == 2
    assert (Path(summary['run_dir']) / 'sweep.csv').is_file()

    assert run('sweep', '--case-study', 'd4', *flags) == 0
    assert set(stdout_json(capsys)['accuracy']) == {'A1', 'A2', 'A2-known', 'A3'}


@pytest.mark.slow
def test_retraining_is_byte_identical(trained):
    root, corpus, model_path = trained
    model_before = model_path.read_bytes()
    trace_before = (model_path.parent / 'trace.csv').read_bytes()
    assert run('train', '--data', corpus, '--seed', 7, '--out', root / 'runs', *TRAIN_FLAGS) == 0
    assert model_path.read_bytes() == model_before
    assert (model_path.parent / 'trace.csv').read_bytes() == trace_before


def test_bad_flags_follow_the_json_error_policy(capsys):
    assert run('train', '--seed', 'abc') == ExitCodes.VALIDATION.value
    payload = stderr_json(capsys)
    assert payload['error'] == 'bad_argument'
    assert '--seed' in payload['message']

    assert run('identify', '--bogus', 1) == 2
    assert stderr_json(capsys)['error'] == 'bad_argument'

    assert run('nope') == 2
    assert stderr_json(capsys)['error'] == 'bad_argument'
    assert run() == 2
