import json

import pytest

from app.core.config import RunConfig, default_dt, default_seed, load_config_file
from app.core.errors import (
    DuplicateDriverError,
    ModelFormatError,
    NumericalError,
    TrainingError,
    ValidationError
)
from app.enum.exit_codes import ExitCodes


def test_resolve_precedence_defaults_file_flags():
    config = RunConfig.resolve('train', {'M': 2, 'Q': 8, 'seed': 7}, {'Q': 16, 'seed': 1}, {'seed': 3, 'M': None})
    assert config['M'] == 2
    assert config['Q'] == 16
    assert config['seed'] == 3


def test_resolve_rejects_unknown_file_key():
    with pytest.raises(ValidationError) as info:
        RunConfig.resolve('train', {'M': 2}, {'bogus': 1})
    assert info.value.reason == 'config_key'


def test_digest_depends_on_values_and_command():
    a = RunConfig.resolve('train', {'M': 2, 'Q': 8})
    b = RunConfig.resolve('train', {'Q': 8, 'M': 2})
    c = RunConfig.resolve('train', {'M': 4, 'Q': 8})
    d = RunConfig.resolve('sweep', {'M': 2, 'Q': 8})
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
    assert a.digest() != d.digest()
    assert len(a.digest()) == 12


def test_to_json_records_command_and_version():
    document = json.loads(RunConfig.resolve('evaluate', {'n_values': (1, 3)}).to_json())
    assert document['command'] == 'evaluate'
    assert document['config']['n_values'] == [1, 3]
    assert 'tool_version' in document


def test_environment_defaults(monkeypatch):
    monkeypatch.setenv('DRIVESTATE_SEED', '42')
    monkeypatch.setenv('DRIVESTATE_DT', '0.04')
    assert default_seed() == 42
    assert default_dt() == pytest.approx(0.04)


def test_load_config_file(tmp_path):
    assert load_config_file(None) == {}

    path = tmp_path / 'cfg.json'
    path.write_text('{"M": 3}', encoding='utf-8')
    assert load_config_file(str(path)) == {'M': 3}

    path.write_text('[1, 2]', encoding='utf-8')
    with pytest.raises(ValidationError) as info:
        load_config_file(str(path))
    assert info.value.reason == 'config_corrupt'

    with pytest.raises(ValidationError) as info:
        load_config_file(str(tmp_path / 'missing.json'))
    assert info.value.reason == 'config_missing'


@pytest.mark.parametrize('error, code, reason', [
    (ValidationError("bad"), ExitCodes.VALIDATION, 'validation'),
    (ModelFormatError("bad"), ExitCodes.VALIDATION, 'model_format'),
    (DuplicateDriverError("bad"), ExitCodes.VALIDATION, 'duplicate_driver'),
    (NumericalError("bad"), ExitCodes.NUMERICAL, 'numerical'),
    (TrainingError("bad", trace=[]), ExitCodes.NUMERICAL, 'training'),
])
def test_error_exit_codes_and_payload(error, code, reason):
    assert error.exit_code is code
    assert error.to_payload() == {'error': reason, 'message': 'bad'}


def test_error_reason_override():
    assert ValidationError("x", reason="grid").reason == 'grid'
    assert ValidationError("x").reason == 'validation'
