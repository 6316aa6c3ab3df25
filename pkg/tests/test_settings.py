"""
Tests for environment settings and named presets.

Run from project root: python -m pytest tests/test_settings.py -v
"""

import sys
import os
import logging

import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config.presets import GRID_PRESETS, TRAIN_PRESETS, get_grid_preset, get_preset
from config.settings import EraGBDTConfig, _env_int, effective_threads, setup_logging, validate_config
from core.data_model import TrainConfig
from core.errors import ConfigError
from experiments.grid_search import GridSpec


def test_effective_threads(monkeypatch):
    assert effective_threads(3) == 3
    monkeypatch.setattr(EraGBDTConfig, 'THREADS', 2)
    assert effective_threads(None) == 2
    assert effective_threads(0) == 2
    monkeypatch.setattr(EraGBDTConfig, 'THREADS', 0)
    assert effective_threads(None) == (os.cpu_count() or 1)


def test_validate_config(monkeypatch):
    assert validate_config()
    monkeypatch.setattr(EraGBDTConfig, 'THREADS', -1)
    assert not validate_config()
    monkeypatch.setattr(EraGBDTConfig, 'THREADS', 0)
    monkeypatch.setattr(EraGBDTConfig, 'LOG_LEVEL', 'CHATTY')
    assert not validate_config()


def test_non_integer_environment_values_are_reported(monkeypatch, caplog):
    monkeypatch.setenv('ERA_GBDT_THREADS', ' 4 ')
    assert _env_int('ERA_GBDT_THREADS', 0) == 4
    monkeypatch.setenv('ERA_GBDT_THREADS', 'many')
    assert _env_int('ERA_GBDT_THREADS', 0) == 'many'
    monkeypatch.delenv('ERA_GBDT_THREADS')
    assert _env_int('ERA_GBDT_THREADS', 0) == 0

    monkeypatch.setattr(EraGBDTConfig, 'THREADS', 'many')
    monkeypatch.setattr(EraGBDTConfig, 'DEFAULT_SEED', '1.5')
    with caplog.at_level(logging.ERROR):
        assert not validate_config()
    assert "ERA_GBDT_THREADS must be an integer, got 'many'" in caplog.text
    assert "ERA_GBDT_DEFAULT_SEED must be an integer, got '1.5'" in caplog.text

    assert effective_threads(2) == 2
    with pytest.raises(ConfigError):
        effective_threads(None)


def test_setup_logging_writes_log_file(monkeypatch, tmp_path):
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    log_file = tmp_path / 'logs' / 'era_gbdt.log'
    monkeypatch.setattr(EraGBDTConfig, 'LOG_FILE_PATH', str(log_file))
    try:
        setup_logging('debug')
        assert root.level == logging.DEBUG
        logging.getLogger('tests').debug("hello from the tests")
        for handler in root.handlers:
            handler.flush()
        assert 'hello from the tests' in log_file.read_text()
    finally:
        for handler in root.handlers:
            if handler not in handlers:
                handler.close()
        root.handlers[:] = handlers
        root.setLevel(level)


def test_train_presets():
    config = get_preset('numerai-benchmark')
    assert config.n_boosting_rounds == 2000
    assert config.max_depth == 5
    assert config.max_leaves == 32
    assert config.learning_rate == 0.01
    assert config.colsample_bytree == 0.1

    tuned = get_preset('sine-showcase', split_type='era')
    assert tuned.split_type.value == 'era'
    assert tuned.learning_rate == 1.0

    for name in TRAIN_PRESETS:
        assert isinstance(get_preset(name), TrainConfig)
    with pytest.raises(ConfigError) as exc:
        get_preset('lightning')
    assert exc.value.field == 'preset'


def test_grid_presets_are_valid_and_copied():
    for name in GRID_PRESETS:
        grid = GridSpec.from_dict(get_grid_preset(name))
        assert grid.n_configs == 20
        assert 0.0 not in grid.params['colsample_bytree']

    document = get_grid_preset('standard')
    document['params']['max_bins'].append(1000)
    assert 1000 not in get_grid_preset('standard')['params']['max_bins']
    assert get_grid_preset('memorization')['params']['max_bins'] == [32, 64, 128, 255]
    assert get_grid_preset('sine')['params']['max_bins'] == [16, 32, 64, 128, 255]

    with pytest.raises(ConfigError) as exc:
        get_grid_preset('huge')
    assert exc.value.field == 'grid_preset'
