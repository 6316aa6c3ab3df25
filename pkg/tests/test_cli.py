"""
End-to-end tests for the era-gbdt command line.

Run from project root: python -m pytest tests/test_cli.py -v
"""

import sys
import os
import json
import logging

import pandas as pd
import pytest
from click.testing import CliRunner

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from cli.app import cli
from config.settings import EraGBDTConfig


@pytest.fixture(autouse=True)
def restore_logging():
    # every invocation reconfigures the root logger
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner, *args):
    return runner.invoke(cli, [str(a) for a in args])


def _lines(path):
    with open(path, 'r', encoding='utf-8') as f:
        return f.read().splitlines()


@pytest.fixture
def sine_dir(runner, tmp_path):
    out = tmp_path / 'sine'
    result = _invoke(runner, 'gen-data', 'sine', '--out-dir', out, '--seed', 7)
    assert result.exit_code == 0, result.output
    return out


# ===================
# DEMO
# ===================
def test_demo_degenerate_text(runner):
    result = _invoke(runner, 'demo-degenerate')
    assert result.exit_code == 0, result.output
    assert 'DEGENERATE' in result.stdout
    assert 'feature_1 <= 2.5' in result.stdout
    assert 'UNDEFINED' in result.stdout


def test_demo_degenerate_json(runner):
    result = _invoke(runner, 'demo-degenerate', '--json')
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report['criteria']['original']['split']['feature_name'] == 'feature_1'
    assert report['criteria']['era']['split']['feature_name'] == 'feature_2'
    assert report['criteria']['directional-era']['split']['per_era_directions'] == [-1, -1]
    assert report['criteria']['original']['split']['per_era_directions'] == [None, None]


def test_bad_environment_setting_exits_with_config_error(runner, monkeypatch):
    monkeypatch.setattr(EraGBDTConfig, 'THREADS', 'many')
    result = _invoke(runner, 'demo-degenerate')
    assert result.exit_code == 1
    assert 'ERA_GBDT' in result.output


# ===================
# DATA GENERATION
# ===================
def test_gen_data_sine_is_reproducible(runner, tmp_path, sine_dir):
    assert len(_lines(sine_dir / 'train.csv')) == 513
    assert len(_lines(sine_dir / 'test.csv')) == 65
    assert _lines(sine_dir / 'train.csv')[0] == 'era,x,target'

    again = tmp_path / 'again'
    assert _invoke(runner, 'gen-data', 'sine', '--out-dir', again, '--seed', 7).exit_code == 0
    for name in ('train.csv', 'test.csv', 'spec.json'):
        assert (again / name).read_bytes() == (sine_dir / name).read_bytes()

    spec = json.loads((sine_dir / 'spec.json').read_text())
    assert spec['experiment'] == 'sine'
    assert spec['seed'] == 7


def test_gen_data_memorization_defaults(runner, tmp_path):
    out = tmp_path / 'memo'
    result = _invoke(runner, 'gen-data', 'memorization', '--out-dir', out)
    assert result.exit_code == 0, result.output
    assert len(_lines(out / 'train.csv')) == 12289
    assert len(_lines(out / 'test.csv')) == 2001
    assert len(_lines(out / 'train.csv')[0].split(',')) == 20


def test_gen_data_rejects_foreign_flag(runner, tmp_path):
    result = _invoke(runner, 'gen-data', 'sine', '--out-dir', tmp_path, '--dims', 5)
    assert result.exit_code == 1
    assert '--dims' in result.output


def test_gen_data_rejects_bad_value(runner, tmp_path):
    result = _invoke(runner, 'gen-data', 'sine', '--out-dir', tmp_path, '--n-eras', 0)
    assert result.exit_code == 1
    assert '--n-eras' in result.output


# ===================
# TRAIN / PREDICT / EVALUATE
# ===================
def test_train_predict_evaluate(runner, tmp_path, sine_dir):
    model_path = tmp_path / 'model.json'
    result = _invoke(runner, 'train', '--data', sine_dir / 'train.csv', '--test-data', sine_dir / 'test.csv',
                     '--model-out', model_path, '--record-out', tmp_path / 'record.json',
                     '--split-type', 'era', '--n-boosting-rounds', 10, '--min-child-samples', 5)
    assert result.exit_code == 0, result.output
    record = json.loads(result.stdout)
    assert record['split_type'] == 'era'
    assert record['model_path'] == str(model_path)
    assert record['config']['n_boosting_rounds'] == 10
    assert record['test_metrics']['mse'] is not None
    assert record['test_metrics']['accuracy'] is None
    assert json.loads((tmp_path / 'record.json').read_text()) == record

    predictions_path = tmp_path / 'predictions.csv'
    result = _invoke(runner, 'predict', '--model', model_path, '--data', sine_dir / 'test.csv',
                     '--out', predictions_path)
    assert result.exit_code == 0, result.output
    predictions = pd.read_csv(predictions_path)
    assert list(predictions.columns) == ['era', 'prediction']
    assert len(predictions) == 64
    assert set(predictions['era']) == {8}

    result = _invoke(runner, 'evaluate', '--model', model_path, '--data', sine_dir / 'test.csv')
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report['mse'] == pytest.approx(record['test_metrics']['mse'])
    assert list(report['per_era_corrs']) == ['8']


def test_train_config_precedence(runner, tmp_path, sine_dir):
    config_file = tmp_path / 'config.json'
    config_file.write_text(json.dumps({'learning_rate': 0.2, 'max_leaves': 4}))
    result = _invoke(runner, 'train', '--data', sine_dir / 'train.csv', '--model-out', tmp_path / 'm.json',
                     '--preset', 'sine-showcase', '--config-file', config_file,
                     '--max-leaves', 6, '--n-boosting-rounds', 3)
    assert result.exit_code == 0, result.output
    config = json.loads(result.stdout)['config']
    assert config['learning_rate'] == 0.2
    assert config['max_leaves'] == 6
    assert config['max_depth'] == 10
    assert config['n_boosting_rounds'] == 3


def test_train_max_depth_zero_means_unlimited(runner, tmp_path, sine_dir):
    result = _invoke(runner, 'train', '--data', sine_dir / 'train.csv', '--model-out', tmp_path / 'm.json',
                     '--max-depth', 0, '--n-boosting-rounds', 2)
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)['config']['max_depth'] is None


def test_train_rejects_bad_flag_value(runner, tmp_path, sine_dir):
    result = _invoke(runner, 'train', '--data', sine_dir / 'train.csv', '--model-out', tmp_path / 'm.json',
                     '--learning-rate', 0)
    assert result.exit_code == 1
    assert '--learning-rate' in result.output
    assert not (tmp_path / 'm.json').exists()


def test_train_directional_on_memorization(runner, tmp_path):
    data = tmp_path / 'memo'
    assert _invoke(runner, 'gen-data', 'memorization', '--out-dir', data, '--n-train', 640, '--n-test', 200,
                   '--dims', 6, '--n-eras', 4).exit_code == 0
    result = _invoke(runner, 'train', '--data', data / 'train.csv', '--test-data', data / 'test.csv',
                     '--model-out', tmp_path / 'm.json', '--split-type', 'directional-era',
                     '--n-boosting-rounds', 5, '--min-child-samples', 5, '--max-bins', 32)
    assert result.exit_code == 0, result.output
    record = json.loads(result.stdout)
    assert 0.0 <= record['train_metrics']['accuracy'] <= 1.0
    assert 0.0 <= record['test_metrics']['accuracy'] <= 1.0


def test_missing_data_file_exits_2(runner, tmp_path):
    result = _invoke(runner, 'train', '--data', tmp_path / 'nope.csv', '--model-out', tmp_path / 'm.json')
    assert result.exit_code == 2


def test_predict_dimension_mismatch_exits_2(runner, tmp_path, sine_dir):
    model_path = tmp_path / 'model.json'
    assert _invoke(runner, 'train', '--data', sine_dir / 'train.csv', '--model-out', model_path,
                   '--n-boosting-rounds', 2).exit_code == 0
    data = tmp_path / 'memo'
    assert _invoke(runner, 'gen-data', 'memorization', '--out-dir', data, '--n-train', 64, '--n-test', 10,
                   '--dims', 4, '--n-eras', 2).exit_code == 0

    result = _invoke(runner, 'predict', '--model', model_path, '--data', data / 'test.csv')
    assert result.exit_code == 2


def test_truncated_model_exits_2(runner, tmp_path, sine_dir):
    model_path = tmp_path / 'model.json'
    assert _invoke(runner, 'train', '--data', sine_dir / 'train.csv', '--model-out', model_path,
                   '--n-boosting-rounds', 2).exit_code == 0
    text = model_path.read_text()
    model_path.write_text(text[:len(text) // 3])

    result = _invoke(runner, 'evaluate', '--model', model_path, '--data', sine_dir / 'test.csv')
    assert result.exit_code == 2
    assert 'line' in result.output


# ===================
# GRID SEARCH
# ===================
def test_grid_search_and_summarize(runner, tmp_path, sine_dir):
    grid = tmp_path / 'grid.json'
    grid.write_text(json.dumps({
        'params': {'n_boosting_rounds': [3, 5], 'max_leaves': [4, 8], 'min_child_samples': [5]},
        'n_configs': 2,
        'seed': 1,
    }))

    def search(out):
        return _invoke(runner, 'grid-search', '--train', sine_dir / 'train.csv', '--test', sine_dir / 'test.csv',
                       '--grid', grid, '--out', out, '--threads', 2)

    first, second = tmp_path / 'first.csv', tmp_path / 'second.csv'
    result = search(first)
    assert result.exit_code == 0, result.output
    assert search(second).exit_code == 0

    rows = pd.read_csv(first)
    assert len(rows) == 6
    assert sorted(rows['split_type'].value_counts().items()) == [('directional-era', 2), ('era', 2), ('original', 2)]
    assert rows['config'].tolist() == pd.read_csv(second)['config'].tolist()
    for _, runs in rows.groupby('config_index'):
        assert runs['config'].nunique() == 1

    result = _invoke(runner, 'summarize', first, '--json')
    assert result.exit_code == 0, result.output
    summary = json.loads(result.stdout)
    assert set(summary) == {'original', 'era', 'directional-era'}
    assert summary['original']['runs'] == 2
    assert summary['original']['metric'] == 'mse'


def test_grid_search_needs_exactly_one_grid(runner, tmp_path, sine_dir):
    result = _invoke(runner, 'grid-search', '--train', sine_dir / 'train.csv', '--test', sine_dir / 'test.csv',
                     '--out', tmp_path / 'out.csv')
    assert result.exit_code == 1
