"""
Tests for MSE, correlation, accuracy and era-wise correlation metrics.

Run from project root: python -m pytest tests/test_evaluation.py -v
"""

import sys
import os
import logging

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.errors import ConfigError, DataError, DimensionMismatchError, UndefinedCorrelationError
from core.evaluation import (
    MetricReport,
    accuracy,
    era_wise_corr,
    evaluate_predictions,
    generalization_gap,
    mse,
    pearson,
    round_half_away,
    summarize_era_corrs,
)


def test_mse():
    assert mse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert mse([0.0, 0.0], [1.0, -1.0]) == 1.0
    with pytest.raises(DimensionMismatchError):
        mse([1.0], [1.0, 2.0])


def test_pearson_examples():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)
    assert pearson([1, 0, -1, 0], [0, 1, 0, -1]) == pytest.approx(0.0, abs=1e-15)


def test_pearson_undefined():
    with pytest.raises(UndefinedCorrelationError):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(UndefinedCorrelationError):
        pearson([1.0, 2.0], [5.0, 5.0])
    with pytest.raises(UndefinedCorrelationError):
        pearson([1.0], [2.0])


def test_pearson_is_affine_invariant():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=50), rng.normal(size=50)
    assert pearson(3.0 * x + 7.0, y) == pytest.approx(pearson(x, y), abs=1e-12)
    assert pearson(-2.0 * x, y) == pytest.approx(-pearson(x, y), abs=1e-12)


def test_accuracy_rounds_and_clamps():
    assert accuracy([0.2, 0.8, 1.7, -0.4], [0, 1, 1, 0]) == 1.0
    assert accuracy([0.5, 0.49], [1, 0]) == 1.0
    assert accuracy([0.6, 0.6, 0.1], [1, 0, 1]) == pytest.approx(1 / 3)
    assert round_half_away([0.5, -0.5, 1.5, 2.4]).tolist() == [1.0, -1.0, 2.0, 2.0]
    with pytest.raises(DataError):
        accuracy([0.5, 0.5], [0.0, 2.0])


def test_accuracy_depends_only_on_side_of_one_half():
    rng = np.random.default_rng(21)
    pred = rng.uniform(-1.0, 2.0, size=600)
    pred = pred[np.abs(pred - 0.5) > 0.01]
    target = rng.integers(0, 2, size=pred.size).astype(float)
    expected = accuracy(pred, target)

    offset = pred - 0.5
    transforms = (
        0.5 + np.tanh(offset),
        0.5 + offset ** 3,
        0.5 + 7.0 * offset,
        0.5 + offset * rng.uniform(0.01, 10.0, size=pred.size),
    )
    for moved in transforms:
        assert np.array_equal(moved >= 0.5, pred >= 0.5)
        assert accuracy(moved, target) == expected


def test_summarize_era_corrs():
    mean, std, sharpe = summarize_era_corrs([0.02, 0.04])
    assert mean == pytest.approx(0.03)
    assert std == pytest.approx(0.0141421356, rel=1e-6)
    assert sharpe == pytest.approx(2.1213203, rel=1e-6)

    mean, std, sharpe = summarize_era_corrs([0.5])
    assert (mean, std, sharpe) == (0.5, 0.0, None)


def test_era_wise_corr_perfect_eras():
    pred = [1.0, 2.0, 3.0, 1.0, 2.0, 3.0]
    result = era_wise_corr(pred, pred, [0, 0, 0, 1, 1, 1])
    assert result.per_era_corrs == {0: pytest.approx(1.0), 1: pytest.approx(1.0)}
    assert result.std == 0.0
    assert result.sharpe is None


def test_era_wise_corr_single_era_equals_pearson():
    rng = np.random.default_rng(1)
    pred, target = rng.normal(size=30), rng.normal(size=30)
    result = era_wise_corr(pred, target, np.full(30, 4))
    assert list(result.per_era_corrs) == [4]
    assert result.mean == pearson(pred, target)


def test_era_wise_corr_names_degenerate_era():
    with pytest.raises(UndefinedCorrelationError) as exc:
        era_wise_corr([1.0, 2.0, 5.0, 5.0], [1.0, 2.0, 3.0, 4.0], [0, 0, 7, 7])
    assert exc.value.era == 7


def test_shuffled_predictions_have_near_zero_era_corr():
    rng = np.random.default_rng(2)
    n_eras, rows_per_era = 20, 200
    target = rng.normal(size=n_eras * rows_per_era)
    pred = rng.permutation(target)
    eras = np.repeat(np.arange(n_eras), rows_per_era)

    result = era_wise_corr(pred, target, eras)
    assert abs(result.mean) < 4 / np.sqrt(n_eras * rows_per_era)


def test_evaluate_predictions_full_report():
    pred = np.array([0.1, 0.9, 0.8, 0.2, 0.3, 0.7])
    target = np.array([0.0, 1.0, 1.0, 0.0, 1.0, 0.0])
    report = evaluate_predictions(pred, target, [0, 0, 0, 1, 1, 1])

    assert report.accuracy == pytest.approx(4 / 6)
    assert report.pearson_corr == pytest.approx(pearson(pred, target))
    assert set(report.per_era_corrs) == {0, 1}
    assert report.era_corr_mean == pytest.approx(np.mean(list(report.per_era_corrs.values())))
    assert set(report.to_dict()['per_era_corrs']) == {'0', '1'}


def test_evaluate_predictions_leaves_undefined_metrics_empty(caplog):
    pred = np.array([1.0, 1.0, 0.2, 0.8])
    target = np.array([0.5, 1.5, 0.3, 0.9])
    with caplog.at_level(logging.WARNING):
        report = evaluate_predictions(pred, target, [0, 0, 1, 1])

    assert report.accuracy is None
    assert report.per_era_corrs[0] is None
    assert report.per_era_corrs[1] == pytest.approx(1.0)
    assert report.era_corr_mean == pytest.approx(1.0)
    assert report.corr_sharpe is None
    assert 'Era 0 correlation undefined' in caplog.text


def test_generalization_gap():
    train = MetricReport(mse=0.1, accuracy=0.99)
    test = MetricReport(mse=0.4, accuracy=0.6)
    assert generalization_gap(train, test) == pytest.approx(0.39)
    assert generalization_gap(train, test, 'mse') == pytest.approx(-0.3)
    with pytest.raises(DataError):
        generalization_gap(train, test, 'corr_sharpe')
    with pytest.raises(ConfigError):
        generalization_gap(train, test, 'f1')
