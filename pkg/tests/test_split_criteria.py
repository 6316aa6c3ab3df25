"""
Tests for split scoring: pooled gain, era gains, Boltzmann aggregation, directions.

Run from project root: python -m pytest tests/test_split_criteria.py -v
"""

import sys
import os

import numpy as np
import pytest

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.data_model import REJECT, UNDEFINED, AlphaLimit, SplitType, TrainConfig
from core.errors import UndefinedScoreError
from criteria import (
    DirectionalEraSplitCriterion,
    EraSplitCriterion,
    GradAggregate,
    OriginalCriterion,
    boltzmann,
    directional_score,
    era_gain,
    era_split_score,
    is_degenerate,
    make_criterion,
    original_gain,
    partition_score,
    split_direction,
)


def agg(*gradients):
    return GradAggregate.from_gradients(gradients)


# ===================
# GAINS
# ===================
def test_partition_score_of_empty_partition():
    with pytest.raises(UndefinedScoreError):
        partition_score(GradAggregate.empty(), 0.0)
    assert partition_score(GradAggregate.empty(), 1.0) == 0.0
    assert partition_score(agg(1.0, 2.0), 1.0) == 3.0


def test_original_gain_on_toy_splits():
    # gradients 1,2 | 3,4
    assert original_gain(agg(1, 2, 3, 4), agg(1, 2), agg(3, 4), 0.0) == 2.0
    # gradients 1,3 | 2,4
    assert original_gain(agg(1, 2, 3, 4), agg(1, 3), agg(2, 4), 0.0) == 0.5


def test_original_gain_rejects_mismatched_counts():
    with pytest.raises(ValueError):
        original_gain(agg(1, 2, 3), agg(1), agg(2), 0.0)


def test_regularization_shrinks_gain():
    parent, left, right = agg(1, 2, 3, 4), agg(1, 2), agg(3, 4)
    assert original_gain(parent, left, right, 1.0) < original_gain(parent, left, right, 0.0)


def test_era_gain_undefined_when_era_child_empty():
    assert era_gain(agg(1, 2), agg(1, 2), GradAggregate.empty(), 0.0) is UNDEFINED
    assert era_gain(agg(1, 2), agg(1), agg(2), 0.0) == 0.25
    assert era_gain(agg(3, 4), agg(3), agg(4), 0.0) == 0.25


def test_original_gain_is_half_the_squared_error_reduction():
    rng = np.random.default_rng(5)
    for _ in range(200):
        gradients = rng.normal(size=int(rng.integers(2, 40)))
        goes_left = rng.random(gradients.size) < 0.5
        goes_left[0], goes_left[-1] = True, False
        left, right = gradients[goes_left], gradients[~goes_left]

        def sse(values):
            return float(np.sum((values - values.mean()) ** 2))

        reduction = sse(gradients) - sse(left) - sse(right)
        gain = original_gain(agg(*gradients), agg(*left), agg(*right), 0.0)
        assert gain == pytest.approx(0.5 * reduction, abs=1e-9 * float(np.sum(gradients ** 2)))


@pytest.mark.parametrize('value', [0.1, 1.0 / 3.0, 0.7])
def test_equal_gradients_have_exactly_zero_gain(value):
    for n_left in range(1, 12):
        left = agg(*[value] * n_left)
        right = agg(*[value] * (13 - n_left))
        parent = agg(*[value] * 13)
        assert original_gain(parent, left, right, 0.0) == 0.0
        assert era_gain(parent, left, right, 0.0) == 0.0
        assert is_degenerate([era_gain(parent, left, right, 0.0)])
        assert split_direction(left.sum_grad / left.sum_hess, right.sum_grad / right.sum_hess) == 0


# ===================
# BOLTZMANN
# ===================
def test_boltzmann_zero_alpha_is_mean():
    rng = np.random.default_rng(0)
    values = rng.normal(size=12)
    assert abs(boltzmann(values, 0.0) - np.mean(values)) < 1e-12


def test_boltzmann_limits():
    # at |alpha| = 1e3 a gap of 0.02 between the two extreme values bounds the error by ~1e-10
    rng = np.random.default_rng(1)
    checked = 0
    while checked < 20:
        values = rng.normal(size=10)
        ordered = np.sort(values)
        if ordered[-1] - ordered[-2] < 0.02 or ordered[1] - ordered[0] < 0.02:
            continue
        checked += 1
        assert abs(boltzmann(values, 1e3) - values.max()) < 1e-6
        assert abs(boltzmann(values, -1e3) - values.min()) < 1e-6
        assert boltzmann(values, float('inf')) == values.max()
        assert boltzmann(values, float('-inf')) == values.min()
        assert boltzmann(values, AlphaLimit.MIN) == values.min()
        assert boltzmann(values, AlphaLimit.MAX) == values.max()


def test_boltzmann_is_monotone_in_alpha():
    values = [0.1, 0.4, 0.2, 0.9]
    results = [boltzmann(values, a) for a in (-5.0, -1.0, 0.0, 1.0, 5.0)]
    assert results == sorted(results)
    assert all(min(values) <= r <= max(values) for r in results)


def test_boltzmann_stable_for_large_inputs():
    result = boltzmann([1e6, 1e6 + 1.0], 10.0)
    assert np.isfinite(result)
    assert abs(result - (1e6 + 1.0)) < 1e-3

    result = boltzmann([-1e6, 0.0], -10.0)
    assert abs(result + 1e6) < 1e-3


def test_boltzmann_rejects_bad_input():
    with pytest.raises(ValueError):
        boltzmann([], 1.0)
    with pytest.raises(ValueError):
        boltzmann([1.0, np.inf], 1.0)
    with pytest.raises(ValueError):
        boltzmann([1.0], float('nan'))


def test_era_split_score():
    assert era_split_score([0.25, 0.25], 0.0) == 0.25
    assert era_split_score([1.0, 3.0], 0.0) == 2.0
    assert era_split_score([UNDEFINED, 1.0], 0.0) is REJECT
    with pytest.raises(ValueError):
        era_split_score([], 0.0)


# ===================
# DIRECTIONS
# ===================
def test_split_direction_and_score():
    assert split_direction(1.0, 2.0) == -1
    assert split_direction(2.0, 1.0) == 1
    assert split_direction(1.5, 1.5) == 0

    assert directional_score([-1, -1]) == 1.0
    assert directional_score([1, -1]) == 0.0
    assert directional_score([1, 1, -1, 0]) == 0.25
    assert directional_score([1, UNDEFINED]) is REJECT
    with pytest.raises(ValueError):
        directional_score([])


def test_directional_score_ignores_overall_sign():
    rng = np.random.default_rng(12)
    for _ in range(100):
        directions = [int(d) for d in rng.integers(-1, 2, size=int(rng.integers(1, 9)))]
        flipped = [-d for d in directions]
        assert directional_score(flipped) == directional_score(directions)
        assert 0.0 <= directional_score(directions) <= 1.0
    assert directional_score([UNDEFINED, 1]) is directional_score([UNDEFINED, -1]) is REJECT


def test_is_degenerate():
    assert is_degenerate([UNDEFINED, 1.0])
    assert is_degenerate([0.5, 0.0])
    assert is_degenerate([0.5, -0.1])
    assert not is_degenerate([0.25, 0.25])


# ===================
# CRITERIA
# ===================
def test_make_criterion_dispatches_on_split_type():
    assert isinstance(make_criterion(TrainConfig()), OriginalCriterion)
    assert isinstance(make_criterion(TrainConfig(split_type='era')), EraSplitCriterion)
    assert isinstance(make_criterion(TrainConfig(split_type='directional-era')), DirectionalEraSplitCriterion)


def test_criterion_parameters():
    era = make_criterion(TrainConfig(split_type=SplitType.ERA_SPLIT, boltzmann_alpha=-2.0))
    assert era.get_parameters() == {'split_type': 'era', 'alpha': -2.0}

    limited = make_criterion(TrainConfig(split_type=SplitType.ERA_SPLIT, alpha_limit='min'))
    assert limited.get_parameters()['alpha'] == 'min'

    directional = make_criterion(TrainConfig(split_type='directional-era', directional_tiebreak_by_gain=False))
    assert directional.tiebreak_by_gain is False
    assert directional.get_parameters()['gain_floor'] is True
