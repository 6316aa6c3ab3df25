"""
Split Criteria
==============

Scoring functions for the three node-splitting criteria:

1. Original: pooled gain 1/2 [S(L) + S(R) - S(P)] with S = G^2 / (H + lambda)
2. Era splitting: the same gain computed inside every era, aggregated with
   the Boltzmann operator (alpha = 0 mean, alpha -> -inf min, alpha -> +inf max)
3. Directional era splitting: |mean over eras of sign(v_left - v_right)|

Scalar functions document the math on GradAggregates; the *_array helpers are
the same arithmetic on numpy arrays and are what the tree grower uses, so both
paths give bit-identical numbers.
"""

import math
from typing import Sequence, Tuple, Union

import numpy as np

from core.data_model import (
    REJECT,
    UNDEFINED,
    AlphaLimit,
    MaybeScore,
    SplitType,
    TrainConfig,
)
from core.errors import UndefinedScoreError
from criteria.base_criterion import BaseCriterion, CandidateTable, GradAggregate

AlphaLike = Union[float, AlphaLimit]


# ===================
# ARRAY ARITHMETIC
# ===================
# Gains and child-value differences within this fraction of the magnitudes they
# were computed from are cancellation residue and count as exactly zero.
NOISE_RTOL = 1e-9


def partition_score_array(sum_grad, sum_hess, l2: float):
    return sum_grad * sum_grad / (sum_hess + l2)


def net_gain_array(left_score, right_score, parent_score):
    """1/2 [S(left) + S(right) - S(parent)] with rounding residue snapped to 0"""
    gain = 0.5 * (left_score + right_score - parent_score)
    noise = np.abs(gain) <= NOISE_RTOL * (left_score + right_score + parent_score)
    return np.where(noise, 0.0, gain)


def gain_array(parent_grad, parent_hess, left_grad, left_hess, right_grad, right_hess, l2: float):
    """1/2 [S(left) + S(right) - S(parent)] element-wise"""
    left = partition_score_array(left_grad, left_hess, l2)
    right = partition_score_array(right_grad, right_hess, l2)
    parent = partition_score_array(parent_grad, parent_hess, l2)
    return net_gain_array(left, right, parent)


def child_value_array(sum_grad, sum_hess, l2: float):
    return sum_grad / (sum_hess + l2)


def direction_array(left_value, right_value):
    """sign(v_left - v_right); values equal up to rounding residue give 0"""
    diff = left_value - right_value
    tie = np.abs(diff) <= NOISE_RTOL * (np.abs(left_value) + np.abs(right_value))
    return np.where(tie, 0.0, np.sign(diff))


def _resolve_alpha(alpha: AlphaLike) -> Tuple[float, AlphaLimit]:
    if isinstance(alpha, AlphaLimit):
        return 0.0, alpha
    alpha = float(alpha)
    if math.isnan(alpha):
        raise ValueError("alpha must not be NaN")
    if alpha == math.inf:
        return 0.0, AlphaLimit.MAX
    if alpha == -math.inf:
        return 0.0, AlphaLimit.MIN
    return alpha, AlphaLimit.NONE


def boltzmann_rows(values: np.ndarray, alpha: AlphaLike) -> np.ndarray:
    """
    Boltzmann operator applied to each row of a 2-D array

    sum x e^(alpha x) / sum e^(alpha x), evaluated as e^(alpha x - max(alpha x))
    """
    values = np.asarray(values, dtype=np.float64)
    alpha, limit = _resolve_alpha(alpha)
    if limit is AlphaLimit.MIN:
        return values.min(axis=1)
    if limit is AlphaLimit.MAX:
        return values.max(axis=1)
    if alpha == 0.0:
        return values.mean(axis=1)

    exponents = alpha * values
    weights = np.exp(exponents - exponents.max(axis=1, keepdims=True))
    return (values * weights).sum(axis=1) / weights.sum(axis=1)


# ===================
# SCALAR OPERATIONS
# ===================
def partition_score(agg: GradAggregate, l2: float) -> float:
    """(sum_grad)^2 / (sum_hess + lambda); 0 for an empty partition when lambda > 0"""
    if agg.count == 0:
        if l2 == 0:
            raise UndefinedScoreError("partition score of an empty partition with lambda = 0")
        return 0.0
    return float(partition_score_array(agg.sum_grad, agg.sum_hess, l2))


def original_gain(parent: GradAggregate, left: GradAggregate, right: GradAggregate, l2: float) -> float:
    """Pooled split gain; may be negative"""
    if left.count + right.count != parent.count:
        raise ValueError(
            f"children hold {left.count + right.count} rows but the parent holds {parent.count}"
        )
    left_score = partition_score(left, l2)
    right_score = partition_score(right, l2)
    parent_score = partition_score(parent, l2)
    return float(net_gain_array(left_score, right_score, parent_score))


def era_gain(parent_j: GradAggregate, left_j: GradAggregate, right_j: GradAggregate, l2: float) -> MaybeScore:
    """Original gain restricted to one era; UNDEFINED when either era child is empty"""
    if left_j.count == 0 or right_j.count == 0:
        return UNDEFINED
    return original_gain(parent_j, left_j, right_j, l2)


def boltzmann(values: Sequence[float], alpha: AlphaLike) -> float:
    """Smooth max (alpha > 0) / min (alpha < 0) / mean (alpha = 0) of a non-empty finite vector"""
    array = np.asarray(values, dtype=np.float64).reshape(-1)
    if array.size == 0:
        raise ValueError("boltzmann of an empty vector")
    if not np.all(np.isfinite(array)):
        raise ValueError("boltzmann inputs must be finite")
    return float(boltzmann_rows(array[np.newaxis, :], alpha)[0])


def era_split_score(era_gains: Sequence[MaybeScore], alpha: AlphaLike) -> MaybeScore:
    """Boltzmann aggregate of per-era gains; REJECT when any era is UNDEFINED"""
    if len(era_gains) < 1:
        raise ValueError("era_split_score needs at least one era")
    if any(g is UNDEFINED for g in era_gains):
        return REJECT
    return boltzmann(era_gains, alpha)


def split_direction(v_l: float, v_r: float) -> int:
    """sign(v_l - v_r); a tie, up to rounding residue, is 0"""
    return int(direction_array(float(v_l), float(v_r)))


def directional_score(directions: Sequence[Union[int, MaybeScore]]) -> MaybeScore:
    """|sum of per-era directions| / M in [0, 1]; REJECT when any era direction is UNDEFINED"""
    if len(directions) < 1:
        raise ValueError("directional_score needs at least one era")
    if any(d is UNDEFINED for d in directions):
        return REJECT
    return abs(int(sum(directions))) / len(directions)


def is_degenerate(per_era_gains: Sequence[MaybeScore]) -> bool:
    """A split is degenerate when its gain is UNDEFINED or <= 0 in at least one era"""
    return any(g is UNDEFINED or g <= 0 for g in per_era_gains)


# ===================
# CRITERIA
# ===================
class OriginalCriterion(BaseCriterion):
    """Pooled gain over all eras together"""

    split_type = SplitType.ORIGINAL

    def score_candidates(self, table: CandidateTable) -> Tuple[np.ndarray, np.ndarray]:
        scores = table.pooled_gain
        valid = self.base_validity(table) & (scores > 0)
        return scores, valid


class EraSplitCriterion(BaseCriterion):
    """Boltzmann aggregate of era-wise gains"""

    split_type = SplitType.ERA_SPLIT

    def __init__(self, config: TrainConfig):
        super().__init__(config)
        self.alpha: AlphaLike = (
            config.alpha_limit if config.alpha_limit is not AlphaLimit.NONE else config.boltzmann_alpha
        )

    def score_candidates(self, table: CandidateTable) -> Tuple[np.ndarray, np.ndarray]:
        valid = self.base_validity(table) & table.era_defined.all(axis=1)
        scores = np.zeros(table.n_candidates)
        if valid.any():
            scores[valid] = boltzmann_rows(table.era_gains[valid], self.alpha)
        return scores, valid & (scores > 0)

    def get_parameters(self):
        params = super().get_parameters()
        params['alpha'] = self.alpha.value if isinstance(self.alpha, AlphaLimit) else self.alpha
        return params


class DirectionalEraSplitCriterion(BaseCriterion):
    """Agreement of the per-era split directions"""

    split_type = SplitType.DIRECTIONAL_ERA_SPLIT

    def __init__(self, config: TrainConfig):
        super().__init__(config)
        self.gain_floor = config.directional_gain_floor
        self._tiebreak_by_gain = config.directional_tiebreak_by_gain

    @property
    def tiebreak_by_gain(self) -> bool:
        return self._tiebreak_by_gain

    def score_candidates(self, table: CandidateTable) -> Tuple[np.ndarray, np.ndarray]:
        valid = self.base_validity(table) & table.era_defined.all(axis=1)
        scores = np.zeros(table.n_candidates)
        if valid.any():
            agreement = table.directions[valid].sum(axis=1)
            scores[valid] = np.abs(agreement) / table.n_eras
        valid &= scores > 0
        if self.gain_floor:
            valid &= table.pooled_gain > 0
        return scores, valid

    def get_parameters(self):
        params = super().get_parameters()
        params['gain_floor'] = self.gain_floor
        params['tiebreak_by_gain'] = self._tiebreak_by_gain
        return params


_CRITERIA = {
    SplitType.ORIGINAL: OriginalCriterion,
    SplitType.ERA_SPLIT: EraSplitCriterion,
    SplitType.DIRECTIONAL_ERA_SPLIT: DirectionalEraSplitCriterion,
}


def make_criterion(config: TrainConfig) -> BaseCriterion:
    """Criterion object for a config's split_type"""
    return _CRITERIA[config.split_type](config)


__all__ = [
    'DirectionalEraSplitCriterion',
    'EraSplitCriterion',
    'OriginalCriterion',
    'boltzmann',
    'boltzmann_rows',
    'child_value_array',
    'direction_array',
    'directional_score',
    'era_gain',
    'era_split_score',
    'gain_array',
    'is_degenerate',
    'make_criterion',
    'net_gain_array',
    'original_gain',
    'partition_score',
    'partition_score_array',
    'split_direction',
]
