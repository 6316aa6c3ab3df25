"""
Split Criteria Module
=====================

This module contains the node-splitting criteria for era-aware boosting.
Each criterion implements the BaseCriterion interface and provides:

1. Candidate scoring over a node's candidate table
2. Validity rules (child sizes, undefined eras, positive score)

Available Criteria:
- OriginalCriterion: pooled impurity reduction
- EraSplitCriterion: Boltzmann-aggregated era-wise impurity reduction
- DirectionalEraSplitCriterion: agreement of era-wise split directions
"""

from .base_criterion import BaseCriterion, CandidateTable, GradAggregate
from .split_criteria import (
    DirectionalEraSplitCriterion,
    EraSplitCriterion,
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

__all__ = [
    'BaseCriterion',
    'CandidateTable',
    'GradAggregate',
    'OriginalCriterion',
    'EraSplitCriterion',
    'DirectionalEraSplitCriterion',
    'make_criterion',
    'partition_score',
    'original_gain',
    'era_gain',
    'boltzmann',
    'era_split_score',
    'split_direction',
    'directional_score',
    'is_degenerate',
]
