#!/usr/bin/env python3
"""
Base Criterion Class
Abstract base class for all node-splitting criteria
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from core.data_model import SplitType, TrainConfig


@dataclass(frozen=True)
class GradAggregate:
    """Gradient / hessian sums over one partition (hessians are 1 for squared error)"""
    sum_grad: float
    sum_hess: float
    count: int

    def __post_init__(self):
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")
        if self.count == 0 and (self.sum_grad != 0 or self.sum_hess != 0):
            raise ValueError("an empty partition must have zero sums")

    @classmethod
    def from_gradients(cls, gradients: Sequence[float]) -> "GradAggregate":
        g = np.asarray(gradients, dtype=np.float64).reshape(-1)
        return cls(sum_grad=float(g.sum()), sum_hess=float(g.size), count=int(g.size))

    @classmethod
    def empty(cls) -> "GradAggregate":
        return cls(0.0, 0.0, 0)

    def __add__(self, other: "GradAggregate") -> "GradAggregate":
        return GradAggregate(self.sum_grad + other.sum_grad, self.sum_hess + other.sum_hess,
                             self.count + other.count)

    def __sub__(self, other: "GradAggregate") -> "GradAggregate":
        count = self.count - other.count
        if count == 0:
            return GradAggregate.empty()
        return GradAggregate(self.sum_grad - other.sum_grad, self.sum_hess - other.sum_hess, count)


@dataclass(frozen=True, eq=False)
class CandidateTable:
    """
    Every (feature, bin threshold) candidate of one node, flattened feature-major

    Per-era arrays are C x M. Entries of era_gains / directions are only meaningful
    where era_defined is True (both era children non-empty).
    """
    feature_index: np.ndarray     # C
    bin_threshold: np.ndarray     # C
    in_scope: np.ndarray          # C, feature visible and threshold inside the feature's bins
    left_count: np.ndarray        # C, pooled
    right_count: np.ndarray       # C
    left_value: np.ndarray        # C, pooled child values
    right_value: np.ndarray       # C
    pooled_gain: np.ndarray       # C
    era_gains: np.ndarray         # C x M
    era_defined: np.ndarray       # C x M
    directions: np.ndarray        # C x M, in {-1, 0, +1}

    @property
    def n_candidates(self) -> int:
        return self.feature_index.size

    @property
    def n_eras(self) -> int:
        return self.era_gains.shape[1]


class BaseCriterion(ABC):
    """
    Abstract base class for all split criteria

    A criterion turns a CandidateTable into one score per candidate plus a
    validity mask; the tree grower picks the best valid candidate.
    """

    split_type: SplitType = SplitType.ORIGINAL

    def __init__(self, config: TrainConfig):
        self.config = config
        self.l2 = config.l2_regularization
        self.min_child_samples = config.min_child_samples

    @abstractmethod
    def score_candidates(self, table: CandidateTable) -> Tuple[np.ndarray, np.ndarray]:
        """
        Score every candidate of a node

        Args:
            table: pooled and per-era statistics of all candidates

        Returns:
            (scores, valid): float array and boolean mask of length C;
            scores are only meaningful where valid is True
        """
        pass

    def base_validity(self, table: CandidateTable) -> np.ndarray:
        """Rules shared by every criterion: in scope and both pooled children large enough"""
        return (
            table.in_scope
            & (table.left_count >= self.min_child_samples)
            & (table.right_count >= self.min_child_samples)
        )

    @property
    def tiebreak_by_gain(self) -> bool:
        return True

    def get_parameters(self):
        """Return criterion parameters for reports"""
        return {'split_type': self.split_type.value}
