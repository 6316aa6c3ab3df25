"""
Degenerate split demonstration on a four-row, two-era dataset.

The pooled criterion picks a split that separates the eras and improves
impurity in neither; era splitting picks the split that helps both eras.
"""

import logging
from typing import Any, Dict

import numpy as np

from core.binning import bin_dataset
from core.data_model import UNDEFINED, Dataset, SplitType, TrainConfig
from core.tree_grower import build_histogram, find_best_split, node_aggregate
from criteria.split_criteria import is_degenerate

logger = logging.getLogger(__name__)

GRADIENTS = np.array([1.0, 2.0, 3.0, 4.0])

EXPECTED = {
    SplitType.ORIGINAL: {'feature_index': 0, 'raw_threshold': 2.5, 'score': 2.0,
                         'per_era_gains': (UNDEFINED, UNDEFINED)},
    SplitType.ERA_SPLIT: {'feature_index': 1, 'raw_threshold': 2.5, 'score': 0.25,
                          'per_era_gains': (0.25, 0.25)},
    SplitType.DIRECTIONAL_ERA_SPLIT: {'feature_index': 1, 'raw_threshold': 2.5, 'score': 1.0,
                                      'per_era_directions': (-1, -1)},
}


def four_row_dataset() -> Dataset:
    """feature 1 = 1,2,3,4; feature 2 = 1,3,2,4; eras 0,0,1,1; targets -1..-4"""
    return Dataset.from_arrays(
        np.array([[1.0, 1.0], [2.0, 3.0], [3.0, 2.0], [4.0, 4.0]]),
        np.array([-1.0, -2.0, -3.0, -4.0]),
        np.array([0, 0, 1, 1]),
        feature_names=('feature_1', 'feature_2')
    )


def degenerate_split_report(alpha: float = 0.0) -> Dict[str, Any]:
    """Best root split of the four-row dataset under every criterion, with gradients 1,2,3,4"""
    dataset = four_row_dataset()
    binned = bin_dataset(dataset, max_bins=255)
    rows = np.arange(dataset.n_rows)
    hist = build_histogram(binned, GRADIENTS, rows)
    node_agg = node_aggregate(binned, GRADIENTS, rows)

    report: Dict[str, Any] = {'gradients': GRADIENTS.tolist(), 'criteria': {}}
    for split_type in SplitType:
        config = TrainConfig(split_type=split_type, boltzmann_alpha=alpha, min_child_samples=1)
        candidate = find_best_split(hist, node_agg, config)
        entry: Dict[str, Any] = {'split': None, 'degenerate': None}
        if candidate is not None:
            entry['split'] = candidate.to_dict()
            entry['split']['feature_name'] = dataset.feature_names[candidate.feature_index]
            entry['degenerate'] = is_degenerate(candidate.per_era_gains)
        report['criteria'][split_type.value] = entry
    return report


def check_degenerate_report(report: Dict[str, Any]) -> None:
    """Raise AssertionError when a criterion no longer makes the expected choice"""
    for split_type, expected in EXPECTED.items():
        split = report['criteria'][split_type.value]['split']
        assert split is not None, f"{split_type.value}: no valid split"
        for key, value in expected.items():
            found = split[key]
            if key == 'per_era_gains':
                value = [None if g is UNDEFINED else g for g in value]
            elif key == 'per_era_directions':
                value = list(value)
            assert found == value, f"{split_type.value}: expected {key}={value}, got {found}"

    assert report['criteria'][SplitType.ORIGINAL.value]['degenerate'] is True
    assert report['criteria'][SplitType.ERA_SPLIT.value]['degenerate'] is False
    logger.debug("Degenerate split demonstration matches the expected choices")


__all__ = ['EXPECTED', 'check_degenerate_report', 'degenerate_split_report', 'four_row_dataset']
