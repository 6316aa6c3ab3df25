"""
Named training presets and grid-search parameter ranges
"""

import copy
from typing import Any, Dict, List

from core.data_model import TrainConfig
from core.errors import ConfigError

# ===================
# TRAINING PRESETS
# ===================
TRAIN_PRESETS: Dict[str, Dict[str, Any]] = {
    # Benchmark model for weekly financial data (bring your own dataset)
    'numerai-benchmark': {
        'n_boosting_rounds': 2000,
        'max_depth': 5,
        'max_leaves': 32,
        'learning_rate': 0.01,
        'colsample_bytree': 0.1,
    },
    'sine-showcase': {
        'n_boosting_rounds': 100,
        'max_depth': 10,
        'learning_rate': 1.0,
    },
}

# ===================
# GRID PRESETS
# ===================
# colsample_bytree 0 is left out: it would leave trees without features
STANDARD_GRID: Dict[str, List[Any]] = {
    'colsample_bytree': [0.1, 0.3, 0.5, 0.7, 0.9, 1.0],
    'l2_regularization': [0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
    'learning_rate': [0.01, 0.05, 0.1, 0.5, 1.0],
    'max_bins': [3, 4, 5, 7, 9],
    'max_depth': [2, 3, 4, 5, 7, 9, 15],
    'max_leaves': [5, 7, 10, 16, 32],
    'min_child_samples': [1, 3, 5, 10, 20],
    'n_boosting_rounds': [5, 10, 20, 50, 100, 150],
    'boltzmann_alpha': [-2.0, -1.0, 0.0, 1.0, 2.0],
}

GRID_PRESETS: Dict[str, Dict[str, Any]] = {
    'standard': {'n_configs': 20, 'seed': 0, 'params': STANDARD_GRID},
    # with one input, 9 bins leave every criterion the same handful of thresholds
    'sine': {
        'n_configs': 20,
        'seed': 0,
        'params': {**STANDARD_GRID, 'max_bins': [16, 32, 64, 128, 255]},
    },
    # a two-turn spiral needs more than 9 bins per axis
    'memorization': {
        'n_configs': 20,
        'seed': 0,
        'params': {**STANDARD_GRID, 'max_bins': [32, 64, 128, 255]},
    },
}


def get_preset(name: str, **overrides) -> TrainConfig:
    """TrainConfig for a named preset, with optional field overrides"""
    if name not in TRAIN_PRESETS:
        raise ConfigError('preset', f"unknown preset '{name}' (available: {', '.join(sorted(TRAIN_PRESETS))})")
    return TrainConfig.from_dict({**TRAIN_PRESETS[name], **overrides})


def get_grid_preset(name: str) -> Dict[str, Any]:
    """Grid document for a named preset, in the grid-file JSON layout"""
    if name not in GRID_PRESETS:
        raise ConfigError('grid_preset', f"unknown grid preset '{name}' (available: {', '.join(sorted(GRID_PRESETS))})")
    return copy.deepcopy(GRID_PRESETS[name])


__all__ = [
    'GRID_PRESETS',
    'STANDARD_GRID',
    'TRAIN_PRESETS',
    'get_grid_preset',
    'get_preset',
]
