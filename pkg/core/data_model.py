"""
Data Model
==========

Immutable containers shared by every other module:

1. Dataset: column-major features, targets and dense era identifiers
2. TrainConfig: validated hyper-parameters for one boosting run
3. SplitCandidate: a scored (feature, bin threshold) split with per-era detail

plus CSV ingestion / export and era grouping helpers.
"""

import logging
import math
import os
from dataclasses import dataclass, fields, asdict
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.errors import (
    ConfigError,
    DataError,
    DataParseError,
    EmptyDatasetError,
    MissingColumnError,
)

logger = logging.getLogger(__name__)


class ScoreMarker(Enum):
    """Explicit non-numeric outcomes of split scoring"""
    UNDEFINED = "UNDEFINED"  # an era gain with an empty child
    REJECT = "REJECT"        # a criterion that refuses the candidate


UNDEFINED = ScoreMarker.UNDEFINED
REJECT = ScoreMarker.REJECT

MaybeScore = Union[float, ScoreMarker]


class SplitType(Enum):
    """Node-splitting criteria"""
    ORIGINAL = "original"
    ERA_SPLIT = "era"
    DIRECTIONAL_ERA_SPLIT = "directional-era"

    @classmethod
    def parse(cls, value: Union[str, "SplitType"]) -> "SplitType":
        if isinstance(value, SplitType):
            return value
        key = str(value).strip().lower().replace('_', '-')
        aliases = {
            'original': cls.ORIGINAL,
            'era': cls.ERA_SPLIT,
            'era-split': cls.ERA_SPLIT,
            'erasplit': cls.ERA_SPLIT,
            'directional-era': cls.DIRECTIONAL_ERA_SPLIT,
            'directional-era-split': cls.DIRECTIONAL_ERA_SPLIT,
            'directional': cls.DIRECTIONAL_ERA_SPLIT,
            'dir-era': cls.DIRECTIONAL_ERA_SPLIT,
        }
        if key not in aliases:
            raise ConfigError('split_type', f"unknown split type '{value}'")
        return aliases[key]


class AlphaLimit(Enum):
    """Exact Boltzmann limits requested instead of a finite alpha"""
    NONE = "none"
    MIN = "min"   # alpha -> -inf
    MAX = "max"   # alpha -> +inf


# ===================
# DATASET
# ===================
@dataclass(frozen=True, eq=False)
class Dataset:
    """Row-aligned features, targets and era identifiers"""
    features: np.ndarray          # N x d, column-major
    targets: np.ndarray           # N
    eras: np.ndarray              # N, dense in [0, M-1]
    n_eras: int
    feature_names: Tuple[str, ...] = ()
    era_labels: Tuple[int, ...] = ()   # original identifier of each dense era

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64, order='F', copy=True)
        targets = np.array(self.targets, dtype=np.float64, copy=True)
        eras = np.array(self.eras, dtype=np.int64, copy=True)

        if features.ndim != 2:
            raise DataError(f"features must be a 2-D matrix, got shape {features.shape}")
        n_rows = features.shape[0]
        if n_rows < 1:
            raise EmptyDatasetError("Dataset has no rows")
        if targets.shape != (n_rows,) or eras.shape != (n_rows,):
            raise DataError(
                f"Row count mismatch: features {n_rows}, targets {targets.shape[0]}, eras {eras.shape[0]}"
            )
        if not np.all(np.isfinite(features)):
            raise DataError("features contain non-finite values")
        if not np.all(np.isfinite(targets)):
            raise DataError("targets contain non-finite values")

        n_eras = int(self.n_eras)
        if n_eras < 1 or eras.min() < 0 or eras.max() > n_eras - 1:
            raise DataError(f"era identifiers must lie in [0, {n_eras - 1}]")
        if np.unique(eras).size != n_eras:
            raise DataError(f"every era in [0, {n_eras - 1}] must have at least one row")

        names = tuple(self.feature_names) or tuple(f"feature_{i}" for i in range(features.shape[1]))
        if len(names) != features.shape[1]:
            raise DataError(f"{len(names)} feature names for {features.shape[1]} feature columns")
        labels = tuple(int(v) for v in self.era_labels) or tuple(range(n_eras))
        if len(labels) != n_eras:
            raise DataError(f"{len(labels)} era labels for {n_eras} eras")

        for array in (features, targets, eras):
            array.flags.writeable = False

        object.__setattr__(self, 'features', features)
        object.__setattr__(self, 'targets', targets)
        object.__setattr__(self, 'eras', eras)
        object.__setattr__(self, 'n_eras', n_eras)
        object.__setattr__(self, 'feature_names', names)
        object.__setattr__(self, 'era_labels', labels)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def era_ids(self) -> np.ndarray:
        """Original era identifier of every row"""
        return np.asarray(self.era_labels, dtype=np.int64)[self.eras]

    @classmethod
    def from_arrays(cls, features, targets, eras, feature_names: Sequence[str] = ()) -> "Dataset":
        """Build a Dataset from arbitrary integer era identifiers, re-indexing them densely"""
        era_values = np.asarray(eras)
        if era_values.size == 0:
            raise EmptyDatasetError("Dataset has no rows")
        labels, dense = np.unique(era_values.astype(np.int64), return_inverse=True)
        return cls(
            features=features,
            targets=targets,
            eras=dense.reshape(-1),
            n_eras=len(labels),
            feature_names=tuple(feature_names),
            era_labels=tuple(int(v) for v in labels)
        )

    def subset(self, rows: Sequence[int]) -> "Dataset":
        """Rows subset; eras are re-indexed so the result is again dense"""
        rows = np.asarray(rows, dtype=np.int64)
        original = self.era_ids[rows]
        return Dataset.from_arrays(
            self.features[rows], self.targets[rows], original, self.feature_names
        )


# ===================
# TRAINING CONFIG
# ===================
@dataclass(frozen=True)
class TrainConfig:
    """Hyper-parameters for one boosting run"""
    split_type: SplitType = SplitType.ORIGINAL
    boltzmann_alpha: float = 0.0          # 0 = plain mean over eras
    alpha_limit: AlphaLimit = AlphaLimit.NONE
    l2_regularization: float = 0.0        # lambda
    learning_rate: float = 0.1            # rho
    n_boosting_rounds: int = 100
    max_leaves: int = 31
    max_depth: Optional[int] = None       # None = unlimited
    min_child_samples: int = 20
    max_bins: int = 255
    colsample_bytree: float = 1.0
    random_seed: int = 0
    directional_gain_floor: bool = True         # directional splits also need pooled gain > 0
    directional_tiebreak_by_gain: bool = True   # break equal scores by pooled gain

    def __post_init__(self):
        object.__setattr__(self, 'split_type', SplitType.parse(self.split_type))
        if not isinstance(self.alpha_limit, AlphaLimit):
            try:
                object.__setattr__(self, 'alpha_limit', AlphaLimit(str(self.alpha_limit).lower()))
            except ValueError:
                raise ConfigError('alpha_limit', f"must be one of none/min/max, got {self.alpha_limit!r}")

        self._check_real('boltzmann_alpha', lambda v: math.isfinite(v), "must be finite")
        self._check_real('l2_regularization', lambda v: v >= 0, "must be >= 0")
        self._check_real('learning_rate', lambda v: v > 0, "must be > 0")
        self._check_real('colsample_bytree', lambda v: 0 < v <= 1, "must be in (0, 1]")
        self._check_int('n_boosting_rounds', 1)
        self._check_int('max_leaves', 1)
        self._check_int('min_child_samples', 1)
        self._check_int('max_bins', 2)
        self._check_int('random_seed', 0)
        if self.max_depth is not None:
            self._check_int('max_depth', 1)

    def _check_real(self, name: str, predicate, message: str):
        value = getattr(self, name)
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ConfigError(name, f"expected a real number, got {value!r}")
        if math.isnan(value) or not predicate(value):
            raise ConfigError(name, f"{message}, got {value}")
        object.__setattr__(self, name, value)

    def _check_int(self, name: str, minimum: int):
        value = getattr(self, name)
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            if isinstance(value, float) and value.is_integer():
                value = int(value)
            else:
                raise ConfigError(name, f"expected an integer, got {value!r}")
        if value < minimum:
            raise ConfigError(name, f"must be >= {minimum}, got {value}")
        object.__setattr__(self, name, int(value))

    def replace(self, **changes) -> "TrainConfig":
        data = self.to_dict()
        data.update(changes)
        return TrainConfig.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary for JSON serialization"""
        data = asdict(self)
        data['split_type'] = self.split_type.value
        data['alpha_limit'] = self.alpha_limit.value
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration field")
        return cls(**data)


# ===================
# SPLIT CANDIDATE
# ===================
@dataclass(frozen=True)
class SplitCandidate:
    """A scored split: rows with bin <= bin_threshold go left"""
    feature_index: int
    bin_threshold: int
    raw_threshold: float
    score: float
    pooled_gain: float
    per_era_gains: Tuple[MaybeScore, ...]
    per_era_directions: Tuple[Union[int, ScoreMarker], ...]
    left_value: float
    right_value: float
    left_count: int = 0
    right_count: int = 0

    def __post_init__(self):
        if len(self.per_era_gains) != len(self.per_era_directions):
            raise DataError("per_era_gains and per_era_directions must have one entry per era")
        if not math.isfinite(self.pooled_gain):
            raise DataError(f"pooled_gain must be finite, got {self.pooled_gain}")

    @property
    def n_eras(self) -> int:
        return len(self.per_era_gains)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['per_era_gains'] = [None if g is UNDEFINED else float(g) for g in self.per_era_gains]
        data['per_era_directions'] = [None if d is UNDEFINED else int(d) for d in self.per_era_directions]
        return data


# ===================
# CSV INGESTION
# ===================
def _parse_numeric_column(frame: pd.DataFrame, column: str) -> np.ndarray:
    raw = frame[column]
    values = pd.to_numeric(raw.str.strip(), errors='coerce').to_numpy(dtype=np.float64)
    bad = ~np.isfinite(values)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise DataParseError(row + 1, column, raw.iloc[row])
    return values


def load_dataset(path: str, era_column: str = 'era', target_column: str = 'target') -> Dataset:
    """
    Load an era-tagged CSV file

    Args:
        path: CSV with a header row
        era_column: column holding integer era identifiers
        target_column: column holding real targets

    Returns:
        Dataset with eras re-indexed densely to [0, M-1] in sorted order of the
        original identifiers; every other column becomes a feature, in file order
    """
    if not os.path.exists(path):
        raise DataError(f"Data file not found: {path}")

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.EmptyDataError:
        raise EmptyDatasetError(f"{path} is empty")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataError(f"Could not parse {path}: {e}")

    for column in (era_column, target_column):
        if column not in frame.columns:
            raise MissingColumnError(column, path)
    if len(frame) == 0:
        raise EmptyDatasetError(f"{path} has a header but no rows")

    feature_columns = [c for c in frame.columns if c not in (era_column, target_column)]
    era_values = _parse_numeric_column(frame, era_column)
    non_integer = era_values != np.round(era_values)
    if non_integer.any():
        row = int(np.flatnonzero(non_integer)[0])
        raise DataParseError(row + 1, era_column, frame[era_column].iloc[row], "not an integer era identifier")

    targets = _parse_numeric_column(frame, target_column)
    if feature_columns:
        features = np.column_stack([_parse_numeric_column(frame, c) for c in feature_columns])
    else:
        features = np.empty((len(frame), 0))

    dataset = Dataset.from_arrays(features, targets, era_values.astype(np.int64), feature_columns)
    logger.info(f"Loaded {path}: N={dataset.n_rows}, d={dataset.n_features}, M={dataset.n_eras}")
    return dataset


def write_dataset(dataset: Dataset, path: str, era_column: str = 'era', target_column: str = 'target') -> None:
    """Write a Dataset in the CSV format read by load_dataset"""
    columns: Dict[str, Any] = {era_column: dataset.era_ids}
    for i, name in enumerate(dataset.feature_names):
        columns[name] = dataset.features[:, i]
    columns[target_column] = dataset.targets

    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    pd.DataFrame(columns).to_csv(path, index=False, encoding='utf-8', lineterminator='\n')


# ===================
# ERA HELPERS
# ===================
def group_rows_by_era(dataset: Dataset) -> Dict[int, np.ndarray]:
    """Map each dense era j to the ascending row indices holding era j"""
    order = np.argsort(dataset.eras, kind='stable')
    counts = np.bincount(dataset.eras, minlength=dataset.n_eras)
    groups = np.split(order, np.cumsum(counts)[:-1])
    return {era: rows for era, rows in enumerate(groups)}


def coarsen_eras(dataset: Dataset, n_training_eras: int) -> Dataset:
    """
    Merge the sorted eras into contiguous "training eras"

    Era j of M goes to fold j * K // M, so folds differ in size by at most one era.
    """
    if isinstance(n_training_eras, bool) or not isinstance(n_training_eras, (int, np.integer)):
        raise ConfigError('training_eras', f"expected an integer, got {n_training_eras!r}")
    if not 1 <= n_training_eras <= dataset.n_eras:
        raise ConfigError('training_eras', f"must be in [1, {dataset.n_eras}], got {n_training_eras}")

    fold_of_era = (np.arange(dataset.n_eras) * int(n_training_eras)) // dataset.n_eras
    return Dataset(
        features=dataset.features,
        targets=dataset.targets,
        eras=fold_of_era[dataset.eras],
        n_eras=int(n_training_eras),
        feature_names=dataset.feature_names
    )


__all__ = [
    'AlphaLimit',
    'Dataset',
    'MaybeScore',
    'REJECT',
    'ScoreMarker',
    'SplitCandidate',
    'SplitType',
    'TrainConfig',
    'UNDEFINED',
    'coarsen_eras',
    'group_rows_by_era',
    'load_dataset',
    'write_dataset',
]
