"""
Random Grid Search
==================

Draws n_configs random configurations from per-parameter value lists and
trains every split type on each one with identical data, so the three
criteria are compared over the same parameter values.

Runs may execute on a thread pool; results are appended to the CSV by the
calling thread in submission order and flushed after every row, so partial
results survive an interrupted search.
"""

import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from config.settings import effective_threads
from core.data_model import Dataset, SplitType, TrainConfig, coarsen_eras
from core.errors import ConfigError, DataError
from core.evaluation import MetricReport, evaluate_predictions
from core.gbdt import GBDTModel, degenerate_split_stats, fit, predict

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ('mse', 'pearson_corr', 'accuracy', 'era_corr_mean', 'corr_sharpe')
TRAIN_FIELDS = {f.name for f in fields(TrainConfig)}


# ===================
# GRID SPEC
# ===================
@dataclass
class GridSpec:
    """Candidate values per TrainConfig field, number of configurations to draw and the draw seed"""
    params: Dict[str, List[Any]]
    n_configs: int = 20
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.n_configs, bool) or not isinstance(self.n_configs, int) or self.n_configs < 1:
            raise ConfigError('n_configs', f"must be an integer >= 1, got {self.n_configs!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError('seed', f"must be an integer >= 0, got {self.seed!r}")
        if not isinstance(self.params, dict):
            raise ConfigError('params', "expected a mapping of field name to value list")

        for name, values in self.params.items():
            if name not in TRAIN_FIELDS:
                raise ConfigError(name, "unknown configuration field")
            if name == 'split_type':
                raise ConfigError(name, "split types are not sampled; every run trains all of them")
            if not isinstance(values, list) or not values:
                raise ConfigError(name, "expected a non-empty list of values")
            for value in values:
                TrainConfig.from_dict({name: value})

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GridSpec":
        unknown = sorted(set(data) - {'params', 'n_configs', 'seed'})
        if unknown:
            raise ConfigError(unknown[0], "unknown grid field")
        if 'params' not in data:
            raise ConfigError('params', "missing")
        return cls(params=data['params'], n_configs=data.get('n_configs', 20), seed=data.get('seed', 0))

    @classmethod
    def from_file(cls, path: str) -> "GridSpec":
        if not os.path.exists(path):
            raise DataError(f"Grid file not found: {path}")
        with open(path, 'r', encoding='utf-8') as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise DataError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}")
        if not isinstance(data, dict):
            raise DataError(f"{path}: expected a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> Dict[str, Any]:
        return {'params': self.params, 'n_configs': self.n_configs, 'seed': self.seed}


def sample_configs(grid: GridSpec, base: Optional[TrainConfig] = None) -> List[TrainConfig]:
    """Draw grid.n_configs configurations; parameters are visited in sorted name order"""
    base = base or TrainConfig()
    rng = np.random.default_rng(grid.seed)
    configs = []
    for _ in range(grid.n_configs):
        choice = {name: grid.params[name][int(rng.integers(len(grid.params[name])))]
                  for name in sorted(grid.params)}
        configs.append(base.replace(**choice))
    return configs


# ===================
# RUN RECORDS
# ===================
@dataclass
class RunRecord:
    """Outcome of training and evaluating one (config, split type) pair"""
    config_index: int
    config: TrainConfig
    split_type: SplitType
    train_metrics: Optional[MetricReport] = None
    test_metrics: Optional[MetricReport] = None
    wall_time_seconds: float = 0.0
    degenerate_splits: int = 0
    total_splits: int = 0
    error: Optional[str] = None

    def config_json(self) -> str:
        """Config without the split type, identical for the runs that share a config"""
        data = self.config.to_dict()
        data.pop('split_type')
        return json.dumps(data, sort_keys=True)

    def to_dict(self) -> Dict[str, Any]:
        """Convert record to dictionary for JSON serialization"""
        return {
            'config_index': self.config_index,
            'split_type': self.split_type.value,
            'config': self.config.to_dict(),
            'train_metrics': self.train_metrics.to_dict() if self.train_metrics else None,
            'test_metrics': self.test_metrics.to_dict() if self.test_metrics else None,
            'wall_time_seconds': self.wall_time_seconds,
            'degenerate_splits': self.degenerate_splits,
            'total_splits': self.total_splits,
            'error': self.error,
        }

    def to_row(self) -> Dict[str, Any]:
        """Flat CSV row"""
        row: Dict[str, Any] = {
            'config_index': self.config_index,
            'split_type': self.split_type.value,
            'config': self.config_json(),
        }
        for prefix, report in (('train', self.train_metrics), ('test', self.test_metrics)):
            for metric in METRIC_COLUMNS:
                row[f"{prefix}_{metric}"] = getattr(report, metric) if report else None
        row.update({
            'wall_time_seconds': round(self.wall_time_seconds, 4),
            'degenerate_splits': self.degenerate_splits,
            'total_splits': self.total_splits,
            'error': self.error or '',
        })
        return row


def train_and_evaluate(train: Dataset, test: Optional[Dataset], config: TrainConfig,
                       config_index: int = 0,
                       training_eras: Optional[int] = None) -> Tuple[GBDTModel, RunRecord]:
    """
    Fit one model and evaluate it on the training and (optional) test data

    Metrics always use the original eras; only training sees coarsened eras.
    """
    started = time.time()
    fit_data = coarsen_eras(train, training_eras) if training_eras else train
    model = fit(fit_data, config)

    record = RunRecord(config_index=config_index, config=config, split_type=config.split_type)
    record.train_metrics = evaluate_predictions(predict(model, train.features), train.targets, train.era_ids)
    if test is not None:
        record.test_metrics = evaluate_predictions(predict(model, test.features), test.targets, test.era_ids)
    record.degenerate_splits, record.total_splits = degenerate_split_stats(model)
    record.wall_time_seconds = time.time() - started
    return model, record


def _run(job: Tuple[int, TrainConfig], train: Dataset, test: Dataset,
         training_eras: Optional[int]) -> RunRecord:
    config_index, config = job
    try:
        _, record = train_and_evaluate(train, test, config, config_index, training_eras)
    except Exception as e:
        logger.error(f"Run {config_index}/{config.split_type.value} failed: {e}")
        return RunRecord(config_index=config_index, config=config, split_type=config.split_type,
                         error=f"{type(e).__name__}: {e}")

    test_metrics = record.test_metrics
    score = test_metrics.accuracy if test_metrics.accuracy is not None else test_metrics.mse
    logger.info(f"Run {config_index}/{config.split_type.value}: test "
                f"{'accuracy' if test_metrics.accuracy is not None else 'MSE'} {score:.4f} "
                f"({record.wall_time_seconds:.1f}s)")
    return record


def run_grid_search(train: Dataset, test: Dataset, grid: GridSpec, out_path: str,
                    base_config: Optional[TrainConfig] = None, threads: Optional[int] = None,
                    training_eras: Optional[int] = None) -> pd.DataFrame:
    """
    Train every split type on every sampled config and write one CSV row per run

    Args:
        train: training data
        test: out-of-sample data
        grid: parameter ranges, number of configs and seed
        out_path: CSV file, overwritten
        base_config: values for the fields the grid does not sample
        threads: worker threads (None or 0 = ERA_GBDT_THREADS / CPU count)
        training_eras: coarsen training eras to this many folds before fitting

    Returns:
        DataFrame of all rows, n_configs x 3 on clean completion
    """
    configs = sample_configs(grid, base_config)
    jobs = [(i, config.replace(split_type=split_type))
            for i, config in enumerate(configs) for split_type in SplitType]
    workers = min(effective_threads(threads), len(jobs))
    logger.info(f"Grid search: {grid.n_configs} configs x {len(SplitType)} split types on {workers} threads")

    directory = os.path.dirname(out_path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    rows = []
    with open(out_path, 'w', encoding='utf-8', newline='') as out, \
            ThreadPoolExecutor(max_workers=workers) as executor:
        results = executor.map(lambda job: _run(job, train, test, training_eras), jobs)
        for record in results:
            row = record.to_row()
            pd.DataFrame([row]).to_csv(out, header=not rows, index=False, lineterminator='\n')
            out.flush()
            rows.append(row)

    failed = sum(1 for row in rows if row['error'])
    logger.info(f"Grid search finished: {len(rows)} runs written to {out_path} ({failed} failed)")
    return pd.DataFrame(rows)


# ===================
# SUMMARIES
# ===================
def load_results(path: str) -> pd.DataFrame:
    if not os.path.exists(path):
        raise DataError(f"Results file not found: {path}")
    try:
        frame = pd.read_csv(path, keep_default_na=True)
    except pd.errors.EmptyDataError:
        raise DataError(f"{path} is empty")
    missing = [c for c in ('split_type', 'train_mse', 'test_mse') if c not in frame.columns]
    if missing:
        raise DataError(f"{path} is not a grid-search result file (missing {', '.join(missing)})")
    return frame


def summarize_results(frame: pd.DataFrame, metric: Optional[str] = None) -> pd.DataFrame:
    """
    Per split type: run counts, best test score and mean train / test values with their gap

    metric defaults to accuracy when the results have it, else mse. "Best" is the
    maximum for accuracy and correlations, the minimum for mse.
    """
    if metric is None:
        metric = 'accuracy' if frame.get('test_accuracy', pd.Series(dtype=float)).notna().any() else 'mse'
    if metric not in METRIC_COLUMNS:
        raise ConfigError('metric', f"must be one of {', '.join(METRIC_COLUMNS)}, got {metric!r}")

    errors = frame['error'].fillna('').astype(str) if 'error' in frame.columns else pd.Series('', index=frame.index)
    ok = frame[errors == '']
    train_col, test_col = f"train_{metric}", f"test_{metric}"

    summary = []
    for split_type in SplitType:
        runs = ok[ok['split_type'] == split_type.value]
        train_values = pd.to_numeric(runs[train_col], errors='coerce')
        test_values = pd.to_numeric(runs[test_col], errors='coerce')
        best = test_values.min() if metric == 'mse' else test_values.max()
        summary.append({
            'split_type': split_type.value,
            'runs': int((frame['split_type'] == split_type.value).sum()),
            'failed': int(((frame['split_type'] == split_type.value) & (errors != '')).sum()),
            'metric': metric,
            'best_test': None if pd.isna(best) else float(best),
            'mean_train': None if train_values.dropna().empty else float(train_values.mean()),
            'mean_test': None if test_values.dropna().empty else float(test_values.mean()),
        })
        entry = summary[-1]
        entry['mean_gap'] = (
            None if entry['mean_train'] is None or entry['mean_test'] is None
            else entry['mean_train'] - entry['mean_test']
        )
    return pd.DataFrame(summary).set_index('split_type')


__all__ = [
    'GridSpec',
    'METRIC_COLUMNS',
    'RunRecord',
    'load_results',
    'run_grid_search',
    'sample_configs',
    'summarize_results',
    'train_and_evaluate',
]
