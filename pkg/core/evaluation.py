"""
Evaluation Metrics
==================

MSE, Pearson correlation, rounded-prediction accuracy and era-wise
correlation statistics (mean, sample std, corr Sharpe).
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, NamedTuple, Optional, Sequence

import numpy as np

from core.errors import ConfigError, DimensionMismatchError, DataError, UndefinedCorrelationError

logger = logging.getLogger(__name__)

GAP_METRICS = ('mse', 'pearson_corr', 'accuracy', 'era_corr_mean', 'corr_sharpe')


def _as_pair(pred, target, min_length: int):
    pred = np.asarray(pred, dtype=np.float64).reshape(-1)
    target = np.asarray(target, dtype=np.float64).reshape(-1)
    if pred.shape != target.shape:
        raise DimensionMismatchError(f"{pred.size} predictions for {target.size} targets")
    if pred.size < min_length:
        raise DataError(f"need at least {min_length} rows, got {pred.size}")
    return pred, target


def mse(pred, target) -> float:
    """Mean of squared differences"""
    pred, target = _as_pair(pred, target, 1)
    diff = pred - target
    return float(np.mean(diff * diff))


def pearson(pred, target) -> float:
    """Sample Pearson correlation; constant inputs raise UndefinedCorrelationError"""
    pred, target = _as_pair(pred, target, 1)
    if pred.size < 2:
        raise UndefinedCorrelationError("correlation needs at least 2 rows")
    if np.all(pred == pred[0]) or np.all(target == target[0]):
        raise UndefinedCorrelationError("correlation with a constant vector is undefined")

    pred_c = pred - pred.mean()
    target_c = target - target.mean()
    corr = np.sum(pred_c * target_c) / np.sqrt(np.sum(pred_c * pred_c) * np.sum(target_c * target_c))
    return float(np.clip(corr, -1.0, 1.0))


def round_half_away(values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return np.sign(values) * np.floor(np.abs(values) + 0.5)


def is_binary(target) -> bool:
    target = np.asarray(target, dtype=np.float64)
    return bool(np.all((target == 0) | (target == 1)))


def accuracy(pred, target) -> float:
    """Fraction of rows where clamp(round(pred), 0, 1) equals the {0,1} target"""
    pred, target = _as_pair(pred, target, 1)
    if not is_binary(target):
        raise DataError("accuracy needs targets in {0, 1}")
    labels = np.clip(round_half_away(pred), 0, 1)
    return float(np.mean(labels == target))


class EraCorrelation(NamedTuple):
    per_era_corrs: Dict[int, float]
    mean: float
    std: float
    sharpe: Optional[float]      # None when std is 0


def summarize_era_corrs(corrs: Sequence[float]):
    """(mean, sample std, sharpe) of per-era correlations; sharpe is None when std is 0"""
    values = np.asarray(corrs, dtype=np.float64)
    mean = float(values.mean())
    std = float(values.std(ddof=1)) if values.size > 1 else 0.0
    sharpe = mean / std if std > 0 else None
    return mean, std, sharpe


def era_wise_corr(pred, target, eras) -> EraCorrelation:
    """
    Pearson correlation inside every era, then mean, sample std and Sharpe (mean / std)

    Args:
        pred: predictions
        target: targets
        eras: era identifier per row

    Returns:
        EraCorrelation keyed by era identifier in ascending order

    Raises:
        UndefinedCorrelationError naming the first degenerate era
    """
    pred, target = _as_pair(pred, target, 1)
    eras = np.asarray(eras).reshape(-1)
    if eras.shape != pred.shape:
        raise DimensionMismatchError(f"{eras.size} era labels for {pred.size} rows")

    per_era = {}
    for era in np.unique(eras):
        rows = eras == era
        try:
            per_era[int(era)] = pearson(pred[rows], target[rows])
        except UndefinedCorrelationError as e:
            raise UndefinedCorrelationError(str(e), era=int(era))

    mean, std, sharpe = summarize_era_corrs(list(per_era.values()))
    return EraCorrelation(per_era, mean, std, sharpe)


@dataclass
class MetricReport:
    """Metrics of one prediction vector; None marks a metric that is undefined for the data"""
    mse: float
    pearson_corr: Optional[float] = None
    accuracy: Optional[float] = None
    era_corr_mean: Optional[float] = None
    era_corr_std: Optional[float] = None
    corr_sharpe: Optional[float] = None
    per_era_corrs: Dict[int, Optional[float]] = field(default_factory=dict)

    def to_dict(self):
        """Convert report to dictionary for JSON serialization"""
        data = asdict(self)
        data['per_era_corrs'] = {str(era): corr for era, corr in self.per_era_corrs.items()}
        return data


def evaluate_predictions(pred, target, eras) -> MetricReport:
    """Full report; undefined correlations are logged and left as None instead of raising"""
    pred, target = _as_pair(pred, target, 1)
    eras = np.asarray(eras).reshape(-1)
    if eras.shape != pred.shape:
        raise DimensionMismatchError(f"{eras.size} era labels for {pred.size} rows")

    report = MetricReport(mse=mse(pred, target))
    if is_binary(target):
        report.accuracy = accuracy(pred, target)

    try:
        report.pearson_corr = pearson(pred, target)
    except UndefinedCorrelationError as e:
        logger.warning(f"Pearson correlation undefined: {e}")

    for era in np.unique(eras):
        rows = eras == era
        try:
            report.per_era_corrs[int(era)] = pearson(pred[rows], target[rows])
        except UndefinedCorrelationError as e:
            logger.warning(f"Era {int(era)} correlation undefined: {e}")
            report.per_era_corrs[int(era)] = None

    defined = [c for c in report.per_era_corrs.values() if c is not None]
    if defined:
        report.era_corr_mean, report.era_corr_std, report.corr_sharpe = summarize_era_corrs(defined)
    return report


def generalization_gap(train_report: MetricReport, test_report: MetricReport, metric: str = 'accuracy') -> float:
    """In-sample minus out-of-sample value of one metric"""
    if metric not in GAP_METRICS:
        raise ConfigError('metric', f"must be one of {', '.join(GAP_METRICS)}, got {metric!r}")
    train_value = getattr(train_report, metric)
    test_value = getattr(test_report, metric)
    if train_value is None or test_value is None:
        raise DataError(f"{metric} is undefined for at least one of the reports")
    return float(train_value - test_value)


__all__ = [
    'EraCorrelation',
    'GAP_METRICS',
    'MetricReport',
    'accuracy',
    'era_wise_corr',
    'evaluate_predictions',
    'generalization_gap',
    'is_binary',
    'mse',
    'pearson',
    'round_half_away',
    'summarize_era_corrs',
]
