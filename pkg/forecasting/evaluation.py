"""
Forecast accuracy: seasonal naive baseline, MAE, MASE, per-city reports and
cross-city summaries.
"""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import InsufficientHistory, UndefinedMASE
from .learn.ensembles import TreeEnsemble, predict
from .learn.params import HyperParams
from .preprocess import DiseaseConfig, SplitSeries, SupervisedDataset, flag_anomalous

logger = logging.getLogger(__name__)

STRATUM_ALL = 'all'


def stratum_label(z_threshold: float) -> str:
    """Name of the stratum without anomalous cities, e.g. 'z<4'"""
    return f'z<{z_threshold:g}'


STRATUM_NORMAL = stratum_label(4.0)

WINDOW = 'window'
IN_SAMPLE = 'in_sample'
MASE_DENOMINATORS = (WINDOW, IN_SAMPLE)


@dataclass(frozen=True)
class EvalReport:
    city: str
    disease: str
    criterion: str
    k_neighbors: int
    algorithm: str
    params: HyperParams
    anomalous: bool
    train_mae: float
    train_mase: float
    test_mae: float
    test_mase: float
    scale: float
    cv_mae: float = math.nan
    neighbors: Tuple[str, ...] = ()

    @property
    def sort_key(self):
        return (self.city, self.algorithm, self.criterion, self.k_neighbors)


@dataclass(frozen=True)
class SummaryRow:
    disease: str
    algorithm: str
    criterion: str
    k_neighbors: int
    anomaly_stratum: str
    mean_mase: float
    std_mase: float
    n_cities: int
    train_mean_mase: float = math.nan
    train_std_mase: float = math.nan


def seasonal_naive(values: Sequence[float], m: int, eval_indices: Iterable[int]) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    indices = np.asarray(list(eval_indices), dtype=int)
    if indices.size and indices.min() < m:
        raise InsufficientHistory(f'seasonal naive needs index >= m={m}, got {int(indices.min())}')
    return values[indices - m]


def mae(predictions: Sequence[float], actuals: Sequence[float]) -> float:
    predictions = np.asarray(predictions, dtype=float)
    actuals = np.asarray(actuals, dtype=float)
    if predictions.shape != actuals.shape:
        raise ValueError(f'length mismatch: {predictions.shape} predictions vs {actuals.shape} actuals')
    if predictions.size == 0:
        raise ValueError('MAE of an empty window')
    return float(np.mean(np.abs(predictions - actuals)))


def mase(
    predictions: Sequence[float],
    actuals: Sequence[float],
    history: Sequence[float],
    m: int,
    indices: Optional[Iterable[int]] = None,
) -> float:
    """Model MAE over seasonal-naive MAE.

    ``history`` is the observed series; the naive errors are taken at
    ``indices``, by default its last ``len(actuals)`` positions. Windows of
    equal length are compared as sums of absolute errors.
    """
    numerator = mae(predictions, actuals)
    history = np.asarray(history, dtype=float)
    if indices is None:
        indices = range(len(history) - len(actuals), len(history))
    indices = np.asarray(list(indices), dtype=int)
    naive_errors = np.abs(seasonal_naive(history, m, indices) - history[indices])
    if naive_errors.size == 0:
        raise ValueError('MASE denominator over an empty window')
    if naive_errors.sum() == 0:
        raise UndefinedMASE(numerator)
    errors = np.abs(np.asarray(predictions, dtype=float) - np.asarray(actuals, dtype=float))
    if errors.size == naive_errors.size:
        return float(errors.sum() / naive_errors.sum())
    return numerator / float(naive_errors.mean())


def _seasonal_rows(predictions, actuals, row_weeks, m: int):
    """Rows whose week has a naive forecast, i.e. at least ``m`` weeks into the history"""
    keep = np.asarray(row_weeks) >= m
    return np.asarray(predictions)[keep], np.asarray(actuals)[keep], np.asarray(row_weeks)[keep]


def _mase_or_nan(label: str, predictions, actuals, history, m: int, indices) -> float:
    if len(actuals) == 0 or len(indices) == 0:
        logger.warning(f'{label}: no rows at least seasonal_m={m} weeks into the history, MASE undefined')
        return math.nan
    try:
        return mase(predictions, actuals, history, m, indices)
    except UndefinedMASE as e:
        logger.warning(f'{label}: {e}')
        return math.nan


def evaluate_city(
    ensemble: TreeEnsemble,
    train_dataset: SupervisedDataset,
    test_dataset: SupervisedDataset,
    split: SplitSeries,
    config: DiseaseConfig,
    *,
    city: Optional[str] = None,
    criterion: str = 'none',
    neighbors: Sequence[str] = (),
    cv_mae: float = math.nan,
    mase_denominator: str = WINDOW,
) -> EvalReport:
    """In-sample train metrics and hold-out test metrics for one fitted model"""
    city = city or train_dataset.column_labels[0][0]
    history = split.history
    m = config.seasonal_m

    train_predictions = predict(ensemble, train_dataset.feature_matrix)
    test_predictions = predict(ensemble, test_dataset.feature_matrix)
    train_mae = mae(train_predictions, train_dataset.targets)
    test_mae = mae(test_predictions, test_dataset.targets)

    train_rows = _seasonal_rows(train_predictions, train_dataset.targets, train_dataset.row_weeks, m)
    test_rows = _seasonal_rows(test_predictions, test_dataset.targets, test_dataset.row_weeks, m)
    if mase_denominator == IN_SAMPLE:
        in_sample = range(m, len(split.train))
        train_rows = (*train_rows[:2], in_sample)
        test_rows = (test_predictions, test_dataset.targets, in_sample)

    label = f'{config.disease}/{city}'
    train_mase = _mase_or_nan(f'{label}: train', *train_rows[:2], history, m, train_rows[2])
    test_mase = _mase_or_nan(f'{label}: test', *test_rows[:2], history, m, test_rows[2])

    return EvalReport(
        city=city,
        disease=config.disease,
        criterion=str(criterion),
        k_neighbors=len(neighbors),
        algorithm=ensemble.params.algorithm,
        params=ensemble.params,
        anomalous=flag_anomalous(split.train, split.test, config.z_threshold),
        train_mae=train_mae * split.scale,
        train_mase=train_mase,
        test_mae=test_mae * split.scale,
        test_mase=test_mase,
        scale=split.scale,
        cv_mae=cv_mae,
        neighbors=tuple(neighbors),
    )


def _mean_std(values: Iterable[float]) -> Tuple[float, float]:
    finite = sorted(v for v in values if not math.isnan(v))
    if not finite:
        return math.nan, math.nan
    array = np.asarray(finite)
    return float(array.mean()), float(array.std())


def aggregate(
    reports: Sequence[EvalReport], stratify: bool = True, normal_stratum: str = STRATUM_NORMAL,
) -> List[SummaryRow]:
    """Mean and population std of MASE per (disease, algorithm, criterion, k, stratum)"""
    groups: Dict[tuple, List[EvalReport]] = defaultdict(list)
    for report in reports:
        key = (report.disease, report.algorithm, report.criterion, report.k_neighbors)
        groups[(*key, STRATUM_ALL)].append(report)
        if stratify and not report.anomalous:
            groups[(*key, normal_stratum)].append(report)

    rows = []
    for key in sorted(groups):
        members = groups[key]
        test_mean, test_std = _mean_std(r.test_mase for r in members)
        train_mean, train_std = _mean_std(r.train_mase for r in members)
        disease, algorithm, criterion, k, stratum = key
        rows.append(SummaryRow(
            disease=disease,
            algorithm=algorithm,
            criterion=criterion,
            k_neighbors=k,
            anomaly_stratum=stratum,
            mean_mase=test_mean,
            std_mase=test_std,
            n_cities=len(members),
            train_mean_mase=train_mean,
            train_std_mase=train_std,
        ))
    return rows


def best_baseline_algorithm(reports: Sequence[EvalReport], algorithms: Sequence[str]) -> Optional[str]:
    """Algorithm with the lowest mean baseline test MASE on non-anomalous cities"""
    baseline = [r for r in reports if r.criterion == 'none']
    for pool in ([r for r in baseline if not r.anomalous], baseline):
        scores = {}
        for algorithm in algorithms:
            mean, _ = _mean_std(r.test_mase for r in pool if r.algorithm == algorithm)
            if not math.isnan(mean):
                scores[algorithm] = mean
        if scores:
            return min(algorithms, key=lambda a: (scores.get(a, math.inf), list(algorithms).index(a)))
    return None
