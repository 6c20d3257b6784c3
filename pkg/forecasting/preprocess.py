"""
Date splitting, train-max normalization, lag windows, anomaly flags and
descriptive statistics.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import ConfigError, InsufficientHistory
from .ingest import CityId, Cohort, WeeklySeries
from .weeks import EpiWeek, weeks_between

logger = logging.getLogger(__name__)

SELF = 'self'


@dataclass(frozen=True)
class DiseaseConfig:
    disease: str
    train_range: Tuple[EpiWeek, EpiWeek]
    test_range: Tuple[EpiWeek, EpiWeek]
    gdp_years: Tuple[int, int]
    lags: int = 5
    horizon: int = 1
    seasonal_m: Optional[int] = None
    z_threshold: float = 4.0

    def __post_init__(self):
        if self.seasonal_m is None:
            object.__setattr__(self, 'seasonal_m', self.horizon)
        train_start, train_end = self.train_range
        test_start, test_end = self.test_range
        if train_end < train_start or test_end < test_start:
            raise ConfigError(f'{self.disease}: empty train or test range')
        if not train_end < test_start:
            raise ConfigError(f'{self.disease}: train/test ranges overlap')
        if self.lags < 1:
            raise ConfigError(f'{self.disease}: lags must be >= 1')
        if self.horizon < 1:
            raise ConfigError(f'{self.disease}: horizon must be >= 1')
        if self.seasonal_m < 1:
            raise ConfigError(f'{self.disease}: seasonal_m must be >= 1')
        if not self.z_threshold > 0:
            raise ConfigError(f'{self.disease}: z_threshold must be > 0')
        if self.gdp_years[1] < self.gdp_years[0]:
            raise ConfigError(f'{self.disease}: empty GDP year range')

    @property
    def full_range(self) -> Tuple[EpiWeek, EpiWeek]:
        return self.train_range[0], self.test_range[1]

    @property
    def n_train(self) -> int:
        return weeks_between(*self.train_range)

    @property
    def n_test(self) -> int:
        return weeks_between(*self.test_range)


@dataclass(frozen=True)
class SplitSeries:
    train: np.ndarray
    test: np.ndarray
    scale: float

    @property
    def history(self) -> np.ndarray:
        """Train followed by test, the observed series the test rows reach back into"""
        return np.concatenate([self.train, self.test])


@dataclass(frozen=True)
class SupervisedDataset:
    feature_matrix: np.ndarray
    targets: np.ndarray
    column_labels: Tuple[Tuple[CityId, int], ...]
    row_weeks: np.ndarray

    def __post_init__(self):
        n_rows = self.feature_matrix.shape[0]
        if not (n_rows == len(self.targets) == len(self.row_weeks)):
            raise ValueError('feature rows, targets and row weeks differ in length')
        if self.feature_matrix.ndim != 2 or self.feature_matrix.shape[1] != len(self.column_labels):
            raise ValueError('column labels do not match feature columns')

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def n_features(self) -> int:
        return self.feature_matrix.shape[1]

    def take(self, rows) -> 'SupervisedDataset':
        return SupervisedDataset(
            feature_matrix=self.feature_matrix[rows],
            targets=self.targets[rows],
            column_labels=self.column_labels,
            row_weeks=self.row_weeks[rows],
        )


@dataclass(frozen=True)
class SeriesStats:
    mean: float
    std: float
    max: float
    skewness: float


def split_and_normalize(series: WeeklySeries, config: DiseaseConfig) -> SplitSeries:
    """Cut the train and test windows and divide both by the training maximum"""
    train = np.asarray(series.window(*config.train_range), dtype=float)
    test = np.asarray(series.window(*config.test_range), dtype=float)
    peak = float(train.max())
    scale = peak if peak > 0 else 1.0
    return SplitSeries(train=train / scale, test=test / scale, scale=scale)


def lag_windows(values: np.ndarray, lags: int, horizon: int, targets: Sequence[int]) -> np.ndarray:
    """Rows of (y[t-h-L+1], ..., y[t-h]) for each target index t, oldest first"""
    targets = np.asarray(targets, dtype=int)
    offsets = np.arange(-(horizon + lags - 1), -horizon + 1)
    if len(targets) == 0:
        return np.empty((0, lags))
    return np.asarray(values, dtype=float)[targets[:, None] + offsets[None, :]]


def lag_labels(source: CityId, lags: int) -> List[Tuple[CityId, int]]:
    return [(source, lag) for lag in range(lags, 0, -1)]


def make_lag_dataset(values: Sequence[float], lags: int, horizon: int, source: CityId = SELF) -> SupervisedDataset:
    values = np.asarray(values, dtype=float)
    if lags < 1 or horizon < 1:
        raise InsufficientHistory('lags and horizon must be >= 1')
    if len(values) < lags + horizon:
        raise InsufficientHistory(
            f'insufficient history: {len(values)} values for {lags} lags and horizon {horizon}'
        )
    row_weeks = np.arange(lags + horizon - 1, len(values))
    return SupervisedDataset(
        feature_matrix=lag_windows(values, lags, horizon, row_weeks),
        targets=values[row_weeks],
        column_labels=tuple(lag_labels(source, lags)),
        row_weeks=row_weeks,
    )


def flag_anomalous(train: Sequence[float], test: Sequence[float], z_threshold: float) -> bool:
    """True when a test value sits more than ``z_threshold`` training sigmas above the training mean"""
    train = np.asarray(train, dtype=float)
    test = np.asarray(test, dtype=float)
    if train.size == 0:
        raise InsufficientHistory('cannot score anomalies against an empty training segment')
    mu = train.mean()
    sigma = train.std()
    if test.size == 0:
        return False
    if sigma == 0:
        return bool(np.any(test != mu))
    return bool(np.any((test - mu) / sigma > z_threshold))


def series_stats(values: Sequence[float]) -> SeriesStats:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise InsufficientHistory('statistics of an empty series')
    mean = values.mean()
    centered = values - mean
    m2 = np.mean(centered ** 2)
    m3 = np.mean(centered ** 3)
    skewness = float(m3 / m2 ** 1.5) if m2 > 0 else 0.0
    return SeriesStats(mean=float(mean), std=float(np.sqrt(m2)), max=float(values.max()), skewness=skewness)


@dataclass(frozen=True)
class CohortStats:
    disease: str
    n_cities: int
    mean: float
    std: float
    max: float
    skewness_mean: float
    skewness_std: float


def describe_cohort(cohort: Cohort) -> CohortStats:
    """Pooled raw-count statistics plus the spread of per-city skewness"""
    per_city = [np.asarray(cohort.series[city].values, dtype=float) for city in cohort.cities]
    pooled = series_stats(np.concatenate(per_city))
    skews = np.array([series_stats(values).skewness for values in per_city])
    return CohortStats(
        disease=cohort.disease,
        n_cities=len(per_city),
        mean=pooled.mean,
        std=pooled.std,
        max=pooled.max,
        skewness_mean=float(skews.mean()),
        skewness_std=float(skews.std()),
    )
