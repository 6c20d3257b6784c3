"""
Synthetic traveling-wave cohorts.

Cities sit on a line of longitudes; city ``i`` sees the same seasonal pulse
train ``i`` weeks after city 0, with multiplicative noise. The season that
falls in the hold-out window starts a few weeks after the train/test cut so
that every city's last pulse is observed in the test window.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from .ingest import CASES_COLUMNS, CITIES_COLUMNS, GDP_COLUMNS
from .preprocess import DiseaseConfig
from .weeks import EpiWeek

logger = logging.getLogger(__name__)

SEASON_WEEKS = 52
BACKGROUND = 10.0


@dataclass(frozen=True)
class SyntheticCohort:
    disease: str
    cases: pd.DataFrame
    cities: pd.DataFrame
    gdp: pd.DataFrame
    start_week: EpiWeek
    n_train: int
    n_test: int
    gdp_years: Tuple[int, int]

    @property
    def train_range(self) -> Tuple[EpiWeek, EpiWeek]:
        return self.start_week, self.start_week + (self.n_train - 1)

    @property
    def test_range(self) -> Tuple[EpiWeek, EpiWeek]:
        first = self.start_week + self.n_train
        return first, first + (self.n_test - 1)

    def disease_config(self, **overrides) -> DiseaseConfig:
        return DiseaseConfig(
            disease=self.disease,
            train_range=self.train_range,
            test_range=self.test_range,
            gdp_years=self.gdp_years,
            **overrides,
        )

    def values(self, city: str) -> np.ndarray:
        rows = self.cases[self.cases['city_id'] == city]
        return rows['cases'].to_numpy(dtype=float)


def city_id(index: int, n_cities: int) -> str:
    return f'c{index:0{max(2, len(str(n_cities - 1)))}d}'


def _pulse_train(
    last_center: float, amplitude: float, width: float,
    amplitude_jitter: float, timing_jitter: int, rng: np.random.Generator,
):
    """Season centers and heights, newest season last"""
    centers, heights = [], []
    center = last_center
    while center > -3 * width:
        centers.append(center + rng.integers(-timing_jitter, timing_jitter + 1) if timing_jitter else center)
        heights.append(amplitude * (1 + rng.uniform(-amplitude_jitter, amplitude_jitter)))
        center -= SEASON_WEEKS
    return np.asarray(centers[::-1], dtype=float), np.asarray(heights[::-1], dtype=float)


def _spike(values: np.ndarray, n_train: int, sigmas: float) -> None:
    train = values[:n_train]
    mu, sigma = train.mean(), train.std()
    values[n_train + (len(values) - n_train) // 2] = math.ceil(mu + sigmas * sigma)


def traveling_wave(
    n_cities: int = 20,
    n_train: int = 150,
    n_test: int = 30,
    seed: int = 0,
    noise: float = 0.1,
    amplitude: float = 500.0,
    pulse_width: float = 3.0,
    amplitude_jitter: float = 0.5,
    timing_jitter: int = 3,
    spike_cities: Iterable[str] = (),
    spike_sigmas: float = 6.0,
    disease: str = 'synthetic',
    start: str = '2015-W01',
) -> SyntheticCohort:
    """City ``i``'s weekly counts are the shared pulse train delayed by ``i`` weeks.

    Cities listed in ``spike_cities`` get one hold-out week raised to
    ``spike_sigmas`` training standard deviations above the training mean.
    """
    rng = np.random.default_rng(seed)
    n_weeks = n_train + n_test
    start_week = EpiWeek.parse(start)
    centers, heights = _pulse_train(
        n_train + 5, amplitude, pulse_width, amplitude_jitter, timing_jitter, rng
    )
    spike_cities = set(spike_cities)

    weeks = np.arange(n_weeks)
    tokens = [str(start_week + t) for t in weeks]
    first_year = start_week.monday.isocalendar()[0]
    gdp_years = (first_year, first_year + 3)

    case_rows, city_rows, gdp_rows = [], [], []
    for index in range(n_cities):
        city = city_id(index, n_cities)
        shifted = weeks[:, None] - index - centers[None, :]
        clean = BACKGROUND + (heights[None, :] * np.exp(-0.5 * (shifted / pulse_width) ** 2)).sum(axis=1)
        observed = np.maximum(0.0, np.round(clean * (1 + noise * rng.standard_normal(n_weeks))))
        if city in spike_cities:
            _spike(observed, n_train, spike_sigmas)

        case_rows.extend(
            {'city_id': city, 'epi_week': token, 'cases': int(value)}
            for token, value in zip(tokens, observed)
        )
        city_rows.append({
            'city_id': city,
            'name': f'Synthetic {index}',
            'latitude': -15.0,
            'longitude': round(-50.0 + 0.25 * index, 4),
        })
        level = rng.uniform(8000, 40000)
        growth = rng.uniform(-0.02, 0.06)
        for offset, year in enumerate(range(gdp_years[0], gdp_years[1] + 1)):
            gdp_rows.append({
                'city_id': city,
                'year': year,
                'gdp_per_capita': round(level * (1 + growth) ** offset, 2),
            })

    return SyntheticCohort(
        disease=disease,
        cases=pd.DataFrame(case_rows, columns=CASES_COLUMNS),
        cities=pd.DataFrame(city_rows, columns=CITIES_COLUMNS),
        gdp=pd.DataFrame(gdp_rows, columns=GDP_COLUMNS),
        start_week=start_week,
        n_train=n_train,
        n_test=n_test,
        gdp_years=gdp_years,
    )


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return '[' + ', '.join(_toml_value(v) for v in value) + ']'
    return '"' + str(value).replace('\\', '\\\\').replace('"', '\\"') + '"'


def _toml_table(name: str, values: Mapping[str, Any]) -> str:
    lines = [f'[{name}]'] + [f'{key} = {_toml_value(value)}' for key, value in values.items()]
    return '\n'.join(lines) + '\n'


SMALL_GRIDS: Dict[str, Dict[str, Any]] = {
    'random_forest': {'n_trees': [10], 'max_depth': [4, 'none'], 'split_criterion': 'mse'},
    'gradient_boosting': {'n_trees': [20], 'max_depth': [2], 'learning_rate': [0.1], 'split_criterion': 'mse'},
}


def write_snapshot(
    cohort: SyntheticCohort,
    directory,
    experiment: Optional[Mapping[str, Any]] = None,
    grids: Optional[Mapping[str, Mapping[str, Any]]] = None,
    disease: Optional[Mapping[str, Any]] = None,
) -> Path:
    """Write the three CSV snapshots and a matching TOML config; returns the TOML path.

    ``disease`` adds keys such as seasonal_m or z_threshold to the disease table.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    cases_name = f'{cohort.disease}_cases.csv'
    cohort.cases.to_csv(directory / cases_name, index=False, lineterminator='\n')
    cohort.cities.to_csv(directory / 'cities.csv', index=False, lineterminator='\n')
    cohort.gdp.to_csv(directory / 'gdp.csv', index=False, lineterminator='\n')

    train_start, train_end = cohort.train_range
    test_start, test_end = cohort.test_range
    experiment = dict(experiment or {
        'criteria': ['none', 'geographic', 'gdp_dtw', 'cases_dtw'],
        'k_values': [1, 2, 3],
    })
    grids = SMALL_GRIDS if grids is None else grids

    sections = [
        _toml_table('data', {'cities': 'cities.csv', 'gdp': 'gdp.csv'}),
        _toml_table(f'diseases.{cohort.disease}', {
            'cases': cases_name,
            'train_start': str(train_start),
            'train_end': str(train_end),
            'test_start': str(test_start),
            'test_end': str(test_end),
            'gdp_start': cohort.gdp_years[0],
            'gdp_end': cohort.gdp_years[1],
            **(disease or {}),
        }),
        _toml_table('experiment', experiment),
    ]
    sections.extend(_toml_table(f'grids.{algorithm}', table) for algorithm, table in grids.items())

    config_path = directory / 'wavecast.toml'
    config_path.write_text('\n'.join(sections), encoding='utf-8')
    logger.info(f'Wrote synthetic {cohort.disease} snapshot of {len(cohort.cities)} cities to {directory}')
    return config_path
