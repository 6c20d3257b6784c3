"""
CSV snapshot ingestion: weekly case counts, city coordinates and GDP per capita.

Row problems are collected the way a bulk import collects them (one entry per
offending line, header counted as line 1) and raised together, so a broken
snapshot is reported in one pass.
"""
import logging
import re
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Mapping, Tuple

import pandas as pd

from .exceptions import CohortError, IngestError
from .weeks import EpiWeek, weeks_between

if TYPE_CHECKING:
    from .preprocess import DiseaseConfig

logger = logging.getLogger(__name__)

CityId = str

CASES_COLUMNS = ['city_id', 'epi_week', 'cases']
CITIES_COLUMNS = ['city_id', 'name', 'latitude', 'longitude']
GDP_COLUMNS = ['city_id', 'year', 'gdp_per_capita']

_INTEGER = re.compile(r'^[+-]?\d+$')


@dataclass(frozen=True)
class WeeklySeries:
    city: CityId
    disease: str
    start_week: EpiWeek
    values: Tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise IngestError(f'empty series for city {self.city}')

    @property
    def end_week(self) -> EpiWeek:
        return self.start_week + (len(self.values) - 1)

    def covers(self, start: EpiWeek, end: EpiWeek) -> bool:
        return self.start_week <= start and self.end_week >= end

    def window(self, start: EpiWeek, end: EpiWeek) -> Tuple[float, ...]:
        """Values for the inclusive week range start..end"""
        if not self.covers(start, end):
            raise IngestError(
                f'series for city {self.city} ({self.start_week}..{self.end_week}) '
                f'does not cover {start}..{end}'
            )
        offset = start - self.start_week
        return self.values[offset:offset + weeks_between(start, end)]


@dataclass(frozen=True)
class CityMeta:
    city: CityId
    latitude: float
    longitude: float
    gdp_per_capita: Mapping[int, float] = field(default_factory=dict)
    name: str = ''

    def gdp_series(self, first_year: int, last_year: int) -> List[float]:
        return [self.gdp_per_capita[year] for year in range(first_year, last_year + 1)]


@dataclass(frozen=True)
class Cohort:
    disease: str
    start_week: EpiWeek
    series: Dict[CityId, WeeklySeries]
    meta: Dict[CityId, CityMeta]
    gdp_years: Tuple[int, int]

    @property
    def cities(self) -> List[CityId]:
        return sorted(self.series)

    def __len__(self) -> int:
        return len(self.series)


def _read_snapshot(path, required_columns: List[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.is_file():
        raise IngestError('file not found', path=str(path))
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except (pd.errors.ParserError, UnicodeDecodeError, pd.errors.EmptyDataError) as exc:
        raise IngestError(f'unreadable CSV: {exc}', path=str(path)) from exc

    df.columns = [str(col).strip() for col in df.columns]
    missing_columns = [col for col in required_columns if col not in df.columns]
    if missing_columns:
        raise IngestError(
            f'missing required columns: {", ".join(missing_columns)} '
            f'(expected header {",".join(required_columns)})',
            line=1,
            path=str(path),
        )
    return df


def _raise_collected(errors: List[Dict], path) -> None:
    if not errors:
        return
    first = errors[0]
    extra = f' (+{len(errors) - 1} more)' if len(errors) > 1 else ''
    for error in errors[1:]:
        logger.error(f'{path}: line {error["row"]}: {error["error"]}')
    raise IngestError(f'{first["error"]}{extra}', line=first['row'], path=str(path))


def load_case_series(path, disease: str) -> List[WeeklySeries]:
    """Load one disease's weekly counts, one series per city, sorted by city id.

    Weeks missing inside a city's observed range are filled with 0.
    """
    df = _read_snapshot(path, CASES_COLUMNS)

    observed: Dict[CityId, Dict[EpiWeek, int]] = defaultdict(dict)
    errors = []

    for index, row in df.iterrows():
        line = index + 2  # header is line 1
        try:
            city = str(row['city_id']).strip()
            if not city:
                raise ValueError('empty city_id')
            week = EpiWeek.parse(row['epi_week'])
            token = str(row['cases']).strip()
            if not _INTEGER.match(token):
                raise ValueError(f'non-integer cases value {token!r}')
            cases = int(token)
            if cases < 0:
                raise ValueError('negative case count')
            if week in observed[city]:
                raise ValueError(f'duplicate (city, week) pair ({city}, {week})')
            observed[city][week] = cases
        except ValueError as e:
            errors.append({'row': line, 'city_id': str(row.get('city_id', '')), 'error': str(e)})

    _raise_collected(errors, path)

    series = []
    for city in sorted(observed):
        weeks = observed[city]
        start, end = min(weeks), max(weeks)
        values = tuple(weeks.get(start + offset, 0) for offset in range(weeks_between(start, end)))
        gaps = weeks_between(start, end) - len(weeks)
        if gaps:
            logger.debug(f'{disease}: city {city} has {gaps} unreported weeks, filled with 0')
        series.append(WeeklySeries(city=city, disease=disease, start_week=start, values=values))

    logger.info(f'Loaded {len(series)} {disease} case series from {path}')
    return series


def load_city_meta(cities_path, gdp_path) -> Dict[CityId, CityMeta]:
    """Join the cities snapshot with the yearly GDP-per-capita snapshot"""
    cities_df = _read_snapshot(cities_path, CITIES_COLUMNS)

    errors = []
    coordinates = {}
    for index, row in cities_df.iterrows():
        line = index + 2
        try:
            city = str(row['city_id']).strip()
            if not city:
                raise ValueError('empty city_id')
            if city in coordinates:
                raise ValueError(f'duplicate city_id {city}')
            latitude = float(row['latitude'])
            longitude = float(row['longitude'])
            if not -90.0 <= latitude <= 90.0:
                raise ValueError(f'latitude {latitude} out of range [-90, 90]')
            if not -180.0 <= longitude <= 180.0:
                raise ValueError(f'longitude {longitude} out of range [-180, 180]')
            coordinates[city] = (str(row['name']).strip(), latitude, longitude)
        except ValueError as e:
            errors.append({'row': line, 'city_id': str(row.get('city_id', '')), 'error': str(e)})

    _raise_collected(errors, cities_path)

    gdp_df = _read_snapshot(gdp_path, GDP_COLUMNS)
    gdp: Dict[CityId, Dict[int, float]] = defaultdict(dict)
    skipped = 0
    for index, row in gdp_df.iterrows():
        line = index + 2
        try:
            city = str(row['city_id']).strip()
            if city not in coordinates:
                logger.warning(f'{gdp_path}: line {line}: city {city!r} not in cities file, row skipped')
                skipped += 1
                continue
            year_token = str(row['year']).strip()
            if not _INTEGER.match(year_token):
                raise ValueError(f'bad year {year_token!r}')
            year = int(year_token)
            value = float(row['gdp_per_capita'])
            if not value > 0:
                raise ValueError(f'gdp_per_capita must be positive, got {value}')
            if year in gdp[city]:
                raise ValueError(f'duplicate (city, year) pair ({city}, {year})')
            gdp[city][year] = value
        except ValueError as e:
            errors.append({'row': line, 'city_id': str(row.get('city_id', '')), 'error': str(e)})

    _raise_collected(errors, gdp_path)

    meta = {
        city: CityMeta(
            city=city,
            name=name,
            latitude=latitude,
            longitude=longitude,
            gdp_per_capita=dict(sorted(gdp.get(city, {}).items())),
        )
        for city, (name, latitude, longitude) in sorted(coordinates.items())
    }
    logger.info(f'Loaded metadata for {len(meta)} cities ({skipped} GDP rows skipped)')
    return meta


def build_cohort(series: List[WeeklySeries], meta: Mapping[CityId, CityMeta], config: 'DiseaseConfig') -> Cohort:
    """Keep the cities with full-range case data, coordinates and every GDP year"""
    start, end = config.full_range
    first_year, last_year = config.gdp_years

    kept_series: Dict[CityId, WeeklySeries] = {}
    kept_meta: Dict[CityId, CityMeta] = {}
    dropped: Dict[str, int] = defaultdict(int)

    for item in sorted(series, key=lambda s: s.city):
        city = item.city
        if not item.covers(start, end):
            logger.info(
                f'{config.disease}: dropping city {city}: cases cover '
                f'{item.start_week}..{item.end_week}, need {start}..{end}'
            )
            dropped['incomplete case range'] += 1
            continue
        city_meta = meta.get(city)
        if city_meta is None:
            logger.info(f'{config.disease}: dropping city {city}: no coordinates')
            dropped['no coordinates'] += 1
            continue
        missing_years = [
            year for year in range(first_year, last_year + 1) if year not in city_meta.gdp_per_capita
        ]
        if missing_years:
            logger.info(f'{config.disease}: dropping city {city}: no GDP for {missing_years}')
            dropped['missing GDP years'] += 1
            continue
        kept_series[city] = WeeklySeries(
            city=city, disease=item.disease, start_week=start, values=item.window(start, end)
        )
        kept_meta[city] = city_meta

    if not kept_series:
        raise CohortError(
            f'no city satisfies cohort criteria for {config.disease} '
            f'({len(series)} candidates; dropped: {dict(dropped)})'
        )

    if dropped:
        logger.warning(f'{config.disease}: dropped cities by reason: {dict(dropped)}')
    logger.info(f'{config.disease}: cohort of {len(kept_series)} cities')
    return Cohort(
        disease=config.disease,
        start_week=start,
        series=kept_series,
        meta=kept_meta,
        gdp_years=config.gdp_years,
    )
