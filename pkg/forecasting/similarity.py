"""
Related-city ranking by geographic distance or DTW similarity.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from .exceptions import ModelError
from .ingest import CityId, CityMeta, Cohort
from .preprocess import SplitSeries

logger = logging.getLogger(__name__)

MAX_NEIGHBORS = 3
EARTH_RADIUS_KM = 6371.0088


class Criterion(str, Enum):
    NONE = 'none'
    GEOGRAPHIC = 'geographic'
    GDP_DTW = 'gdp_dtw'
    CASES_DTW = 'cases_dtw'

    @classmethod
    def parse(cls, value: str) -> 'Criterion':
        aliases = {'geo': cls.GEOGRAPHIC, 'gdp': cls.GDP_DTW, 'cases': cls.CASES_DTW}
        token = str(value).strip().lower()
        if token in aliases:
            return aliases[token]
        try:
            return cls(token)
        except ValueError:
            raise ValueError(
                f'unknown criterion {value!r}; expected one of '
                f'{", ".join(c.value for c in cls)} (or geo, gdp, cases)'
            ) from None

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class NeighborRanking:
    target: CityId
    ordered: Tuple[Tuple[CityId, float], ...]

    @property
    def cities(self) -> List[CityId]:
        return [city for city, _ in self.ordered]


def geo_distance(a: CityMeta, b: CityMeta) -> float:
    """Euclidean distance in degree space"""
    return math.hypot(a.latitude - b.latitude, a.longitude - b.longitude)


def haversine_distance(a: CityMeta, b: CityMeta) -> float:
    """Great-circle distance in kilometres"""
    lat1, lat2 = math.radians(a.latitude), math.radians(b.latitude)
    dlat = lat2 - lat1
    dlon = math.radians(b.longitude - a.longitude)
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def dtw_distance(p: Sequence[float], q: Sequence[float]) -> float:
    """Minimum summed |p_i - q_j| over monotone warping paths from (1, 1) to (n, m).

    Accumulated costs are filled one anti-diagonal at a time; every cell on a
    diagonal depends only on the two previous diagonals.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    n, m = len(p), len(q)
    if n == 0 or m == 0:
        raise ValueError('DTW needs two non-empty series')

    cost = np.abs(p[:, None] - q[None, :])
    acc = np.full((n + 1, m + 1), np.inf)
    acc[0, 0] = 0.0

    for d in range(2, n + m + 1):
        i = np.arange(max(1, d - m), min(n, d - 1) + 1)
        j = d - i
        acc[i, j] = cost[i - 1, j - 1] + np.minimum(
            np.minimum(acc[i - 1, j - 1], acc[i - 1, j]),  # match, insertion
            acc[i, j - 1],  # deletion
        )

    return float(acc[n, m])


def _distance_function(
    cohort: Cohort,
    criterion: Criterion,
    splits: Mapping[CityId, SplitSeries],
    geo_metric: str = 'euclidean',
    gdp_normalize: bool = False,
):
    if criterion == Criterion.GEOGRAPHIC:
        if geo_metric == 'haversine':
            return lambda a, b: haversine_distance(cohort.meta[a], cohort.meta[b])
        if geo_metric != 'euclidean':
            raise ValueError(f'unknown geo metric {geo_metric!r}')
        return lambda a, b: geo_distance(cohort.meta[a], cohort.meta[b])

    if criterion == Criterion.GDP_DTW:
        first_year, last_year = cohort.gdp_years
        sequences = {}
        for city, meta in cohort.meta.items():
            values = np.asarray(meta.gdp_series(first_year, last_year), dtype=float)
            if gdp_normalize:
                values = values / values.max()
            sequences[city] = values
        return lambda a, b: dtw_distance(sequences[a], sequences[b])

    if criterion == Criterion.CASES_DTW:
        return lambda a, b: dtw_distance(splits[a].train, splits[b].train)

    raise ModelError('criterion none has no neighbors; skip augmentation instead')


def _ranking(target: CityId, distances: Mapping[CityId, float]) -> NeighborRanking:
    ordered = sorted(distances.items(), key=lambda item: (item[1], item[0]))
    return NeighborRanking(target=target, ordered=tuple((city, float(dist)) for city, dist in ordered))


def rank_neighbors(
    target: CityId,
    cohort: Cohort,
    criterion: Criterion,
    splits: Mapping[CityId, SplitSeries],
    geo_metric: str = 'euclidean',
    gdp_normalize: bool = False,
) -> NeighborRanking:
    """Every other cohort city ordered by ascending distance, ties by city id"""
    if target not in cohort.series:
        raise ModelError(f'target {target} is not in the cohort')
    distance = _distance_function(cohort, Criterion(criterion), splits, geo_metric, gdp_normalize)
    distances = {city: distance(target, city) for city in cohort.cities if city != target}
    return _ranking(target, distances)


def _distance_rows(
    cohort: Cohort,
    criterion: Criterion,
    splits: Mapping[CityId, SplitSeries],
    geo_metric: str,
    gdp_normalize: bool,
    row_indices: Sequence[int],
) -> List[Tuple[int, List[float]]]:
    """Distances from cities[i] to every later city, for each i in row_indices"""
    distance = _distance_function(cohort, criterion, splits, geo_metric, gdp_normalize)
    cities = cohort.cities
    return [(i, [distance(cities[i], b) for b in cities[i + 1:]]) for i in row_indices]


def rank_all(
    cohort: Cohort,
    criterion: Criterion,
    splits: Mapping[CityId, SplitSeries],
    geo_metric: str = 'euclidean',
    gdp_normalize: bool = False,
    jobs: int = 1,
) -> Dict[CityId, NeighborRanking]:
    """Rankings for every cohort city, computing each unordered pair once.

    With ``jobs > 1`` the rows of the pairwise table are dealt round-robin to
    worker processes; the values do not depend on the worker count.
    """
    criterion = Criterion(criterion)
    cities = cohort.cities
    args = (cohort, criterion, splits, geo_metric, gdp_normalize)
    if jobs > 1 and len(cities) > 2:
        blocks = [range(j, len(cities), jobs) for j in range(min(jobs, len(cities)))]
        rows = [
            row
            for block in Parallel(n_jobs=jobs, prefer='processes')(
                delayed(_distance_rows)(*args, block) for block in blocks
            )
            for row in block
        ]
    else:
        rows = _distance_rows(*args, range(len(cities)))

    table: Dict[CityId, Dict[CityId, float]] = {city: {} for city in cities}
    for index, values in rows:
        a = cities[index]
        for b, value in zip(cities[index + 1:], values):
            table[a][b] = value
            table[b][a] = value
    logger.info(f'{cohort.disease}: {criterion} distances for {len(cities)} cities computed')
    return {city: _ranking(city, table[city]) for city in cities}


def top_k(ranking: NeighborRanking, k: int) -> List[CityId]:
    if not 0 <= k <= MAX_NEIGHBORS:
        raise ModelError(f'k must be in [0, {MAX_NEIGHBORS}], got {k}')
    if k > len(ranking.ordered):
        raise ModelError(
            f'insufficient neighbor candidates for {ranking.target}: '
            f'{len(ranking.ordered)} available, {k} requested'
        )
    return ranking.cities[:k]
