"""
Neighbor-lag feature augmentation.

A target row at week t gets the target's own lags followed by the same lags
of each selected neighbor, all taken from train+test history so the first
test rows can reach back into training weeks.
"""
from typing import List, Mapping, Sequence, Tuple

import numpy as np

from .exceptions import AlignmentError, InsufficientHistory
from .ingest import CityId
from .preprocess import DiseaseConfig, SplitSeries, SupervisedDataset, lag_labels, lag_windows


def _stacked(
    sources: List[CityId],
    histories: Mapping[CityId, np.ndarray],
    row_weeks: np.ndarray,
    targets: np.ndarray,
    lags: int,
    horizon: int,
) -> SupervisedDataset:
    blocks = [lag_windows(histories[source], lags, horizon, row_weeks) for source in sources]
    labels = tuple(label for source in sources for label in lag_labels(source, lags))
    return SupervisedDataset(
        feature_matrix=np.hstack(blocks) if blocks else np.empty((len(row_weeks), 0)),
        targets=targets,
        column_labels=labels,
        row_weeks=row_weeks,
    )


def augment_dataset(
    target_city: CityId,
    splits: Mapping[CityId, SplitSeries],
    neighbors: Sequence[CityId],
    config: DiseaseConfig,
) -> Tuple[SupervisedDataset, SupervisedDataset]:
    """Train and test datasets for ``target_city`` with neighbor lag columns appended"""
    neighbors = list(neighbors)
    if target_city in neighbors:
        raise AlignmentError(f'{target_city} cannot be its own neighbor')
    if len(set(neighbors)) != len(neighbors):
        raise AlignmentError(f'duplicate neighbors for {target_city}: {neighbors}')

    target = splits[target_city]
    n_train, n_test = len(target.train), len(target.test)
    for city in neighbors:
        other = splits[city]
        if len(other.train) != n_train or len(other.test) != n_test:
            raise AlignmentError(
                f'neighbor {city} spans {len(other.train)}+{len(other.test)} weeks, '
                f'target {target_city} spans {n_train}+{n_test}'
            )

    lags, horizon = config.lags, config.horizon
    first_row = lags + horizon - 1
    if n_train <= first_row:
        raise InsufficientHistory(
            f'insufficient history: {n_train} training weeks for {lags} lags and horizon {horizon}'
        )

    sources = [target_city] + neighbors
    histories = {city: splits[city].history for city in sources}
    history = histories[target_city]

    train_weeks = np.arange(first_row, n_train)
    test_weeks = np.arange(n_train, n_train + n_test)

    train_dataset = _stacked(sources, histories, train_weeks, history[train_weeks], lags, horizon)
    test_dataset = _stacked(sources, histories, test_weeks, history[test_weeks], lags, horizon)
    return train_dataset, test_dataset
