"""
Expanding-window cross-validation and exhaustive hyperparameter search.
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np

from ..evaluation import mae
from ..exceptions import InsufficientHistory, ModelError
from ..preprocess import SupervisedDataset
from .ensembles import fit_ensemble, predict
from .params import HyperParams

logger = logging.getLogger(__name__)

DEFAULT_SPLITS = 4


def cv_splits(n_rows: int, n_splits: int = DEFAULT_SPLITS) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Time-ordered folds: the row range is cut into n_splits + 1 contiguous chunks
    and fold i validates on chunk i + 1 after training on everything before it.
    """
    if n_splits < 1:
        raise ModelError('n_splits must be >= 1')
    if n_rows < n_splits + 1:
        raise InsufficientHistory(f'{n_rows} rows cannot feed {n_splits} time-series splits')
    chunks = np.array_split(np.arange(n_rows), n_splits + 1)
    return [(np.arange(chunk[0]), chunk) for chunk in chunks[1:]]


def cross_validated_mae(
    dataset: SupervisedDataset, params: HyperParams, seed: int, n_splits: int = DEFAULT_SPLITS
) -> float:
    errors = []
    for train_rows, validation_rows in cv_splits(len(dataset), n_splits):
        model = fit_ensemble(dataset.take(train_rows), params, seed)
        held_out = dataset.take(validation_rows)
        errors.append(mae(predict(model, held_out.feature_matrix), held_out.targets))
    return float(np.mean(errors))


def grid_search(
    dataset: SupervisedDataset,
    grid: Sequence[HyperParams],
    seed: int,
    n_splits: int = DEFAULT_SPLITS,
) -> Tuple[HyperParams, float]:
    """Candidate with the lowest mean validation MAE; the earlier candidate wins ties"""
    if not grid:
        raise ModelError('empty hyperparameter grid')

    best, best_score = None, np.inf
    for params in grid:
        score = cross_validated_mae(dataset, params, seed, n_splits)
        logger.debug(f'cv mae {score:.6g} for {params.to_json()}')
        if best is None or score < best_score:
            best, best_score = params, score
    return best, float(best_score)
