"""
Random forests and gradient-boosted trees.

Tree ``i`` of an ensemble fitted with seed ``s`` draws everything from
``default_rng([s, i])``, so trees can be grown in any order or in parallel
and still come out identical.
"""
import logging
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from ..exceptions import ModelError
from ..preprocess import SupervisedDataset
from .params import GRADIENT_BOOSTING, RANDOM_FOREST, HyperParams
from .trees import RegressionTree, grow_tree

logger = logging.getLogger(__name__)


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(tree_index)])


@dataclass(frozen=True)
class TreeEnsemble:
    params: HyperParams
    trees: Tuple[RegressionTree, ...]
    base_value: float
    seed: int
    n_features: int

    def staged_predict(self, rows: np.ndarray) -> Iterator[np.ndarray]:
        """Boosted predictions after each stage, starting from the base value"""
        if self.params.algorithm != GRADIENT_BOOSTING:
            raise ModelError('staged predictions exist for gradient boosting only')
        rows = _checked_rows(self, rows)
        current = np.full(len(rows), self.base_value)
        yield current.copy()
        for tree in self.trees:
            current = current + self.params.learning_rate * tree.predict(rows)
            yield current.copy()

    def to_dict(self) -> dict:
        return {
            'params': self.params.to_dict(),
            'seed': self.seed,
            'n_features': self.n_features,
            'base_value': self.base_value,
            'trees': [tree.to_dict() for tree in self.trees],
        }


def _checked_rows(ensemble: TreeEnsemble, rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=float)
    if rows.size == 0:
        return rows.reshape(0, ensemble.n_features)
    if rows.ndim != 2 or rows.shape[1] != ensemble.n_features:
        raise ModelError(
            f'expected {ensemble.n_features} feature columns, got shape {rows.shape}'
        )
    return rows


def fit_random_forest(dataset: SupervisedDataset, params: HyperParams, seed: int) -> TreeEnsemble:
    if params.algorithm != RANDOM_FOREST:
        raise ModelError(f'expected random_forest params, got {params.algorithm}')
    if len(dataset) == 0:
        raise ModelError('cannot fit a forest on an empty dataset')

    X, y = dataset.feature_matrix, dataset.targets
    n_rows = len(y)
    n_split_features = params.n_split_features(dataset.n_features)
    trees = []
    for index in range(params.n_trees):
        rng = tree_rng(seed, index)
        sample = rng.integers(0, n_rows, size=n_rows) if params.bootstrap else np.arange(n_rows)
        trees.append(grow_tree(
            X[sample], y[sample],
            max_depth=params.max_depth,
            criterion=params.split_criterion,
            n_split_features=n_split_features,
            rng=rng,
        ))
    return TreeEnsemble(params=params, trees=tuple(trees), base_value=0.0, seed=seed, n_features=dataset.n_features)


def fit_gradient_boosting(dataset: SupervisedDataset, params: HyperParams, seed: int) -> TreeEnsemble:
    """Stagewise residual fitting with squared-error trees"""
    if params.algorithm != GRADIENT_BOOSTING:
        raise ModelError(f'expected gradient_boosting params, got {params.algorithm}')
    if len(dataset) == 0:
        raise ModelError('cannot fit a booster on an empty dataset')

    X, y = dataset.feature_matrix, dataset.targets
    base_value = float(np.mean(y))
    current = np.full(len(y), base_value)
    n_split_features = params.n_split_features(dataset.n_features)
    trees = []
    for index in range(params.n_trees):
        tree = grow_tree(
            X, y - current,
            max_depth=params.max_depth,
            criterion='mse',
            n_split_features=n_split_features,
            rng=tree_rng(seed, index),
        )
        current = current + params.learning_rate * tree.predict(X)
        trees.append(tree)
    return TreeEnsemble(params=params, trees=tuple(trees), base_value=base_value, seed=seed, n_features=dataset.n_features)


def fit_ensemble(dataset: SupervisedDataset, params: HyperParams, seed: int) -> TreeEnsemble:
    if params.algorithm == RANDOM_FOREST:
        return fit_random_forest(dataset, params, seed)
    return fit_gradient_boosting(dataset, params, seed)


def predict(ensemble: TreeEnsemble, rows) -> np.ndarray:
    rows = _checked_rows(ensemble, rows)
    if len(rows) == 0:
        return np.empty(0)
    outputs = np.array([tree.predict(rows) for tree in ensemble.trees]).reshape(len(ensemble.trees), len(rows))
    if ensemble.params.algorithm == RANDOM_FOREST:
        return outputs.mean(axis=0)
    return ensemble.base_value + ensemble.params.learning_rate * outputs.sum(axis=0)
