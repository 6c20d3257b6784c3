"""
Greedy binary regression trees.

A node is split on the candidate minimizing the summed child impurity:
absolute deviation about the child median under ``mae``, squared deviation
about the child mean under ``mse``. Candidate thresholds are midpoints of
consecutive distinct feature values; ties go to the lowest feature index,
then the lowest threshold.
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..exceptions import ModelError
from ..preprocess import SupervisedDataset
from .params import HyperParams

LEAF = -1


@dataclass(frozen=True)
class RegressionTree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        deepest = 0
        stack = [(0, 0)]
        while stack:
            node, depth = stack.pop()
            deepest = max(deepest, depth)
            if self.feature[node] != LEAF:
                stack.append((self.left[node], depth + 1))
                stack.append((self.right[node], depth + 1))
        return deepest

    def predict(self, rows: np.ndarray) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        out = np.empty(len(rows))
        stack = [(0, np.arange(len(rows)))]
        while stack:
            node, idx = stack.pop()
            if idx.size == 0:
                continue
            feature = self.feature[node]
            if feature == LEAF:
                out[idx] = self.value[node]
                continue
            go_left = rows[idx, feature] <= self.threshold[node]
            stack.append((self.left[node], idx[go_left]))
            stack.append((self.right[node], idx[~go_left]))
        return out

    def to_dict(self, node: int = 0) -> dict:
        if self.feature[node] == LEAF:
            return {'value': float(self.value[node])}
        return {
            'feature': int(self.feature[node]),
            'threshold': float(self.threshold[node]),
            'left': self.to_dict(int(self.left[node])),
            'right': self.to_dict(int(self.right[node])),
        }


def _leaf_value(y: np.ndarray, criterion: str) -> float:
    return float(np.median(y)) if criterion == 'mae' else float(np.mean(y))


def _split_scores(ys: np.ndarray, positions: np.ndarray, criterion: str) -> np.ndarray:
    """Child impurity for every split position (left = ys[:i], right = ys[i:])"""
    n = len(ys)
    if criterion == 'mse':
        csum = np.cumsum(ys)
        csq = np.cumsum(ys ** 2)
        n_left = positions.astype(float)
        n_right = n - n_left
        left_sum, left_sq = csum[positions - 1], csq[positions - 1]
        right_sum, right_sq = csum[-1] - left_sum, csq[-1] - left_sq
        return (left_sq - left_sum ** 2 / n_left) + (right_sq - right_sum ** 2 / n_right)

    in_left = np.arange(n)[None, :] < positions[:, None]
    grid = np.broadcast_to(ys, in_left.shape)
    left = np.where(in_left, grid, np.nan)
    right = np.where(in_left, np.nan, grid)
    left_med = np.nanmedian(left, axis=1)
    right_med = np.nanmedian(right, axis=1)
    return (np.nansum(np.abs(left - left_med[:, None]), axis=1)
            + np.nansum(np.abs(right - right_med[:, None]), axis=1))


def _best_split(
    x_node: np.ndarray, y_node: np.ndarray, features: np.ndarray, criterion: str
) -> Optional[Tuple[int, float]]:
    best_score, best = np.inf, None
    for feature in np.sort(features):
        column = x_node[:, feature]
        order = np.argsort(column, kind='stable')
        xs, ys = column[order], y_node[order]
        positions = np.nonzero(xs[1:] != xs[:-1])[0] + 1
        if positions.size == 0:
            continue
        scores = _split_scores(ys, positions, criterion)
        k = int(np.argmin(scores))
        if scores[k] < best_score:
            lo, hi = xs[positions[k] - 1], xs[positions[k]]
            threshold = (lo + hi) / 2
            if not lo <= threshold < hi:
                threshold = lo
            best_score, best = scores[k], (int(feature), float(threshold))
    return best


def grow_tree(
    rows: np.ndarray,
    targets: np.ndarray,
    *,
    max_depth: Optional[int],
    criterion: str,
    n_split_features: int,
    rng: np.random.Generator,
) -> RegressionTree:
    """Grow a tree depth-first, left child first, sampling features at every split"""
    rows = np.asarray(rows, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if len(targets) == 0:
        raise ModelError('cannot fit a tree on an empty dataset')
    if rows.ndim != 2 or rows.shape[0] != len(targets):
        raise ModelError('feature matrix and targets disagree in length')

    n_features = rows.shape[1]
    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    value: List[float] = []

    def new_node(idx: np.ndarray) -> int:
        feature.append(LEAF)
        threshold.append(np.nan)
        left.append(LEAF)
        right.append(LEAF)
        value.append(_leaf_value(targets[idx], criterion))
        return len(feature) - 1

    stack = [(new_node(np.arange(len(targets))), np.arange(len(targets)), 0)]
    while stack:
        node, idx, depth = stack.pop()
        y_node = targets[idx]
        if (max_depth is not None and depth >= max_depth) or len(idx) < 2 or np.all(y_node == y_node[0]):
            continue
        if n_features == 0:
            continue
        candidates = rng.choice(n_features, size=min(n_split_features, n_features), replace=False)
        split = _best_split(rows[idx], y_node, candidates, criterion)
        if split is None:
            continue
        split_feature, split_threshold = split
        go_left = rows[idx, split_feature] <= split_threshold
        left_idx, right_idx = idx[go_left], idx[~go_left]

        feature[node] = split_feature
        threshold[node] = split_threshold
        left[node] = new_node(left_idx)
        right[node] = new_node(right_idx)
        stack.append((right[node], right_idx, depth + 1))
        stack.append((left[node], left_idx, depth + 1))

    return RegressionTree(
        feature=np.asarray(feature, dtype=int),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=int),
        right=np.asarray(right, dtype=int),
        value=np.asarray(value, dtype=float),
    )


def fit_tree(dataset: SupervisedDataset, params: HyperParams, rng: np.random.Generator) -> RegressionTree:
    if len(dataset) == 0:
        raise ModelError('cannot fit a tree on an empty dataset')
    return grow_tree(
        dataset.feature_matrix,
        dataset.targets,
        max_depth=params.max_depth,
        criterion=params.split_criterion,
        n_split_features=params.n_split_features(dataset.n_features),
        rng=rng,
    )
