import itertools
import json
import math
from dataclasses import asdict, dataclass
from typing import Dict, Iterable, List, Optional, Union

from ..exceptions import ConfigError

RANDOM_FOREST = 'random_forest'
GRADIENT_BOOSTING = 'gradient_boosting'
ALGORITHMS = (RANDOM_FOREST, GRADIENT_BOOSTING)

SPLIT_CRITERIA = ('mae', 'mse')

# Default search grid; max_depth None is unlimited
DEFAULT_GRIDS: Dict[str, Dict[str, list]] = {
    RANDOM_FOREST: {
        'n_trees': [25, 50, 100, 150, 200],
        'max_depth': [2, 4, None],
    },
    GRADIENT_BOOSTING: {
        'n_trees': [25, 50, 100, 150, 200],
        'max_depth': [2, 4, None],
        'learning_rate': [0.001, 0.005, 0.01],
    },
}


@dataclass(frozen=True)
class HyperParams:
    algorithm: str
    n_trees: int = 100
    max_depth: Optional[int] = None
    learning_rate: Optional[float] = None
    split_criterion: str = 'mae'
    bootstrap: bool = True
    feature_subset: Union[str, int, float] = 'sqrt'

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f'unknown algorithm {self.algorithm!r}')
        # a zero-tree booster is just its base value
        min_trees = 0 if self.algorithm == GRADIENT_BOOSTING else 1
        if not isinstance(self.n_trees, int) or self.n_trees < min_trees:
            raise ConfigError(f'n_trees must be an integer >= {min_trees}, got {self.n_trees!r}')
        if self.max_depth is not None and (not isinstance(self.max_depth, int) or self.max_depth < 1):
            raise ConfigError(f'max_depth must be >= 1 or unlimited, got {self.max_depth!r}')
        if self.algorithm == GRADIENT_BOOSTING:
            if self.learning_rate is None:
                object.__setattr__(self, 'learning_rate', 0.1)
            if not self.learning_rate > 0:
                raise ConfigError(f'learning_rate must be > 0, got {self.learning_rate!r}')
        if self.split_criterion not in SPLIT_CRITERIA:
            raise ConfigError(f'split_criterion must be one of {SPLIT_CRITERIA}')
        subset = self.feature_subset
        if isinstance(subset, bool):
            raise ConfigError('feature_subset must be "sqrt", "all", a fraction or a count')
        if isinstance(subset, str) and subset not in ('sqrt', 'all'):
            raise ConfigError(f'unknown feature_subset {subset!r}')
        if isinstance(subset, float) and not 0 < subset <= 1:
            raise ConfigError(f'feature_subset fraction must be in (0, 1], got {subset}')
        if isinstance(subset, int) and subset < 1:
            raise ConfigError(f'feature_subset count must be >= 1, got {subset}')

    def n_split_features(self, n_features: int) -> int:
        """Number of features sampled at every split"""
        subset = self.feature_subset
        if subset == 'all':
            count = n_features
        elif subset == 'sqrt':
            count = math.ceil(math.sqrt(n_features))
        elif isinstance(subset, float):
            count = math.ceil(subset * n_features)
        else:
            count = subset
        return max(1, min(n_features, count))

    def to_dict(self) -> dict:
        data = asdict(self)
        if self.algorithm == RANDOM_FOREST:
            data.pop('learning_rate')
        else:
            data.pop('bootstrap')
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))


def expand_grid(algorithm: str, base: Optional[dict] = None, **value_lists: Iterable) -> List[HyperParams]:
    """Cartesian product of the given value lists, in the order the lists are given"""
    base = dict(base or {})
    names = list(value_lists)
    combos = itertools.product(*(list(value_lists[name]) for name in names))
    return [HyperParams(algorithm=algorithm, **base, **dict(zip(names, combo))) for combo in combos]
