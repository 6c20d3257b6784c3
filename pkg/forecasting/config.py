"""
Experiment configuration: a TOML file, overridable field by field from the
command line, with process-wide defaults taken from Django settings.

Example layout (see config/example.toml)::

    [data]
    cities = "cities.csv"
    gdp = "gdp.csv"

    [diseases.dengue]
    cases = "dengue_cases.csv"
    train_start = "2014-W01"
    train_end = "2020-W22"
    test_start = "2020-W23"
    test_end = "2021-W52"
    gdp_start = 2014
    gdp_end = 2020

    [experiment]
    criteria = ["none", "geographic", "gdp_dtw", "cases_dtw"]
    k_values = [1, 2, 3]

    [grids.random_forest]
    n_trees = [25, 50]
    max_depth = [2, "none"]
"""
import logging
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # Python 3.10: same API from the tomli backport
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from django.conf import settings

from .evaluation import MASE_DENOMINATORS, WINDOW
from .exceptions import ConfigError
from .learn.params import ALGORITHMS, DEFAULT_GRIDS, HyperParams, expand_grid
from .learn.selection import DEFAULT_SPLITS
from .preprocess import DiseaseConfig
from .similarity import MAX_NEIGHBORS, Criterion
from .weeks import EpiWeek

logger = logging.getLogger(__name__)

GRID_LIST_KEYS = ('n_trees', 'max_depth', 'learning_rate')
GRID_SCALAR_KEYS = ('split_criterion', 'feature_subset', 'bootstrap')
AUGMENT_MODES = ('all', 'best_baseline')
GEO_METRICS = ('euclidean', 'haversine')


@dataclass(frozen=True)
class ExperimentConfig:
    cases_path: Path
    cities_path: Path
    gdp_path: Path
    disease: DiseaseConfig
    criteria: Tuple[Criterion, ...] = (Criterion.NONE,)
    k_values: Tuple[int, ...] = (1, 2, 3)
    algorithms: Tuple[str, ...] = ALGORITHMS
    grids: Mapping[str, Tuple[HyperParams, ...]] = field(default_factory=dict)
    seed: int = 7
    jobs: int = 1
    include_anomalous: bool = False
    output_dir: Path = Path('out')
    write_forecasts: bool = True
    excel: bool = False
    augment_algorithms: str = 'all'
    mase_denominator: str = WINDOW
    geo_metric: str = 'euclidean'
    gdp_normalize: bool = False
    cv_splits: int = DEFAULT_SPLITS
    dump_models_dir: Optional[Path] = None

    @property
    def augmented_criteria(self) -> List[Criterion]:
        return [c for c in self.criteria if c != Criterion.NONE]

    def grid(self, algorithm: str) -> Tuple[HyperParams, ...]:
        return tuple(self.grids[algorithm])

    def expected_report_count(self, n_cities: int) -> int:
        return n_cities * len(self.algorithms) * (1 + len(self.augmented_criteria) * len(self.k_values))


def parse_max_depth(value: Any) -> Optional[int]:
    if value is None or (isinstance(value, str) and value.strip().lower() in ('none', 'unlimited')):
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f'max_depth must be an integer or "none", got {value!r}')
    return value


def build_grid(algorithm: str, table: Optional[Mapping[str, Any]] = None) -> Tuple[HyperParams, ...]:
    """Hyperparameter candidates for one algorithm; unspecified lists use the default grid"""
    if algorithm not in ALGORITHMS:
        raise ConfigError(f'unknown algorithm {algorithm!r}')
    table = dict(table or {})
    unknown = set(table) - set(GRID_LIST_KEYS) - set(GRID_SCALAR_KEYS)
    if unknown:
        raise ConfigError(f'unknown keys in grids.{algorithm}: {sorted(unknown)}')

    lists = {}
    for key in GRID_LIST_KEYS:
        if key == 'learning_rate' and key not in DEFAULT_GRIDS[algorithm] and key not in table:
            continue
        values = table.get(key, DEFAULT_GRIDS[algorithm].get(key))
        values = values if isinstance(values, list) else [values]
        if not values:
            raise ConfigError(f'grids.{algorithm}.{key} is empty')
        if key == 'max_depth':
            values = [parse_max_depth(v) for v in values]
        lists[key] = values
    base = {key: table[key] for key in GRID_SCALAR_KEYS if key in table}
    try:
        return tuple(expand_grid(algorithm, base, **lists))
    except TypeError as exc:
        raise ConfigError(f'invalid grids.{algorithm}: {exc}') from exc


def _week(table: Mapping[str, Any], key: str, disease: str) -> EpiWeek:
    if key not in table:
        raise ConfigError(f'diseases.{disease}: missing {key}')
    try:
        return EpiWeek.parse(table[key])
    except ValueError as exc:
        raise ConfigError(f'diseases.{disease}.{key}: {exc}') from exc


def disease_config(name: str, table: Mapping[str, Any]) -> DiseaseConfig:
    for key in ('gdp_start', 'gdp_end'):
        if key not in table:
            raise ConfigError(f'diseases.{name}: missing {key}')
    horizon = int(table.get('horizon', 1))
    return DiseaseConfig(
        disease=name,
        train_range=(_week(table, 'train_start', name), _week(table, 'train_end', name)),
        test_range=(_week(table, 'test_start', name), _week(table, 'test_end', name)),
        gdp_years=(int(table['gdp_start']), int(table['gdp_end'])),
        lags=int(table.get('lags', 5)),
        horizon=horizon,
        seasonal_m=int(table.get('seasonal_m', horizon)),
        z_threshold=float(table.get('z_threshold', 4.0)),
    )


def read_toml(path) -> Dict[str, Any]:
    path = Path(path)
    try:
        with open(path, 'rb') as handle:
            return tomllib.load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f'config file not found: {path}') from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f'{path}: invalid TOML: {exc}') from exc


def _choose_disease(diseases: Mapping[str, Any], wanted: Optional[str]) -> str:
    if not diseases:
        raise ConfigError('config has no [diseases.<name>] table')
    if wanted:
        if wanted not in diseases:
            raise ConfigError(f'disease {wanted!r} not configured; available: {", ".join(sorted(diseases))}')
        return wanted
    if len(diseases) > 1:
        raise ConfigError(f'several diseases configured ({", ".join(sorted(diseases))}); pass --disease')
    return next(iter(diseases))


def _resolve(base: Path, value: Any, what: str) -> Path:
    if not value:
        raise ConfigError(f'missing path for {what}')
    path = Path(value)
    return path if path.is_absolute() else base / path


def _k_values(values: Sequence[Any]) -> Tuple[int, ...]:
    ks = []
    for value in values:
        if isinstance(value, bool) or not isinstance(value, int) or not 1 <= value <= MAX_NEIGHBORS:
            raise ConfigError(f'k values must be integers in [1, {MAX_NEIGHBORS}], got {value!r}')
        ks.append(value)
    return tuple(sorted(set(ks)))


def load_config(path, disease: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Read a TOML experiment file and apply non-None ``overrides`` on top of it.

    Recognised overrides: criteria, k_values, seed, jobs, include_anomalous,
    output_dir, write_forecasts, excel, dump_models_dir.
    """
    path = Path(path)
    raw = read_toml(path)
    base_dir = path.resolve().parent
    overrides = {key: value for key, value in (overrides or {}).items() if value is not None}

    data = raw.get('data', {})
    diseases = raw.get('diseases', {})
    name = _choose_disease(diseases, disease)
    table = diseases[name]
    experiment = raw.get('experiment', {})

    try:
        criteria = tuple(dict.fromkeys(
            Criterion.parse(c) for c in overrides.get('criteria', experiment.get('criteria', ['none']))
        ))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if not criteria:
        raise ConfigError('at least one criterion is required')

    algorithms = tuple(experiment.get('algorithms', list(ALGORITHMS)))
    for algorithm in algorithms:
        if algorithm not in ALGORITHMS:
            raise ConfigError(f'unknown algorithm {algorithm!r}')
    if not algorithms:
        raise ConfigError('at least one algorithm is required')
    grid_tables = raw.get('grids', {})
    grids = {algorithm: build_grid(algorithm, grid_tables.get(algorithm)) for algorithm in algorithms}

    options = {
        'augment_algorithms': experiment.get('augment_algorithms', 'all'),
        'mase_denominator': experiment.get('mase_denominator', WINDOW),
        'geo_metric': experiment.get('geo_metric', 'euclidean'),
    }
    for key, allowed in (('augment_algorithms', AUGMENT_MODES), ('mase_denominator', MASE_DENOMINATORS),
                         ('geo_metric', GEO_METRICS)):
        if options[key] not in allowed:
            raise ConfigError(f'experiment.{key} must be one of {allowed}, got {options[key]!r}')

    output_dir = overrides.get('output_dir', experiment.get('output_dir', settings.WAVECAST_OUTPUT_DIR))
    dump_models_dir = overrides.get('dump_models_dir', experiment.get('dump_models_dir'))

    config = ExperimentConfig(
        cases_path=_resolve(base_dir, table.get('cases'), f'diseases.{name}.cases'),
        cities_path=_resolve(base_dir, data.get('cities'), 'data.cities'),
        gdp_path=_resolve(base_dir, data.get('gdp'), 'data.gdp'),
        disease=disease_config(name, table),
        criteria=criteria,
        k_values=_k_values(overrides.get('k_values', experiment.get('k_values', [1, 2, 3]))),
        algorithms=algorithms,
        grids=grids,
        seed=int(overrides.get('seed', experiment.get('seed', settings.WAVECAST_SEED))),
        jobs=int(overrides.get('jobs', experiment.get('jobs', settings.WAVECAST_JOBS))),
        include_anomalous=bool(overrides.get('include_anomalous', experiment.get('include_anomalous', False))),
        output_dir=Path(output_dir),
        write_forecasts=bool(overrides.get('write_forecasts', experiment.get('write_forecasts', True))),
        excel=bool(overrides.get('excel', experiment.get('excel', False))),
        gdp_normalize=bool(experiment.get('gdp_normalize', False)),
        cv_splits=int(experiment.get('cv_splits', DEFAULT_SPLITS)),
        dump_models_dir=Path(dump_models_dir) if dump_models_dir else None,
        **options,
    )
    if config.jobs < 1:
        raise ConfigError(f'jobs must be >= 1, got {config.jobs}')
    if config.cv_splits < 1:
        raise ConfigError(f'cv_splits must be >= 1, got {config.cv_splits}')
    logger.debug(f'Loaded experiment config for {name} from {path}')
    return config
