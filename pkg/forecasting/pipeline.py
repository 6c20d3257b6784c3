"""
Per-city worker: grid-search, refit and evaluate the baseline and every
(criterion, k) augmentation of one target city.

Nothing in here touches Django, so the worker can run in joblib processes.
"""
import hashlib
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .evaluation import WINDOW, EvalReport, evaluate_city
from .features import augment_dataset
from .ingest import CityId
from .learn.ensembles import fit_ensemble, predict
from .learn.params import HyperParams
from .learn.selection import DEFAULT_SPLITS, grid_search
from .preprocess import DiseaseConfig, SplitSeries
from .similarity import Criterion

logger = logging.getLogger(__name__)

# (algorithm, criterion, k)
RunKey = Tuple[str, str, int]


def run_seed(master_seed: int, city: CityId, criterion: str, k: int, algorithm: str) -> int:
    """Seed for one model run, independent of the order runs are scheduled in"""
    token = f'{master_seed}:{city}:{criterion}:{k}:{algorithm}'
    return int.from_bytes(hashlib.sha256(token.encode('utf-8')).digest()[:8], 'big')


@dataclass(frozen=True)
class CityTask:
    city: CityId
    disease: DiseaseConfig
    splits: Mapping[CityId, SplitSeries]
    grids: Mapping[str, Sequence[HyperParams]]
    master_seed: int
    baseline_algorithms: Tuple[str, ...] = ()
    augmented_algorithms: Tuple[str, ...] = ()
    # (criterion, k) -> ordered neighbor ids
    neighbor_plans: Mapping[Tuple[str, int], Tuple[CityId, ...]] = field(default_factory=dict)
    cv_splits: int = DEFAULT_SPLITS
    mase_denominator: str = WINDOW
    keep_models: bool = False

    def runs(self) -> List[Tuple[str, str, Tuple[CityId, ...]]]:
        runs = [(algorithm, str(Criterion.NONE), ()) for algorithm in self.baseline_algorithms]
        for algorithm in self.augmented_algorithms:
            for (criterion, _k), neighbors in sorted(self.neighbor_plans.items()):
                runs.append((algorithm, criterion, tuple(neighbors)))
        return runs


@dataclass(frozen=True)
class CityResult:
    city: CityId
    reports: Tuple[EvalReport, ...] = ()
    # de-normalized test-window predictions per run
    predictions: Mapping[RunKey, Tuple[float, ...]] = field(default_factory=dict)
    models: Mapping[RunKey, dict] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def _fit_and_evaluate(task: CityTask, algorithm: str, criterion: str, neighbors: Tuple[CityId, ...]):
    split = task.splits[task.city]
    train_dataset, test_dataset = augment_dataset(task.city, task.splits, neighbors, task.disease)
    seed = run_seed(task.master_seed, task.city, criterion, len(neighbors), algorithm)

    params, cv_mae = grid_search(train_dataset, task.grids[algorithm], seed, task.cv_splits)
    model = fit_ensemble(train_dataset, params, seed)
    report = evaluate_city(
        model, train_dataset, test_dataset, split, task.disease,
        city=task.city,
        criterion=criterion,
        neighbors=neighbors,
        cv_mae=cv_mae,
        mase_denominator=task.mase_denominator,
    )
    predictions = predict(model, test_dataset.feature_matrix) * split.scale
    return report, tuple(float(v) for v in predictions), model


def run_city(task: CityTask) -> CityResult:
    """Every configured run for one city; any failure skips the whole city"""
    reports: List[EvalReport] = []
    predictions: Dict[RunKey, Tuple[float, ...]] = {}
    models: Dict[RunKey, dict] = {}
    try:
        for algorithm, criterion, neighbors in task.runs():
            report, trace, model = _fit_and_evaluate(task, algorithm, criterion, neighbors)
            key = (algorithm, criterion, len(neighbors))
            reports.append(report)
            predictions[key] = trace
            if task.keep_models:
                models[key] = model.to_dict()
            logger.debug(
                f'{task.disease.disease}/{task.city} {algorithm} {criterion} k={len(neighbors)}: '
                f'test MASE {report.test_mase:.4f}'
            )
    except Exception as e:
        logger.error(f'{task.disease.disease}/{task.city}: skipped after {type(e).__name__}: {e}')
        return CityResult(city=task.city, error=f'{type(e).__name__}: {e}')

    reports.sort(key=lambda r: r.sort_key)
    return CityResult(city=task.city, reports=tuple(reports), predictions=predictions, models=models)
