"""
Experiment Service
Loads a cohort, ranks related cities, runs the per-city worker pool and writes
every report file of a run.
"""
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

from joblib import Parallel, delayed

from .config import ExperimentConfig, load_config
from .evaluation import EvalReport, SummaryRow, aggregate, best_baseline_algorithm, stratum_label
from .exceptions import CohortError, ConfigError, IngestError, WavecastError
from .ingest import CityId, Cohort, build_cohort, load_case_series, load_city_meta
from .pipeline import CityResult, CityTask, run_city
from .preprocess import SplitSeries, describe_cohort, split_and_normalize
from .similarity import Criterion, NeighborRanking, rank_all, top_k
from . import reports as report_files

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LoadedCohort:
    cohort: Cohort
    splits: Dict[CityId, SplitSeries]


@dataclass
class ExperimentOutcome:
    reports: List[EvalReport]
    summary: List[SummaryRow]
    best_algorithm: Optional[str]
    n_cities: int
    failed_cities: Dict[CityId, str] = field(default_factory=dict)
    files: Dict[str, Path] = field(default_factory=dict)
    run_id: Optional[str] = None

    @property
    def partial(self) -> bool:
        return bool(self.failed_cities)


def _seasonal_period_problem(config: ExperimentConfig) -> Optional[str]:
    disease = config.disease
    if disease.seasonal_m >= disease.n_train:
        return (
            f'seasonal_m={disease.seasonal_m} leaves no training week with a seasonal naive forecast '
            f'({disease.n_train} training weeks)'
        )
    return None


def _insufficient_candidates(config: ExperimentConfig, n_cities: int) -> Optional[str]:
    if not config.augmented_criteria:
        return None
    k = max(config.k_values)
    if k > n_cities - 1:
        return (
            f'insufficient neighbor candidates: k={k} needs {k + 1} cities, '
            f'the {config.disease.disease} cohort has {n_cities}'
        )
    return None


class ExperimentService:
    """Runs one disease experiment described by an ExperimentConfig"""

    def __init__(self, config: ExperimentConfig):
        self.config = config

    @classmethod
    def from_file(cls, path, disease: Optional[str] = None, **overrides) -> 'ExperimentService':
        return cls(load_config(path, disease=disease, overrides=overrides))

    # Loading

    def load(self) -> LoadedCohort:
        """Ingest every input and build the cohort; raises before anything is trained or written"""
        config = self.config
        series = load_case_series(config.cases_path, config.disease.disease)
        meta = load_city_meta(config.cities_path, config.gdp_path)
        cohort = build_cohort(series, meta, config.disease)
        splits = {city: split_and_normalize(cohort.series[city], config.disease) for city in cohort.cities}
        return LoadedCohort(cohort=cohort, splits=splits)

    def rankings(self, loaded: LoadedCohort, criteria: Sequence[Criterion]) -> Dict[str, Dict[CityId, NeighborRanking]]:
        return {
            str(criterion): rank_all(
                loaded.cohort, criterion, loaded.splits,
                geo_metric=self.config.geo_metric,
                gdp_normalize=self.config.gdp_normalize,
                jobs=self.config.jobs,
            )
            for criterion in criteria
        }

    # Validation

    def validate(self) -> List[str]:
        """Read-only checks of inputs, ranges and grids; problems are returned, never raised"""
        config = self.config
        diagnostics: List[str] = []

        output_dir = Path(config.output_dir)
        if output_dir.exists() and not (output_dir.is_dir() and os.access(output_dir, os.W_OK)):
            diagnostics.append(f'output directory {output_dir} is not writable')

        for algorithm in config.algorithms:
            if not config.grids.get(algorithm):
                diagnostics.append(f'empty hyperparameter grid for {algorithm}')

        disease = config.disease
        first_row = disease.lags + disease.horizon - 1
        n_rows = disease.n_train - first_row
        if n_rows < config.cv_splits + 1:
            diagnostics.append(
                f'insufficient history: {disease.n_train} training weeks give {max(n_rows, 0)} rows, '
                f'{config.cv_splits} time-series splits need {config.cv_splits + 1}'
            )
        problem = _seasonal_period_problem(config)
        if problem:
            diagnostics.append(problem)

        try:
            loaded = self.load()
        except (IngestError, CohortError) as e:
            diagnostics.append(str(e))
            return diagnostics
        except WavecastError as e:
            diagnostics.append(f'{type(e).__name__}: {e}')
            return diagnostics

        problem = _insufficient_candidates(config, len(loaded.cohort))
        if problem:
            diagnostics.append(problem)
        return diagnostics

    # Running

    def _tasks(
        self,
        loaded: LoadedCohort,
        cities: Sequence[CityId],
        rankings: Mapping[str, Mapping[CityId, NeighborRanking]],
        baseline_algorithms: Sequence[str],
        augmented_algorithms: Sequence[str],
    ) -> List[CityTask]:
        config = self.config
        tasks = []
        for city in cities:
            plans = {}
            if augmented_algorithms:
                for criterion in config.augmented_criteria:
                    ranking = rankings[str(criterion)][city]
                    for k in config.k_values:
                        plans[(str(criterion), k)] = tuple(top_k(ranking, k))
            needed = {city} | {neighbor for neighbors in plans.values() for neighbor in neighbors}
            tasks.append(CityTask(
                city=city,
                disease=config.disease,
                splits={c: loaded.splits[c] for c in sorted(needed)},
                grids={a: tuple(config.grid(a)) for a in config.algorithms},
                master_seed=config.seed,
                baseline_algorithms=tuple(baseline_algorithms),
                augmented_algorithms=tuple(augmented_algorithms),
                neighbor_plans=plans,
                cv_splits=config.cv_splits,
                mase_denominator=config.mase_denominator,
                keep_models=config.dump_models_dir is not None,
            ))
        return tasks

    def _execute(self, tasks: List[CityTask]) -> List[CityResult]:
        if self.config.jobs > 1 and len(tasks) > 1:
            logger.info(f'Running {len(tasks)} cities on {self.config.jobs} worker processes')
            results = Parallel(n_jobs=self.config.jobs, prefer='processes')(
                delayed(run_city)(task) for task in tasks
            )
        else:
            results = [run_city(task) for task in tasks]
        return sorted(results, key=lambda result: result.city)

    def _run_cities(self, loaded: LoadedCohort, rankings) -> Dict[CityId, CityResult]:
        config = self.config
        cities = loaded.cohort.cities

        if config.augment_algorithms == 'all' or not config.augmented_criteria:
            augmented = config.algorithms if config.augmented_criteria else ()
            tasks = self._tasks(loaded, cities, rankings, config.algorithms, augmented)
            return {result.city: result for result in self._execute(tasks)}

        baseline = {r.city: r for r in self._execute(self._tasks(loaded, cities, rankings, config.algorithms, ()))}
        pooled = [report for result in baseline.values() for report in result.reports]
        best = best_baseline_algorithm(pooled, config.algorithms)
        if best is None:
            logger.warning(f'{config.disease.disease}: no baseline MASE available, augmentation skipped')
            return baseline
        logger.info(f'{config.disease.disease}: augmenting with best baseline algorithm {best}')

        survivors = [city for city in cities if not baseline[city].failed]
        augmented = {r.city: r for r in self._execute(self._tasks(loaded, survivors, rankings, (), (best,)))}
        merged = {}
        for city, result in baseline.items():
            extra = augmented.get(city)
            if result.failed or extra is None:
                merged[city] = result
            elif extra.failed:
                merged[city] = extra
            else:
                merged[city] = CityResult(
                    city=city,
                    reports=tuple(sorted(result.reports + extra.reports, key=lambda r: r.sort_key)),
                    predictions={**result.predictions, **extra.predictions},
                    models={**result.models, **extra.models},
                )
        return merged

    def _forecast_traces(self, loaded: LoadedCohort, results: Mapping[CityId, CityResult], best: Optional[str]):
        config = self.config
        if best is None:
            return {}
        key = (best, str(Criterion.NONE), 0)
        if Criterion.GEOGRAPHIC in config.criteria:
            key = (best, str(Criterion.GEOGRAPHIC), max(config.k_values))

        test_start = config.disease.test_range[0]
        traces = {}
        for city, result in results.items():
            if result.failed or key not in result.predictions:
                continue
            split = loaded.splits[city]
            traces[city] = {
                'week': [str(test_start + i) for i in range(len(split.test))],
                'actual': [float(v) for v in split.test * split.scale],
                'predicted': list(result.predictions[key]),
            }
        return traces

    def _write_outputs(self, loaded, rankings, reports, summary, best, results) -> Dict[str, Path]:
        config = self.config
        out = Path(config.output_dir)
        visible = summary if config.include_anomalous else [
            row for row in summary if row.anomaly_stratum == stratum_label(config.disease.z_threshold)
        ]

        frames = {
            report_files.REPORTS_FILE: report_files.reports_frame(reports),
            report_files.SUMMARY_FILE: report_files.summary_frame(visible),
            report_files.PLOTDATA_FILE: report_files.plotdata_frame(visible, best),
            report_files.NEIGHBORS_FILE: report_files.neighbors_frame(rankings),
            report_files.STATS_FILE: report_files.stats_frame([describe_cohort(loaded.cohort)]),
        }
        if config.write_forecasts:
            frames[report_files.FORECASTS_FILE] = report_files.forecasts_frame(
                self._forecast_traces(loaded, results, best)
            )

        files = {name: report_files.write_csv(frame, out / name) for name, frame in frames.items()}
        if config.excel:
            files[report_files.WORKBOOK_FILE] = report_files.write_workbook(out / report_files.WORKBOOK_FILE, {
                'Reports': frames[report_files.REPORTS_FILE],
                'Summary': frames[report_files.SUMMARY_FILE],
                'Plot data': frames[report_files.PLOTDATA_FILE],
            })
        if config.dump_models_dir is not None:
            models = {
                (city, *key): model
                for city, result in results.items()
                for key, model in result.models.items()
            }
            report_files.dump_models(config.dump_models_dir, config.disease.disease, models)
        return files

    def run(self) -> ExperimentOutcome:
        """Baseline and augmented protocols for every cohort city, then all report files.

        Ingest and configuration errors raise before anything is written; a
        city whose training fails is logged and left out of the reports.
        """
        config = self.config
        problem = _seasonal_period_problem(config)
        if problem:
            raise ConfigError(problem)
        loaded = self.load()
        problem = _insufficient_candidates(config, len(loaded.cohort))
        if problem:
            raise ConfigError(problem)
        Path(config.output_dir).mkdir(parents=True, exist_ok=True)

        rankings = self.rankings(loaded, config.augmented_criteria)
        logger.info(
            f'{config.disease.disease}: {len(loaded.cohort)} cities, algorithms {list(config.algorithms)}, '
            f'criteria {[str(c) for c in config.criteria]}, k {list(config.k_values)}, seed {config.seed}'
        )
        results = self._run_cities(loaded, rankings)

        failed = {city: result.error for city, result in results.items() if result.failed}
        reports = sorted(
            (report for result in results.values() if not result.failed for report in result.reports),
            key=lambda r: r.sort_key,
        )
        normal_stratum = stratum_label(config.disease.z_threshold)
        summary = aggregate(reports, stratify=True, normal_stratum=normal_stratum) if reports else []
        best = best_baseline_algorithm(reports, config.algorithms)

        files = self._write_outputs(loaded, rankings, reports, summary, best, results)
        if failed:
            logger.warning(f'{config.disease.disease}: {len(failed)} cities failed: {sorted(failed)}')
        logger.info(f'{config.disease.disease}: {len(reports)} reports written to {config.output_dir}')
        return ExperimentOutcome(
            reports=reports,
            summary=summary,
            best_algorithm=best,
            n_cities=len(loaded.cohort),
            failed_cities=failed,
            files=files,
        )

    def run_recorded(self, config_path: str = '') -> ExperimentOutcome:
        """``run`` with an ExperimentRun row tracking its progress"""
        from .models import ExperimentRun

        config = self.config
        experiment_run = ExperimentRun.objects.create(
            disease=config.disease.disease,
            config_path=str(config_path),
            seed=config.seed,
            jobs=config.jobs,
            output_dir=str(config.output_dir),
            status='processing',
        )
        try:
            outcome = self.run()
        except WavecastError as e:
            experiment_run.status = 'failed'
            experiment_run.error_details = {'error': str(e), 'type': type(e).__name__}
            experiment_run.save()
            raise

        experiment_run.status = 'partial' if outcome.partial else 'completed'
        experiment_run.n_cities = outcome.n_cities
        experiment_run.n_reports = len(outcome.reports)
        experiment_run.failed_cities = sorted(outcome.failed_cities)
        if outcome.partial:
            experiment_run.error_details = dict(sorted(outcome.failed_cities.items()))
        experiment_run.save()
        outcome.run_id = str(experiment_run.id)
        return outcome

    def write_neighbors(self, criteria: Sequence[Criterion]) -> Path:
        """Rankings only: neighbors.csv for the requested criteria"""
        criteria = [Criterion(c) for c in criteria if Criterion(c) != Criterion.NONE]
        if not criteria:
            raise ConfigError('neighbors needs at least one criterion other than none')
        loaded = self.load()
        rankings = self.rankings(loaded, criteria)
        path = Path(self.config.output_dir) / report_files.NEIGHBORS_FILE
        return report_files.write_csv(report_files.neighbors_frame(rankings), path)


def validate_experiment(path, disease: Optional[str] = None, **overrides) -> List[str]:
    """Diagnostics for a config file; configuration errors become diagnostics too"""
    try:
        service = ExperimentService.from_file(path, disease=disease, **overrides)
    except WavecastError as e:
        return [str(e)]
    return service.validate()


def run_experiment(config: ExperimentConfig) -> ExperimentOutcome:
    return ExperimentService(config).run()
