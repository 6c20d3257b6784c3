"""
Output files of an experiment run.

Every CSV is written through pandas with ``\\n`` line endings and shortest
round-trip float formatting, so equal inputs give byte-identical files.
Undefined metrics are written as empty cells.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

import pandas as pd

from .evaluation import EvalReport, SummaryRow
from .ingest import CityId
from .preprocess import CohortStats
from .similarity import NeighborRanking

logger = logging.getLogger(__name__)

REPORTS_COLUMNS = [
    'city_id', 'disease', 'algorithm', 'criterion', 'k', 'anomalous',
    'train_mae', 'train_mase', 'test_mae', 'test_mase', 'scale', 'params',
]
SUMMARY_COLUMNS = [
    'disease', 'algorithm', 'criterion', 'k', 'stratum',
    'train_mase_mean', 'train_mase_std', 'test_mase_mean', 'test_mase_std', 'n_cities',
]
PLOTDATA_COLUMNS = ['disease', 'criterion', 'k', 'stratum', 'mean_mase', 'std_mase']
NEIGHBORS_COLUMNS = ['target_id', 'rank', 'neighbor_id', 'distance', 'criterion']
FORECASTS_COLUMNS = ['city_id', 'week', 'actual', 'predicted']
STATS_COLUMNS = ['disease', 'n_cities', 'mean', 'std', 'max', 'skewness_mean', 'skewness_std']

REPORTS_FILE = 'reports.csv'
SUMMARY_FILE = 'summary.csv'
PLOTDATA_FILE = 'plotdata.csv'
NEIGHBORS_FILE = 'neighbors.csv'
FORECASTS_FILE = 'forecasts.csv'
STATS_FILE = 'stats.csv'
WORKBOOK_FILE = 'summary.xlsx'


def _flag(value: bool) -> str:
    return 'true' if value else 'false'


def reports_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    rows = [{
        'city_id': r.city,
        'disease': r.disease,
        'algorithm': r.algorithm,
        'criterion': r.criterion,
        'k': r.k_neighbors,
        'anomalous': _flag(r.anomalous),
        'train_mae': r.train_mae,
        'train_mase': r.train_mase,
        'test_mae': r.test_mae,
        'test_mase': r.test_mase,
        'scale': r.scale,
        'params': r.params.to_json(),
    } for r in sorted(reports, key=lambda r: r.sort_key)]
    return pd.DataFrame(rows, columns=REPORTS_COLUMNS)


def summary_frame(rows: Sequence[SummaryRow]) -> pd.DataFrame:
    data = [{
        'disease': row.disease,
        'algorithm': row.algorithm,
        'criterion': row.criterion,
        'k': row.k_neighbors,
        'stratum': row.anomaly_stratum,
        'train_mase_mean': row.train_mean_mase,
        'train_mase_std': row.train_std_mase,
        'test_mase_mean': row.mean_mase,
        'test_mase_std': row.std_mase,
        'n_cities': row.n_cities,
    } for row in rows]
    return pd.DataFrame(data, columns=SUMMARY_COLUMNS)


def plotdata_frame(rows: Sequence[SummaryRow], algorithm: Optional[str]) -> pd.DataFrame:
    """Bars of the k-sweep chart: one algorithm per disease"""
    data = [{
        'disease': row.disease,
        'criterion': row.criterion,
        'k': row.k_neighbors,
        'stratum': row.anomaly_stratum,
        'mean_mase': row.mean_mase,
        'std_mase': row.std_mase,
    } for row in rows if row.algorithm == algorithm]
    return pd.DataFrame(data, columns=PLOTDATA_COLUMNS)


def neighbors_frame(rankings: Mapping[str, Mapping[CityId, NeighborRanking]]) -> pd.DataFrame:
    data = []
    for criterion in sorted(rankings):
        for target in sorted(rankings[criterion]):
            for rank, (neighbor, distance) in enumerate(rankings[criterion][target].ordered, start=1):
                data.append({
                    'target_id': target,
                    'rank': rank,
                    'neighbor_id': neighbor,
                    'distance': distance,
                    'criterion': criterion,
                })
    return pd.DataFrame(data, columns=NEIGHBORS_COLUMNS)


def forecasts_frame(traces: Mapping[CityId, Dict[str, list]]) -> pd.DataFrame:
    """``traces[city]`` holds parallel ``week``, ``actual`` and ``predicted`` lists"""
    data = []
    for city in sorted(traces):
        trace = traces[city]
        for week, actual, predicted in zip(trace['week'], trace['actual'], trace['predicted']):
            data.append({'city_id': city, 'week': week, 'actual': actual, 'predicted': predicted})
    return pd.DataFrame(data, columns=FORECASTS_COLUMNS)


def stats_frame(stats: Iterable[CohortStats]) -> pd.DataFrame:
    data = [{
        'disease': s.disease,
        'n_cities': s.n_cities,
        'mean': s.mean,
        'std': s.std,
        'max': s.max,
        'skewness_mean': s.skewness_mean,
        'skewness_std': s.skewness_std,
    } for s in stats]
    return pd.DataFrame(data, columns=STATS_COLUMNS)


def write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator='\n', na_rep='')
    logger.info(f'Wrote {len(frame)} rows to {path}')
    return path


def write_workbook(path: Path, sheets: Mapping[str, pd.DataFrame]) -> Path:
    """Excel copy of the tabular outputs with styled header rows"""
    from openpyxl.styles import Alignment, Font, PatternFill

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header_font = Font(bold=True, color='FFFFFF')
    header_fill = PatternFill(start_color='0066CC', end_color='0066CC', fill_type='solid')

    with pd.ExcelWriter(path, engine='openpyxl') as writer:
        for sheet_name, frame in sheets.items():
            frame.to_excel(writer, sheet_name=sheet_name, index=False)
            worksheet = writer.sheets[sheet_name]
            for col_num in range(1, len(frame.columns) + 1):
                cell = worksheet.cell(row=1, column=col_num)
                cell.font = header_font
                cell.fill = header_fill
                cell.alignment = Alignment(horizontal='center')
            for column in worksheet.columns:
                cells = list(column)
                widest = max(len(str(cell.value)) for cell in cells if cell.value is not None)
                worksheet.column_dimensions[cells[0].column_letter].width = min(widest + 2, 50)
    logger.info(f'Wrote workbook {path} ({", ".join(sheets)})')
    return path


def dump_models(directory: Path, disease: str, models: Mapping[tuple, dict]) -> List[Path]:
    """One JSON file per (city, algorithm, criterion, k) best model"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for (city, algorithm, criterion, k) in sorted(models):
        path = directory / f'{disease}_{city}_{algorithm}_{criterion}_k{k}.json'
        with open(path, 'w', encoding='utf-8') as handle:
            json.dump(models[(city, algorithm, criterion, k)], handle, sort_keys=True)
        written.append(path)
    logger.info(f'Dumped {len(written)} models to {directory}')
    return written
