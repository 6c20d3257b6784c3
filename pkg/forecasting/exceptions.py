"""
Exception hierarchy for the forecasting toolkit.

Everything raised on purpose derives from WavecastError so the command
layer can map it onto an exit status without swallowing programming errors.
"""
from typing import Optional


class WavecastError(Exception):
    """Base class for expected toolkit failures"""


class IngestError(WavecastError):
    """A CSV snapshot violates its schema or a data invariant"""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        prefix = ''
        if path:
            prefix += f'{path}: '
        if line is not None:
            prefix += f'line {line}: '
        super().__init__(f'{prefix}{message}')


class CohortError(WavecastError):
    """No usable city is left after cohort filtering"""


class ConfigError(WavecastError):
    """Invalid disease or experiment configuration"""


class InsufficientHistory(WavecastError):
    """Series too short for the requested lags, horizon or splits"""


class AlignmentError(WavecastError):
    """Series that must share a date range do not"""


class ModelError(WavecastError):
    """Bad input to a tree, ensemble or grid search"""


class UndefinedMASE(WavecastError):
    """MASE denominator is zero; the raw MAE is kept for fallback reporting"""

    def __init__(self, mae: float):
        self.mae = mae
        super().__init__(f'undefined MASE (constant seasonal pattern); MAE={mae:.6g}')
