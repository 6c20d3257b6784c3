"""
ISO-8601 epidemiological week tokens (``YYYY-Www``).

Weeks are identified by the Monday that starts them so that week arithmetic
is plain day arithmetic.
"""
import re
from dataclasses import dataclass
from datetime import date, timedelta

_TOKEN = re.compile(r'^(\d{4})-W(\d{2})$')


@dataclass(frozen=True, order=True)
class EpiWeek:
    monday: date

    @classmethod
    def parse(cls, token: str) -> 'EpiWeek':
        match = _TOKEN.match(str(token).strip())
        if not match:
            raise ValueError(f'bad week token {token!r}, expected YYYY-Www')
        year, week = int(match.group(1)), int(match.group(2))
        try:
            monday = date.fromisocalendar(year, week, 1)
        except ValueError as exc:
            raise ValueError(f'bad week token {token!r}: {exc}') from exc
        return cls(monday)

    def __add__(self, weeks: int) -> 'EpiWeek':
        return EpiWeek(self.monday + timedelta(weeks=int(weeks)))

    def __sub__(self, other: 'EpiWeek') -> int:
        """Number of weeks from ``other`` to ``self``"""
        return (self.monday - other.monday).days // 7

    def __str__(self) -> str:
        year, week, _ = self.monday.isocalendar()
        return f'{year:04d}-W{week:02d}'


def weeks_between(start: EpiWeek, end: EpiWeek) -> int:
    """Inclusive length of the range start..end"""
    return end - start + 1
