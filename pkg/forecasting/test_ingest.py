"""
Test cases for CSV snapshot ingestion
Tests case series parsing, gap filling, metadata joins and cohort filtering
"""
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from .exceptions import CohortError, IngestError
from .ingest import CityMeta, WeeklySeries, build_cohort, load_case_series, load_city_meta
from .preprocess import DiseaseConfig
from .weeks import EpiWeek, weeks_between


def write_csv(directory, name, lines):
    path = Path(directory) / name
    path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
    return path


class EpiWeekTest(SimpleTestCase):
    """Test ISO week tokens and week arithmetic"""

    def test_parse_and_format(self):
        week = EpiWeek.parse('2020-W01')
        self.assertEqual(str(week), '2020-W01')
        self.assertEqual(week.monday.isoformat(), '2019-12-30')

    def test_arithmetic_crosses_years(self):
        week = EpiWeek.parse('2020-W52')
        self.assertEqual(str(week + 1), '2020-W53')
        self.assertEqual(str(week + 2), '2021-W01')
        self.assertEqual(EpiWeek.parse('2021-W01') - week, 2)
        self.assertEqual(weeks_between(EpiWeek.parse('2020-W01'), EpiWeek.parse('2020-W03')), 3)

    def test_bad_tokens(self):
        for token in ('2020-01', '2020-W1', '2021-W53', 'week'):
            with self.assertRaises(ValueError):
                EpiWeek.parse(token)


class LoadCaseSeriesTest(SimpleTestCase):
    """Test the cases snapshot loader"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def cases(self, *rows):
        return write_csv(self.tmp.name, 'cases.csv', ['city_id,epi_week,cases', *rows])

    def test_rows_merged_in_week_order(self):
        path = self.cases('A,2020-W02,5', 'A,2020-W01,3')
        series = load_case_series(path, 'dengue')
        self.assertEqual(len(series), 1)
        self.assertEqual(series[0].city, 'A')
        self.assertEqual(str(series[0].start_week), '2020-W01')
        self.assertEqual(series[0].values, (3, 5))

    def test_gap_weeks_are_zero_filled(self):
        path = self.cases('A,2020-W01,3', 'A,2020-W03,5')
        series = load_case_series(path, 'dengue')
        self.assertEqual(series[0].values, (3, 0, 5))

    def test_series_sorted_by_city(self):
        path = self.cases('B,2020-W01,1', 'A,2020-W01,2', 'C,2020-W01,3')
        self.assertEqual([s.city for s in load_case_series(path, 'zika')], ['A', 'B', 'C'])

    def test_negative_count_names_line(self):
        path = self.cases('A,2020-W01,3', 'A,2020-W02,-2')
        with self.assertRaises(IngestError) as ctx:
            load_case_series(path, 'dengue')
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn('negative case count', str(ctx.exception))

    def test_non_integer_and_bad_week(self):
        with self.assertRaises(IngestError) as ctx:
            load_case_series(self.cases('A,2020-W01,3.5'), 'dengue')
        self.assertIn('non-integer', str(ctx.exception))

        with self.assertRaises(IngestError) as ctx:
            load_case_series(self.cases('A,2020-01-06,3'), 'dengue')
        self.assertEqual(ctx.exception.line, 2)

    def test_duplicate_city_week(self):
        path = self.cases('A,2020-W01,3', 'A,2020-W01,4')
        with self.assertRaises(IngestError) as ctx:
            load_case_series(path, 'dengue')
        self.assertIn('duplicate', str(ctx.exception))

    def test_missing_column_is_line_one(self):
        path = write_csv(self.tmp.name, 'cases.csv', ['city_id,week,cases', 'A,2020-W01,1'])
        with self.assertRaises(IngestError) as ctx:
            load_case_series(path, 'dengue')
        self.assertEqual(ctx.exception.line, 1)

    def test_missing_file(self):
        with self.assertRaises(IngestError):
            load_case_series(Path(self.tmp.name) / 'absent.csv', 'dengue')

    def test_loading_twice_is_idempotent(self):
        path = self.cases('A,2020-W01,3', 'A,2020-W04,5', 'B,2020-W02,7')
        self.assertEqual(load_case_series(path, 'dengue'), load_case_series(path, 'dengue'))


class LoadCityMetaTest(SimpleTestCase):
    """Test the coordinates and GDP join"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def files(self, city_rows, gdp_rows):
        cities = write_csv(self.tmp.name, 'cities.csv', ['city_id,name,latitude,longitude', *city_rows])
        gdp = write_csv(self.tmp.name, 'gdp.csv', ['city_id,year,gdp_per_capita', *gdp_rows])
        return cities, gdp

    def test_join(self):
        meta = load_city_meta(*self.files(['A,Alpha,-23.5,-46.6'], ['A,2014,30000', 'A,2015,31000']))
        self.assertEqual(
            meta['A'],
            CityMeta(city='A', name='Alpha', latitude=-23.5, longitude=-46.6,
                     gdp_per_capita={2014: 30000.0, 2015: 31000.0}),
        )

    def test_latitude_out_of_range(self):
        with self.assertRaises(IngestError) as ctx:
            load_city_meta(*self.files(['A,Alpha,91,-46.6'], []))
        self.assertIn('latitude', str(ctx.exception))

    def test_unknown_gdp_city_is_skipped_with_warning(self):
        with self.assertLogs('forecasting.ingest', level='WARNING') as logs:
            meta = load_city_meta(*self.files(['A,Alpha,-23.5,-46.6'], ['Z,2014,100', 'A,2014,200']))
        self.assertEqual(list(meta), ['A'])
        self.assertEqual(meta['A'].gdp_per_capita, {2014: 200.0})
        self.assertTrue(any("'Z'" in line for line in logs.output))

    def test_non_positive_gdp(self):
        with self.assertRaises(IngestError):
            load_city_meta(*self.files(['A,Alpha,0,0'], ['A,2014,0']))


class BuildCohortTest(SimpleTestCase):
    """Test cohort filtering"""

    def setUp(self):
        self.config = DiseaseConfig(
            disease='dengue',
            train_range=(EpiWeek.parse('2020-W01'), EpiWeek.parse('2020-W03')),
            test_range=(EpiWeek.parse('2020-W04'), EpiWeek.parse('2020-W05')),
            gdp_years=(2016, 2018),
        )
        self.start = EpiWeek.parse('2019-W52')

    def series(self, city, start=None, n=7):
        return WeeklySeries(city=city, disease='dengue', start_week=start or self.start, values=tuple(range(1, n + 1)))

    def meta(self, city, years=(2016, 2017, 2018)):
        return CityMeta(city=city, latitude=0.0, longitude=0.0, gdp_per_capita={y: 1000.0 for y in years})

    def test_city_missing_gdp_year_is_dropped(self):
        series = [self.series(c) for c in 'ABCD']
        meta = {c: self.meta(c) for c in 'ABC'}
        meta['D'] = self.meta('D', years=(2016, 2018))
        cohort = build_cohort(series, meta, self.config)
        self.assertEqual(cohort.cities, ['A', 'B', 'C'])

    def test_series_sliced_to_full_range(self):
        cohort = build_cohort([self.series('A')], {'A': self.meta('A')}, self.config)
        self.assertEqual(set(cohort.series), set(cohort.meta))
        self.assertEqual(len(cohort.series['A'].values), 5)
        self.assertEqual(cohort.series['A'].values, (2, 3, 4, 5, 6))
        self.assertEqual(cohort.series['A'].start_week, EpiWeek.parse('2020-W01'))

    def test_incomplete_range_and_missing_coordinates(self):
        short = self.series('A', start=EpiWeek.parse('2020-W02'))
        cohort = build_cohort([short, self.series('B'), self.series('C')], {'B': self.meta('B')}, self.config)
        self.assertEqual(cohort.cities, ['B'])

    def test_empty_cohort(self):
        with self.assertRaises(CohortError) as ctx:
            build_cohort([self.series('A'), self.series('B')], {}, self.config)
        self.assertIn('no city satisfies cohort criteria', str(ctx.exception))
