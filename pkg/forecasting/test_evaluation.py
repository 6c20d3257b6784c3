"""
Test cases for forecast accuracy metrics
Tests the seasonal naive baseline, MAE, MASE, per-city reports and summaries
"""
import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase

from .evaluation import (
    IN_SAMPLE, STRATUM_ALL, STRATUM_NORMAL, EvalReport, aggregate, best_baseline_algorithm,
    evaluate_city, mae, mase, seasonal_naive,
)
from .exceptions import InsufficientHistory, UndefinedMASE
from .features import augment_dataset
from .learn.ensembles import TreeEnsemble
from .learn.params import HyperParams
from .preprocess import SplitSeries
from .test_preprocess import config_for


def report(city, test_mase, algorithm='random_forest', criterion='none', k=0, anomalous=False, train_mase=0.5):
    return EvalReport(
        city=city,
        disease='dengue',
        criterion=criterion,
        k_neighbors=k,
        algorithm=algorithm,
        params=HyperParams(algorithm=algorithm),
        anomalous=anomalous,
        train_mae=1.0,
        train_mase=train_mase,
        test_mae=1.0,
        test_mase=test_mase,
        scale=1.0,
    )


def last_lag(ensemble, rows):
    return np.asarray(rows, dtype=float)[:, -1]


class SeasonalNaiveTest(SimpleTestCase):
    """Test the lag-m baseline"""

    def test_examples(self):
        np.testing.assert_array_equal(seasonal_naive([3, 1, 4, 1, 5], 1, [2, 3, 4]), [1, 4, 1])
        np.testing.assert_array_equal(seasonal_naive([3, 1, 4, 1, 5], 2, [2, 4]), [3, 4])

    def test_index_before_m(self):
        with self.assertRaises(InsufficientHistory):
            seasonal_naive([1, 2, 3], 2, [1, 2])


class MAETest(SimpleTestCase):
    """Test mean absolute error"""

    def test_examples(self):
        self.assertEqual(mae([1, 2, 3], [1, 2, 3]), 0.0)
        self.assertEqual(mae([0, 0], [1, -3]), 2.0)

    def test_homogeneity(self):
        rng = np.random.default_rng(4)
        predictions = rng.normal(size=20)
        actuals = rng.normal(size=20)
        base = mae(predictions, actuals)
        for c in (0.5, 3.0, 1e3):
            self.assertAlmostEqual(mae(predictions * c, actuals * c), c * base, places=9)

    def test_bad_windows(self):
        with self.assertRaises(ValueError):
            mae([1, 2], [1])
        with self.assertRaises(ValueError):
            mae([], [])


class MASETest(SimpleTestCase):
    """Test the scaled error"""

    def test_hand_example(self):
        # naive errors 1, 2, 2 against model errors 1, 0, 1
        self.assertEqual(mase([3, 4, 5], [2, 4, 6], [0, 1, 2, 4, 6], 1), 0.4)

    def test_naive_forecast_scores_one(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            history = rng.uniform(0, 100, size=30)
            indices = np.arange(20, 30)
            predictions = seasonal_naive(history, 1, indices)
            self.assertEqual(mase(predictions, history[indices], history, 1, indices), 1.0)

    def test_scale_invariance(self):
        rng = np.random.default_rng(12)
        history = rng.uniform(0, 50, size=25)
        predictions = rng.uniform(0, 50, size=5)
        base = mase(predictions, history[-5:], history, 1)
        for c in (1e-3, 1.0, 1e4):
            scaled = mase(predictions * c, history[-5:] * c, history * c, 1)
            self.assertLess(abs(scaled - base), 1e-12)

    def test_constant_window_is_undefined(self):
        with self.assertRaises(UndefinedMASE) as ctx:
            mase([2, 4], [3, 3], [3, 3, 3], 1)
        self.assertEqual(ctx.exception.mae, 1.0)

    def test_in_sample_denominator_may_differ_in_length(self):
        history = [0, 2, 0, 2, 1, 1]
        # in-sample naive errors over indices 1..3 are all 2
        self.assertEqual(mase([1, 1], [0, 2], history, 1, range(1, 4)), 0.5)


class EvaluateCityTest(SimpleTestCase):
    """Test per-city reports with a stubbed model"""

    def setUp(self):
        self.config = config_for(20, 6)
        rng = np.random.default_rng(6)
        values = rng.uniform(1, 10, size=26)
        self.split = SplitSeries(train=values[:20] / 10, test=values[20:] / 10, scale=10.0)
        self.ensemble = TreeEnsemble(
            params=HyperParams(algorithm='random_forest'), trees=(), base_value=0.0, seed=0, n_features=5,
        )

    def evaluate(self, split=None, **kwargs):
        split = split or self.split
        train, test = augment_dataset('T', {'T': split}, [], self.config)
        return evaluate_city(self.ensemble, train, test, split, self.config, city='T', **kwargs)

    def test_naive_model_scores_one(self):
        with mock.patch('forecasting.evaluation.predict', side_effect=last_lag):
            result = self.evaluate()
        self.assertEqual(result.test_mase, 1.0)
        self.assertEqual(result.train_mase, 1.0)
        self.assertEqual((result.city, result.criterion, result.k_neighbors), ('T', 'none', 0))
        self.assertEqual(result.algorithm, 'random_forest')

    def test_mae_reported_in_case_units(self):
        with mock.patch('forecasting.evaluation.predict', side_effect=lambda e, rows: np.zeros(len(rows))):
            result = self.evaluate()
        self.assertAlmostEqual(result.test_mae, float(np.mean(self.split.test)) * 10.0, places=9)
        self.assertEqual(result.scale, 10.0)

    def test_constant_test_window(self):
        train = np.linspace(0.1, 1.0, 20)
        split = SplitSeries(train=train, test=np.ones(6), scale=4.0)
        with mock.patch('forecasting.evaluation.predict', side_effect=lambda e, rows: np.full(len(rows), 0.5)):
            with self.assertLogs('forecasting.evaluation', level='WARNING'):
                result = self.evaluate(split=split)
        self.assertTrue(math.isnan(result.test_mase))
        self.assertAlmostEqual(result.test_mae, 2.0)
        self.assertFalse(math.isnan(result.train_mase))

    def test_in_sample_denominator(self):
        with mock.patch('forecasting.evaluation.predict', side_effect=last_lag):
            result = self.evaluate(mase_denominator=IN_SAMPLE)
        history = self.split.history
        in_sample = np.mean(np.abs(np.diff(self.split.train)))
        expected = np.mean(np.abs(np.diff(history[19:]))) / in_sample
        self.assertAlmostEqual(result.test_mase, expected, places=12)

    def test_seasonal_period_longer_than_lags(self):
        self.config = config_for(20, 6, seasonal_m=8)
        zero = lambda e, rows: np.zeros(len(rows))
        with mock.patch('forecasting.evaluation.predict', side_effect=zero):
            result = self.evaluate()
        train = self.split.train
        # rows start at week 4; only weeks 8..19 have a lag-8 naive forecast
        expected = np.sum(train[8:]) / np.sum(np.abs(train[8:] - train[:12]))
        self.assertAlmostEqual(result.train_mase, expected, places=12)
        self.assertFalse(math.isnan(result.test_mase))

    def test_seasonal_period_covering_train_window(self):
        self.config = config_for(20, 6, seasonal_m=20)
        with mock.patch('forecasting.evaluation.predict', side_effect=last_lag):
            with self.assertLogs('forecasting.evaluation', level='WARNING') as logs:
                result = self.evaluate()
        self.assertTrue(math.isnan(result.train_mase))
        self.assertFalse(math.isnan(result.test_mase))
        self.assertIn('seasonal_m=20', logs.output[0])

    def test_anomaly_flag(self):
        spiked = SplitSeries(train=self.split.train, test=np.r_[self.split.test[:5], 50.0], scale=10.0)
        with mock.patch('forecasting.evaluation.predict', side_effect=last_lag):
            self.assertFalse(self.evaluate().anomalous)
            self.assertTrue(self.evaluate(split=spiked).anomalous)


class AggregateTest(SimpleTestCase):
    """Test cross-city summaries"""

    def test_mean_and_population_std(self):
        rows = aggregate([report('A', 0.4), report('B', 0.6)])
        by_stratum = {row.anomaly_stratum: row for row in rows}
        self.assertEqual(set(by_stratum), {STRATUM_ALL, STRATUM_NORMAL})
        for row in rows:
            self.assertAlmostEqual(row.mean_mase, 0.5)
            self.assertAlmostEqual(row.std_mase, 0.1)
            self.assertEqual(row.n_cities, 2)

    def test_anomalous_cities_leave_normal_stratum(self):
        rows = aggregate([report('A', 0.4), report('B', 0.6), report('C', 5.0, anomalous=True)])
        by_stratum = {row.anomaly_stratum: row for row in rows}
        self.assertEqual(by_stratum[STRATUM_ALL].n_cities, 3)
        self.assertEqual(by_stratum[STRATUM_NORMAL].n_cities, 2)
        self.assertAlmostEqual(by_stratum[STRATUM_NORMAL].mean_mase, 0.5)

    def test_all_anomalous_omits_normal_stratum(self):
        rows = aggregate([report('A', 1.0, anomalous=True), report('B', 2.0, anomalous=True)])
        self.assertEqual([row.anomaly_stratum for row in rows], [STRATUM_ALL])

    def test_without_stratification(self):
        rows = aggregate([report('A', 0.4), report('B', 0.6)], stratify=False)
        self.assertEqual([row.anomaly_stratum for row in rows], [STRATUM_ALL])

    def test_nan_mase_is_skipped_but_counted(self):
        rows = aggregate([report('A', 0.4), report('B', math.nan)], stratify=False)
        self.assertEqual(rows[0].mean_mase, 0.4)
        self.assertEqual(rows[0].n_cities, 2)

    def test_groups_by_configuration(self):
        reports = [
            report('A', 1.0),
            report('A', 0.8, criterion='geographic', k=1),
            report('A', 0.7, criterion='geographic', k=2),
            report('A', 0.9, algorithm='gradient_boosting'),
        ]
        keys = [(r.algorithm, r.criterion, r.k_neighbors) for r in aggregate(reports, stratify=False)]
        self.assertEqual(keys, [
            ('gradient_boosting', 'none', 0),
            ('random_forest', 'geographic', 1),
            ('random_forest', 'geographic', 2),
            ('random_forest', 'none', 0),
        ])

    def test_permutation_invariant(self):
        rng = np.random.default_rng(21)
        reports = [
            report(f'c{i}', float(rng.uniform(0, 3)), anomalous=bool(i % 4 == 0), train_mase=float(rng.uniform()))
            for i in range(13)
        ]
        expected = aggregate(reports)
        for _ in range(5):
            shuffled = [reports[i] for i in rng.permutation(len(reports))]
            self.assertEqual(aggregate(shuffled), expected)


class BestBaselineAlgorithmTest(SimpleTestCase):
    """Test choosing the algorithm for augmentation"""

    def test_lowest_normal_mean_wins(self):
        reports = [
            report('A', 0.9),
            report('B', 0.9),
            report('A', 0.7, algorithm='gradient_boosting'),
            report('B', 0.8, algorithm='gradient_boosting'),
            report('C', 0.1, anomalous=True),
            report('A', 0.1, criterion='geographic', k=1),
        ]
        self.assertEqual(
            best_baseline_algorithm(reports, ['random_forest', 'gradient_boosting']), 'gradient_boosting',
        )

    def test_ties_keep_configured_order(self):
        reports = [report('A', 0.5), report('A', 0.5, algorithm='gradient_boosting')]
        self.assertEqual(
            best_baseline_algorithm(reports, ['gradient_boosting', 'random_forest']), 'gradient_boosting',
        )

    def test_all_anomalous_falls_back_to_every_city(self):
        reports = [report('A', 0.5, anomalous=True), report('A', 0.4, algorithm='gradient_boosting', anomalous=True)]
        self.assertEqual(
            best_baseline_algorithm(reports, ['random_forest', 'gradient_boosting']), 'gradient_boosting',
        )

    def test_no_baseline(self):
        self.assertIsNone(best_baseline_algorithm([], ['random_forest']))
