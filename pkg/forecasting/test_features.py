"""
Test cases for neighbor-lag feature augmentation
"""
import numpy as np
from django.test import SimpleTestCase

from .exceptions import AlignmentError, InsufficientHistory
from .features import augment_dataset
from .preprocess import SplitSeries, make_lag_dataset
from .test_preprocess import config_for


def split_of(values, n_train):
    values = np.asarray(values, dtype=float)
    return SplitSeries(train=values[:n_train], test=values[n_train:], scale=1.0)


class AugmentDatasetTest(SimpleTestCase):
    """Test column layout, alignment and row weeks"""

    def setUp(self):
        self.config = config_for(20, 6)
        rng = np.random.default_rng(1)
        self.splits = {
            city: split_of(rng.uniform(0, 1, size=26), 20) for city in ('T', 'A', 'B', 'C')
        }

    def test_no_neighbors_equals_own_lags(self):
        train, test = augment_dataset('T', self.splits, [], self.config)
        history = self.splits['T'].history
        alone = make_lag_dataset(history, 5, 1, source='T')
        n_train_rows = 20 - 5
        np.testing.assert_array_equal(train.feature_matrix, alone.feature_matrix[:n_train_rows])
        np.testing.assert_array_equal(train.targets, alone.targets[:n_train_rows])
        np.testing.assert_array_equal(test.feature_matrix, alone.feature_matrix[n_train_rows:])
        np.testing.assert_array_equal(test.targets, self.splits['T'].test)
        np.testing.assert_array_equal(test.row_weeks, np.arange(20, 26))

    def test_three_neighbors_give_twenty_columns(self):
        train, test = augment_dataset('T', self.splits, ['B', 'A', 'C'], self.config)
        self.assertEqual(train.n_features, 20)
        self.assertEqual(test.n_features, 20)
        self.assertEqual([source for source, _ in train.column_labels[::5]], ['T', 'B', 'A', 'C'])
        self.assertEqual(len(set(train.column_labels)), 20)

    def test_augmentation_adds_columns_only(self):
        plain_train, plain_test = augment_dataset('T', self.splits, [], self.config)
        train, test = augment_dataset('T', self.splits, ['A', 'B'], self.config)
        np.testing.assert_array_equal(train.row_weeks, plain_train.row_weeks)
        np.testing.assert_array_equal(train.targets, plain_train.targets)
        np.testing.assert_array_equal(test.targets, plain_test.targets)
        np.testing.assert_array_equal(train.feature_matrix[:, :5], plain_train.feature_matrix)

    def test_neighbor_lags_are_causal(self):
        train, _ = augment_dataset('T', self.splits, ['A'], self.config)
        a = self.splits['A'].history
        for row, week in enumerate(train.row_weeks):
            np.testing.assert_array_equal(train.feature_matrix[row, 5:], a[week - 5:week])

    def test_first_test_row_reaches_into_training(self):
        _, test = augment_dataset('T', self.splits, ['A'], self.config)
        np.testing.assert_array_equal(test.feature_matrix[0, :5], self.splits['T'].train[-5:])
        np.testing.assert_array_equal(test.feature_matrix[0, 5:], self.splits['A'].train[-5:])

    def test_identical_neighbor_duplicates_columns(self):
        splits = dict(self.splits, A=self.splits['T'])
        train, test = augment_dataset('T', splits, ['A'], self.config)
        np.testing.assert_array_equal(train.feature_matrix[:, :5], train.feature_matrix[:, 5:])
        np.testing.assert_array_equal(test.feature_matrix[:, :5], test.feature_matrix[:, 5:])

    def test_short_neighbor(self):
        splits = dict(self.splits, A=split_of(np.ones(25), 20))
        with self.assertRaises(AlignmentError):
            augment_dataset('T', splits, ['A'], self.config)

    def test_target_as_neighbor(self):
        with self.assertRaises(AlignmentError):
            augment_dataset('T', self.splits, ['T'], self.config)
        with self.assertRaises(AlignmentError):
            augment_dataset('T', self.splits, ['A', 'A'], self.config)

    def test_too_little_training_history(self):
        splits = {'T': split_of(np.ones(8), 5)}
        with self.assertRaises(InsufficientHistory):
            augment_dataset('T', splits, [], config_for(5, 3))
