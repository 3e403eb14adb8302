import unittest

import numpy as np
from scipy import stats

from IncomeVerification import ContractViolation, RejectedInput
from IncomeVerification.core import (
    Money, compute_metrics, dataset_stats, stats_table,
)


class TestComputeMetrics(unittest.TestCase):

    def test_values(self):
        predictions = [Money.from_dollars(90000), Money.from_dollars(55000)]
        actuals = [Money.from_dollars(100000), Money.from_dollars(50000)]

        report = compute_metrics(predictions, actuals)
        self.assertEqual(report.n, 2)
        np.testing.assert_almost_equal(report.mae, 7500)
        np.testing.assert_almost_equal(report.mre, 0.1)
        self.assertEqual(report.mae_money, Money.from_dollars(7500))

    def test_arrays(self):
        report = compute_metrics(np.array([1.0, 3.0]), np.array([2.0, 2.0]))
        np.testing.assert_almost_equal(report.mae, 1.0)
        np.testing.assert_almost_equal(report.mre, 0.5)

    def test_perfect_prediction(self):
        incomes = [Money.from_dollars(x) for x in (40000, 73482, 120000)]
        report = compute_metrics(incomes, incomes)
        self.assertEqual(report.mae, 0)
        self.assertEqual(report.mre, 0)

    def test_invalid(self):
        with self.assertRaises(ContractViolation):
            compute_metrics([], [])
        with self.assertRaises(ContractViolation):
            compute_metrics([1.0], [1.0, 2.0])
        with self.assertRaises(RejectedInput):
            compute_metrics([1.0, 2.0], [1.0, 0.0])


class TestDatasetStats(unittest.TestCase):

    def test_statistics(self):
        incomes = np.array([40000.0, 52000.0, 61000.0, 75000.0, 250000.0])
        s = dataset_stats(incomes)

        self.assertEqual(s.size, 5)
        np.testing.assert_almost_equal(s.mean, np.mean(incomes))
        np.testing.assert_almost_equal(s.stddev, np.std(incomes, ddof=1))
        np.testing.assert_almost_equal(s.skew, stats.skew(incomes, bias=True))
        self.assertGreater(s.skew, 0)
        self.assertFalse(s.is_degenerate)

    def test_degenerate(self):
        s = dataset_stats([Money.from_dollars(50000)])
        self.assertTrue(s.is_degenerate)
        self.assertEqual(s.stddev, 0)
        self.assertEqual(s.skew, 0)

        s = dataset_stats([50000.0, 50000.0, 50000.0])
        self.assertEqual(s.stddev, 0)
        self.assertEqual(s.skew, 0)

        with self.assertRaises(ContractViolation):
            dataset_stats([])

    def test_stats_table(self):
        table = stats_table({
            'Train': [40000.0, 60000.0],
            'Test': [50000.0, 70000.0, 90000.0],
        })
        self.assertEqual(list(table.columns), ['Dataset', 'Size', 'Mean', 'Stddev', 'Skew'])
        self.assertEqual(list(table['Dataset']), ['Train', 'Test'])
        self.assertEqual(list(table['Size']), [2, 3])
        np.testing.assert_almost_equal(table['Mean'], [50000.0, 70000.0])
        np.testing.assert_almost_equal(table['Stddev'], [np.sqrt(2e8), 20000.0])


if __name__ == '__main__':
    unittest.main()
