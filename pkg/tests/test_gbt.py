import os
import tempfile
import unittest

import numpy as np

from IncomeVerification import ConfigurationError, ContractViolation
from IncomeVerification.core import Money
from IncomeVerification.learners import GBTEnsemble, gbt_predict, gbt_train


def exhaustive_stump_sse(X, y):
    """Lowest squared error of any single split at a midpoint threshold."""
    best = np.sum((y - y.mean()) ** 2)
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        for lo, hi in zip(values[:-1], values[1:]):
            left = X[:, f] <= (lo + hi) / 2
            sse = (
                np.sum((y[left] - y[left].mean()) ** 2)
                + np.sum((y[~left] - y[~left].mean()) ** 2)
            )
            best = min(best, sse)
    return best


class TestGBT(unittest.TestCase):

    def __init__(self, methodName='runTest'):
        super().__init__(methodName)

    def setUp(self):
        rng = np.random.default_rng(4)
        self.X = rng.uniform(size=(80, 4))
        self.y = 50000 + 40000 * self.X[:, 0] + 20000 * (self.X[:, 2] > 0.5) \
            + 2000 * rng.standard_normal(80)

    def test_stump_matches_exhaustive_search(self):
        rng = np.random.default_rng(8)
        for instance in range(100):
            n_rows, n_features = rng.integers(10, 40), rng.integers(1, 5)
            X = rng.uniform(size=(n_rows, n_features))
            y = rng.uniform(size=n_rows) + 2 * (X[:, -1] > rng.uniform(0.2, 0.8))

            with self.subTest(instance=instance):
                ensemble = gbt_train(X, y, rounds=1, max_depth=1, learning_rate=1.0)
                self.assertEqual(ensemble.n_rounds, 1)
                self.assertEqual(ensemble.trees[0].depth, 1)

                sse = np.sum((y - ensemble.predict(X, clamp=False)) ** 2)
                np.testing.assert_almost_equal(sse, exhaustive_stump_sse(X, y))

    def test_initial_prediction(self):
        ensemble = gbt_train(self.X, self.y, rounds=0)
        np.testing.assert_almost_equal(ensemble.initial, self.y.mean())
        np.testing.assert_almost_equal(ensemble.predict(self.X), self.y.mean())

    def test_train_loss_non_increasing(self):
        ensemble = gbt_train(self.X, self.y, rounds=50, max_depth=3, learning_rate=0.1)
        loss = np.array(ensemble.train_loss)

        self.assertEqual(len(loss), ensemble.n_rounds + 1)
        self.assertTrue(np.all(np.diff(loss) <= 1e-9 * loss[0]))
        self.assertLess(loss[-1], 0.2 * loss[0])
        np.testing.assert_almost_equal(
            loss[-1], np.mean((self.y - ensemble.predict(self.X, clamp=False)) ** 2),
            decimal=3
        )

    def test_max_depth(self):
        ensemble = gbt_train(self.X, self.y, rounds=5, max_depth=2, learning_rate=0.5)
        for tree in ensemble.trees:
            self.assertLessEqual(tree.depth, 2)

    def test_early_stop_on_constant_target(self):
        ensemble = gbt_train(self.X, np.full(80, 70000.0), rounds=10)
        self.assertEqual(ensemble.n_rounds, 0)
        np.testing.assert_almost_equal(ensemble.predict(self.X), 70000.0)

    def test_min_leaf(self):
        ensemble = gbt_train(self.X, self.y, rounds=1, max_depth=5, min_leaf=20)
        leaves = [
            n for n, f in enumerate(ensemble.trees[0].feature) if f == -1
        ]
        self.assertLessEqual(len(leaves), 4)

    def test_clamp(self):
        ensemble = gbt_train(self.X[:2], np.array([1.0, 2.0]), rounds=1)
        ensemble.initial = -10.0
        np.testing.assert_equal(ensemble.predict(self.X[:2]), 0.0)
        self.assertTrue(np.all(ensemble.predict(self.X[:2], clamp=False) < 0))

    def test_gbt_predict(self):
        ensemble = gbt_train(self.X, self.y, rounds=10, max_depth=2, learning_rate=0.3)
        prediction = gbt_predict(ensemble, self.X[0])

        self.assertIsInstance(prediction, Money)
        np.testing.assert_almost_equal(
            prediction.dollars, ensemble.predict(self.X[:1])[0], decimal=2
        )

        with self.assertRaises(ContractViolation):
            gbt_predict(ensemble, self.X[0, :2])
        with self.assertRaises(ContractViolation):
            ensemble.predict(self.X[:, :2])

    def test_invalid_configuration(self):
        with self.assertRaises(ConfigurationError):
            gbt_train(self.X, self.y, learning_rate=0)
        with self.assertRaises(ConfigurationError):
            gbt_train(self.X, self.y, learning_rate=1.5)
        with self.assertRaises(ContractViolation):
            gbt_train(self.X, self.y[:10])

    def test_save_load(self):
        ensemble = gbt_train(self.X, self.y, rounds=10, max_depth=3, learning_rate=0.2)
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, 'gbt.json')
            ensemble.save(path)
            loaded = GBTEnsemble.load(path)

        np.testing.assert_equal(loaded.predict(self.X), ensemble.predict(self.X))

        data = ensemble.to_dict()
        data['format'] = 'other'
        with self.assertRaises(ConfigurationError):
            GBTEnsemble.from_dict(data)


if __name__ == '__main__':
    unittest.main()
