import unittest

import numpy as np

from IncomeVerification import ContractViolation
from IncomeVerification.core import Money
from IncomeVerification.pipeline import verification_report, verify_income
from IncomeVerification.pipeline.verification import (
    DEFAULT_TAU, VERIFICATION_COLUMNS, is_verifiable,
)

from tests.toy_fixtures import setup_toy_examples


class LookupModel():
    """Predicts a fixed dollar amount per identity id."""

    def __init__(self, incomes):
        self.incomes = incomes

    def predict(self, identities):
        return np.array([self.incomes[i.identity_id] for i in identities], dtype=float)


class TestVerifyIncome(unittest.TestCase):

    def test_decision(self):
        decision = verify_income(Money.from_dollars(50000), Money.from_dollars(100000))
        self.assertFalse(decision.verified)
        self.assertEqual(decision.relative_gap, 1.0)
        self.assertEqual(decision.tau, DEFAULT_TAU)

        decision = verify_income(100000, 110000)
        self.assertTrue(decision.verified)
        np.testing.assert_almost_equal(decision.relative_gap, 0.1)

    def test_boundary(self):
        self.assertTrue(verify_income(100000, 125000, tau=0.25).verified)
        self.assertTrue(verify_income(100000, 75000, tau=0.25).verified)
        self.assertFalse(verify_income(100000, '125000.01', tau=0.25).verified)
        self.assertTrue(verify_income(100000, 100000, tau=0).verified)
        self.assertFalse(verify_income(100000, '100000.01', tau=0).verified)

    def test_relative_to_prediction(self):
        # the tolerance scales with the prediction, not the stated income
        self.assertFalse(verify_income(80000, 100000).verified)
        self.assertTrue(verify_income(100000, 86000).verified)

    def test_invalid_inputs(self):
        with self.assertRaises(ContractViolation):
            verify_income(0, 100000)
        with self.assertRaises(ContractViolation):
            verify_income(100000, Money(0))
        with self.assertRaises(ContractViolation):
            verify_income(100000, 100000, tau=-0.1)

    def test_to_dict(self):
        result = verify_income(100000, 110000).to_dict()
        self.assertEqual(
            sorted(result), ['predicted', 'relative_gap', 'stated', 'tau', 'verified']
        )
        self.assertEqual(result['predicted'], 100000.0)
        self.assertIs(result['verified'], True)

    def test_is_verifiable(self):
        np.testing.assert_equal(
            is_verifiable([100, 116, 84, 200], [100, 100, 100, 100]),
            [True, False, False, False]
        )


class TestVerificationReport(unittest.TestCase):

    def __init__(self, methodName='runTest'):
        super().__init__(methodName)

    def setUp(self):
        # every fourth stated income is inflated by half
        self.test = setup_toy_examples(n=12)
        self.true = {e.identity.identity_id: e.true_income.dollars for e in self.test}
        self.stated = {
            e.identity.identity_id: e.identity.stated_income.dollars for e in self.test
        }

    def test_report(self):
        report = verification_report(
            {'oracle': LookupModel(self.true), 'echo': LookupModel(self.stated)},
            self.test
        )

        self.assertEqual(list(report.columns), VERIFICATION_COLUMNS)
        self.assertEqual(list(report['Model']), ['oracle', 'echo'])
        np.testing.assert_almost_equal(report.iloc[0, 1:].tolist(), [1.0, 1.0, 1.0])
        np.testing.assert_almost_equal(
            report.iloc[1, 1:].tolist(), [0.75, 1.0, 2 * 0.75 / 1.75]
        )

    def test_zero_predictions_never_verify(self):
        zeros = {identity_id: 0.0 for identity_id in self.true}
        report = verification_report({'zero': LookupModel(zeros)}, self.test)
        np.testing.assert_equal(report.iloc[0, 1:].tolist(), [0.0, 0.0, 0.0])

    def test_precomputed_predictions(self):
        predictions = [self.true[e.identity.identity_id] for e in self.test]
        report = verification_report(
            {'oracle': None}, self.test, predictions={'oracle': predictions}
        )
        self.assertEqual(report['F1 score'][0], 1.0)

    def test_missing_stated_income(self):
        unstated = setup_toy_examples(n=4, stated=False)
        report = verification_report(
            {'oracle': LookupModel(self.true)}, self.test + unstated
        )
        self.assertEqual(report['Recall'][0], 1.0)

        with self.assertRaises(ContractViolation):
            verification_report({'oracle': LookupModel(self.true)}, unstated)


if __name__ == '__main__':
    unittest.main()
