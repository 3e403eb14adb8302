import os
from pathlib import Path
import tempfile
import unittest

import numpy as np
import pandas as pd

from IncomeVerification import ConfigurationError
from IncomeVerification.datagen import SynthConfig, generate_synthetic
from IncomeVerification.pipeline import (
    RunConfig, ablate, evaluate_models, plot_source_count,
)
from IncomeVerification.pipeline.ablation import ablation_columns

from tests.test_models import setup_resources
from tests.toy_fixtures import setup_fast_config, setup_synthetic, setup_toy_examples


RUN_BENCHMARK = os.environ.get('INCOMEVERIFICATION_BENCHMARK') == '1'


class TestAblation(unittest.TestCase):

    def __init__(self, methodName='runTest'):
        super().__init__(methodName)

    def setUp(self):
        self.train = setup_toy_examples(n=30, seed=0)
        self.test = setup_toy_examples(n=9, seed=1)
        self.config = setup_fast_config()

    def test_input_features(self):
        report = ablate('input_features', self.train, self.test, self.config)

        self.assertEqual(list(report.columns), ablation_columns('input_features'))
        self.assertEqual(
            list(report['Features']),
            ['All features', '- Job Title', '- Employer Name', '- State', '- City']
        )
        self.assertTrue((report['Test Set MAE'] > 0).all())

    def test_invalid_study(self):
        with self.assertRaises(ConfigurationError):
            ablate('dropout', self.train, self.test, self.config)
        with self.assertRaises(ConfigurationError):
            ablate('sources_count', self.train, self.test, self.config)

    def test_plot_source_count(self):
        report = pd.DataFrame({
            '# sources': [1, 2, 3, 4, 5],
            'CV MAE': [5.0, 4.0, 3.5, 3.2, 3.2],
            'Test Set MAE': [5.1, 4.2, 3.4, 3.3, 3.3],
            'Test Set MRE': [0.3, 0.25, 0.22, 0.21, 0.21],
        })
        with tempfile.TemporaryDirectory() as tmpdir:
            path = Path(tmpdir) / 'source_count.png'
            _, ax = plot_source_count(report, path)
            self.assertTrue(path.exists())

        self.assertEqual(ax.get_xlabel(), 'Number of sources')
        self.assertEqual(len(ax.lines), 1)


class TestExternalAblation(unittest.TestCase):
    """Report shapes of the external studies on a small synthetic world."""

    @classmethod
    def setUpClass(cls):
        cls.data = setup_synthetic()
        cls.config = setup_fast_config()
        cls.resources = setup_resources(cls.data, cls.config)

    def test_sources_count(self):
        report = ablate(
            'sources_count', self.data.train, self.data.test, self.config,
            self.resources
        )

        self.assertEqual(list(report.columns), ablation_columns('sources_count'))
        self.assertEqual(len(report), 5)
        self.assertEqual(list(report['# sources']), [1, 2, 3, 4, 5])
        errors = report[['CV MAE', 'Test Set MAE']].to_numpy()
        self.assertTrue(np.isfinite(errors).all())
        self.assertTrue((report['Test Set MAE'] > 0).all())

    def test_salary_features(self):
        report = ablate(
            'salary_features', self.data.train, self.data.test, self.config,
            self.resources
        )

        self.assertEqual(list(report.columns), ablation_columns('salary_features'))
        self.assertEqual(
            list(report['Features']), ['All features', '- Low', '- Median', '- High']
        )
        errors = report[['CV MAE', 'Test Set MAE']].to_numpy()
        self.assertTrue(np.isfinite(errors).all())
        self.assertTrue((report['Test Set MAE'] > 0).all())


@unittest.skipUnless(RUN_BENCHMARK, 'set INCOMEVERIFICATION_BENCHMARK=1 to run')
class TestBenchmark(unittest.TestCase):
    """Orderings on the shipped synthetic benchmark seed."""

    @classmethod
    def setUpClass(cls):
        cls.data = generate_synthetic(SynthConfig.preset('client'))
        cls.config = RunConfig(internal_variant='bow_gbt')
        cls.resources = setup_resources(cls.data, cls.config)

    def test_moments(self):
        incomes = [e.true_income.dollars for e in self.data.train]
        self.assertEqual(len(incomes), 3108)
        self.assertLess(abs(pd.Series(incomes).mean() / 77571.760 - 1), 0.02)
        self.assertLess(abs(pd.Series(incomes).std() / 57979.323 - 1), 0.05)

    def test_combined_is_best(self):
        report = evaluate_models(
            ['bow_gbt', 'external_gbt', 'combined'], self.data.train, self.data.test,
            self.config, self.resources, self.data.external_corpus,
        ).set_index('Model')['Test Set MAE']

        self.assertLess(report['Combined + GBT'], report['BOW + GBT'])
        self.assertLess(report['Combined + GBT'], report['External data + GBT'])

    def test_sources_count(self):
        report = ablate(
            'sources_count', self.data.train, self.data.test, self.config, self.resources
        ).set_index('# sources')['Test Set MAE']

        self.assertGreater(report[1], report[4])
        self.assertLess(abs(report[5] - report[4]) / report[4], 0.02)

    def test_salary_features(self):
        report = ablate(
            'salary_features', self.data.train, self.data.test, self.config,
            self.resources
        ).set_index('Features')['Test Set MAE']

        self.assertGreater(report['- Median'], report['- Low'])
        self.assertGreater(report['- Median'], report['- High'])

    def test_input_features(self):
        report = ablate(
            'input_features', self.data.train, self.data.test, self.config
        ).set_index('Features')['Test Set MAE']

        for row in ('- Employer Name', '- State', '- City'):
            self.assertGreater(report['- Job Title'], report[row])


if __name__ == '__main__':
    unittest.main()
