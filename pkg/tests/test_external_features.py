import os
import tempfile
import unittest

import numpy as np
import pandas as pd

from IncomeVerification import ContractViolation
from IncomeVerification.core import Money
from IncomeVerification.extract import SalaryAttributes, SourceRecord
from IncomeVerification.extract.attributes import ATTRIBUTES
from IncomeVerification.extfeat import (
    RatioTable, build_external_features, build_ratio_table, export_feature_csv,
    impute_attributes, unified_salary_range,
)
from IncomeVerification.extfeat.externalFeatures import (
    EXTERNAL_DIM, FEATURE_COLUMNS, SLOT_WIDTH, select_columns,
)
from IncomeVerification.match import MatchResult
from IncomeVerification.retrieval import IndustryTable


def dollars(value):
    return Money.from_dollars(value)


LEVELS = {
    'base_low': 0.6, 'base_median': 0.8, 'base_high': 0.9,
    'total_low': 0.9, 'total_median': 1.0, 'total_high': 1.2,
}


def setup_ratio_table():
    """Ratios between fixed levels; r[base_median / total_median] = 0.8."""
    levels = np.array([LEVELS[a] for a in ATTRIBUTES])
    return RatioTable(levels[:, None] / levels[None, :])


def setup_record(record_id, employer='XYZ Company', source_type='government', **attrs):
    return SourceRecord(
        record_id=record_id,
        source_type=source_type,
        identity_fragment={'employer': employer},
        attributes=SalaryAttributes(**{k: dollars(v) for k, v in attrs.items()}),
    )


class TestRatioTable(unittest.TestCase):

    def test_build_ratio_table(self):
        records = [
            setup_record(f'r{i}', base_median=80000, total_median=100000)
            for i in range(3)
        ]
        records.append(setup_record(
            'r-hosp', employer='Mercy Hospital', base_median=60000, total_median=60000
        ))
        records.append(setup_record('r-empty', source_type='snippet'))

        table = build_ratio_table(
            records, IndustryTable({'XYZ Company': 'Technology',
                                    'Mercy Hospital': 'Healthcare'}),
            min_support=3,
        )

        np.testing.assert_almost_equal(
            table.ratio('Technology', 'base_median', 'total_median'), 0.8
        )
        # Healthcare has a single supporting record, below min_support
        np.testing.assert_almost_equal(
            table.ratio('Healthcare', 'base_median', 'total_median'),
            (3 * 0.8 + 1.0) / 4
        )
        self.assertEqual(table.ratio('Travel', 'base_low', 'base_low'), 1.0)
        self.assertTrue(table.is_flagged)
        self.assertIn(('base_low', 'base_median'), table.defaulted_pairs)

    def test_empty_corpus(self):
        with self.assertRaises(ContractViolation):
            build_ratio_table([], IndustryTable())

    def test_save_load(self):
        table = setup_ratio_table()
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, 'ratios.json')
            table.save(path)
            loaded = RatioTable.load(path)
        np.testing.assert_almost_equal(loaded.global_ratios, table.global_ratios)


class TestImputation(unittest.TestCase):

    def test_impute_from_total_median(self):
        attrs = SalaryAttributes(total_median=dollars(100000))
        imputed = impute_attributes(attrs, None, setup_ratio_table())

        self.assertEqual(imputed.base_median, dollars(80000))
        self.assertEqual(imputed.total_median, dollars(100000))
        self.assertEqual(imputed.present, list(ATTRIBUTES))

    def test_anchor_priority(self):
        attrs = SalaryAttributes(
            base_median=dollars(50000), total_median=dollars(60000)
        )
        imputed = impute_attributes(attrs, 'Technology', setup_ratio_table())

        self.assertEqual(imputed.total_median, dollars(60000))
        self.assertEqual(imputed.base_high, dollars(56250))
        self.assertEqual(imputed.total_high, dollars(75000))

    def test_empty_record(self):
        self.assertIsNone(impute_attributes(SalaryAttributes(), None, setup_ratio_table()))

    def test_ordering_after_imputation(self):
        # base_median = 0.8 * 80000 falls below the present base_low
        attrs = SalaryAttributes(base_low=dollars(90000), total_median=dollars(80000))
        self.assertIsNone(impute_attributes(attrs, None, setup_ratio_table()))

        attrs = SalaryAttributes(base_low=dollars(50000), total_median=dollars(80000))
        imputed = impute_attributes(attrs, None, setup_ratio_table())
        self.assertEqual(imputed.base_low, dollars(50000))
        self.assertEqual(imputed.base_median, dollars(64000))
        self.assertIsNone(imputed.order_violation())


class TestExternalFeatureVector(unittest.TestCase):

    def __init__(self, methodName='runTest'):
        super().__init__(methodName)

    def setUp(self):
        full = {a: dollars(100000) for a in ATTRIBUTES}
        self.attrs_by_record = {
            'a': SalaryAttributes(**full),
            'b': SalaryAttributes(**{a: dollars(50000) for a in ATTRIBUTES}),
            'c': None,
        }
        self.matches = [
            MatchResult('b', 0.9, 'high', None),
            MatchResult('a', 0.9, 'high', None),
            MatchResult('c', 0.95, 'high', None),
        ]

    def test_layout(self):
        vector = build_external_features(dollars(100000), self.matches, self.attrs_by_record)

        self.assertEqual(len(vector), EXTERNAL_DIM)
        self.assertEqual(EXTERNAL_DIM, 35)
        self.assertEqual(len(FEATURE_COLUMNS), 35)
        # 'c' has no attributes; ties rank by record id
        self.assertEqual(vector.record_ids, ['a', 'b'])
        np.testing.assert_almost_equal(vector.slot(0), [1.0] * 6 + [0.9])
        np.testing.assert_almost_equal(vector.slot(1), [0.5] * 6 + [0.9])
        np.testing.assert_equal(vector.values[2 * SLOT_WIDTH:], 0.0)
        np.testing.assert_almost_equal(vector.match_scores, [0.9, 0.9, 0, 0, 0])

    def test_top_k(self):
        vector = build_external_features(
            dollars(100000), self.matches, self.attrs_by_record, top_k=1
        )
        self.assertEqual(vector.n_sources, 1)
        np.testing.assert_equal(vector.slot(1), 0.0)

    def test_no_sources(self):
        vector = build_external_features(dollars(100000), [], {})
        np.testing.assert_equal(np.asarray(vector), np.zeros(EXTERNAL_DIM))

    def test_stated_income_required(self):
        with self.assertRaises(ContractViolation):
            build_external_features(None, self.matches, self.attrs_by_record)

    def test_select_columns(self):
        np.testing.assert_equal(select_columns(), np.arange(EXTERNAL_DIM))

        columns = select_columns(drop_groups=['median'], top_k=2)
        self.assertEqual(len(columns), 2 * (SLOT_WIDTH - 2))
        names = [FEATURE_COLUMNS[c] for c in columns]
        self.assertNotIn('s1_base_median', names)
        self.assertIn('s2_match', names)
        self.assertNotIn('s3_match', names)

        with self.assertRaises(ContractViolation):
            select_columns(drop_groups=['bonus'])

    def test_export_feature_csv(self):
        vector = build_external_features(dollars(100000), self.matches, self.attrs_by_record)
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, 'features.csv')
            export_feature_csv(['id-1'], [vector], path)
            df = pd.read_csv(path)

        self.assertEqual(list(df.columns), ['identity_id'] + FEATURE_COLUMNS)
        self.assertEqual(df['s1_match'][0], 0.9)


class TestSalaryRange(unittest.TestCase):

    def test_weighted_range(self):
        records = {
            'gov': setup_record('gov', base_low=60000, base_median=80000, base_high=100000),
            'snip': setup_record('snip', source_type='snippet', base_median=120000),
            'far': setup_record('far', base_median=500000),
        }
        matches = [
            MatchResult('gov', 1.0, 'high', None),
            MatchResult('snip', 0.5, 'medium', None),
            MatchResult('far', 0.2, 'low', None),
        ]

        salary_range = unified_salary_range(records, matches)

        # weights: gov 1.0 * 1.0, snippet 0.4 * 0.5
        self.assertEqual(salary_range.median, dollars(round((80000 + 0.2 * 120000) / 1.2, 2)))
        self.assertEqual(salary_range.low, dollars(60000))
        self.assertEqual(salary_range.n_sources, 2)
        np.testing.assert_almost_equal(salary_range.total_weight, 1.2)

    def test_no_sources(self):
        salary_range = unified_salary_range({}, [])
        self.assertIsNone(salary_range.median)
        self.assertEqual(salary_range.n_sources, 0)


if __name__ == '__main__':
    unittest.main()
