import string
import unittest

import numpy as np

from IncomeVerification import ConfigurationError
from IncomeVerification.canon import (
    AliasTable, canonicalize, default_alias_table, key_normalize,
)
from IncomeVerification.retrieval import (
    IndustryTable, default_industry_table, infer_industry,
)


class TestKeyNormalize(unittest.TestCase):

    def test_key_normalize(self):
        self.assertEqual(key_normalize('U.S.P.S'), 'usps')
        self.assertEqual(key_normalize('  Sr.   Manager '), 'sr manager')
        self.assertEqual(key_normalize('Wal-Mart'), 'walmart')
        self.assertEqual(key_normalize('...'), '')


class TestCanonicalize(unittest.TestCase):

    def __init__(self, methodName='runTest'):
        super().__init__(methodName)

    def setUp(self):
        self.table = default_alias_table()

    def test_aliases(self):
        self.assertEqual(
            canonicalize('U.S.P.S', 'employer', self.table),
            'United States Postal Service'
        )
        self.assertEqual(
            canonicalize('usps', 'employer', self.table),
            'United States Postal Service'
        )
        self.assertEqual(
            canonicalize('GE', 'employer', self.table), 'General Electric'
        )
        self.assertEqual(
            canonicalize('Sr. Manager', 'title', self.table), 'Senior Manager'
        )

    def test_token_expansion(self):
        self.assertEqual(
            canonicalize('Sr. Data  Scientist', 'title', self.table),
            'Senior Data Scientist'
        )
        self.assertEqual(
            canonicalize('Dept. of Energy', 'employer', self.table),
            'Department of Energy'
        )
        # title abbreviations do not apply to employers
        self.assertEqual(
            canonicalize('Sr. Holdings', 'employer', self.table), 'Sr. Holdings'
        )

    def test_miss(self):
        self.assertEqual(
            canonicalize('Zyxcorp LLC', 'employer', self.table), 'Zyxcorp LLC'
        )
        self.assertEqual(
            canonicalize('  Zyxcorp   LLC ', 'employer', self.table), 'Zyxcorp LLC'
        )

    def test_canonical_fixed_points(self):
        for kind, canonicals in self.table.canonical_texts.items():
            for canonical in canonicals:
                self.assertEqual(canonicalize(canonical, kind, self.table), canonical)

    def test_idempotent(self):
        rng = np.random.default_rng(11)
        alphabet = list(string.ascii_letters + string.digits + ' .-&,')
        words = sorted(
            {key for _, key in self.table.abbreviations}
            | {word for texts in self.table.canonical_texts.values()
               for text in texts for word in text.split()}
        )
        samples = [
            ''.join(rng.choice(alphabet, size=rng.integers(1, 20)))
            for _ in range(5000)
        ]
        samples += [
            ' '.join(
                str(word).upper() if rng.random() < 0.3 else str(word)
                for word in rng.choice(words, size=rng.integers(1, 5))
            )
            for _ in range(5000)
        ]
        samples += ['Sr. Mgr', 'Snr. Software Eng.', 'Mercy Hosp.', 'SW  Eng.']

        for kind in ('employer', 'title'):
            for raw in samples:
                once = canonicalize(raw, kind, self.table)
                self.assertEqual(canonicalize(once, kind, self.table), once)

    def test_unknown_kind(self):
        with self.assertRaises(ConfigurationError):
            canonicalize('GE', 'city', self.table)


class TestAliasTable(unittest.TestCase):

    def test_conflicting_rows(self):
        with self.assertRaises(ConfigurationError):
            AliasTable([('state', 'WA', 'Washington')])

        with self.assertRaises(ConfigurationError):
            AliasTable([
                ('employer', 'GE', 'General Electric'),
                ('employer', 'G.E.', 'Generic Enterprises'),
            ])

        with self.assertRaises(ConfigurationError):
            AliasTable([
                ('title_token', 'Sr.', 'Snr'),
                ('title_token', 'Snr', 'Senior'),
            ])

    def test_variants(self):
        table = AliasTable([
            ('employer', 'GE', 'General Electric'),
            ('employer', 'G.E', 'General Electric'),
        ])
        self.assertEqual(
            table.variants('General Electric', 'employer'),
            ['ge', 'general electric']
        )
        self.assertEqual(table.canonical_texts['employer'], ['General Electric'])


class TestIndustryTable(unittest.TestCase):

    def test_default_table(self):
        table = default_industry_table()
        self.assertEqual(infer_industry('XYZ Company', table), 'Technology')
        self.assertEqual(infer_industry('General Electric', table), 'Manufacturing')
        self.assertEqual(
            infer_industry('United States Postal Service', table), 'Government'
        )
        self.assertEqual(infer_industry('delta air lines', table), 'Travel')
        self.assertIsNone(infer_industry('Zyxcorp LLC', table))
        self.assertIsNone(infer_industry('', table))

    def test_unknown_industry(self):
        with self.assertRaises(ConfigurationError):
            IndustryTable({'XYZ Company': 'Space Mining'})


if __name__ == '__main__':
    unittest.main()
