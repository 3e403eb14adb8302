import unittest

import numpy as np

from IncomeVerification import ConfigurationError, ExtractionError
from IncomeVerification.core import Money
from IncomeVerification.extract import (
    SalaryAttributes, SourceRecord, extract_pattern, extract_record,
    extract_structured, extract_wrapper, parse_money_range, parse_money_text,
)
from IncomeVerification.extract.extractor import extract_corpus
from IncomeVerification.extract.fragments import parse_location, parse_name
from IncomeVerification.extract.wrapper import PathSpec, default_path_specs

from tests.toy_fixtures import PAYSITE_PAGE, setup_toy_documents


def dollars(value):
    return Money.from_dollars(value)


class TestMoneyText(unittest.TestCase):

    def test_parse_money_text(self):
        self.assertEqual(parse_money_text('$73,482'), dollars(73482))
        self.assertEqual(parse_money_text('84443.50'), dollars('84443.50'))
        self.assertEqual(parse_money_text('\\$90k'), dollars(90000))
        self.assertEqual(parse_money_text(' $1.5K '), dollars(1500))
        self.assertIsNone(parse_money_text('salary information'))
        self.assertIsNone(parse_money_text('$90,000 - $120,000'))
        self.assertIsNone(parse_money_text(''))
        self.assertIsNone(parse_money_text(None))

    def test_parse_money_range(self):
        self.assertEqual(
            parse_money_range('90,000 - 234,000'), (dollars(90000), dollars(234000))
        )
        self.assertEqual(
            parse_money_range('from $90,000 to $234,000'),
            (dollars(90000), dollars(234000))
        )
        self.assertIsNone(parse_money_range('$90,000'))


class TestSourceRecord(unittest.TestCase):

    def test_attributes(self):
        attributes = SalaryAttributes(base_median=dollars(80000), total_high=dollars(1e5))
        self.assertEqual(attributes.present, ['base_median', 'total_high'])
        np.testing.assert_equal(
            attributes.as_array(),
            [np.nan, 80000.0, np.nan, np.nan, np.nan, 100000.0]
        )
        self.assertEqual(attributes.to_dict()['base_median'], 8000000)
        self.assertEqual(SalaryAttributes.from_dict(attributes.to_dict()), attributes)

    def test_discard_reason(self):
        record = SourceRecord(record_id='r', source_type='snippet')
        self.assertTrue(record.is_discardable)
        self.assertEqual(record.discard_reason, 'no salary attribute')

        record = SourceRecord(
            record_id='r', source_type='salary_site',
            attributes=SalaryAttributes(base_low=dollars(90000), base_median=dollars(80000)),
        )
        self.assertTrue(record.is_discardable)
        self.assertIn('base_low', record.discard_reason)

    def test_trust(self):
        record = SourceRecord(
            record_id='r', source_type='government',
            attributes=SalaryAttributes(base_median=dollars(50000)),
        )
        self.assertFalse(record.is_discardable)
        self.assertEqual(record.trust_weight, 1.0)
        self.assertEqual(SourceRecord.from_dict(record.to_dict()), record)


class TestStructured(unittest.TestCase):

    def test_government_row(self):
        payload = setup_toy_documents()[0]['payload']
        record = extract_structured(payload, record_id='gov-1')

        self.assertEqual(record.source_type, 'government')
        self.assertEqual(record.attributes.base_median, dollars(84443))
        self.assertEqual(record.attributes.total_median, dollars(94443))
        self.assertEqual(record.employer, 'XYZ Company')
        self.assertEqual(
            record.identity_fragment['name'],
            {'first': 'James', 'middle': 'R', 'last': 'Smith'}
        )
        self.assertEqual(
            record.identity_fragment['address'], {'city': 'Seattle', 'state': 'WA'}
        )

    def test_missing_bonus(self):
        record = extract_structured({'name': 'Ann Lee', 'salary': '52000'})
        self.assertEqual(record.attributes.total_median, dollars(52000))

    def test_unparsable_salary(self):
        record = extract_structured({'name': 'Ann Lee', 'salary': 'n/a'})
        self.assertTrue(record.is_discardable)
        self.assertIn('unparsable salary', record.discard_reason)


class TestWrapper(unittest.TestCase):

    def __init__(self, methodName='runTest'):
        super().__init__(methodName)

    def setUp(self):
        self.path_spec = default_path_specs()['paysite']

    def test_paysite(self):
        record = extract_wrapper(PAYSITE_PAGE, self.path_spec, record_id='site-1')
        attributes = record.attributes

        self.assertEqual(attributes.base_low, dollars(90000))
        self.assertEqual(attributes.base_median, dollars(110000))
        self.assertEqual(attributes.base_high, dollars(234000))
        self.assertEqual(attributes.total_median, dollars(125000))
        self.assertEqual(record.occupation, 'Software Engineer')
        self.assertEqual(record.identity_fragment['address']['state'], 'WA')
        self.assertFalse(record.is_discardable)

    def test_missing_paths(self):
        page = '<html><body><h2 class="title">Nurse</h2></body></html>'
        record = extract_wrapper(page, self.path_spec)
        self.assertTrue(record.attributes.is_empty)
        self.assertTrue(record.is_discardable)

    def test_multiple_nodes(self):
        page = PAYSITE_PAGE.replace(
            '<td class="max">$234,000</td>',
            '<td class="max">$234,000</td><td class="mean">$1</td>'
        )
        with self.assertRaises(ExtractionError):
            extract_wrapper(page, self.path_spec)

    def test_malformed_document(self):
        with self.assertRaises(ExtractionError):
            extract_wrapper(None, self.path_spec)
        with self.assertRaises(ExtractionError):
            extract_wrapper('no markup at all', self.path_spec)

    def test_unknown_field(self):
        with self.assertRaises(ConfigurationError):
            PathSpec(site_id='paysite', paths={'bonus': 'td.bonus'})


class TestPattern(unittest.TestCase):

    def test_average_salary(self):
        record = extract_pattern('The average Software Engineer salary is $100,000')
        self.assertEqual(record.attributes.base_median, dollars(100000))
        self.assertEqual(record.occupation, 'Software Engineer')

    def test_range(self):
        record = extract_pattern('Salaries range from $90,000 to $234,000 a year.')
        self.assertEqual(record.attributes.base_low, dollars(90000))
        self.assertEqual(record.attributes.base_high, dollars(234000))
        self.assertIsNone(record.attributes.base_median)

    def test_no_match(self):
        self.assertIsNone(extract_pattern('Nurses enjoy flexible schedules.'))
        self.assertIsNone(extract_pattern(''))


class TestFragments(unittest.TestCase):

    def test_parse_name(self):
        self.assertEqual(
            parse_name('Smith, James'), {'first': 'Smith', 'middle': None, 'last': 'James'}
        )
        self.assertIsNone(parse_name('Cher'))

    def test_parse_location(self):
        self.assertEqual(parse_location('Seattle, wa'), {'city': 'Seattle', 'state': 'WA'})
        self.assertEqual(parse_location('Springfield'), {'city': 'Springfield'})


class TestExtractCorpus(unittest.TestCase):

    def test_extract_corpus(self):
        records, discarded = extract_corpus(setup_toy_documents())

        self.assertEqual(sorted(records), ['gov-1', 'site-1', 'snip-1'])
        self.assertEqual(discarded, {'snip-2': 'no pattern matched'})
        self.assertEqual(records['snip-1'].source_type, 'snippet')

    def test_malformed_document_is_skipped(self):
        documents = setup_toy_documents()
        documents[1]['payload']['document'] = 'plain text'
        records, discarded = extract_corpus(documents)
        self.assertNotIn('site-1', records)
        self.assertIn('site-1', discarded)

    def test_unknown_site(self):
        document = setup_toy_documents()[1]
        document['payload']['site_id'] = 'unknown-site'
        with self.assertRaises(ConfigurationError):
            extract_record(document)

        document['source_type'] = 'newspaper'
        with self.assertRaises(ConfigurationError):
            extract_record(document)


if __name__ == '__main__':
    unittest.main()
