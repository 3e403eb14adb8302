import math
import os
import tempfile
import unittest

import numpy as np

from IncomeVerification.retrieval import (
    CorpusIndex, IndustryTable, Query, build_queries, retrieve_candidates, search,
)
from IncomeVerification.retrieval.corpusIndex import document_text
from IncomeVerification.retrieval.query import tokenize

from tests.toy_fixtures import setup_identity, setup_toy_documents


def brute_force_bm25(texts, query_text, k1=1.2, b=0.75):
    docs = {record_id: tokenize(text) for record_id, text in texts.items()}
    n = len(docs)
    avg_length = sum(len(tokens) for tokens in docs.values()) / n

    scores = {}
    for record_id, tokens in docs.items():
        score = 0.0
        for token in set(tokenize(query_text)):
            df = sum(token in other for other in docs.values())
            tf = tokens.count(token)
            if tf == 0:
                continue
            idf = math.log((n - df + 0.5) / (df + 0.5) + 1)
            score += idf * tf * (k1 + 1) / (
                tf + k1 * (1 - b + b * len(tokens) / avg_length)
            )
        scores[record_id] = score

    return scores


class TestQueries(unittest.TestCase):

    def test_build_queries(self):
        identity = setup_identity()
        queries = build_queries(identity, 'Travel')
        self.assertEqual(
            [q.text for q in queries],
            [
                'XYZ Company Software Engineer Salary',
                'Software Engineer Salary',
                'Travel Software Engineer Salary',
            ]
        )
        self.assertEqual(
            [q.tier for q in queries],
            ['employer_title', 'title_only', 'industry_title']
        )
        self.assertEqual([q.rank for q in queries], [0, 1, 2])

    def test_no_industry(self):
        queries = build_queries(setup_identity(), None)
        self.assertEqual(len(queries), 2)

    def test_invalid_tier(self):
        with self.assertRaises(ValueError):
            Query(text='Nurse Salary', tier='nationwide')

    def test_tokenize(self):
        self.assertEqual(
            tokenize('Sr. Software_Engineer, $100,000'),
            ['sr', 'software', 'engineer', '100', '000']
        )


class TestCorpusIndex(unittest.TestCase):

    def __init__(self, methodName='runTest'):
        super().__init__(methodName)

    def setUp(self):
        self.texts = {
            'a': 'software engineer salary seattle',
            'b': 'registered nurse salary salary',
            'c': 'software software engineer average pay',
            'd': 'sales associate hourly wage in texas and new york',
            'e': 'engineer',
        }
        self.index = CorpusIndex.build(self.texts)

    def test_bm25_matches_brute_force(self):
        for query_text in ['software engineer salary', 'nurse', 'engineer engineer',
                           'sales wage texas', 'unknown token']:
            expected = brute_force_bm25(self.texts, query_text)
            scores = self.index.scores(query_text)
            for position, record_id in enumerate(self.index.record_ids):
                np.testing.assert_almost_equal(scores[position], expected[record_id])

    def test_repeated_query_tokens(self):
        np.testing.assert_almost_equal(
            self.index.scores('engineer engineer'), self.index.scores('engineer')
        )

    def test_search(self):
        hits = search(self.index, 'software engineer', 10)
        ids = [record_id for record_id, _ in hits]
        self.assertEqual(set(ids), {'a', 'c', 'e'})
        scores = [score for _, score in hits]
        self.assertEqual(scores, sorted(scores, reverse=True))

        self.assertEqual(len(search(self.index, 'software engineer', 1)), 1)
        self.assertEqual(search(self.index, 'astronaut', 5), [])

        with self.assertRaises(ValueError):
            search(self.index, 'software', 0)

    def test_ties_by_record_id(self):
        index = CorpusIndex.build({'z': 'nurse', 'm': 'nurse', 'a': 'nurse'})
        hits = search(index, Query(text='nurse', tier='title_only'), 3)
        self.assertEqual([record_id for record_id, _ in hits], ['a', 'm', 'z'])

    def test_save_load(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, 'index.json')
            self.index.save(path)
            loaded = CorpusIndex.load(path)

        self.assertEqual(loaded.record_ids, self.index.record_ids)
        np.testing.assert_almost_equal(
            loaded.scores('software engineer salary'),
            self.index.scores('software engineer salary')
        )


class TestRetrieveCandidates(unittest.TestCase):

    def __init__(self, methodName='runTest'):
        super().__init__(methodName)

    def setUp(self):
        self.documents = setup_toy_documents()
        self.index = CorpusIndex.from_documents(self.documents)
        self.industry_table = IndustryTable({'XYZ Company': 'Technology'})

    def test_document_text(self):
        text = document_text(self.documents[1])
        self.assertIn('XYZ Company', text)
        self.assertIn('$110,000', text)
        self.assertNotIn('<td', text)

        text = document_text(self.documents[0])
        self.assertIn('James R Smith', text)
        self.assertTrue(text.endswith('salary'))

    def test_provenance(self):
        candidates = retrieve_candidates(
            setup_identity(), self.index, self.industry_table, with_provenance=True
        )
        ids = [c.record_id for c in candidates]

        self.assertEqual(len(ids), len(set(ids)))
        self.assertNotIn('snip-2', ids)
        self.assertEqual(candidates[0].tier, 'employer_title')

        ranks = [('employer_title', 'title_only', 'industry_title').index(c.tier)
                 for c in candidates]
        self.assertEqual(ranks, sorted(ranks))

    def test_limit(self):
        ids = retrieve_candidates(
            setup_identity(), self.index, self.industry_table, per_query_k=1, limit=2
        )
        self.assertLessEqual(len(ids), 2)
        self.assertIsInstance(ids[0], str)


if __name__ == '__main__':
    unittest.main()
