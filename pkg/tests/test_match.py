import itertools
import os
import tempfile
import unittest
import warnings

import numpy as np

from IncomeVerification import ConfigurationError, ContractViolation
from IncomeVerification.core import Name, redact
from IncomeVerification.extract import extract_corpus, extract_structured
from IncomeVerification.match import (
    MatchFeatures, PairDecisionTree, address_score, build_match_features,
    employment_sim, evaluate_matcher, name_score, score_pair, train_matcher,
)
from IncomeVerification.match.features import FEATURE_NAMES
from IncomeVerification.match.matcher import bucket_for
from IncomeVerification.match.pairTree import best_split, gini
from IncomeVerification.match.similarity import (
    cosine_similarity, levenshtein, normalized_similarity,
)
from IncomeVerification.pipeline import MatcherConfig, fit_matcher
from IncomeVerification.pipeline.externalModel import match_training_pairs
from IncomeVerification.retrieval import IndustryTable

from tests.toy_fixtures import setup_identity, setup_synthetic, setup_toy_documents


def dp_levenshtein(a, b):
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def weighted_gini(X, y, feature, threshold):
    left = X[:, feature] <= threshold
    n = len(y)
    return sum(
        side.sum() * float(gini(side.sum(), y[side].sum())) / n
        for side in (left, ~left)
    )


def setup_labeled_pairs(n=60, seed=0):
    """Pairs whose label follows name_score > 0.6."""
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(n):
        components = {
            'name_score': rng.uniform(),
            'city_sim': rng.uniform() if i % 3 else None,
            'employer_cos': rng.uniform(),
        }
        pairs.append(
            (MatchFeatures.from_components(components), int(components['name_score'] > 0.6))
        )
    return pairs


class TestSimilarity(unittest.TestCase):

    def test_levenshtein_exhaustive(self):
        strings = [
            ''.join(chars)
            for length in range(4)
            for chars in itertools.product('abc', repeat=length)
        ]
        for a in strings:
            for b in strings:
                self.assertEqual(levenshtein(a, b), dp_levenshtein(a, b))

    def test_levenshtein_random(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            a = ''.join(rng.choice(list('abc'), size=rng.integers(0, 7)))
            b = ''.join(rng.choice(list('abc'), size=rng.integers(0, 7)))
            self.assertEqual(levenshtein(a, b), dp_levenshtein(a, b))

    def test_normalized_similarity(self):
        self.assertEqual(normalized_similarity('', ''), 1.0)
        self.assertEqual(normalized_similarity('abc', 'abc'), 1.0)
        self.assertEqual(normalized_similarity('abc', ''), 0.0)
        np.testing.assert_almost_equal(normalized_similarity('kitten', 'sitting'), 1 - 3 / 7)

    def test_name_score(self):
        a = Name(first='James', middle='Ryan', last='Smith')
        np.testing.assert_almost_equal(
            name_score(a, {'first': 'James', 'middle': 'R', 'last': 'Smith'}), 0.9
        )
        np.testing.assert_almost_equal(
            name_score(a, {'first': 'James', 'middle': 'S', 'last': 'Smith'}), 0.7
        )
        np.testing.assert_almost_equal(
            name_score(a, {'first': 'JAMES', 'last': 'smith'}), 1.0
        )
        self.assertLess(name_score(a, {'first': 'Jane', 'last': 'Smith'}), 1.0)

    def test_one_sided_middle_name(self):
        with_middle = Name(first='James', middle='Ryan', last='Smith')
        without_middle = {'first': 'James', 'middle': None, 'last': 'Smith'}
        initial_only = {'first': 'James', 'middle': 'R', 'last': 'Smith'}

        for a, b in [(with_middle, without_middle), (without_middle, with_middle),
                     (initial_only, without_middle)]:
            with self.subTest(a=a, b=b):
                self.assertEqual(name_score(a, b), 1.0)
                self.assertEqual(name_score(a, b, conflict_factor=0.1), 1.0)

    def test_address_score(self):
        identity = setup_identity()
        features = address_score(identity.address, {'city': 'Seattle', 'state': 'WA'})
        self.assertEqual(features['city_sim'], 1.0)
        self.assertIsNone(features['street_sim'])
        self.assertIsNone(features['zip_exact'])

        features = address_score(identity.address, {'city': 'Seatle', 'zip': '98102'})
        self.assertLess(features['city_sim'], 1.0)
        self.assertEqual(features['zip_exact'], 0.0)

    def test_cosine_similarity(self):
        np.testing.assert_almost_equal(cosine_similarity('XYZ Company', 'xyz company'), 1.0)
        self.assertEqual(cosine_similarity('Software Engineer', 'Registered Nurse'), 0.0)
        self.assertGreater(cosine_similarity('Nurse', 'Nurses'), 0.5)
        self.assertEqual(cosine_similarity('Nurse', ''), 0.0)

    def test_employment_sim(self):
        redacted = redact(setup_identity())
        sims = employment_sim(redacted, {'employer': 'XYZ Company'})
        np.testing.assert_almost_equal(sims['employer_cos'], 1.0)
        self.assertIsNone(sims['title_cos'])


class TestMatchFeatures(unittest.TestCase):

    def test_masking(self):
        features = MatchFeatures.from_components({'name_score': 0.9, 'zip_exact': 0.0})
        self.assertEqual(features['name_score'], 0.9)
        self.assertEqual(features['zip_exact'], 0.0)
        self.assertIsNone(features['city_sim'])
        self.assertEqual(int(features.mask.sum()), 2)
        self.assertEqual(len(features.to_dict()), len(FEATURE_NAMES))

    def test_range(self):
        with self.assertRaises(ValueError):
            MatchFeatures.from_components({'name_score': 1.5})
        with self.assertRaises(ValueError):
            MatchFeatures([0.5], [True])

    def test_build_match_features(self):
        identity = setup_identity()
        record = extract_structured(setup_toy_documents()[0]['payload'], record_id='gov-1')
        industry_table = IndustryTable({'XYZ Company': 'Technology'})

        features = build_match_features(identity, record, industry_table)
        np.testing.assert_almost_equal(features['name_score'], 0.9)
        self.assertEqual(features['city_sim'], 1.0)
        np.testing.assert_almost_equal(features['employer_cos'], 1.0)
        np.testing.assert_almost_equal(features['title_cos'], 1.0)
        self.assertEqual(features['industry_match'], 1.0)
        self.assertIsNone(features['street_sim'])


class TestBuckets(unittest.TestCase):

    def test_boundaries(self):
        self.assertEqual(bucket_for(0.8), 'medium')
        self.assertEqual(bucket_for(0.8000001), 'high')
        self.assertEqual(bucket_for(0.5), 'low')
        self.assertEqual(bucket_for(0.51), 'medium')

    def test_monotone(self):
        order = {'low': 0, 'medium': 1, 'high': 2}
        ranks = [order[bucket_for(score)] for score in np.linspace(0, 1, 201)]
        self.assertEqual(ranks, sorted(ranks))

    def test_invalid_thresholds(self):
        with self.assertRaises(ConfigurationError):
            bucket_for(0.5, high=0.4, medium=0.6)
        with self.assertRaises(ConfigurationError):
            bucket_for(0.5, high=1.2)


class TestBestSplit(unittest.TestCase):

    def test_against_exhaustive_search(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            X = np.round(rng.uniform(size=(30, 3)), 2)
            y = (X[:, 1] + 0.3 * rng.uniform(size=30) > 0.6).astype(int)
            mask = np.ones_like(X, dtype=bool)

            impurity, feature, threshold, _ = best_split(X, mask, y, min_leaf=1)

            expected = min(
                weighted_gini(X, y, f, (lo + hi) / 2)
                for f in range(3)
                for lo, hi in zip(np.unique(X[:, f])[:-1], np.unique(X[:, f])[1:])
            )
            np.testing.assert_almost_equal(impurity, expected)
            np.testing.assert_almost_equal(
                weighted_gini(X, y, feature, threshold), expected
            )

    def test_min_leaf(self):
        X = np.array([[0.1], [0.2], [0.3], [0.4]])
        mask = np.ones_like(X, dtype=bool)
        y = np.array([0, 1, 1, 1])
        self.assertIsNone(best_split(X, mask, y, min_leaf=3))

        _, _, threshold, _ = best_split(X, mask, y, min_leaf=2)
        np.testing.assert_almost_equal(threshold, 0.25)

    def test_missing_values_follow_larger_child(self):
        X = np.array([[0.1], [0.2], [0.3], [0.9], [0.0]])
        mask = np.array([[True], [True], [True], [True], [False]])
        y = np.array([0, 0, 0, 1, 0])

        _, _, threshold, missing_left = best_split(X, mask, y, min_leaf=1)
        np.testing.assert_almost_equal(threshold, 0.6)
        self.assertTrue(missing_left)


class TestPairDecisionTree(unittest.TestCase):

    def __init__(self, methodName='runTest'):
        super().__init__(methodName)

    def setUp(self):
        self.pairs = setup_labeled_pairs()
        self.tree = train_matcher(self.pairs, max_depth=3, min_leaf=2)

    def test_training(self):
        self.assertLessEqual(self.tree.depth, 3)
        self.assertEqual(self.tree.feature[0], FEATURE_NAMES.index('name_score'))
        np.testing.assert_almost_equal(self.tree.threshold[0], 0.6, decimal=1)

        metrics = evaluate_matcher(self.tree, self.pairs)
        self.assertEqual(metrics['f1'], 1.0)
        self.assertEqual(metrics['n'], len(self.pairs))

    def test_score_pair(self):
        features = MatchFeatures.from_components({'name_score': 0.95})
        result = score_pair(self.tree, features, record_id='gov-1')
        self.assertEqual(result.record_id, 'gov-1')
        self.assertEqual(result.score, 1.0)
        self.assertEqual(result.bucket, 'high')

        result = score_pair(self.tree, MatchFeatures.from_components({'name_score': 0.1}))
        self.assertEqual(result.bucket, 'low')

    def test_save_load(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, 'matcher.json')
            self.tree.save(path)
            loaded = PairDecisionTree.load(path)

        for features, _ in self.pairs:
            self.assertEqual(loaded.predict(features), self.tree.predict(features))

        data = self.tree.to_dict()
        data['feature_names'] = data['feature_names'][::-1]
        with self.assertRaises(ConfigurationError):
            PairDecisionTree.from_dict(data)

        data = self.tree.to_dict()
        data['version'] = 99
        with self.assertRaises(ConfigurationError):
            PairDecisionTree.from_dict(data)

    def test_untrained(self):
        with self.assertRaises(ContractViolation):
            PairDecisionTree().predict(self.pairs[0][0])

    def test_invalid_training_sets(self):
        with self.assertRaises(ContractViolation):
            train_matcher(self.pairs[:1])

        single_class = [(features, 1) for features, _ in self.pairs[:5]]
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            tree = train_matcher(single_class)
        self.assertEqual(len(caught), 1)
        self.assertEqual(tree.n_nodes, 1)
        self.assertEqual(tree.predict(self.pairs[0][0]), 1.0)

    def test_permuted_training_rows(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            permuted = [self.pairs[i] for i in rng.permutation(len(self.pairs))]
            tree = train_matcher(permuted, max_depth=3, min_leaf=2)
            self.assertEqual(tree.to_dict(), self.tree.to_dict())


class TestAnnotatedPairs(unittest.TestCase):
    """Matcher trained on a thousand labeled synthetic identity/record pairs."""

    @classmethod
    def setUpClass(cls):
        data = setup_synthetic(n_rows=200, test_rows=50, seed=42)
        identities = {
            e.identity.identity_id: e.identity for e in data.train + data.test
        }
        records, _ = extract_corpus(data.corpus.records)
        cls.pairs = match_training_pairs(data.match_labels, identities, records)

    def test_held_out_f1(self):
        self.assertGreaterEqual(len(self.pairs), 1000)
        pairs = self.pairs[:1000]

        tree, metrics = fit_matcher(pairs, MatcherConfig(), seed=42)

        self.assertEqual(metrics['n'], 200)
        self.assertGreaterEqual(metrics['f1'], 0.9)
        self.assertLessEqual(tree.depth, 4)

    def test_permuted_training_rows(self):
        pairs = self.pairs[:1000]
        tree = train_matcher(pairs)

        rng = np.random.default_rng(42)
        permuted = [pairs[i] for i in rng.permutation(len(pairs))]
        self.assertEqual(train_matcher(permuted).to_dict(), tree.to_dict())


if __name__ == '__main__':
    unittest.main()
