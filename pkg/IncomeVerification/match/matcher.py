from collections import namedtuple

import numpy as np
from sklearn.metrics import precision_recall_fscore_support

from IncomeVerification.IncomeVerificationError import ConfigurationError


__all__ = ['BUCKETS', 'MatchResult', 'bucket_for', 'score_pair', 'evaluate_matcher']


BUCKETS = ('low', 'medium', 'high')

MatchResult = namedtuple('MatchResult', ['record_id', 'score', 'bucket', 'features'])
MatchResult.__doc__ = """Scored comparison of an identity with one source record."""


def bucket_for(score, high=0.8, medium=0.5):
    """Return the confidence bucket of a match score.

    ``high`` iff score > high, ``medium`` iff medium < score <= high, else
    ``low``.
    """
    if not 0 <= medium <= high <= 1:
        raise ConfigurationError(
            f"Bucket thresholds must satisfy 0 <= medium <= high <= 1, "
            f"got medium={medium}, high={high}."
        )

    if score > high:
        return 'high'
    if score > medium:
        return 'medium'
    return 'low'


def score_pair(tree, features, record_id=None, high=0.8, medium=0.5):
    """Score a feature vector with a trained tree.

    Parameters
    ----------
    tree : PairDecisionTree
    features : MatchFeatures
    record_id : str, optional
    high, medium : float, optional
        Bucket thresholds.

    Returns
    -------
    MatchResult
    """
    score = float(tree.predict(features))
    return MatchResult(record_id, score, bucket_for(score, high, medium), features)


def evaluate_matcher(tree, pairs, threshold=0.5):
    """Precision, recall and F1 of a tree on labeled pairs.

    A pair is predicted positive if its score exceeds ``threshold``.

    Returns
    -------
    dict
        ``precision``, ``recall``, ``f1`` and ``n``.
    """
    y_true = np.array([int(label) for _, label in pairs])
    y_pred = np.array([int(tree.predict(features) > threshold) for features, _ in pairs])

    precision, recall, f1, _ = precision_recall_fscore_support(
        y_true, y_pred, average='binary', zero_division=0
    )

    return {
        'precision': float(precision),
        'recall': float(recall),
        'f1': float(f1),
        'n': len(pairs),
    }
