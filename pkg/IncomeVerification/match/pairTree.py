import json
from pathlib import Path
from warnings import warn

import numpy as np

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import ConfigurationError, ContractViolation

from .features import FEATURE_NAMES, MatchFeatures


__all__ = ['PairDecisionTree', 'train_matcher', 'gini', 'best_split']


TREE_FORMAT = 'pair-decision-tree'
TREE_VERSION = 1

logger = log.get_logger('match')


def gini(n, n_pos):
    """Gini impurity of a node with ``n`` samples of which ``n_pos`` positive."""
    n = np.asarray(n, dtype=float)
    p = np.divide(n_pos, n, out=np.zeros_like(n), where=n > 0)
    return 2 * p * (1 - p)


def best_split(X, mask, y, min_leaf=5):
    """Find the split with the lowest weighted Gini impurity.

    Rows where the split feature is masked follow the child that receives more
    present rows (left on ties). Candidate thresholds are midpoints between
    consecutive distinct present values; ties in impurity go to the lowest
    feature index, then the lowest threshold.

    Parameters
    ----------
    X : np.ndarray
        Feature values, shape (n, n_features).
    mask : np.ndarray
        True where the feature is present, same shape as ``X``.
    y : np.ndarray
        Binary labels.
    min_leaf : int, optional
        Minimum number of rows per child.

    Returns
    -------
    tuple or None
        ``(impurity, feature, threshold, missing_left)``; None if no split
        satisfies ``min_leaf``.
    """
    n = len(y)
    best = None

    for feature in range(X.shape[1]):
        present = mask[:, feature]
        n_present = int(present.sum())
        if n_present < 2:
            continue

        values = X[present, feature]
        labels = y[present]
        order = np.argsort(values, kind='stable')
        values = values[order]
        cum_pos = np.cumsum(labels[order])

        boundaries = np.flatnonzero(values[1:] > values[:-1])
        if len(boundaries) == 0:
            continue

        n_missing = n - n_present
        pos_missing = int(y[~present].sum())

        n_left_present = boundaries + 1
        pos_left_present = cum_pos[boundaries]
        n_right_present = n_present - n_left_present
        pos_right_present = cum_pos[-1] - pos_left_present

        missing_left = n_left_present >= n_right_present
        n_left = n_left_present + n_missing * missing_left
        pos_left = pos_left_present + pos_missing * missing_left
        n_right = n - n_left
        pos_right = int(y.sum()) - pos_left

        valid = (n_left >= min_leaf) & (n_right >= min_leaf)
        if not np.any(valid):
            continue

        impurity = (n_left * gini(n_left, pos_left) + n_right * gini(n_right, pos_right)) / n
        impurity = np.where(valid, impurity, np.inf)

        i = int(np.argmin(impurity))
        if best is None or impurity[i] < best[0]:
            threshold = (values[boundaries[i]] + values[boundaries[i] + 1]) / 2
            best = (float(impurity[i]), feature, float(threshold), bool(missing_left[i]))

    return best


class PairDecisionTree():
    """Binary decision tree over match features.

    Nodes are stored in flat arrays; leaves have ``feature == -1`` and hold the
    fraction of positive training pairs in ``value``.

    Attributes
    ----------
    feature : list of int
    threshold : list of float
    missing_left : list of bool
    left, right : list of int
        Child node indices, -1 for leaves.
    value : list of float
    n_samples : list of int
    max_depth : int
    """

    def __init__(self, max_depth=4):
        self.max_depth = max_depth
        self.feature = []
        self.threshold = []
        self.missing_left = []
        self.left = []
        self.right = []
        self.value = []
        self.n_samples = []

    def _add_node(self, value, n_samples):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.missing_left.append(True)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(float(value))
        self.n_samples.append(int(n_samples))
        return len(self.value) - 1

    @property
    def n_nodes(self):
        return len(self.value)

    @property
    def depth(self):
        def _depth(node):
            if self.feature[node] == -1:
                return 0
            return 1 + max(_depth(self.left[node]), _depth(self.right[node]))

        return _depth(0) if self.n_nodes else 0

    def _leaf(self, values, present):
        node = 0
        while self.feature[node] != -1:
            feature = self.feature[node]
            if not present[feature]:
                go_left = self.missing_left[node]
            else:
                go_left = values[feature] <= self.threshold[node]
            node = self.left[node] if go_left else self.right[node]
        return node

    def predict(self, features):
        """Return the positive-class fraction of the leaf reached by ``features``.

        Parameters
        ----------
        features : MatchFeatures

        Returns
        -------
        float
        """
        if self.n_nodes == 0:
            raise ContractViolation("Decision tree is not trained.")
        return self.value[self._leaf(features.values, features.mask)]

    def to_dict(self):
        return {
            'format': TREE_FORMAT,
            'version': TREE_VERSION,
            'feature_names': list(FEATURE_NAMES),
            'max_depth': self.max_depth,
            'nodes': {
                'feature': self.feature,
                'threshold': self.threshold,
                'missing_left': self.missing_left,
                'left': self.left,
                'right': self.right,
                'value': self.value,
                'n_samples': self.n_samples,
            },
        }

    @classmethod
    def from_dict(cls, data):
        if data.get('format') != TREE_FORMAT or data.get('version') != TREE_VERSION:
            raise ConfigurationError(
                f"Unsupported tree format {data.get('format')!r} "
                f"version {data.get('version')!r}."
            )
        if list(data['feature_names']) != list(FEATURE_NAMES):
            raise ConfigurationError("Tree was trained on different features.")

        tree = cls(max_depth=data['max_depth'])
        nodes = data['nodes']
        tree.feature = [int(f) for f in nodes['feature']]
        tree.threshold = [float(t) for t in nodes['threshold']]
        tree.missing_left = [bool(m) for m in nodes['missing_left']]
        tree.left = [int(i) for i in nodes['left']]
        tree.right = [int(i) for i in nodes['right']]
        tree.value = [float(v) for v in nodes['value']]
        tree.n_samples = [int(n) for n in nodes['n_samples']]

        return tree

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __repr__(self):
        return f'PairDecisionTree(n_nodes={self.n_nodes}, depth={self.depth})'


def train_matcher(labeled_pairs, max_depth=4, min_leaf=5):
    """Grow a Gini decision tree on labeled (features, label) pairs.

    Parameters
    ----------
    labeled_pairs : list of (MatchFeatures, int)
        Label 1 marks co-referring pairs.
    max_depth : int, optional
    min_leaf : int, optional

    Returns
    -------
    PairDecisionTree

    Raises
    ------
    ContractViolation
        With fewer than two pairs or labels other than 0 and 1.

    Warns
    -----
    UserWarning
        If only one class is present; a single leaf is returned.
    """
    if len(labeled_pairs) < 2:
        raise ContractViolation("Matcher training needs at least two labeled pairs.")

    for features, _ in labeled_pairs:
        if not isinstance(features, MatchFeatures):
            raise ContractViolation("Labeled pairs must hold MatchFeatures.")

    X = np.array([features.values for features, _ in labeled_pairs])
    mask = np.array([features.mask for features, _ in labeled_pairs])
    y = np.array([int(label) for _, label in labeled_pairs])
    if not np.all((y == 0) | (y == 1)):
        raise ContractViolation("Labels must be 0 or 1.")

    tree = PairDecisionTree(max_depth=max_depth)

    if y.min() == y.max():
        message = f"Single-class training set (label {y[0]}); returning a stump."
        warn(message)
        logger.warning(message)
        tree._add_node(y.mean(), len(y))
        return tree

    def grow(rows, depth):
        y_node = y[rows]
        node = tree._add_node(y_node.mean(), len(rows))

        if depth >= max_depth or y_node.min() == y_node.max():
            return node

        split = best_split(X[rows], mask[rows], y_node, min_leaf)
        parent_impurity = float(gini(len(rows), y_node.sum()))
        if split is None or split[0] >= parent_impurity - 1e-12:
            return node

        _, feature, threshold, missing_left = split
        present = mask[rows, feature]
        go_left = np.where(present, X[rows, feature] <= threshold, missing_left)

        tree.feature[node] = feature
        tree.threshold[node] = threshold
        tree.missing_left[node] = missing_left
        tree.left[node] = grow(rows[go_left], depth + 1)
        tree.right[node] = grow(rows[~go_left], depth + 1)

        return node

    grow(np.arange(len(y)), 0)
    logger.info(
        f'Trained matcher tree with {tree.n_nodes} nodes on {len(y)} pairs '
        f'({int(y.sum())} positive).'
    )

    return tree
