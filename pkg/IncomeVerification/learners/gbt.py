import json
from pathlib import Path

import numba
import numpy as np

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import (
    ConfigurationError, ContractViolation
)
from IncomeVerification.core.money import Money


__all__ = ['RegressionTree', 'GBTEnsemble', 'gbt_train', 'gbt_predict']


logger = log.get_logger('learners')

GBT_FORMAT = 'gbt-ensemble'
GBT_VERSION = 1


@numba.njit
def _level_splits(X, order, node_of_row, residual, n_nodes, min_leaf):
    """Best variance-reduction split of every node of one tree level.

    ``order[f]`` lists all rows sorted by feature ``f``; rows with
    ``node_of_row < 0`` are finished. Candidates are scanned by ascending
    feature and threshold and only a strictly larger gain replaces the best.
    """
    n, n_features = X.shape

    total_sum = np.zeros(n_nodes)
    total_count = np.zeros(n_nodes, dtype=np.int64)
    for i in range(n):
        node = node_of_row[i]
        if node >= 0:
            total_sum[node] += residual[i]
            total_count[node] += 1

    best_gain = np.zeros(n_nodes)
    best_feature = np.full(n_nodes, -1, dtype=np.int64)
    best_threshold = np.zeros(n_nodes)

    left_sum = np.zeros(n_nodes)
    left_count = np.zeros(n_nodes, dtype=np.int64)
    last_value = np.zeros(n_nodes)

    for f in range(n_features):
        left_sum[:] = 0.0
        left_count[:] = 0

        for k in range(n):
            i = order[f, k]
            node = node_of_row[i]
            if node < 0:
                continue

            value = X[i, f]
            n_left = left_count[node]
            if n_left > 0 and value > last_value[node]:
                n_right = total_count[node] - n_left
                if n_left >= min_leaf and n_right >= min_leaf:
                    s_left = left_sum[node]
                    s_right = total_sum[node] - s_left
                    gain = (
                        s_left * s_left / n_left
                        + s_right * s_right / n_right
                        - total_sum[node] * total_sum[node] / total_count[node]
                    )
                    if gain > best_gain[node]:
                        best_gain[node] = gain
                        best_feature[node] = f
                        best_threshold[node] = (last_value[node] + value) / 2

            left_sum[node] += residual[i]
            left_count[node] += 1
            last_value[node] = value

    return best_gain, best_feature, best_threshold, total_sum, total_count


class RegressionTree():
    """Binary regression tree stored in flat node arrays.

    Leaves have ``feature == -1``; internal nodes send ``x[feature] <=
    threshold`` to ``left``.
    """

    def __init__(self, feature=None, threshold=None, left=None, right=None, value=None):
        self.feature = list(feature or [])
        self.threshold = list(threshold or [])
        self.left = list(left or [])
        self.right = list(right or [])
        self.value = list(value or [])

    def _add_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.value) - 1

    @property
    def n_nodes(self):
        return len(self.value)

    @property
    def is_stump(self):
        """bool: True if the tree is a single leaf."""
        return self.n_nodes == 1

    @property
    def depth(self):
        def _depth(node):
            if self.feature[node] == -1:
                return 0
            return 1 + max(_depth(self.left[node]), _depth(self.right[node]))

        return _depth(0)

    def predict(self, X):
        feature = np.array(self.feature)
        threshold = np.array(self.threshold)
        left = np.array(self.left)
        right = np.array(self.right)
        value = np.array(self.value)

        node = np.zeros(len(X), dtype=int)
        rows = np.arange(len(X))
        while True:
            internal = feature[node] >= 0
            if not np.any(internal):
                break
            f = np.where(internal, feature[node], 0)
            go_left = X[rows, f] <= threshold[node]
            node = np.where(internal, np.where(go_left, left[node], right[node]), node)

        return value[node]

    def to_dict(self):
        return {
            'feature': self.feature,
            'threshold': self.threshold,
            'left': self.left,
            'right': self.right,
            'value': self.value,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            [int(v) for v in data['feature']],
            [float(v) for v in data['threshold']],
            [int(v) for v in data['left']],
            [int(v) for v in data['right']],
            [float(v) for v in data['value']],
        )


def _grow_tree(X, order, residual, max_depth, min_leaf, tol):
    tree = RegressionTree()
    tree._add_node()

    node_of_row = np.zeros(len(residual), dtype=np.int64)
    level = [0]

    for depth in range(max_depth + 1):
        gains, features, thresholds, sums, counts = _level_splits(
            X, order, node_of_row, residual, len(level), min_leaf
        )

        left_local = np.full(len(level), -1, dtype=np.int64)
        right_local = np.full(len(level), -1, dtype=np.int64)
        next_level = []
        for local, node in enumerate(level):
            tree.value[node] = sums[local] / counts[local] if counts[local] else 0.0
            if depth == max_depth or features[local] < 0 or gains[local] <= tol:
                continue

            tree.feature[node] = int(features[local])
            tree.threshold[node] = float(thresholds[local])
            for side, local_map in (('left', left_local), ('right', right_local)):
                child = tree._add_node()
                getattr(tree, side)[node] = child
                local_map[local] = len(next_level)
                next_level.append(child)

        if not next_level:
            break

        active = node_of_row >= 0
        rows = np.flatnonzero(active)
        current = node_of_row[rows]
        f = np.maximum(features[current], 0)
        go_left = X[rows, f] <= thresholds[current]
        node_of_row[rows] = np.where(go_left, left_local[current], right_local[current])
        level = next_level

    return tree


class GBTEnsemble():
    """Squared-loss gradient boosted regression trees.

    Prediction is ``initial + learning_rate * sum(tree(x))``, clamped at 0.

    Attributes
    ----------
    initial : float
        Mean of the training targets.
    trees : list of RegressionTree
    learning_rate : float
    max_depth : int
    n_features : int
    loss : str
        Always 'squared'.
    train_loss : list of float
        Training MSE after initialization and after every round.
    """

    def __init__(self, initial, trees, learning_rate, max_depth, n_features, train_loss=None):
        self.initial = float(initial)
        self.trees = list(trees)
        self.learning_rate = float(learning_rate)
        self.max_depth = int(max_depth)
        self.n_features = int(n_features)
        self.loss = 'squared'
        self.train_loss = list(train_loss or [])

    @property
    def n_rounds(self):
        return len(self.trees)

    def predict(self, X, clamp=True):
        """Predict a batch; X has shape (n, n_features)."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ContractViolation(
                f"Expected inputs with {self.n_features} features, got shape {X.shape}."
            )

        prediction = np.full(len(X), self.initial)
        for tree in self.trees:
            prediction += self.learning_rate * tree.predict(X)

        if clamp:
            prediction = np.maximum(prediction, 0.0)

        return prediction

    def to_dict(self):
        return {
            'format': GBT_FORMAT,
            'version': GBT_VERSION,
            'loss': self.loss,
            'initial': self.initial,
            'learning_rate': self.learning_rate,
            'max_depth': self.max_depth,
            'n_features': self.n_features,
            'trees': [tree.to_dict() for tree in self.trees],
        }

    @classmethod
    def from_dict(cls, data):
        if data.get('format') != GBT_FORMAT or data.get('version') != GBT_VERSION:
            raise ConfigurationError(
                f"Unsupported ensemble format {data.get('format')!r} "
                f"version {data.get('version')!r}."
            )
        return cls(
            data['initial'],
            [RegressionTree.from_dict(tree) for tree in data['trees']],
            data['learning_rate'],
            data['max_depth'],
            data['n_features'],
        )

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __repr__(self):
        return (
            f'GBTEnsemble(n_rounds={self.n_rounds}, max_depth={self.max_depth}, '
            f'learning_rate={self.learning_rate})'
        )


@log.log_time('learners')
def gbt_train(X, y, rounds=500, max_depth=5, learning_rate=0.01, min_leaf=1):
    """Fit squared-loss gradient boosted regression trees.

    Every round fits an exact greedy regression tree to the current
    residuals; leaves hold the mean residual. Training stops early once a
    round cannot split its root.

    Parameters
    ----------
    X : array_like
        Inputs, shape (n, n_features).
    y : array_like
        Targets, shape (n,).
    rounds : int, optional
    max_depth : int, optional
    learning_rate : float, optional
        Shrinkage in (0, 1].
    min_leaf : int, optional
        Minimum number of rows per leaf.

    Returns
    -------
    GBTEnsemble
    """
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y) or len(y) == 0:
        raise ContractViolation(
            f"Expected |X| = |y| >= 1, got X {X.shape} and y {y.shape}."
        )
    if not 0 < learning_rate <= 1:
        raise ConfigurationError(f"learning_rate must be in (0, 1], got {learning_rate}.")

    initial = y.mean()
    prediction = np.full(len(y), initial)
    order = np.ascontiguousarray(np.argsort(X, axis=0, kind='stable').T)

    tol = 1e-12 * max(1.0, float(np.sum((y - initial) ** 2)))
    trees = []
    train_loss = [float(np.mean((y - prediction) ** 2))]

    for round_ in range(rounds):
        residual = y - prediction
        tree = _grow_tree(X, order, residual, max_depth, min_leaf, tol)
        if tree.is_stump:
            logger.info(f'No split with positive gain in round {round_}; stopping early.')
            break

        trees.append(tree)
        prediction = prediction + learning_rate * tree.predict(X)
        train_loss.append(float(np.mean((y - prediction) ** 2)))

    logger.info(
        f'Trained GBT with {len(trees)} rounds (depth {max_depth}, '
        f'learning rate {learning_rate}) on {len(y)} rows.'
    )

    return GBTEnsemble(initial, trees, learning_rate, max_depth, X.shape[1], train_loss)


def gbt_predict(ensemble, x):
    """Predict the income of one input vector.

    Parameters
    ----------
    ensemble : GBTEnsemble
    x : array_like
        Input of length ``ensemble.n_features``.

    Returns
    -------
    Money
        Non-negative prediction.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) != ensemble.n_features:
        raise ContractViolation(
            f"Expected {ensemble.n_features} features, got shape {x.shape}."
        )

    return Money.from_dollars(round(float(ensemble.predict(x[None, :])[0]), 2))
