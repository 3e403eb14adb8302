from collections import Counter
import json
from pathlib import Path

import numba
import numpy as np

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import ConfigurationError, TrainingError
from IncomeVerification.core.rng import make_rng
from IncomeVerification.dataStructure import List, Matrix, Structure
from IncomeVerification.retrieval.query import tokenize


__all__ = ['Embeddings', 'train_word_vectors', 'build_vocabulary']


logger = log.get_logger('learners')

EMBEDDINGS_FORMAT = 'embeddings'
EMBEDDINGS_VERSION = 1


class Embeddings(Structure):
    """Token vectors.

    Unknown tokens map to the mean of all rows.

    Parameters
    ----------
    vocabulary : list of str
        Token of every matrix row.
    matrix : np.ndarray
        Shape (len(vocabulary), dim).
    """

    vocabulary = List()
    matrix = Matrix()

    def __init__(self, vocabulary, matrix):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != len(vocabulary):
            raise ConfigurationError(
                f"Embedding matrix {matrix.shape} does not fit "
                f"{len(vocabulary)} tokens."
            )
        super().__init__(vocabulary=list(vocabulary), matrix=matrix)
        self.index = {token: i for i, token in enumerate(self.vocabulary)}

    @property
    def dim(self):
        return self.matrix.shape[1]

    @property
    def mean(self):
        """np.ndarray: Mean vector, used for unknown tokens."""
        return self.matrix.mean(axis=0)

    def __len__(self):
        return len(self.vocabulary)

    def __contains__(self, token):
        return token in self.index

    def vector(self, token):
        i = self.index.get(token)
        return self.mean if i is None else self.matrix[i]

    def indices(self, tokens):
        """Row indices of the known tokens, in order."""
        return [self.index[t] for t in tokens if t in self.index]

    def mean_vector(self, text):
        """Average the vectors of the tokens of ``text``.

        Parameters
        ----------
        text : str or list of str
            Raw text (tokenized here) or tokens.

        Returns
        -------
        np.ndarray
            Mean vector; the table mean if ``text`` has no tokens.
        """
        tokens = tokenize(text) if isinstance(text, str) else list(text)
        if not tokens:
            return self.mean
        return np.mean([self.vector(t) for t in tokens], axis=0)

    def copy(self):
        return Embeddings(self.vocabulary, self.matrix.copy())

    def to_dict(self):
        return {
            'format': EMBEDDINGS_FORMAT,
            'version': EMBEDDINGS_VERSION,
            'dim': self.dim,
            'vocabulary': self.vocabulary,
            'matrix': self.matrix.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        if data.get('format') != EMBEDDINGS_FORMAT \
                or data.get('version') != EMBEDDINGS_VERSION:
            raise ConfigurationError(
                f"Unsupported embeddings format {data.get('format')!r} "
                f"version {data.get('version')!r}."
            )
        matrix = np.array(data['matrix'], dtype=float).reshape(-1, data['dim'])
        return cls(data['vocabulary'], matrix)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def __repr__(self):
        return f'Embeddings(n_tokens={len(self)}, dim={self.dim})'


def build_vocabulary(sentences, min_count=1):
    """Count tokens and order them by descending count, then alphabetically.

    Returns
    -------
    vocabulary : list of str
    counts : np.ndarray
    """
    counter = Counter(token for sentence in sentences for token in sentence)
    items = sorted(
        ((t, c) for t, c in counter.items() if c >= min_count),
        key=lambda item: (-item[1], item[0])
    )
    vocabulary = [t for t, _ in items]
    counts = np.array([c for _, c in items], dtype=float)

    return vocabulary, counts


@numba.njit
def _count_pairs(tokens, starts, window):
    n_pairs = 0
    for s in range(len(starts) - 1):
        begin, end = starts[s], starts[s + 1]
        for i in range(begin, end):
            lo = max(begin, i - window)
            hi = min(end, i + window + 1)
            n_pairs += hi - lo - 1
    return n_pairs


@numba.njit
def _sgns_epoch(tokens, starts, window, W_in, W_out, negatives, lr0, done, total):
    """One skip-gram negative-sampling pass, updating the matrices in place.

    ``negatives[p]`` holds the noise words of pair ``p``; the learning rate
    decays linearly with the number of processed pairs ``done`` out of
    ``total``.
    """
    dim = W_in.shape[1]
    grad_in = np.zeros(dim)
    p = 0
    for s in range(len(starts) - 1):
        begin, end = starts[s], starts[s + 1]
        for i in range(begin, end):
            center = tokens[i]
            lo = max(begin, i - window)
            hi = min(end, i + window + 1)
            for j in range(lo, hi):
                if j == i:
                    continue
                context = tokens[j]
                lr = lr0 * max(1e-4, 1.0 - (done + p) / total)

                grad_in[:] = 0.0
                for k in range(-1, negatives.shape[1]):
                    if k < 0:
                        target = context
                        label = 1.0
                    else:
                        target = negatives[p, k]
                        if target == context:
                            continue
                        label = 0.0

                    f = 0.0
                    for d in range(dim):
                        f += W_in[center, d] * W_out[target, d]
                    f = min(max(f, -6.0), 6.0)
                    g = (label - 1.0 / (1.0 + np.exp(-f))) * lr

                    for d in range(dim):
                        grad_in[d] += g * W_out[target, d]
                        W_out[target, d] += g * W_in[center, d]

                for d in range(dim):
                    W_in[center, d] += grad_in[d]
                p += 1


@log.log_time('learners')
def train_word_vectors(
        sentences, dim=300, epochs=15, negatives=5, window=2, seed=42,
        learning_rate=0.025, min_count=1):
    """Train skip-gram word vectors with negative sampling.

    Noise words are drawn from the unigram distribution raised to 0.75.
    Training is single-threaded and deterministic for a given seed.

    Parameters
    ----------
    sentences : list
        Texts (tokenized here) or token lists.
    dim : int, optional
    epochs : int, optional
    negatives : int, optional
        Noise words per (center, context) pair.
    window : int, optional
        Context words on each side.
    seed : int, optional
    learning_rate : float, optional
        Initial learning rate, decayed linearly to nearly 0.
    min_count : int, optional

    Returns
    -------
    Embeddings

    Raises
    ------
    TrainingError
        If the corpus has no token.
    """
    sentences = [tokenize(s) if isinstance(s, str) else list(s) for s in sentences]
    vocabulary, counts = build_vocabulary(sentences, min_count)
    if not vocabulary:
        raise TrainingError("Cannot train word vectors on an empty vocabulary.")

    index = {token: i for i, token in enumerate(vocabulary)}
    encoded = [[index[t] for t in s if t in index] for s in sentences]
    tokens = np.array([i for s in encoded for i in s], dtype=np.int64)
    starts = np.cumsum([0] + [len(s) for s in encoded]).astype(np.int64)

    rng = make_rng(seed)
    W_in = (rng.random((len(vocabulary), dim)) - 0.5) / dim
    W_out = np.zeros((len(vocabulary), dim))

    noise = counts ** 0.75
    noise /= noise.sum()

    n_pairs = _count_pairs(tokens, starts, window)
    total = max(1, n_pairs * epochs)
    for epoch in range(epochs):
        noise_words = rng.choice(len(vocabulary), size=(n_pairs, negatives), p=noise)
        _sgns_epoch(
            tokens, starts, window, W_in, W_out,
            noise_words.astype(np.int64), learning_rate, epoch * n_pairs, total
        )

    logger.info(
        f'Trained {dim}-dimensional word vectors for {len(vocabulary)} tokens '
        f'on {n_pairs} pairs x {epochs} epochs.'
    )

    return Embeddings(vocabulary, W_in)
