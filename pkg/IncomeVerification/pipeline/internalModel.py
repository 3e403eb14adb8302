import json
from pathlib import Path

import numpy as np

from IncomeVerification import log
from IncomeVerification.IncomeVerificationError import (
    ConfigurationError, ContractViolation
)
from IncomeVerification.dataStructure import STATE_CODES
from IncomeVerification.core.identity import redact
from IncomeVerification.core.money import to_dollars
from IncomeVerification.core.rng import derive_seed
from IncomeVerification.retrieval.query import tokenize
from IncomeVerification.learners import (
    BowFeaturizer, BOW_DIM, BOW_GROUPS, Embeddings, FFNParams, GBTEnsemble, LSTMParams,
    train_word_vectors, ffn_train, ffn_predict, gbt_train, lstm_regress_train,
)
from .config import INTERNAL_VARIANTS, RunConfig


__all__ = [
    'STATE_DIM', 'state_one_hot', 'wv_features', 'InternalModel', 'train_internal',
    'train_bow_ablation',
]


logger = log.get_logger('pipeline')

STATE_DIM = 50
"""int: Width of the state one-hot block (the 50 states)."""

MODEL_FORMAT = 'internal-model'
MODEL_VERSION = 1


def state_one_hot(state):
    """One-hot vector of a state code; DC, territories and None are all zero."""
    vector = np.zeros(STATE_DIM)
    if state in STATE_CODES[:STATE_DIM]:
        vector[STATE_CODES.index(state)] = 1.0
    return vector


def wv_features(redacted, title_embeddings, employer_embeddings):
    """Mean title vector, mean employer vector and state one-hot.

    Parameters
    ----------
    redacted : list of RedactedIdentity
    title_embeddings, employer_embeddings : Embeddings

    Returns
    -------
    np.ndarray
        Shape (n, title dim + employer dim + 50); 650 columns at the default
        dimension of 300.
    """
    dim = title_embeddings.dim + employer_embeddings.dim + STATE_DIM
    if len(redacted) == 0:
        return np.zeros((0, dim))

    return np.vstack([
        np.concatenate([
            title_embeddings.mean_vector(r.job_title),
            employer_embeddings.mean_vector(r.employer),
            state_one_hot(r.state),
        ])
        for r in redacted
    ])


class InternalModel():
    """Income model over the redacted input identity only.

    Parameters
    ----------
    variant : str
        One of ``INTERNAL_VARIANTS``.
    regressor : GBTEnsemble or FFNParams
    featurizer : BowFeaturizer, optional
        Bag-of-words featurizer (``bow_gbt``).
    title_embeddings, employer_embeddings : Embeddings, optional
        Word vectors (word vector variants).
    lstm : LSTMParams, optional
        Regressor that tuned the title vectors (``tuned_wv_nn``).
    columns : np.ndarray, optional
        Feature columns the regressor sees; all if not set.
    """

    def __init__(
            self, variant, regressor, featurizer=None,
            title_embeddings=None, employer_embeddings=None, lstm=None,
            columns=None):
        if variant not in INTERNAL_VARIANTS:
            raise ConfigurationError(
                f"Unknown internal variant {variant!r}; expected one of "
                f"{INTERNAL_VARIANTS}."
            )
        self.variant = variant
        self.regressor = regressor
        self.featurizer = featurizer
        self.title_embeddings = title_embeddings
        self.employer_embeddings = employer_embeddings
        self.lstm = lstm
        self.columns = None if columns is None else np.asarray(columns, dtype=int)

    @property
    def input_dim(self):
        """int: Width of the full feature vector."""
        if self.variant == 'bow_gbt':
            return BOW_DIM
        return self.title_embeddings.dim + self.employer_embeddings.dim + STATE_DIM

    def features(self, identities):
        """Feature matrix of identities (redacted before featurization)."""
        redacted = [redact(identity) for identity in identities]
        if self.variant == 'bow_gbt':
            return self.featurizer.transform_many(redacted)
        return wv_features(redacted, self.title_embeddings, self.employer_embeddings)

    def predict(self, identities):
        """Predicted incomes in dollars, one per identity, never negative."""
        X = self.features(identities)
        if self.columns is not None:
            X = X[:, self.columns]
        if len(X) == 0:
            return np.zeros(0)
        if isinstance(self.regressor, GBTEnsemble):
            return self.regressor.predict(X)
        return ffn_predict(self.regressor, X)

    def save(self, directory):
        """Write the model as JSON artifacts into ``directory``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)

        files = {'regressor': 'regressor.json'}
        self.regressor.save(directory / files['regressor'])
        if self.featurizer is not None:
            files['featurizer'] = 'bow.json'
            self.featurizer.save(directory / files['featurizer'])
        if self.title_embeddings is not None:
            files['title_embeddings'] = 'title_embeddings.json'
            self.title_embeddings.save(directory / files['title_embeddings'])
        if self.employer_embeddings is not None:
            files['employer_embeddings'] = 'employer_embeddings.json'
            self.employer_embeddings.save(directory / files['employer_embeddings'])
        if self.lstm is not None:
            files['lstm'] = 'lstm.json'
            self.lstm.save(directory / files['lstm'])

        header = {
            'format': MODEL_FORMAT,
            'version': MODEL_VERSION,
            'variant': self.variant,
            'regressor': 'gbt' if isinstance(self.regressor, GBTEnsemble) else 'ffn',
            'columns': None if self.columns is None else self.columns.tolist(),
            'files': files,
        }
        (directory / 'model.json').write_text(
            json.dumps(header, indent=2, sort_keys=True)
        )

    @classmethod
    def load(cls, directory):
        directory = Path(directory)
        header = json.loads((directory / 'model.json').read_text())
        if header.get('format') != MODEL_FORMAT \
                or header.get('version') != MODEL_VERSION:
            raise ConfigurationError(
                f"Unsupported model format {header.get('format')!r} "
                f"version {header.get('version')!r} in {directory}."
            )
        files = header['files']

        def load(key, loader):
            return loader.load(directory / files[key]) if key in files else None

        regressor_type = GBTEnsemble if header['regressor'] == 'gbt' else FFNParams
        return cls(
            header['variant'],
            load('regressor', regressor_type),
            featurizer=load('featurizer', BowFeaturizer),
            title_embeddings=load('title_embeddings', Embeddings),
            employer_embeddings=load('employer_embeddings', Embeddings),
            lstm=load('lstm', LSTMParams),
            columns=header.get('columns'),
        )

    def __repr__(self):
        return f'InternalModel({self.variant!r}, input_dim={self.input_dim})'


def _train_embeddings(texts, config, seed, tag):
    wv = config.word_vectors
    return train_word_vectors(
        texts, dim=wv.dim, epochs=wv.epochs, negatives=wv.negatives,
        window=wv.window, seed=derive_seed(seed, tag), learning_rate=wv.learning_rate,
        min_count=wv.min_count,
    )


def _tune_title_embeddings(embeddings, titles, incomes, config, seed):
    sequences = [embeddings.indices(tokenize(title)) for title in titles]
    lstm = config.lstm
    return lstm_regress_train(
        sequences, embeddings, incomes,
        epochs=lstm.epochs, learning_rate=lstm.learning_rate, dropout=lstm.dropout,
        hidden=lstm.hidden, dense=lstm.dense, batch_size=lstm.batch_size,
        max_len=lstm.max_len, seed=derive_seed(seed, 'lstm'),
    )


@log.log_time('pipeline')
def train_internal(train_set, variant, config=None, seed=0, external_corpus=None):
    """Train an internal model variant.

    Parameters
    ----------
    train_set : list of LabeledExample
    variant : {'bow_gbt', 'mean_wv_nn', 'external_wv_nn', 'tuned_wv_nn'}
        ``bow_gbt``: 402 bag-of-words features and gradient boosting.
        ``mean_wv_nn``: mean title and employer vectors trained on the input
        data plus the state one-hot, feed-forward network.
        ``external_wv_nn``: as before, vectors trained on input and external
        texts.
        ``tuned_wv_nn``: as before, with title vectors tuned by an LSTM
        income regressor on the external data and a smaller network.
    config : RunConfig, optional
    seed : int, optional
    external_corpus : pandas.DataFrame, optional
        Columns job_title, employer, stated_income. Required by the
        external and tuned variants.

    Returns
    -------
    InternalModel

    Raises
    ------
    ConfigurationError
        If the variant is unknown or needs an external corpus that is missing.
    ContractViolation
        If ``train_set`` is empty.
    """
    if variant not in INTERNAL_VARIANTS:
        raise ConfigurationError(
            f"Unknown internal variant {variant!r}; expected one of "
            f"{INTERNAL_VARIANTS}."
        )
    if len(train_set) == 0:
        raise ContractViolation("Cannot train an internal model on no examples.")
    if config is None:
        config = RunConfig()

    identities = [example.identity for example in train_set]
    redacted = [redact(identity) for identity in identities]
    y = to_dollars([example.true_income for example in train_set])

    if variant == 'bow_gbt':
        featurizer = BowFeaturizer.fit(redacted)
        X = featurizer.transform_many(redacted)
        regressor = gbt_train(X, y, **config.gbt.kwargs())
        model = InternalModel(variant, regressor, featurizer=featurizer)
        logger.info(f'Trained {variant} on {len(y)} examples.')
        return model

    titles = [r.job_title for r in redacted]
    employers = [r.employer for r in redacted]
    lstm = None
    if variant == 'mean_wv_nn':
        title_embeddings = _train_embeddings(titles, config, seed, 'title-vectors')
        employer_embeddings = _train_embeddings(
            employers, config, seed, 'employer-vectors'
        )
    else:
        if external_corpus is None or len(external_corpus) == 0:
            raise ConfigurationError(
                f"Variant {variant!r} needs an external corpus (external_corpus)."
            )
        external_titles = [str(t) for t in external_corpus['job_title']]
        external_employers = [str(e) for e in external_corpus['employer']]
        title_embeddings = _train_embeddings(
            titles + external_titles, config, seed, 'title-vectors'
        )
        employer_embeddings = _train_embeddings(
            employers + external_employers, config, seed, 'employer-vectors'
        )
        if variant == 'tuned_wv_nn':
            lstm, title_embeddings = _tune_title_embeddings(
                title_embeddings, external_titles,
                np.asarray(external_corpus['stated_income'], dtype=float),
                config, seed,
            )

    X = wv_features(redacted, title_embeddings, employer_embeddings)
    hidden = config.ffn.tuned_hidden if variant == 'tuned_wv_nn' else config.ffn.hidden
    regressor = ffn_train(
        X, y, hidden=tuple(hidden), epochs=config.ffn.epochs,
        learning_rate=config.ffn.learning_rate, batch_size=config.ffn.batch_size,
        seed=derive_seed(seed, 'ffn'), activation=config.ffn.activation,
    )

    logger.info(f'Trained {variant} on {len(y)} examples, input dim {X.shape[1]}.')

    return InternalModel(
        variant, regressor,
        title_embeddings=title_embeddings, employer_embeddings=employer_embeddings,
        lstm=lstm,
    )


def train_bow_ablation(train_set, drop_group, config=None):
    """Train ``bow_gbt`` without one input feature group.

    Parameters
    ----------
    train_set : list of LabeledExample
    drop_group : {'job_title', 'employer', 'state', 'city'} or None

    Returns
    -------
    InternalModel
    """
    if config is None:
        config = RunConfig()
    if drop_group is not None and drop_group not in BOW_GROUPS:
        raise ConfigurationError(
            f"Unknown feature group {drop_group!r}; "
            f"expected one of {sorted(BOW_GROUPS)}."
        )

    redacted = [redact(example.identity) for example in train_set]
    y = to_dollars([example.true_income for example in train_set])
    featurizer = BowFeaturizer.fit(redacted)
    dropped = set(BOW_GROUPS[drop_group]) if drop_group else set()
    columns = np.array([c for c in range(BOW_DIM) if c not in dropped], dtype=int)

    X = featurizer.transform_many(redacted)[:, columns]
    regressor = gbt_train(X, y, **config.gbt.kwargs())

    return InternalModel('bow_gbt', regressor, featurizer=featurizer, columns=columns)
