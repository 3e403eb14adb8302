import json
import operator
from pathlib import Path

from IncomeVerification.IncomeVerificationError import ConfigurationError
from IncomeVerification.dataStructure import (
    Structure, Typed, Bool, String, Switch, Tuple,
    RangedInteger, RangedFloat, UnsignedInteger, Ratio, UnsignedFloat,
)


__all__ = [
    'VARIANTS', 'INTERNAL_VARIANTS', 'MODEL_NAMES',
    'GBTConfig', 'FFNConfig', 'LSTMConfig', 'WordVectorConfig',
    'MatcherConfig', 'RetrievalConfig', 'RunConfig',
]


INTERNAL_VARIANTS = ['bow_gbt', 'mean_wv_nn', 'external_wv_nn', 'tuned_wv_nn']
VARIANTS = INTERNAL_VARIANTS + ['external_gbt', 'combined']

MODEL_NAMES = {
    'bow_gbt': 'BOW + GBT',
    'mean_wv_nn': 'Mean WV + NN',
    'external_wv_nn': 'External Mean WV + NN',
    'tuned_wv_nn': 'Tuned Mean WV + NN',
    'external_gbt': 'External data + GBT',
    'combined': 'Combined + GBT',
}
"""dict: Report name of every model variant."""

PATH_FIELDS = [
    'train', 'test', 'corpus', 'match_labels', 'external_corpus',
    'alias_table', 'industry_table', 'patterns', 'path_specs',
    'matcher', 'index',
]


class SubConfig(Typed):
    """Nested configuration; dictionaries are cast to ``ty``."""

    def cast_value(self, value):
        if isinstance(value, dict):
            value = self.ty(**value)
        return value


class GBTConfig(Structure):
    """Gradient boosting hyperparameters.

    Defaults are those of the bag-of-words baseline (depth 5, learning
    rate 0.01).
    """

    rounds = UnsignedInteger(default=500)
    max_depth = RangedInteger(lb=1, default=5)
    learning_rate = RangedFloat(lb=0, ub=1, default=0.01)
    min_leaf = RangedInteger(lb=1, default=1)

    _parameters = ['rounds', 'max_depth', 'learning_rate', 'min_leaf']

    def kwargs(self):
        return self.to_dict()


class FFNConfig(Structure):
    """Feed-forward network hyperparameters.

    Attributes
    ----------
    hidden : tuple of int
        Hidden layers of the mean word vector variants.
    tuned_hidden : tuple of int
        Hidden layers of the tuned word vector variant.
    """

    hidden = Tuple(default=(300, 100))
    tuned_hidden = Tuple(default=(200,))
    epochs = RangedInteger(lb=1, default=100)
    learning_rate = UnsignedFloat(default=0.01)
    batch_size = RangedInteger(lb=1, default=32)
    activation = Switch(valid=['relu', 'tanh', 'linear'], default='relu')

    _parameters = [
        'hidden', 'tuned_hidden', 'epochs', 'learning_rate', 'batch_size',
        'activation',
    ]


class LSTMConfig(Structure):
    """LSTM regressor used to tune job title vectors."""

    epochs = RangedInteger(lb=1, default=10)
    learning_rate = UnsignedFloat(default=0.01)
    dropout = RangedFloat(lb=0, ub=1, ub_op=operator.ge, default=0.5)
    hidden = RangedInteger(lb=1, default=128)
    dense = RangedInteger(lb=1, default=200)
    batch_size = RangedInteger(lb=1, default=32)
    max_len = RangedInteger(lb=1, default=16)

    _parameters = [
        'epochs', 'learning_rate', 'dropout', 'hidden', 'dense', 'batch_size',
        'max_len',
    ]


class WordVectorConfig(Structure):
    """Skip-gram word vector hyperparameters."""

    dim = RangedInteger(lb=1, default=300)
    epochs = RangedInteger(lb=1, default=15)
    negatives = RangedInteger(lb=1, default=5)
    window = RangedInteger(lb=1, default=2)
    learning_rate = UnsignedFloat(default=0.025)
    min_count = RangedInteger(lb=1, default=1)

    _parameters = ['dim', 'epochs', 'negatives', 'window', 'learning_rate', 'min_count']


class MatcherConfig(Structure):
    """Record matcher training and bucketing.

    Attributes
    ----------
    address_buckets : tuple of float
        (medium, high) score thresholds of the confidence buckets.
    initial_factor, conflict_factor : float
        Middle name factors of the name score.
    """

    max_depth = RangedInteger(lb=1, default=4)
    min_leaf = RangedInteger(lb=1, default=5)
    address_buckets = Tuple(default=(0.5, 0.8))
    initial_factor = Ratio(default=0.9)
    conflict_factor = Ratio(default=0.7)
    holdout = RangedFloat(lb=0, ub=1, ub_op=operator.ge, default=0.2)

    _parameters = [
        'max_depth', 'min_leaf', 'address_buckets', 'initial_factor',
        'conflict_factor', 'holdout',
    ]

    @property
    def medium(self):
        return float(self.address_buckets[0])

    @property
    def high(self):
        return float(self.address_buckets[1])


class RetrievalConfig(Structure):
    """Candidate retrieval and source selection."""

    per_query_k = RangedInteger(lb=1, default=10)
    limit = RangedInteger(lb=1, default=50)
    top_k = RangedInteger(lb=1, ub=5, default=5)
    k1 = UnsignedFloat(default=1.2)
    b = Ratio(default=0.75)

    _parameters = ['per_query_k', 'limit', 'top_k', 'k1', 'b']


class RunConfig(Structure):
    """Configuration of a pipeline run.

    Every path, model variant, hyperparameter group, threshold and seed of a
    run. Loaded from JSON, overridden by command line flags and recorded in
    the run manifest.

    Attributes
    ----------
    train, test : str, optional
        Dataset CSV files.
    corpus : str, optional
        Corpus directory or JSON Lines file.
    match_labels : str, optional
        Labeled identity/record pairs for matcher training.
    external_corpus : str, optional
        CSV with job_title, employer and stated_income of an outside
        population; word vectors of the external variants train on it.
    alias_table, industry_table, patterns, path_specs : str, optional
        Reference tables; shipped defaults if unset.
    matcher, index : str, optional
        Trained matcher tree and corpus index artifacts.
    out_dir : str
    variant : str
        One of ``VARIANTS``.
    tau : float
        Relative tolerance of the verification decision.
    k : int
        Cross-validation folds.
    seed : int
    threads : int
        Worker processes; 1 keeps runs bit-reproducible.
    out_of_fold : bool
        If True, the stacking model sees out-of-fold internal predictions.
    stacking_folds : int
    internal_variant : str
        Internal model stacked by the combined model.
    """

    train = String(is_optional=True)
    test = String(is_optional=True)
    corpus = String(is_optional=True)
    match_labels = String(is_optional=True)
    external_corpus = String(is_optional=True)
    alias_table = String(is_optional=True)
    industry_table = String(is_optional=True)
    patterns = String(is_optional=True)
    path_specs = String(is_optional=True)
    matcher = String(is_optional=True)
    index = String(is_optional=True)
    out_dir = String(default='out')

    variant = Switch(valid=VARIANTS, default='combined')
    internal_variant = Switch(valid=INTERNAL_VARIANTS, default='tuned_wv_nn')
    tau = UnsignedFloat(default=0.15)
    k = RangedInteger(lb=2, default=5)
    seed = UnsignedInteger(default=42)
    threads = RangedInteger(lb=1, default=1)
    out_of_fold = Bool(default=True)
    stacking_folds = RangedInteger(lb=2, default=5)
    use_diskcache = Bool(default=False)

    gbt = SubConfig(ty=GBTConfig, default=GBTConfig())
    external_gbt = SubConfig(
        ty=GBTConfig, default=GBTConfig(rounds=1500, learning_rate=0.003)
    )
    stacking_gbt = SubConfig(ty=GBTConfig, default=GBTConfig())
    ffn = SubConfig(ty=FFNConfig, default=FFNConfig())
    lstm = SubConfig(ty=LSTMConfig, default=LSTMConfig())
    word_vectors = SubConfig(ty=WordVectorConfig, default=WordVectorConfig())
    matcher_config = SubConfig(ty=MatcherConfig, default=MatcherConfig())
    retrieval = SubConfig(ty=RetrievalConfig, default=RetrievalConfig())

    _parameters = PATH_FIELDS + [
        'out_dir', 'variant', 'internal_variant', 'tau', 'k', 'seed', 'threads',
        'out_of_fold', 'stacking_folds', 'use_diskcache',
        'gbt', 'external_gbt', 'stacking_gbt', 'ffn', 'lstm', 'word_vectors',
        'matcher_config', 'retrieval',
    ]

    @classmethod
    def from_dict(cls, data):
        unknown = sorted(set(data) - set(cls._parameters))
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys {unknown}.")
        try:
            return cls(**data)
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid configuration: {e}") from e

    @classmethod
    def from_json(cls, path):
        """Load a configuration file; relative paths resolve against it.

        Raises
        ------
        ConfigurationError
            If the file cannot be read or holds invalid values.
        """
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
        except (OSError, ValueError) as e:
            raise ConfigurationError(f"Cannot read configuration {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"Configuration {path} is not a JSON object.")

        for field in PATH_FIELDS:
            value = data.get(field)
            if isinstance(value, str) and not Path(value).is_absolute():
                data[field] = str(path.parent / value)

        return cls.from_dict(data)

    def update(self, **overrides):
        """Apply non-None overrides (command line flags)."""
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in self._parameters:
                raise ConfigurationError(f"Unknown configuration key {key!r}.")
            try:
                setattr(self, key, value)
            except (TypeError, ValueError) as e:
                raise ConfigurationError(f"Invalid value for {key}: {e}") from e
        return self

    def check_paths(self, required=()):
        """Check that referenced paths exist.

        Parameters
        ----------
        required : iterable of str, optional
            Path fields that must be set.

        Raises
        ------
        ConfigurationError
            Listing every unset required or missing path.
        """
        problems = []
        for field in required:
            if getattr(self, field) is None:
                problems.append(f'{field} is not set')
        for field in PATH_FIELDS:
            value = getattr(self, field)
            if value is not None and not Path(value).exists():
                problems.append(f'{field}: {value} does not exist')

        if problems:
            raise ConfigurationError('Invalid paths: ' + '; '.join(problems))

    def input_paths(self):
        """dict: Set path fields."""
        return {
            field: getattr(self, field)
            for field in PATH_FIELDS if getattr(self, field) is not None
        }

    def __repr__(self):
        return f'RunConfig(variant={self.variant!r}, seed={self.seed})'
